//! Central finite-difference oracle for tape gradients.

use mrn_core::tensor::{KernelError, Tape, Tensor, Var};

pub const EPS: f64 = 1e-5;
/// Relative error is `|a − n| / max(|a|, |n|, FLOOR)`.
pub const FLOOR: f64 = 1e-6;

/// Fixed non-uniform weights that reduce any output to a scalar.
fn weights(n: usize) -> Tensor {
    Tensor::new(vec![n], (0..n).map(|k| (k as f64 * 0.7 + 0.3).cos()).collect()).unwrap()
}

fn scalarize(tape: &mut Tape, out: Var) -> Result<Var, KernelError> {
    let n = tape.value(out).numel();
    let flat = tape.reshape(out, &[n])?;
    let w = tape.constant(weights(n));
    let prod = tape.mul(flat, w)?;
    tape.sum(prod, 0)
}

fn eval<F>(inputs: &[Tensor], build: &F) -> f64
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var, KernelError>,
{
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.constant(t.clone())).collect();
    let out = build(&mut tape, &vars).expect("forward");
    let loss = scalarize(&mut tape, out).expect("scalarize");
    tape.value(loss).data()[0]
}

/// Largest relative error between analytic and central-difference
/// gradients over every element of every input.
pub fn max_relative_error<F>(inputs: &[Tensor], build: F) -> f64
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var, KernelError>,
{
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.param(t.clone())).collect();
    let out = build(&mut tape, &vars).expect("forward");
    let loss = scalarize(&mut tape, out).expect("scalarize");
    let grads = tape.backward(loss).expect("backward");
    let mut worst: f64 = 0.0;
    for (i, input) in inputs.iter().enumerate() {
        let analytic = grads.get(vars[i]).expect("gradient present");
        for k in 0..input.numel() {
            let mut plus = inputs.to_vec();
            plus[i].data_mut()[k] += EPS;
            let mut minus = inputs.to_vec();
            minus[i].data_mut()[k] -= EPS;
            let numeric = (eval(&plus, &build) - eval(&minus, &build)) / (2.0 * EPS);
            let a = analytic.data()[k];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(FLOOR);
            worst = worst.max(err);
        }
    }
    worst
}

/// Relative-error comparison of `analytic` against central differences of
/// an arbitrary scalar function of several tensors.
pub fn max_relative_error_of<F>(params: &[Tensor], analytic: &[Tensor], loss: F) -> (f64, String)
where
    F: Fn(&[Tensor]) -> f64,
{
    let mut worst = (0.0, String::new());
    for (i, p) in params.iter().enumerate() {
        for k in 0..p.numel() {
            let mut plus = params.to_vec();
            plus[i].data_mut()[k] += EPS;
            let mut minus = params.to_vec();
            minus[i].data_mut()[k] -= EPS;
            let numeric = (loss(&plus) - loss(&minus)) / (2.0 * EPS);
            let a = analytic[i].data()[k];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(FLOOR);
            if err > worst.0 {
                worst = (err, format!("param {i} element {k}: analytic {a:e}, numeric {numeric:e}"));
            }
        }
    }
    worst
}
