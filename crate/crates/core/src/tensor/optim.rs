use super::{mismatch, KernelError, Tensor};

/// SGD with classical momentum: `v ← μ·v + g; θ ← θ − lr·v`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sgd {
    pub lr: f64,
    pub momentum: f64,
    velocity: Vec<Tensor>,
}

impl Sgd {
    pub fn new(lr: f64, momentum: f64, params: &[Tensor]) -> Sgd {
        Sgd {
            lr,
            momentum,
            velocity: params.iter().map(|p| Tensor::zeros(p.shape())).collect(),
        }
    }

    pub fn velocity(&self) -> &[Tensor] {
        &self.velocity
    }

    pub fn step(&mut self, params: &mut [Tensor], grads: &[Tensor]) -> Result<(), KernelError> {
        if params.len() != self.velocity.len() || grads.len() != params.len() {
            return Err(mismatch(
                "sgd_step",
                format!("{} params, {} grads, {} velocities", params.len(), grads.len(), self.velocity.len()),
            ));
        }
        for (i, ((p, g), v)) in params.iter().zip(grads).zip(&self.velocity).enumerate() {
            if p.shape() != g.shape() || p.shape() != v.shape() {
                return Err(mismatch(
                    "sgd_step",
                    format!("param {i}: {:?} vs grad {:?} vs velocity {:?}", p.shape(), g.shape(), v.shape()),
                ));
            }
        }
        for ((p, g), v) in params.iter_mut().zip(grads).zip(&mut self.velocity) {
            for ((theta, &grad), vel) in p.data_mut().iter_mut().zip(g.data()).zip(v.data_mut()) {
                *vel = self.momentum * *vel + grad;
                *theta -= self.lr * *vel;
            }
        }
        Ok(())
    }
}
