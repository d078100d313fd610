use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{broadcast_map, broadcast_shape, gemm, mismatch, split_axis, KernelError, Tensor};

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Clone, Copy, Debug)]
enum Binary {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug)]
enum Unary {
    Exp,
    Log,
    Relu,
    LeakyRelu(f64),
    Sigmoid,
}

#[derive(Clone, Copy, Debug)]
enum Reduce {
    Sum,
    Mean,
    Max,
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Binary(Binary, Var, Var),
    Unary(Unary, Var),
    Softmax(Var, usize),
    Concat(Vec<Var>, usize),
    Slice { x: Var, axis: usize, start: usize },
    Reshape(Var),
    /// `map[i]` is the source index of output element `i`.
    Permute(Var, Vec<usize>),
    Reduce { kind: Reduce, x: Var, axis: usize, argmax: Vec<usize> },
    Gather(Var, Vec<usize>),
    /// Mask entries are `0` or `1/(1−rate)`.
    Dropout(Var, Vec<f64>),
}

struct Node {
    value: Tensor,
    op: Op,
    requires_grad: bool,
}

/// Records primitives in execution order; one backward pass per tape.
pub struct Tape {
    nodes: Vec<Node>,
    finished: bool,
}

/// Gradients from one backward pass. Every `requires_grad` leaf has an
/// entry, zero when the loss does not depend on it.
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(Option::as_ref)
    }
}

fn check(op: &'static str, t: Tensor) -> Result<Tensor, KernelError> {
    if t.is_finite() {
        Ok(t)
    } else {
        Err(KernelError::Numeric { op })
    }
}

fn shaped(shape: Vec<usize>, data: Vec<f64>) -> Tensor {
    Tensor::new(shape, data).expect("kernel produced a consistent shape")
}

impl Default for Tape {
    fn default() -> Self {
        Tape::new()
    }
}

impl Tape {
    pub fn new() -> Tape {
        Tape {
            nodes: Vec::new(),
            finished: false,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    fn push(&mut self, value: Tensor, op: Op, requires_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            requires_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn rg(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// A trainable leaf.
    pub fn param(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf, true)
    }

    pub fn constant(&mut self, t: Tensor) -> Var {
        self.push(t, Op::Leaf, false)
    }

    fn record(&mut self, name: &'static str, value: Tensor, op: Op, inputs: &[Var]) -> Result<Var, KernelError> {
        let value = check(name, value)?;
        let rg = inputs.iter().any(|&v| self.rg(v));
        Ok(self.push(value, op, rg))
    }

    /// `[m,k]·[k,n]`, or batched `[b,m,k]·[b,k,n]`.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, KernelError> {
        let (sa, sb) = (self.shape(a).to_vec(), self.shape(b).to_vec());
        let (batch, m, k, n) = match (sa.as_slice(), sb.as_slice()) {
            (&[m, k], &[k2, n]) if k == k2 => (None, m, k, n),
            (&[b1, m, k], &[b2, k2, n]) if b1 == b2 && k == k2 => (Some(b1), m, k, n),
            _ => return Err(mismatch("matmul", format!("{sa:?} · {sb:?}"))),
        };
        let bs = batch.unwrap_or(1);
        let mut out = vec![0.0; bs * m * n];
        {
            let (av, bv) = (self.value(a).data(), self.value(b).data());
            for i in 0..bs {
                gemm(
                    m,
                    k,
                    n,
                    &av[i * m * k..],
                    false,
                    &bv[i * k * n..],
                    false,
                    &mut out[i * m * n..],
                    false,
                );
            }
        }
        let shape = match batch {
            Some(b) => vec![b, m, n],
            None => vec![m, n],
        };
        self.record("matmul", shaped(shape, out), Op::MatMul(a, b), &[a, b])
    }

    fn binary(&mut self, kind: Binary, a: Var, b: Var) -> Result<Var, KernelError> {
        let name = match kind {
            Binary::Add => "add",
            Binary::Sub => "sub",
            Binary::Mul => "mul",
            Binary::Div => "div",
        };
        let (sa, sb) = (self.shape(a).to_vec(), self.shape(b).to_vec());
        let out_shape = broadcast_shape(&sa, &sb).ok_or_else(|| mismatch(name, format!("{sa:?} vs {sb:?}")))?;
        let f = |x: f64, y: f64| match kind {
            Binary::Add => x + y,
            Binary::Sub => x - y,
            Binary::Mul => x * y,
            Binary::Div => x / y,
        };
        let (av, bv) = (self.value(a).data(), self.value(b).data());
        let data: Vec<f64> = if sa == sb {
            av.iter().zip(bv).map(|(&x, &y)| f(x, y)).collect()
        } else {
            let ma = broadcast_map(&out_shape, &sa);
            let mb = broadcast_map(&out_shape, &sb);
            ma.iter().zip(&mb).map(|(&i, &j)| f(av[i], bv[j])).collect()
        };
        self.record(name, shaped(out_shape, data), Op::Binary(kind, a, b), &[a, b])
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, KernelError> {
        self.binary(Binary::Add, a, b)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, KernelError> {
        self.binary(Binary::Sub, a, b)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, KernelError> {
        self.binary(Binary::Mul, a, b)
    }

    pub fn div(&mut self, a: Var, b: Var) -> Result<Var, KernelError> {
        self.binary(Binary::Div, a, b)
    }

    /// `x · c` through a broadcast constant.
    pub fn scale(&mut self, x: Var, c: f64) -> Result<Var, KernelError> {
        let c = self.constant(Tensor::scalar(c));
        self.mul(x, c)
    }

    /// `x + c` through a broadcast constant.
    pub fn shift(&mut self, x: Var, c: f64) -> Result<Var, KernelError> {
        let c = self.constant(Tensor::scalar(c));
        self.add(x, c)
    }

    fn unary(&mut self, kind: Unary, x: Var) -> Result<Var, KernelError> {
        let (name, f): (&'static str, Box<dyn Fn(f64) -> f64>) = match kind {
            Unary::Exp => ("exp", Box::new(f64::exp)),
            Unary::Log => ("log", Box::new(f64::ln)),
            Unary::Relu => ("relu", Box::new(|v: f64| v.max(0.0))),
            Unary::LeakyRelu(s) => ("leaky_relu", Box::new(move |v: f64| if v > 0.0 { v } else { s * v })),
            Unary::Sigmoid => ("sigmoid", Box::new(sigmoid)),
        };
        let t = self.value(x);
        let data = t.data().iter().map(|&v| f(v)).collect();
        self.record(name, shaped(t.shape().to_vec(), data), Op::Unary(kind, x), &[x])
    }

    pub fn exp(&mut self, x: Var) -> Result<Var, KernelError> {
        self.unary(Unary::Exp, x)
    }

    pub fn log(&mut self, x: Var) -> Result<Var, KernelError> {
        self.unary(Unary::Log, x)
    }

    pub fn relu(&mut self, x: Var) -> Result<Var, KernelError> {
        self.unary(Unary::Relu, x)
    }

    pub fn leaky_relu(&mut self, x: Var, slope: f64) -> Result<Var, KernelError> {
        self.unary(Unary::LeakyRelu(slope), x)
    }

    pub fn sigmoid(&mut self, x: Var) -> Result<Var, KernelError> {
        self.unary(Unary::Sigmoid, x)
    }

    fn axis_ok(&self, op: &'static str, x: Var, axis: usize) -> Result<(), KernelError> {
        if axis < self.shape(x).len() {
            Ok(())
        } else {
            Err(mismatch(op, format!("axis {axis} on shape {:?}", self.shape(x))))
        }
    }

    pub fn softmax(&mut self, x: Var, axis: usize) -> Result<Var, KernelError> {
        self.axis_ok("softmax", x, axis)?;
        let t = self.value(x);
        let (outer, len, inner) = split_axis(t.shape(), axis);
        let src = t.data();
        let mut out = vec![0.0; src.len()];
        for o in 0..outer {
            for i in 0..inner {
                let at = |j: usize| o * len * inner + j * inner + i;
                let m = (0..len).map(|j| src[at(j)]).fold(f64::NEG_INFINITY, f64::max);
                let mut z = 0.0;
                for j in 0..len {
                    let e = (src[at(j)] - m).exp();
                    out[at(j)] = e;
                    z += e;
                }
                for j in 0..len {
                    out[at(j)] /= z;
                }
            }
        }
        let shape = t.shape().to_vec();
        self.record("softmax", shaped(shape, out), Op::Softmax(x, axis), &[x])
    }

    pub fn concat(&mut self, xs: &[Var], axis: usize) -> Result<Var, KernelError> {
        let first = xs.first().ok_or_else(|| mismatch("concat", "no inputs"))?;
        self.axis_ok("concat", *first, axis)?;
        let base = self.shape(*first).to_vec();
        let mut total = 0;
        for &x in xs {
            let s = self.shape(x);
            let same_rest = s.len() == base.len() && (0..s.len()).all(|d| d == axis || s[d] == base[d]);
            if !same_rest {
                return Err(mismatch("concat", format!("{s:?} vs {base:?} on axis {axis}")));
            }
            total += s[axis];
        }
        let mut shape = base.clone();
        shape[axis] = total;
        let (outer, _, inner) = split_axis(&shape, axis);
        let mut out = Vec::with_capacity(shape.iter().product());
        for o in 0..outer {
            for &x in xs {
                let len = self.shape(x)[axis];
                let d = self.value(x).data();
                out.extend_from_slice(&d[o * len * inner..(o + 1) * len * inner]);
            }
        }
        self.record("concat", shaped(shape, out), Op::Concat(xs.to_vec(), axis), xs)
    }

    /// Elements `start..end` along `axis`.
    pub fn slice(&mut self, x: Var, axis: usize, start: usize, end: usize) -> Result<Var, KernelError> {
        self.axis_ok("slice", x, axis)?;
        let s = self.shape(x).to_vec();
        if start >= end || end > s[axis] {
            return Err(mismatch("slice", format!("{start}..{end} on axis {axis} of {s:?}")));
        }
        let (outer, len, inner) = split_axis(&s, axis);
        let d = self.value(x).data();
        let mut out = Vec::with_capacity(outer * (end - start) * inner);
        for o in 0..outer {
            out.extend_from_slice(&d[o * len * inner + start * inner..o * len * inner + end * inner]);
        }
        let mut shape = s;
        shape[axis] = end - start;
        self.record("slice", shaped(shape, out), Op::Slice { x, axis, start }, &[x])
    }

    pub fn reshape(&mut self, x: Var, shape: &[usize]) -> Result<Var, KernelError> {
        let t = self.value(x).clone().reshaped(shape)?;
        self.record("reshape", t, Op::Reshape(x), &[x])
    }

    /// Axis permutation: output axis `i` is input axis `perm[i]`.
    pub fn permute(&mut self, x: Var, perm: &[usize]) -> Result<Var, KernelError> {
        let s = self.shape(x).to_vec();
        let mut seen = vec![false; s.len()];
        if perm.len() != s.len() || perm.iter().any(|&p| p >= s.len() || std::mem::replace(&mut seen[p], true)) {
            return Err(mismatch("permute", format!("{perm:?} on {s:?}")));
        }
        let rank = s.len();
        let mut in_strides = vec![1usize; rank];
        for d in (0..rank.saturating_sub(1)).rev() {
            in_strides[d] = in_strides[d + 1] * s[d + 1];
        }
        let out_shape: Vec<usize> = perm.iter().map(|&p| s[p]).collect();
        let strides: Vec<usize> = perm.iter().map(|&p| in_strides[p]).collect();
        let n = s.iter().product();
        let mut map = Vec::with_capacity(n);
        let mut idx = vec![0usize; rank];
        let mut flat = 0usize;
        for _ in 0..n {
            map.push(flat);
            for d in (0..rank).rev() {
                idx[d] += 1;
                flat += strides[d];
                if idx[d] < out_shape[d] {
                    break;
                }
                flat -= strides[d] * idx[d];
                idx[d] = 0;
            }
        }
        let d = self.value(x).data();
        let out = map.iter().map(|&i| d[i]).collect();
        self.record("permute", shaped(out_shape, out), Op::Permute(x, map), &[x])
    }

    /// Swaps the last two axes.
    pub fn transpose(&mut self, x: Var) -> Result<Var, KernelError> {
        let rank = self.shape(x).len();
        if rank < 2 {
            return Err(mismatch("transpose", format!("rank {rank}")));
        }
        let mut perm: Vec<usize> = (0..rank).collect();
        perm.swap(rank - 2, rank - 1);
        self.permute(x, &perm)
    }

    fn reduce(&mut self, kind: Reduce, x: Var, axis: usize) -> Result<Var, KernelError> {
        let name = match kind {
            Reduce::Sum => "sum",
            Reduce::Mean => "mean",
            Reduce::Max => "max",
        };
        self.axis_ok(name, x, axis)?;
        let t = self.value(x);
        let (outer, len, inner) = split_axis(t.shape(), axis);
        let d = t.data();
        let mut out = vec![0.0; outer * inner];
        let mut argmax = Vec::new();
        if let Reduce::Max = kind {
            argmax = vec![0; outer * inner];
        }
        for o in 0..outer {
            for i in 0..inner {
                let at = |j: usize| o * len * inner + j * inner + i;
                let r = o * inner + i;
                match kind {
                    Reduce::Sum | Reduce::Mean => {
                        let s: f64 = (0..len).map(|j| d[at(j)]).sum();
                        out[r] = if let Reduce::Mean = kind { s / len as f64 } else { s };
                    }
                    Reduce::Max => {
                        let mut best = 0;
                        for j in 1..len {
                            if d[at(j)] > d[at(best)] {
                                best = j;
                            }
                        }
                        argmax[r] = best;
                        out[r] = d[at(best)];
                    }
                }
            }
        }
        let mut shape = t.shape().to_vec();
        shape[axis] = 1;
        self.record(name, shaped(shape, out), Op::Reduce { kind, x, axis, argmax }, &[x])
    }

    /// Reductions keep the reduced axis with length 1.
    pub fn sum(&mut self, x: Var, axis: usize) -> Result<Var, KernelError> {
        self.reduce(Reduce::Sum, x, axis)
    }

    pub fn mean(&mut self, x: Var, axis: usize) -> Result<Var, KernelError> {
        self.reduce(Reduce::Mean, x, axis)
    }

    /// Ties resolve to the first maximal index.
    pub fn max(&mut self, x: Var, axis: usize) -> Result<Var, KernelError> {
        self.reduce(Reduce::Max, x, axis)
    }

    /// Rows of `table` (first axis) at `ids`; output shape `[ids.len(), ..]`.
    pub fn embedding_gather(&mut self, table: Var, ids: &[usize]) -> Result<Var, KernelError> {
        let s = self.shape(table).to_vec();
        if ids.is_empty() {
            return Err(mismatch("embedding_gather", "no ids"));
        }
        let row: usize = s[1..].iter().product();
        let d = self.value(table).data();
        let mut out = Vec::with_capacity(ids.len() * row);
        for &id in ids {
            if id >= s[0] {
                return Err(KernelError::IndexOutOfRange {
                    op: "embedding_gather",
                    index: id,
                    len: s[0],
                });
            }
            out.extend_from_slice(&d[id * row..(id + 1) * row]);
        }
        let mut shape = s;
        shape[0] = ids.len();
        self.record("embedding_gather", shaped(shape, out), Op::Gather(table, ids.to_vec()), &[table])
    }

    /// Inverted dropout; the identity when `!train` or `rate == 0`.
    pub fn dropout(&mut self, x: Var, rate: f64, train: bool, seed: u64) -> Result<Var, KernelError> {
        if !(0.0..1.0).contains(&rate) {
            return Err(mismatch("dropout", format!("rate {rate}")));
        }
        if !train || rate == 0.0 {
            return Ok(x);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let keep = 1.0 / (1.0 - rate);
        let t = self.value(x);
        let mask: Vec<f64> = (0..t.numel())
            .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
            .collect();
        let out = t.data().iter().zip(&mask).map(|(v, m)| v * m).collect();
        let shape = t.shape().to_vec();
        self.record("dropout", shaped(shape, out), Op::Dropout(x, mask), &[x])
    }

    /// Reverse pass from a single-element `loss`.
    pub fn backward(&mut self, loss: Var) -> Result<Gradients, KernelError> {
        if self.finished {
            return Err(KernelError::DoubleBackward);
        }
        if self.value(loss).numel() != 1 {
            return Err(KernelError::NonScalarLoss(self.shape(loss).to_vec()));
        }
        self.finished = true;
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Tensor::filled(self.shape(loss), 1.0));
        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            if !self.nodes[i].requires_grad {
                continue;
            }
            if !g.is_finite() {
                return Err(KernelError::Numeric { op: "backward" });
            }
            self.propagate(i, &g, &mut grads);
            grads[i] = Some(g);
        }
        for (i, node) in self.nodes.iter().enumerate() {
            let is_param = matches!(node.op, Op::Leaf) && node.requires_grad;
            if !is_param {
                grads[i] = None;
            } else if grads[i].is_none() {
                grads[i] = Some(Tensor::zeros(node.value.shape()));
            }
        }
        Ok(Gradients { grads })
    }

    fn accumulate(&self, grads: &mut [Option<Tensor>], v: Var, g: Vec<f64>) {
        if !self.rg(v) {
            return;
        }
        match &mut grads[v.0] {
            Some(t) => {
                for (a, b) in t.data_mut().iter_mut().zip(&g) {
                    *a += b;
                }
            }
            slot => *slot = Some(shaped(self.shape(v).to_vec(), g)),
        }
    }

    fn propagate(&self, i: usize, g: &Tensor, grads: &mut [Option<Tensor>]) {
        let out = &self.nodes[i].value;
        let gd = g.data();
        match &self.nodes[i].op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (sa, sb) = (self.shape(*a), self.shape(*b));
                let (bs, m, k, n) = if sa.len() == 3 {
                    (sa[0], sa[1], sa[2], sb[2])
                } else {
                    (1, sa[0], sa[1], sb[1])
                };
                let (av, bv) = (self.value(*a).data(), self.value(*b).data());
                if self.rg(*a) {
                    let mut ga = vec![0.0; bs * m * k];
                    for t in 0..bs {
                        gemm(m, n, k, &gd[t * m * n..], false, &bv[t * k * n..], true, &mut ga[t * m * k..], false);
                    }
                    self.accumulate(grads, *a, ga);
                }
                if self.rg(*b) {
                    let mut gb = vec![0.0; bs * k * n];
                    for t in 0..bs {
                        gemm(k, m, n, &av[t * m * k..], true, &gd[t * m * n..], false, &mut gb[t * k * n..], false);
                    }
                    self.accumulate(grads, *b, gb);
                }
            }
            Op::Binary(kind, a, b) => {
                let (ta, tb) = (self.value(*a), self.value(*b));
                let same = ta.shape() == tb.shape() && ta.shape() == out.shape();
                let ma: Vec<usize> = if same {
                    (0..gd.len()).collect()
                } else {
                    broadcast_map(out.shape(), ta.shape())
                };
                let mb: Vec<usize> = if same {
                    (0..gd.len()).collect()
                } else {
                    broadcast_map(out.shape(), tb.shape())
                };
                let (av, bv) = (ta.data(), tb.data());
                if self.rg(*a) {
                    let mut ga = vec![0.0; av.len()];
                    for (k, &gk) in gd.iter().enumerate() {
                        ga[ma[k]] += match kind {
                            Binary::Add | Binary::Sub => gk,
                            Binary::Mul => gk * bv[mb[k]],
                            Binary::Div => gk / bv[mb[k]],
                        };
                    }
                    self.accumulate(grads, *a, ga);
                }
                if self.rg(*b) {
                    let mut gb = vec![0.0; bv.len()];
                    for (k, &gk) in gd.iter().enumerate() {
                        let y = bv[mb[k]];
                        gb[mb[k]] += match kind {
                            Binary::Add => gk,
                            Binary::Sub => -gk,
                            Binary::Mul => gk * av[ma[k]],
                            Binary::Div => -gk * av[ma[k]] / (y * y),
                        };
                    }
                    self.accumulate(grads, *b, gb);
                }
            }
            Op::Unary(kind, x) => {
                let xv = self.value(*x).data();
                let yv = out.data();
                let gx = (0..gd.len())
                    .map(|k| {
                        gd[k] * match kind {
                            Unary::Exp => yv[k],
                            Unary::Log => 1.0 / xv[k],
                            Unary::Relu => f64::from(u8::from(xv[k] > 0.0)),
                            Unary::LeakyRelu(s) => {
                                if xv[k] > 0.0 {
                                    1.0
                                } else {
                                    *s
                                }
                            }
                            Unary::Sigmoid => yv[k] * (1.0 - yv[k]),
                        }
                    })
                    .collect();
                self.accumulate(grads, *x, gx);
            }
            Op::Softmax(x, axis) => {
                let (outer, len, inner) = split_axis(out.shape(), *axis);
                let y = out.data();
                let mut gx = vec![0.0; y.len()];
                for o in 0..outer {
                    for i in 0..inner {
                        let at = |j: usize| o * len * inner + j * inner + i;
                        let dot: f64 = (0..len).map(|j| gd[at(j)] * y[at(j)]).sum();
                        for j in 0..len {
                            gx[at(j)] = y[at(j)] * (gd[at(j)] - dot);
                        }
                    }
                }
                self.accumulate(grads, *x, gx);
            }
            Op::Concat(xs, axis) => {
                let (outer, total, inner) = split_axis(out.shape(), *axis);
                let mut offset = 0;
                for &x in xs {
                    let len = self.shape(x)[*axis];
                    if self.rg(x) {
                        let mut gx = Vec::with_capacity(outer * len * inner);
                        for o in 0..outer {
                            let base = o * total * inner + offset * inner;
                            gx.extend_from_slice(&gd[base..base + len * inner]);
                        }
                        self.accumulate(grads, x, gx);
                    }
                    offset += len;
                }
            }
            Op::Slice { x, axis, start } => {
                let (outer, len, inner) = split_axis(self.shape(*x), *axis);
                let width = out.shape()[*axis];
                let mut gx = vec![0.0; outer * len * inner];
                for o in 0..outer {
                    let dst = o * len * inner + start * inner;
                    gx[dst..dst + width * inner].copy_from_slice(&gd[o * width * inner..(o + 1) * width * inner]);
                }
                self.accumulate(grads, *x, gx);
            }
            Op::Reshape(x) => self.accumulate(grads, *x, gd.to_vec()),
            Op::Permute(x, map) => {
                let mut gx = vec![0.0; gd.len()];
                for (k, &src) in map.iter().enumerate() {
                    gx[src] = gd[k];
                }
                self.accumulate(grads, *x, gx);
            }
            Op::Reduce { kind, x, axis, argmax } => {
                let (outer, len, inner) = split_axis(self.shape(*x), *axis);
                let mut gx = vec![0.0; outer * len * inner];
                for o in 0..outer {
                    for i in 0..inner {
                        let r = o * inner + i;
                        let at = |j: usize| o * len * inner + j * inner + i;
                        match kind {
                            Reduce::Sum => (0..len).for_each(|j| gx[at(j)] = gd[r]),
                            Reduce::Mean => (0..len).for_each(|j| gx[at(j)] = gd[r] / len as f64),
                            Reduce::Max => gx[at(argmax[r])] = gd[r],
                        }
                    }
                }
                self.accumulate(grads, *x, gx);
            }
            Op::Gather(table, ids) => {
                let s = self.shape(*table);
                let row: usize = s[1..].iter().product();
                let mut gt = vec![0.0; s[0] * row];
                for (k, &id) in ids.iter().enumerate() {
                    for c in 0..row {
                        gt[id * row + c] += gd[k * row + c];
                    }
                }
                self.accumulate(grads, *table, gt);
            }
            Op::Dropout(x, mask) => {
                let gx = gd.iter().zip(mask).map(|(g, m)| g * m).collect();
                self.accumulate(grads, *x, gx);
            }
        }
    }
}

pub(crate) fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}
