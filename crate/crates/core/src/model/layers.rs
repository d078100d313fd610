//! Network stages as tape functions.

use std::cmp::Ordering;

use crate::graph::{EdgeType, Mrfg, Vocabulary};
use crate::tensor::{KernelError, Tape, Tensor, Var};

/// Added to the per-channel normalizer.
pub const NORM_EPS: f64 = 1e-9;
pub const PROB_CLAMP: f64 = 1e-12;

/// Sinusoidal encoding of position `i` in `d` dimensions.
pub fn positional_encoding(i: usize, d: usize) -> Vec<f64> {
    (0..d)
        .map(|dim| {
            let p = dim / 2;
            let angle = i as f64 / 10000f64.powf(2.0 * p as f64 / d as f64);
            if dim % 2 == 0 {
                angle.sin()
            } else {
                angle.cos()
            }
        })
        .collect()
}

/// `X⁰` (`N×F`) and `E⁰` (`N×N×P`). Multiple edges on one ordered pair sum;
/// sequential edges add the encoding of their sequence index.
pub fn embed_graph(
    tape: &mut Tape,
    g: &Mrfg,
    vocab: &Vocabulary,
    node_table: Var,
    edge_table: Var,
) -> Result<(Var, Var), KernelError> {
    let n = g.nodes.len();
    let p = tape.shape(edge_table)[1];
    let ids: Vec<usize> = g.nodes.iter().map(|node| vocab.node_id(&node.label)).collect();
    let x = tape.embedding_gather(node_table, &ids)?;
    if g.edges.is_empty() {
        let e = tape.constant(Tensor::zeros(&[n, n, p]));
        return Ok((x, e));
    }
    let m = g.edges.len();
    let edge_ids: Vec<usize> = g.edges.iter().map(|e| vocab.edge_id(e.kind)).collect();
    let rows = tape.embedding_gather(edge_table, &edge_ids)?;
    let mut pe = vec![0.0; m * p];
    let mut select = vec![0.0; n * n * m];
    for (k, e) in g.edges.iter().enumerate() {
        if e.kind == EdgeType::SEQUENTIAL {
            let enc = positional_encoding(e.seq.unwrap_or(0), p);
            pe[k * p..(k + 1) * p].copy_from_slice(&enc);
        }
        select[(e.src * n + e.dst) * m + k] = 1.0;
    }
    let pe = tape.constant(Tensor::new(vec![m, p], pe)?);
    let rows = tape.add(rows, pe)?;
    let select = tape.constant(Tensor::new(vec![n * n, m], select)?);
    let flat = tape.matmul(select, rows)?;
    let e = tape.reshape(flat, &[n, n, p])?;
    Ok((x, e))
}

/// One edge-enhanced convolution. `w` is `F×(F/P)`, `a` is `2(F/P)×1`.
/// Returns the new node features and the normalized edge gates.
pub fn eegcn_layer(tape: &mut Tape, x: Var, e: Var, w: Var, a: Var, slope: f64) -> Result<(Var, Var), KernelError> {
    let n = tape.shape(x)[0];
    let f = tape.shape(x)[1];
    let p = tape.shape(e)[2];
    let cw = tape.shape(w)[1];
    let h = tape.matmul(x, w)?;
    let a_src = tape.slice(a, 0, 0, cw)?;
    let a_dst = tape.slice(a, 0, cw, 2 * cw)?;
    let u = tape.matmul(h, a_src)?;
    let v = tape.matmul(h, a_dst)?;
    let vt = tape.transpose(v)?;
    let score = tape.add(u, vt)?;
    let score = tape.leaky_relu(score, slope)?;
    let s = tape.exp(score)?;
    let s = tape.reshape(s, &[n, n, 1])?;
    let gated = tape.mul(s, e)?;
    // L1 normalizer over neighbours: |f| = relu(f) + relu(−f)
    let pos = tape.relu(gated)?;
    let neg = tape.scale(gated, -1.0)?;
    let neg = tape.relu(neg)?;
    let abs = tape.add(pos, neg)?;
    let norm = tape.sum(abs, 1)?;
    let norm = tape.shift(norm, NORM_EPS)?;
    let gates = tape.div(gated, norm)?;
    let by_channel = tape.permute(gates, &[2, 0, 1])?;
    let by_channel = tape.reshape(by_channel, &[p * n, n])?;
    let mixed = tape.matmul(by_channel, h)?;
    let mixed = tape.reshape(mixed, &[p, n, cw])?;
    let mixed = tape.permute(mixed, &[1, 0, 2])?;
    let mixed = tape.reshape(mixed, &[n, f])?;
    let out = tape.relu(mixed)?;
    Ok((out, gates))
}

pub struct FuseProjections {
    pub wq: Var,
    pub wk: Var,
    pub wv: Var,
    pub wo: Var,
}

/// Multi-head self-attention over each node's sequence of layer outputs,
/// averaged over the sequence. Returns `(N×F output, attention weights
/// (N·heads)×L×L)`.
pub fn fuse_layers(tape: &mut Tape, layers: &[Var], proj: &FuseProjections, heads: usize) -> Result<(Var, Var), KernelError> {
    let n = tape.shape(layers[0])[0];
    let f = tape.shape(layers[0])[1];
    let l = layers.len();
    let dk = f / heads;
    let seq: Vec<Var> = layers
        .iter()
        .map(|&x| tape.reshape(x, &[n, 1, f]))
        .collect::<Result<_, _>>()?;
    let stacked = tape.concat(&seq, 1)?;
    let flat = tape.reshape(stacked, &[n * l, f])?;
    let mut split = |w: Var| -> Result<Var, KernelError> {
        let y = tape.matmul(flat, w)?;
        let y = tape.reshape(y, &[n, l, heads, dk])?;
        let y = tape.permute(y, &[0, 2, 1, 3])?;
        tape.reshape(y, &[n * heads, l, dk])
    };
    let q = split(proj.wq)?;
    let k = split(proj.wk)?;
    let v = split(proj.wv)?;
    let kt = tape.transpose(k)?;
    let scores = tape.matmul(q, kt)?;
    let scores = tape.scale(scores, 1.0 / (dk as f64).sqrt())?;
    let weights = tape.softmax(scores, 2)?;
    let att = tape.matmul(weights, v)?;
    let att = tape.reshape(att, &[n, heads, l, dk])?;
    let att = tape.permute(att, &[0, 2, 1, 3])?;
    let att = tape.reshape(att, &[n * l, f])?;
    let out = tape.matmul(att, proj.wo)?;
    let out = tape.reshape(out, &[n, l, f])?;
    let out = tape.mean(out, 1)?;
    let out = tape.reshape(out, &[n, f])?;
    Ok((out, weights))
}

/// Row order kept by sort pooling: last channel descending, ties by earlier
/// channels right to left, then node id. `None` marks a zero padding row.
pub fn sort_pool_order(x: &Tensor, k: usize) -> Vec<Option<usize>> {
    let n = x.shape()[0];
    let mut ids: Vec<usize> = (0..n).collect();
    ids.sort_by(|&i, &j| {
        let (ri, rj) = (x.row(i), x.row(j));
        for c in (0..ri.len()).rev() {
            match rj[c].partial_cmp(&ri[c]).unwrap_or(Ordering::Equal) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        i.cmp(&j)
    });
    (0..k).map(|r| ids.get(r).copied()).collect()
}

/// `K×F` rows selected by [`sort_pool_order`].
pub fn sort_pool(tape: &mut Tape, x: Var, k: usize) -> Result<Var, KernelError> {
    let n = tape.shape(x)[0];
    let f = tape.shape(x)[1];
    let order = sort_pool_order(tape.value(x), k);
    let ids: Vec<usize> = order.iter().map(|o| o.unwrap_or(n)).collect();
    let source = if n < k {
        let pad = tape.constant(Tensor::zeros(&[1, f]));
        tape.concat(&[x, pad], 0)?
    } else {
        x
    };
    tape.embedding_gather(source, &ids)
}

/// Call adjacency made symmetric with self-loops, and its degrees.
#[derive(Clone, Debug, PartialEq)]
pub struct Fcg {
    /// `Ã`, `N_F×N_F`.
    pub adjacency: Tensor,
    /// Diagonal of `D̃`.
    pub degree: Vec<f64>,
}

impl Fcg {
    /// `D̃⁻¹Ã`.
    pub fn normalized(&self) -> Tensor {
        let n = self.degree.len();
        let data = (0..n * n)
            .map(|k| self.adjacency.data()[k] / self.degree[k / n])
            .collect();
        Tensor::new(vec![n, n], data).expect("square adjacency")
    }
}

pub fn build_fcg(function_count: usize, calls: &[(usize, usize)]) -> Fcg {
    let n = function_count;
    let mut adjacency = Tensor::eye(n);
    for &(a, b) in calls {
        adjacency.data_mut()[a * n + b] = 1.0;
        adjacency.data_mut()[b * n + a] = 1.0;
    }
    let degree = (0..n).map(|i| adjacency.row(i).iter().sum()).collect();
    Fcg { adjacency, degree }
}

/// `relu(Â · Z · W)`.
pub fn nested_gcn_layer(tape: &mut Tape, z: Var, a_hat: Var, w: Var) -> Result<Var, KernelError> {
    let mixed = tape.matmul(a_hat, z)?;
    let out = tape.matmul(mixed, w)?;
    tape.relu(out)
}

pub struct ClassifierParams {
    pub conv_w: Var,
    pub conv_b: Var,
    pub out_w: Var,
    pub out_b: Var,
}

/// Per row of `z`: 1-D convolution along the features, global max per
/// filter, affine to one logit, sigmoid. Output `N_F×1`.
pub fn classify_functions(tape: &mut Tape, z: Var, params: &ClassifierParams) -> Result<Var, KernelError> {
    let n = tape.shape(z)[0];
    let c = tape.shape(z)[1];
    let k = tape.shape(params.conv_w)[0];
    let filters = tape.shape(params.conv_w)[1];
    if c < k {
        return Err(KernelError::ShapeMismatch {
            op: "classify_functions",
            detail: format!("feature width {c} below kernel {k}"),
        });
    }
    let positions = c - k + 1;
    let mut ids = Vec::with_capacity(n * positions * k);
    for row in 0..n {
        for j in 0..positions {
            ids.extend((0..k).map(|o| row * c + j + o));
        }
    }
    let flat = tape.reshape(z, &[n * c, 1])?;
    let cols = tape.embedding_gather(flat, &ids)?;
    let cols = tape.reshape(cols, &[n * positions, k])?;
    let conv = tape.matmul(cols, params.conv_w)?;
    let conv = tape.add(conv, params.conv_b)?;
    let conv = tape.reshape(conv, &[n, positions, filters])?;
    let pooled = tape.max(conv, 1)?;
    let pooled = tape.reshape(pooled, &[n, filters])?;
    let logit = tape.matmul(pooled, params.out_w)?;
    let logit = tape.add(logit, params.out_b)?;
    tape.sigmoid(logit)
}

/// `−Σ [y·ln p + (1−y)·ln(1−p)] / denominator`, with `p` clamped to
/// `[1e-12, 1 − 1e-12]`. `probs` is `N×1`.
pub fn bce_sum(tape: &mut Tape, probs: Var, labels: &[f64], denominator: f64) -> Result<Var, KernelError> {
    weighted_bce_sum(tape, probs, labels, 1.0, denominator)
}

/// [`bce_sum`] with the positive-label terms multiplied by `positive_weight`.
pub fn weighted_bce_sum(
    tape: &mut Tape,
    probs: Var,
    labels: &[f64],
    positive_weight: f64,
    denominator: f64,
) -> Result<Var, KernelError> {
    let n = tape.shape(probs)[0];
    if labels.len() != n || tape.value(probs).numel() != n {
        return Err(KernelError::ShapeMismatch {
            op: "compute_loss",
            detail: format!("{n} probabilities, {} labels", labels.len()),
        });
    }
    // clamp(p) = lo + relu(p − lo) − relu(p − hi)
    let above_lo = tape.shift(probs, -PROB_CLAMP)?;
    let above_lo = tape.relu(above_lo)?;
    let above_hi = tape.shift(probs, -(1.0 - PROB_CLAMP))?;
    let above_hi = tape.relu(above_hi)?;
    let p = tape.sub(above_lo, above_hi)?;
    let p = tape.shift(p, PROB_CLAMP)?;
    let log_p = tape.log(p)?;
    let one_minus = tape.scale(p, -1.0)?;
    let one_minus = tape.shift(one_minus, 1.0)?;
    let log_q = tape.log(one_minus)?;
    let y = tape.constant(Tensor::new(vec![n, 1], labels.iter().map(|v| v * positive_weight).collect())?);
    let not_y = tape.constant(Tensor::new(vec![n, 1], labels.iter().map(|v| 1.0 - v).collect())?);
    let pos = tape.mul(y, log_p)?;
    let neg = tape.mul(not_y, log_q)?;
    let terms = tape.add(pos, neg)?;
    let total = tape.sum(terms, 0)?;
    let total = tape.reshape(total, &[1])?;
    tape.scale(total, -1.0 / denominator)
}

/// Mean binary cross entropy over functions.
pub fn compute_loss(tape: &mut Tape, probs: Var, labels: &[f64]) -> Result<Var, KernelError> {
    bce_sum(tape, probs, labels, labels.len() as f64)
}
