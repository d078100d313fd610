//! The nested graph network: per-function graph encoder, call-graph
//! convolution and a per-function sigmoid head.

mod checkpoint;
mod config;
pub mod layers;
mod params;

pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointError, ModelCheckpoint, TrainingMetadata, CHECKPOINT_FORMAT};
pub use config::{ConfigError, ModelConfig};
pub use params::{inventory, ParamStore};

use thiserror::Error;

use crate::graph::{Mrfg, Mrng, Vocabulary};
use crate::tensor::{KernelError, Tape, Tensor, Var};
use layers::{ClassifierParams, FuseProjections};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{probs} probabilities but {labels} labels")]
    LengthMismatch { probs: usize, labels: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Eval,
    /// Dropout active, masks derived from `seed`.
    Train { seed: u64 },
}

/// Parameters registered on one tape, aligned with [`ParamStore`] order.
pub struct Bound {
    pub vars: Vec<Var>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub vocab: Vocabulary,
    pub params: ParamStore,
}

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Model {
    pub fn new(config: ModelConfig, vocab: Vocabulary) -> Result<Model, ModelError> {
        config.validate()?;
        let params = ParamStore::init(&config, vocab.node_count(), vocab.edge_count());
        Ok(Model { config, vocab, params })
    }

    pub fn bind(&self, tape: &mut Tape) -> Bound {
        Bound {
            vars: self.params.tensors().iter().map(|t| tape.param(t.clone())).collect(),
        }
    }

    fn var(&self, bound: &Bound, name: &str) -> Var {
        let i = self
            .params
            .index(name)
            .unwrap_or_else(|| panic!("parameter {name} missing from the inventory"));
        bound.vars[i]
    }

    fn dropout(&self, tape: &mut Tape, x: Var, mode: Mode, a: u64, b: u64) -> Result<Var, KernelError> {
        match mode {
            Mode::Eval => Ok(x),
            Mode::Train { seed } => tape.dropout(x, self.config.dropout, true, mix(seed, a, b)),
        }
    }

    /// Feature vector (`1×c0`) of one function graph.
    pub fn function_feature(
        &self,
        tape: &mut Tape,
        bound: &Bound,
        g: &Mrfg,
        mode: Mode,
        index: usize,
    ) -> Result<Var, KernelError> {
        let c = &self.config;
        let node_table = self.var(bound, "embed.node");
        let edge_table = self.var(bound, "embed.edge");
        let (mut x, mut e) = layers::embed_graph(tape, g, &self.vocab, node_table, edge_table)?;
        let mut outputs = Vec::with_capacity(c.layers);
        for l in 0..c.layers {
            let w = self.var(bound, &format!("eegcn.{l}.w"));
            let a = self.var(bound, &format!("eegcn.{l}.a"));
            let (nx, ne) = layers::eegcn_layer(tape, x, e, w, a, c.leaky_slope)?;
            x = self.dropout(tape, nx, mode, index as u64, l as u64)?;
            e = ne;
            outputs.push(x);
        }
        let fused = if c.no_self_attention {
            x
        } else {
            let proj = FuseProjections {
                wq: self.var(bound, "fuse.wq"),
                wk: self.var(bound, "fuse.wk"),
                wv: self.var(bound, "fuse.wv"),
                wo: self.var(bound, "fuse.wo"),
            };
            let (out, _) = layers::fuse_layers(tape, &outputs, &proj, c.heads)?;
            self.dropout(tape, out, mode, index as u64, c.layers as u64)?
        };
        let pooled = layers::sort_pool(tape, fused, c.k_prime)?;
        let flat = tape.reshape(pooled, &[1, c.k_prime * c.f_hidden])?;
        let h = tape.matmul(flat, self.var(bound, "readout.w"))?;
        let h = tape.add(h, self.var(bound, "readout.b"))?;
        tape.relu(h)
    }

    /// Per-function probabilities as an `N_F×1` variable; `None` for a file
    /// without functions.
    pub fn forward(&self, tape: &mut Tape, bound: &Bound, g: &Mrng, mode: Mode) -> Result<Option<Var>, KernelError> {
        if g.functions.is_empty() {
            return Ok(None);
        }
        let features = g
            .functions
            .iter()
            .enumerate()
            .map(|(i, f)| self.function_feature(tape, bound, f, mode, i))
            .collect::<Result<Vec<_>, _>>()?;
        let mut z = tape.concat(&features, 0)?;
        if !self.config.no_nested {
            let fcg = layers::build_fcg(g.functions.len(), &g.calls);
            let a_hat = tape.constant(fcg.normalized());
            for t in 0..self.config.nested_layers {
                let w = self.var(bound, &format!("nested.{t}.w"));
                z = layers::nested_gcn_layer(tape, z, a_hat, w)?;
            }
        }
        let head = ClassifierParams {
            conv_w: self.var(bound, "classifier.conv.w"),
            conv_b: self.var(bound, "classifier.conv.b"),
            out_w: self.var(bound, "classifier.out.w"),
            out_b: self.var(bound, "classifier.out.b"),
        };
        layers::classify_functions(tape, z, &head).map(Some)
    }

    /// Eval-mode probabilities, one per function.
    pub fn predict(&self, g: &Mrng) -> Result<Vec<f64>, KernelError> {
        let mut tape = Tape::new();
        let bound = self.bind(&mut tape);
        Ok(match self.forward(&mut tape, &bound, g, Mode::Eval)? {
            Some(p) => tape.value(p).data().to_vec(),
            None => Vec::new(),
        })
    }

    /// Summed cross entropy of one file divided by `denominator`, with its
    /// gradient for every parameter. Positive terms are scaled by
    /// `positive_weight`.
    pub fn loss_and_gradients(
        &self,
        g: &Mrng,
        labels: &[f64],
        denominator: f64,
        positive_weight: f64,
        mode: Mode,
    ) -> Result<(f64, Vec<Tensor>), ModelError> {
        if labels.len() != g.functions.len() {
            return Err(ModelError::LengthMismatch {
                probs: g.functions.len(),
                labels: labels.len(),
            });
        }
        if labels.is_empty() {
            let zeros = self.params.tensors().iter().map(|t| Tensor::zeros(t.shape())).collect();
            return Ok((0.0, zeros));
        }
        let mut tape = Tape::new();
        let bound = self.bind(&mut tape);
        let probs = self.forward(&mut tape, &bound, g, mode)?.expect("non-empty file");
        let loss = layers::weighted_bce_sum(&mut tape, probs, labels, positive_weight, denominator)?;
        let value = tape.value(loss).data()[0];
        let grads = tape.backward(loss)?;
        let out = bound
            .vars
            .iter()
            .map(|&v| grads.get(v).expect("every parameter has a gradient").clone())
            .collect();
        Ok((value, out))
    }
}
