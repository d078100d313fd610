use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ModelConfig;
use crate::tensor::Tensor;

/// Named parameter tensors in a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamStore {
    names: Vec<String>,
    tensors: Vec<Tensor>,
}

/// `(name, shape, fan_in)` for every parameter the configuration uses.
/// Embedding rows are one-hot lookups, so their fan-in is 1.
pub fn inventory(config: &ModelConfig, node_vocab: usize, edge_vocab: usize) -> Vec<(String, Vec<usize>, usize)> {
    let (f, p, cw) = (config.f_hidden, config.p, config.channel_width());
    let mut out = vec![
        ("embed.node".to_string(), vec![node_vocab, f], 1),
        ("embed.edge".to_string(), vec![edge_vocab, p], 1),
    ];
    for l in 0..config.layers {
        out.push((format!("eegcn.{l}.w"), vec![f, cw], f));
        out.push((format!("eegcn.{l}.a"), vec![2 * cw, 1], 2 * cw));
    }
    if !config.no_self_attention {
        for name in ["wq", "wk", "wv", "wo"] {
            out.push((format!("fuse.{name}"), vec![f, f], f));
        }
    }
    let flat = config.k_prime * f;
    out.push(("readout.w".into(), vec![flat, config.c0], flat));
    out.push(("readout.b".into(), vec![1, config.c0], flat));
    if !config.no_nested {
        for t in 0..config.nested_layers {
            out.push((format!("nested.{t}.w"), vec![config.c0, config.c0], config.c0));
        }
    }
    let (k, filters) = (config.conv_kernel, config.conv_filters);
    out.push(("classifier.conv.w".into(), vec![k, filters], k));
    out.push(("classifier.conv.b".into(), vec![1, filters], k));
    out.push(("classifier.out.w".into(), vec![filters, 1], filters));
    out.push(("classifier.out.b".into(), vec![1, 1], filters));
    out
}

impl ParamStore {
    /// Uniform(−1/√fan_in, 1/√fan_in) in inventory order from `config.seed`.
    pub fn init(config: &ModelConfig, node_vocab: usize, edge_vocab: usize) -> ParamStore {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut names = Vec::new();
        let mut tensors = Vec::new();
        for (name, shape, fan_in) in inventory(config, node_vocab, edge_vocab) {
            let bound = 1.0 / (fan_in as f64).sqrt();
            let n = shape.iter().product();
            let data = (0..n).map(|_| rng.gen_range(-bound..bound)).collect();
            names.push(name);
            tensors.push(Tensor::new(shape, data).expect("inventory shapes are positive"));
        }
        ParamStore { names, tensors }
    }

    pub fn from_parts(names: Vec<String>, tensors: Vec<Tensor>) -> ParamStore {
        assert_eq!(names.len(), tensors.len());
        ParamStore { names, tensors }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.index(name).map(|i| &self.tensors[i])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.index(name).map(|i| &mut self.tensors[i])
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn scalar_count(&self) -> usize {
        self.tensors.iter().map(Tensor::numel).sum()
    }
}
