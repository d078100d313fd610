use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid model configuration: {0}")]
pub struct ConfigError(pub String);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Node feature width.
    pub f_hidden: usize,
    /// Edge feature width; also the channel count of each convolution layer.
    pub p: usize,
    /// Edge-enhanced convolution layers.
    pub layers: usize,
    pub heads: usize,
    /// Rows kept by sort pooling.
    pub k_prime: usize,
    /// Function feature width, kept by every nested layer.
    pub c0: usize,
    pub nested_layers: usize,
    pub conv_kernel: usize,
    pub conv_filters: usize,
    pub dropout: f64,
    pub leaky_slope: f64,
    pub seed: u64,
    /// Classify from the last convolution layer instead of fused layers.
    pub no_self_attention: bool,
    /// Classify function features directly, without the call-graph stack.
    pub no_nested: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            f_hidden: 64,
            p: 8,
            layers: 16,
            heads: 4,
            k_prime: 16,
            c0: 128,
            nested_layers: 2,
            conv_kernel: 5,
            conv_filters: 8,
            dropout: 0.2,
            leaky_slope: 0.2,
            seed: 0,
            no_self_attention: false,
            no_nested: false,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("f_hidden", self.f_hidden),
            ("p", self.p),
            ("layers", self.layers),
            ("heads", self.heads),
            ("k_prime", self.k_prime),
            ("c0", self.c0),
            ("conv_kernel", self.conv_kernel),
            ("conv_filters", self.conv_filters),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(ConfigError(format!("{name} must be positive")));
        }
        if self.f_hidden % self.p != 0 {
            return Err(ConfigError(format!("f_hidden {} not divisible by p {}", self.f_hidden, self.p)));
        }
        // per-head width f_hidden / heads
        if self.f_hidden % self.heads != 0 {
            return Err(ConfigError(format!(
                "f_hidden {} not divisible by heads {}",
                self.f_hidden, self.heads
            )));
        }
        if self.c0 < self.conv_kernel {
            return Err(ConfigError(format!("c0 {} below conv_kernel {}", self.c0, self.conv_kernel)));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(ConfigError(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        Ok(())
    }

    pub fn head_width(&self) -> usize {
        self.f_hidden / self.heads
    }

    pub fn channel_width(&self) -> usize {
        self.f_hidden / self.p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = ModelConfig::default();
        c.validate().unwrap();
        assert_eq!((c.channel_width(), c.head_width()), (8, 16));
    }

    #[test]
    fn divisibility_enforced() {
        let c = ModelConfig {
            p: 5,
            ..ModelConfig::default()
        };
        assert!(c.validate().is_err());
        let c = ModelConfig {
            c0: 4,
            ..ModelConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
