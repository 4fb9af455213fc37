use crate::error::{Error, Result};

/// Architecture family. `WiSrnn` with a fixed scalar context weight and
/// identity sequential activation is the FOFE encoding; `WiSrnn` with a zero
/// context and identity activation degenerates to `Fnn`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Fnn,
    Rnn,
    WiSrnn,
    WdSrnn,
}

/// Activation applied along the sequential (projection) recurrence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeqActivation {
    Tanh,
    Identity,
}

/// How the sequential connections are weighted.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ContextMode {
    /// No sequential connections (FNN, RNN).
    None,
    /// One learned vector shared by all words (WI).
    SharedVector,
    /// One learned vector per vocabulary word (WD).
    PerWord,
    /// Constant scalar forgetting factor in [0,1], not learned (FOFE).
    FixedScalar(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub mode: Mode,
    /// Number of explicit history positions, N-1. Always 1 for RNN.
    pub window: usize,
    /// Embedding width D. Must equal the first hidden size for RNN.
    pub embed_dim: usize,
    /// One or two hidden layer sizes.
    pub hidden_dims: Vec<usize>,
    /// Vocabulary size K.
    pub vocab_size: usize,
    pub seq_act: SeqActivation,
    pub context: ContextMode,
    /// BPTT truncation depth: how many sequential hops an error vector may
    /// travel backwards.
    pub bptt_steps: usize,
}

impl ModelConfig {
    pub fn fnn(vocab_size: usize, window: usize, embed_dim: usize, hidden_dims: &[usize]) -> Self {
        ModelConfig {
            mode: Mode::Fnn,
            window,
            embed_dim,
            hidden_dims: hidden_dims.to_vec(),
            vocab_size,
            seq_act: SeqActivation::Identity,
            context: ContextMode::None,
            bptt_steps: 5,
        }
    }

    pub fn rnn(vocab_size: usize, hidden_dims: &[usize]) -> Self {
        ModelConfig {
            mode: Mode::Rnn,
            window: 1,
            embed_dim: hidden_dims[0],
            hidden_dims: hidden_dims.to_vec(),
            vocab_size,
            seq_act: SeqActivation::Identity,
            context: ContextMode::None,
            bptt_steps: 5,
        }
    }

    pub fn wi_srnn(
        vocab_size: usize,
        window: usize,
        embed_dim: usize,
        hidden_dims: &[usize],
    ) -> Self {
        ModelConfig {
            mode: Mode::WiSrnn,
            window,
            embed_dim,
            hidden_dims: hidden_dims.to_vec(),
            vocab_size,
            seq_act: SeqActivation::Tanh,
            context: ContextMode::SharedVector,
            bptt_steps: 5,
        }
    }

    pub fn wd_srnn(
        vocab_size: usize,
        window: usize,
        embed_dim: usize,
        hidden_dims: &[usize],
    ) -> Self {
        ModelConfig {
            mode: Mode::WdSrnn,
            window,
            embed_dim,
            hidden_dims: hidden_dims.to_vec(),
            vocab_size,
            seq_act: SeqActivation::Tanh,
            context: ContextMode::PerWord,
            bptt_steps: 5,
        }
    }

    /// WI-SRNN with a constant scalar forgetting factor and identity
    /// sequential activation: the FOFE configuration.
    pub fn fofe(
        vocab_size: usize,
        window: usize,
        embed_dim: usize,
        hidden_dims: &[usize],
        forgetting_factor: f64,
    ) -> Self {
        ModelConfig {
            mode: Mode::WiSrnn,
            window,
            embed_dim,
            hidden_dims: hidden_dims.to_vec(),
            vocab_size,
            seq_act: SeqActivation::Identity,
            context: ContextMode::FixedScalar(forgetting_factor),
            bptt_steps: 5,
        }
    }

    pub fn hidden1(&self) -> usize {
        self.hidden_dims[0]
    }

    pub fn last_hidden(&self) -> usize {
        *self.hidden_dims.last().unwrap()
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocab_size == 0 || self.embed_dim == 0 || self.window == 0 {
            return Err(Error::Config(
                "vocab_size, embed_dim and window must be positive".into(),
            ));
        }
        if self.hidden_dims.is_empty() || self.hidden_dims.len() > 2 {
            return Err(Error::Config(format!(
                "expected 1 or 2 hidden layers, got {}",
                self.hidden_dims.len()
            )));
        }
        if self.hidden_dims.contains(&0) {
            return Err(Error::Config("hidden sizes must be positive".into()));
        }
        if self.bptt_steps == 0 {
            return Err(Error::Config("bptt_steps must be at least 1".into()));
        }
        match self.mode {
            Mode::Fnn => {
                if self.context != ContextMode::None {
                    return Err(Error::Config("FNN has no context weights".into()));
                }
            }
            Mode::Rnn => {
                if self.context != ContextMode::None {
                    return Err(Error::Config("RNN has no context weights".into()));
                }
                if self.window != 1 {
                    return Err(Error::Config("RNN requires window = 1".into()));
                }
                if self.embed_dim != self.hidden_dims[0] {
                    return Err(Error::Config(
                        "RNN requires embed_dim equal to the first hidden size".into(),
                    ));
                }
            }
            Mode::WiSrnn => match self.context {
                ContextMode::SharedVector => {}
                ContextMode::FixedScalar(c) => {
                    if !(0.0..=1.0).contains(&c) {
                        return Err(Error::Config(format!(
                            "fixed context scalar {c} outside [0,1]"
                        )));
                    }
                }
                _ => {
                    return Err(Error::Config(
                        "WI-SRNN requires a shared or fixed-scalar context".into(),
                    ))
                }
            },
            Mode::WdSrnn => {
                if self.context != ContextMode::PerWord {
                    return Err(Error::Config(
                        "WD-SRNN requires per-word context weights".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Exact number of learnable scalars. Fixed-scalar context weights are
    /// constants and do not count.
    pub fn param_count(&self) -> usize {
        let k = self.vocab_size;
        let d = self.embed_dim;
        let h1 = self.hidden1();
        let mut n = k * d; // embeddings
        match self.mode {
            Mode::Rnn => n += h1 * h1, // recurrence matrix
            _ => n += self.window * d * h1, // projection-to-hidden weights
        }
        if self.hidden_dims.len() == 2 {
            n += h1 * self.hidden_dims[1];
        }
        n += self.last_hidden() * k; // hidden-to-output
        n += match self.context {
            ContextMode::SharedVector => d,
            ContextMode::PerWord => k * d,
            ContextMode::None | ContextMode::FixedScalar(_) => 0,
        };
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn millions(n: usize) -> f64 {
        (n as f64 / 10_000.0).round() / 100.0
    }

    #[test]
    fn ptb_one_hidden_counts() {
        assert_eq!(
            ModelConfig::wi_srnn(10_000, 4, 100, &[400]).param_count(),
            5_160_100
        );
        assert_eq!(
            ModelConfig::wd_srnn(10_000, 4, 100, &[400]).param_count(),
            6_160_000
        );
        assert_eq!(ModelConfig::rnn(10_000, &[400]).param_count(), 8_160_000);
        assert_eq!(
            millions(ModelConfig::fnn(10_000, 4, 200, &[400]).param_count()),
            6.32
        );
    }

    #[test]
    fn ptb_two_hidden_counts() {
        assert_eq!(
            millions(ModelConfig::fnn(10_000, 4, 200, &[400, 400]).param_count()),
            6.48
        );
        assert_eq!(
            millions(ModelConfig::wi_srnn(10_000, 4, 100, &[400, 400]).param_count()),
            5.32
        );
        assert_eq!(
            millions(ModelConfig::wd_srnn(10_000, 4, 100, &[400, 400]).param_count()),
            6.32
        );
    }

    #[test]
    fn ltcb_counts() {
        assert_eq!(
            millions(ModelConfig::fnn(80_000, 4, 200, &[600, 600]).param_count()),
            64.84
        );
        assert_eq!(
            millions(ModelConfig::fofe(80_000, 4, 200, &[400, 400], 0.6).param_count()),
            48.48
        );
        assert_eq!(
            millions(ModelConfig::fofe(80_000, 4, 200, &[600, 600], 0.6).param_count()),
            64.84
        );
        assert_eq!(
            millions(ModelConfig::wi_srnn(80_000, 4, 200, &[600]).param_count()),
            64.48
        );
        assert_eq!(
            millions(ModelConfig::fofe(80_000, 4, 200, &[600], 0.6).param_count()),
            64.48
        );
        assert_eq!(
            millions(ModelConfig::wd_srnn(80_000, 4, 200, &[600]).param_count()),
            80.48
        );
        assert_eq!(millions(ModelConfig::rnn(80_000, &[600]).param_count()), 96.36);
    }

    #[test]
    fn validation_rejects_bad_combinations() {
        let mut cfg = ModelConfig::rnn(100, &[32]);
        cfg.window = 2;
        assert!(cfg.validate().is_err());

        let mut cfg = ModelConfig::rnn(100, &[32]);
        cfg.embed_dim = 16;
        assert!(cfg.validate().is_err());

        let mut cfg = ModelConfig::fnn(100, 2, 16, &[32]);
        cfg.context = ContextMode::SharedVector;
        assert!(cfg.validate().is_err());

        let mut cfg = ModelConfig::fofe(100, 2, 16, &[32], 0.7);
        assert!(cfg.validate().is_ok());
        cfg.context = ContextMode::FixedScalar(1.5);
        assert!(cfg.validate().is_err());

        let mut cfg = ModelConfig::wd_srnn(100, 2, 16, &[32]);
        cfg.context = ContextMode::SharedVector;
        assert!(cfg.validate().is_err());

        let cfg = ModelConfig::wi_srnn(100, 2, 16, &[32, 32]);
        assert!(cfg.validate().is_ok());
    }
}
