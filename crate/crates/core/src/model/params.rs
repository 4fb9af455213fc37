use super::config::{ContextMode, Mode, ModelConfig};
use crate::numerics::{glorot_init, Matrix, Rng, Scalar};

/// Learnable context weights for the sequential connections.
#[derive(Clone, Debug, PartialEq)]
pub enum ContextWeights<T> {
    /// FNN/RNN (no sequential connections) or fixed-scalar FOFE mode.
    None,
    /// Word-independent: one D-vector shared across the vocabulary.
    Shared(Vec<T>),
    /// Word-dependent: row w scales the context entering word w.
    PerWord(Matrix<T>),
}

/// Dense weight tensors. There are no bias terms anywhere in the family;
/// the published parameter counts only match without them.
#[derive(Clone, Debug, PartialEq)]
pub struct Parameters<T> {
    /// U: K x D word embeddings; row w is the representation of word w.
    pub embed: Matrix<T>,
    /// V_1..V_{N-1}: D x H1 projection-to-hidden weights, index 0 = V_1
    /// (the most recent history position). Empty in RNN mode.
    pub win: Vec<Matrix<T>>,
    /// Optional H1 x H2 weights for the two-hidden-layer variants.
    pub hidden2: Option<Matrix<T>>,
    /// H1 x H1 dense recurrence matrix, RNN mode only.
    pub rec: Option<Matrix<T>>,
    /// W: H_last x K hidden-to-output weights.
    pub out: Matrix<T>,
    pub context: ContextWeights<T>,
}

impl<T: Scalar> Parameters<T> {
    /// Glorot-initializes all connection weights; learned context weights
    /// start uniform in [0,1]. Draw order is fixed (U, V_1.., V_h, V_rec,
    /// W, C) so a seed fully determines the result.
    pub fn init(config: &ModelConfig, rng: &mut Rng) -> Self {
        let k = config.vocab_size;
        let d = config.embed_dim;
        let h1 = config.hidden1();

        let embed = glorot_init(k, d, rng);
        let win = match config.mode {
            Mode::Rnn => Vec::new(),
            _ => (0..config.window).map(|_| glorot_init(d, h1, rng)).collect(),
        };
        let hidden2 = if config.hidden_dims.len() == 2 {
            Some(glorot_init(h1, config.hidden_dims[1], rng))
        } else {
            None
        };
        let rec = match config.mode {
            Mode::Rnn => Some(glorot_init(h1, h1, rng)),
            _ => None,
        };
        let out = glorot_init(config.last_hidden(), k, rng);
        let context = match config.context {
            ContextMode::SharedVector => {
                ContextWeights::Shared((0..d).map(|_| T::from_f64(rng.uniform(0.0, 1.0))).collect())
            }
            ContextMode::PerWord => {
                let data = (0..k * d)
                    .map(|_| T::from_f64(rng.uniform(0.0, 1.0)))
                    .collect();
                ContextWeights::PerWord(Matrix::from_vec(k, d, data).expect("context dims"))
            }
            ContextMode::None | ContextMode::FixedScalar(_) => ContextWeights::None,
        };

        Parameters {
            embed,
            win,
            hidden2,
            rec,
            out,
            context,
        }
    }

    /// Same shapes as `init`, all zeros. Gradient and momentum container.
    pub fn zeros_like(config: &ModelConfig) -> Self {
        let k = config.vocab_size;
        let d = config.embed_dim;
        let h1 = config.hidden1();
        Parameters {
            embed: Matrix::zeros(k, d),
            win: match config.mode {
                Mode::Rnn => Vec::new(),
                _ => (0..config.window).map(|_| Matrix::zeros(d, h1)).collect(),
            },
            hidden2: (config.hidden_dims.len() == 2)
                .then(|| Matrix::zeros(h1, config.hidden_dims[1])),
            rec: (config.mode == Mode::Rnn).then(|| Matrix::zeros(h1, h1)),
            out: Matrix::zeros(config.last_hidden(), k),
            context: match config.context {
                ContextMode::SharedVector => ContextWeights::Shared(vec![T::ZERO; d]),
                ContextMode::PerWord => ContextWeights::PerWord(Matrix::zeros(k, d)),
                _ => ContextWeights::None,
            },
        }
    }

    /// All learnable tensors as flat slices, in a fixed order shared with
    /// `slices_mut` and the flat-vector round trip.
    pub fn slices(&self) -> Vec<&[T]> {
        let mut out: Vec<&[T]> = vec![self.embed.data()];
        for v in &self.win {
            out.push(v.data());
        }
        if let Some(h2) = &self.hidden2 {
            out.push(h2.data());
        }
        if let Some(rec) = &self.rec {
            out.push(rec.data());
        }
        out.push(self.out.data());
        match &self.context {
            ContextWeights::Shared(c) => out.push(c),
            ContextWeights::PerWord(c) => out.push(c.data()),
            ContextWeights::None => {}
        }
        out
    }

    pub fn slices_mut(&mut self) -> Vec<&mut [T]> {
        let mut out: Vec<&mut [T]> = vec![self.embed.data_mut()];
        for v in &mut self.win {
            out.push(v.data_mut());
        }
        if let Some(h2) = &mut self.hidden2 {
            out.push(h2.data_mut());
        }
        if let Some(rec) = &mut self.rec {
            out.push(rec.data_mut());
        }
        out.push(self.out.data_mut());
        match &mut self.context {
            ContextWeights::Shared(c) => out.push(c),
            ContextWeights::PerWord(c) => out.push(c.data_mut()),
            ContextWeights::None => {}
        }
        out
    }

    /// Multiplies every learnable scalar by `k`.
    pub fn scale_all(&mut self, k: T) {
        for slice in self.slices_mut() {
            for v in slice {
                *v *= k;
            }
        }
    }

    /// Total learnable scalars; always equals `config.param_count()`.
    pub fn len(&self) -> usize {
        self.slices().iter().map(|s| s.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn all_finite(&self) -> bool {
        self.slices()
            .iter()
            .all(|s| s.iter().all(|x| x.is_finite()))
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.slices()
            .iter()
            .flat_map(|s| s.iter().map(|x| x.to_f64()))
            .collect()
    }

    pub fn load_f64_slice(&mut self, flat: &[f64]) {
        let mut offset = 0;
        for slice in self.slices_mut() {
            for v in slice.iter_mut() {
                *v = T::from_f64(flat[offset]);
                offset += 1;
            }
        }
        assert_eq!(offset, flat.len(), "flat parameter length mismatch");
    }

    pub fn from_f64_slice(config: &ModelConfig, flat: &[f64]) -> Self {
        let mut p = Self::zeros_like(config);
        p.load_f64_slice(flat);
        p
    }
}

/// Gradients share the exact tensor layout of the parameters they refer to.
pub type Gradients<T> = Parameters<T>;
