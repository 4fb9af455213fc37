// Indexed loops are the house style in the math kernels and their tests;
// iterator rewrites obscure the subscript structure of the formulas.
#![allow(clippy::needless_range_loop)]

//! Neural language modeling with sequential recurrence at the projection
//! layer, built from scratch.
//!
//! The model family covers feedforward n-gram networks (FNN), simple
//! recurrent networks (RNN), and the sequential recurrent network (SRNN)
//! whose per-word projections are enhanced with recurrent context through
//! word-independent or word-dependent context weights. A fixed scalar
//! forgetting factor with identity activation recovers the FOFE encoding.
//! Training uses SGD with momentum, weight decay, truncated BPTT, and a
//! validation-driven learning-rate halving schedule. An order-5 modified
//! Kneser-Ney model supports baseline evaluation and interpolation.

pub mod analysis;
pub mod corpus;
pub mod error;
pub mod model;
pub mod ngram;
pub mod numerics;
pub mod train;

pub use error::{Error, Result};
