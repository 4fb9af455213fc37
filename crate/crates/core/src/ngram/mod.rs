//! Order-5 modified Kneser-Ney back-off modeling and linear interpolation
//! with neural probability streams.

mod counts;
mod interp;
mod model;
mod persist;

pub use counts::{count_ngrams, NgramCounts};
pub use interp::{interpolate, interpolated_nll, tune_lambda};
pub use model::{estimate_kn, KNModel};
