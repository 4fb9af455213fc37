//! Deterministic dense kernels: matrices, activations, stable softmax,
//! seeded randomness, and the finite-difference gradient oracle.

mod funcs;
mod matrix;
mod rng;
mod scalar;

pub use funcs::{
    finite_diff_grad, glorot_init, relu, row_lookup, softmax, softmax_rows, tanh_act,
};
pub use matrix::{mul_at_into, mul_bt_into, mul_into, Matrix};
pub use rng::Rng;
pub use scalar::Scalar;
