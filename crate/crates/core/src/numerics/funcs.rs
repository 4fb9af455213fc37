use super::matrix::Matrix;
use super::rng::Rng;
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Row `id` of `table`. One-hot encodings never materialize: `onehot(id) * U`
/// is exactly a row read.
pub fn row_lookup<T: Scalar>(table: &Matrix<T>, id: u32) -> Result<&[T]> {
    let id = id as usize;
    if id >= table.rows() {
        return Err(Error::Data(format!(
            "row id {id} out of range for {} rows",
            table.rows()
        )));
    }
    Ok(table.row(id))
}

pub fn relu<T: Scalar>(x: &mut [T]) {
    for v in x {
        if *v < T::ZERO {
            *v = T::ZERO;
        }
    }
}

pub fn tanh_act<T: Scalar>(x: &mut [T]) {
    for v in x {
        *v = v.tanh();
    }
}

/// In-place stable softmax: exp(x - max(x)) normalized to sum 1. The
/// normalizer accumulates at f64 so the distribution sums to 1 within 1e-6
/// even for 80k-entry f32 vectors.
pub fn softmax<T: Scalar>(x: &mut [T]) {
    if x.is_empty() {
        return;
    }
    let mut max = x[0];
    for &v in x.iter() {
        max = max.maximum(v);
    }
    let mut sum = 0.0f64;
    for v in x.iter_mut() {
        *v = (*v - max).exp();
        sum += v.to_f64();
    }
    let inv = T::from_f64(1.0 / sum);
    for v in x.iter_mut() {
        *v *= inv;
    }
}

/// Softmax applied to every row of a matrix.
pub fn softmax_rows<T: Scalar>(m: &mut Matrix<T>) {
    for r in 0..m.rows() {
        softmax(m.row_mut(r));
    }
}

/// Normalized (Glorot) initialization: uniform in +-sqrt(6 / (rows + cols)).
pub fn glorot_init<T: Scalar>(rows: usize, cols: usize, rng: &mut Rng) -> Matrix<T> {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols)
        .map(|_| T::from_f64(rng.uniform(-bound, bound)))
        .collect();
    Matrix::from_vec(rows, cols, data).expect("glorot dims")
}

/// Central-difference gradient estimate of `loss` at `theta`:
/// (loss(theta + eps e_i) - loss(theta - eps e_i)) / 2 eps per coordinate.
/// The verification oracle for every hand-derived backward pass; callers
/// must evaluate `loss` at f64.
pub fn finite_diff_grad(loss: impl Fn(&[f64]) -> f64, theta: &[f64], eps: f64) -> Vec<f64> {
    let mut point = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for i in 0..theta.len() {
        let orig = point[i];
        point[i] = orig + eps;
        let up = loss(&point);
        point[i] = orig - eps;
        let down = loss(&point);
        point[i] = orig;
        grad.push((up - down) / (2.0 * eps));
    }
    grad
}
