use rayon::prelude::*;

use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Row-major dense matrix. The multiply kernels keep a fixed per-element
/// summation order (inner index ascending), so results are bit-identical
/// for any thread count: rayon only ever splits work across disjoint
/// output rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Below this many multiply-adds the rayon dispatch overhead dominates.
const PAR_FLOP_THRESHOLD: usize = 1 << 16;

/// Output rows processed per pass over the streamed operand. Blocking keeps
/// the kernels from re-reading a large right-hand matrix once per row; it
/// never changes the per-element summation order.
const ROW_BLOCK: usize = 16;

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::ZERO; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        debug_assert!(
            data.iter().all(|x| x.is_finite()),
            "non-finite matrix entries"
        );
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(Error::Shape("ragged rows in matrix literal".into()));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn fill(&mut self, v: T) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::ONE);
        }
        m
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn scale(&mut self, k: T) {
        self.data.iter_mut().for_each(|x| *x *= k);
    }

    pub fn add_assign(&mut self, other: &Matrix<T>) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
    }

    /// self += k * other
    pub fn add_scaled(&mut self, other: &Matrix<T>, k: T) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += k * *b;
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn transposed(&self) -> Matrix<T> {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for (j, &v) in self.row(i).iter().enumerate() {
                out.set(j, i, v);
            }
        }
        out
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &Matrix<T>) -> Result<Matrix<T>> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "matmul mismatch: {}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        mul_into(&mut out, self, rhs);
        Ok(out)
    }
}

fn par_row_blocks<T: Scalar>(
    out: &mut Matrix<T>,
    flops: usize,
    body: impl Fn(usize, &mut [T]) + Send + Sync,
) {
    let chunk = out.cols * ROW_BLOCK;
    if flops >= PAR_FLOP_THRESHOLD {
        out.data
            .par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(blk, rows)| body(blk * ROW_BLOCK, rows));
    } else {
        for (blk, rows) in out.data.chunks_mut(chunk).enumerate() {
            body(blk * ROW_BLOCK, rows);
        }
    }
}

/// out += a * b, shapes (m,k)*(k,n) -> (m,n). Summation runs in ascending
/// k for every output element.
pub fn mul_into<T: Scalar>(out: &mut Matrix<T>, a: &Matrix<T>, b: &Matrix<T>) {
    assert_eq!(a.cols, b.rows, "mul_into inner dims");
    assert_eq!((out.rows, out.cols), (a.rows, b.cols), "mul_into out dims");
    let (inner, n) = (a.cols, b.cols);
    let (a_data, b_data) = (&a.data, &b.data);
    par_row_blocks(out, a.rows * inner * n, |i0, rows| {
        for k in 0..inner {
            let b_row = &b_data[k * n..(k + 1) * n];
            for (li, out_row) in rows.chunks_mut(n).enumerate() {
                let aik = a_data[(i0 + li) * inner + k];
                for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                    *o += aik * bkj;
                }
            }
        }
    });
}

/// out += a * b^T, shapes (m,k)*(n,k) -> (m,n).
pub fn mul_bt_into<T: Scalar>(out: &mut Matrix<T>, a: &Matrix<T>, b: &Matrix<T>) {
    assert_eq!(a.cols, b.cols, "mul_bt_into inner dims");
    assert_eq!((out.rows, out.cols), (a.rows, b.rows), "mul_bt_into out dims");
    let inner = a.cols;
    let n = b.rows;
    let (a_data, b_data) = (&a.data, &b.data);
    par_row_blocks(out, a.rows * inner * n, |i0, rows| {
        for j in 0..n {
            let b_row = &b_data[j * inner..(j + 1) * inner];
            for (li, out_row) in rows.chunks_mut(n).enumerate() {
                let a_row = &a_data[(i0 + li) * inner..(i0 + li + 1) * inner];
                let mut acc = T::ZERO;
                for (&x, &y) in a_row.iter().zip(b_row) {
                    acc += x * y;
                }
                out_row[j] += acc;
            }
        }
    });
}

/// out += a^T * b, shapes (k,m)*(k,n) -> (m,n). The reduction over k runs
/// in ascending order for every output row.
pub fn mul_at_into<T: Scalar>(out: &mut Matrix<T>, a: &Matrix<T>, b: &Matrix<T>) {
    assert_eq!(a.rows, b.rows, "mul_at_into inner dims");
    assert_eq!((out.rows, out.cols), (a.cols, b.cols), "mul_at_into out dims");
    let (k_dim, m, n) = (a.rows, a.cols, b.cols);
    let (a_data, b_data) = (&a.data, &b.data);
    par_row_blocks(out, k_dim * m * n, |i0, rows| {
        for k in 0..k_dim {
            let b_row = &b_data[k * n..(k + 1) * n];
            for (li, out_row) in rows.chunks_mut(n).enumerate() {
                let aki = a_data[k * m + i0 + li];
                for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                    *o += aki * bkj;
                }
            }
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    fn random_matrix(rows: usize, cols: usize, rng: &mut Rng) -> Matrix<f64> {
        let data = (0..rows * cols).map(|_| rng.uniform(-1.0, 1.0)).collect();
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    // Naive triple-loop oracle, j-then-k ordering.
    fn naive_matmul(a: &Matrix<f64>, b: &Matrix<f64>) -> Matrix<f64> {
        let mut out = Matrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut acc = 0.0;
                for k in 0..a.cols() {
                    acc += a.get(i, k) * b.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    #[test]
    fn identity_is_neutral() {
        let mut rng = Rng::new(1);
        let b = random_matrix(4, 3, &mut rng);
        let id = Matrix::<f64>::identity(4);
        assert_eq!(id.matmul(&b).unwrap(), b);
    }

    #[test]
    fn one_by_one() {
        let a = Matrix::from_vec(1, 1, vec![2.0f64]).unwrap();
        let b = Matrix::from_vec(1, 1, vec![3.0f64]).unwrap();
        assert_eq!(a.matmul(&b).unwrap().get(0, 0), 6.0);
    }

    #[test]
    fn matches_naive_oracle_f32() {
        let mut rng = Rng::new(5);
        let a = random_matrix(5, 4, &mut rng).map(|x| x as f32);
        let b = random_matrix(4, 3, &mut rng).map(|x| x as f32);
        let got = a.matmul(&b).unwrap();
        let want = naive_matmul(&a.map(f64::from), &b.map(f64::from));
        for i in 0..5 {
            for j in 0..3 {
                let g = got.get(i, j) as f64;
                let w = want.get(i, j);
                assert!(
                    (g - w).abs() <= 1e-6 * w.abs().max(1.0),
                    "({i},{j}): {g} vs {w}"
                );
            }
        }
    }

    #[test]
    fn matches_naive_oracle_small_shapes() {
        let mut rng = Rng::new(17);
        for _ in 0..20 {
            let m = 1 + rng.below(8);
            let k = 1 + rng.below(8);
            let n = 1 + rng.below(8);
            let a = random_matrix(m, k, &mut rng);
            let b = random_matrix(k, n, &mut rng);
            let got = a.matmul(&b).unwrap();
            let want = naive_matmul(&a, &b);
            for i in 0..m {
                for j in 0..n {
                    assert!((got.get(i, j) - want.get(i, j)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_error() {
        let a = Matrix::<f64>::zeros(2, 3);
        let b = Matrix::<f64>::zeros(4, 2);
        assert!(matches!(a.matmul(&b), Err(Error::Shape(_))));
    }

    #[test]
    fn transposed_kernels_match_explicit_transpose() {
        let mut rng = Rng::new(23);
        let a = random_matrix(6, 5, &mut rng);
        let b = random_matrix(6, 4, &mut rng);

        // a^T * b via kernel vs building a^T explicitly.
        let mut got = Matrix::zeros(5, 4);
        mul_at_into(&mut got, &a, &b);
        let mut at = Matrix::zeros(5, 6);
        for i in 0..6 {
            for j in 0..5 {
                at.set(j, i, a.get(i, j));
            }
        }
        let want = at.matmul(&b).unwrap();
        for i in 0..5 {
            for j in 0..4 {
                assert!((got.get(i, j) - want.get(i, j)).abs() < 1e-12);
            }
        }

        // a * c^T via kernel vs building c^T explicitly.
        let c = random_matrix(7, 5, &mut rng);
        let mut got = Matrix::zeros(6, 7);
        mul_bt_into(&mut got, &a, &c);
        let mut ct = Matrix::zeros(5, 7);
        for i in 0..7 {
            for j in 0..5 {
                ct.set(j, i, c.get(i, j));
            }
        }
        let want = a.matmul(&ct).unwrap();
        for i in 0..6 {
            for j in 0..7 {
                assert!((got.get(i, j) - want.get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bt_kernel_equals_mul_into_with_transpose_bitwise() {
        // backward propagates error either as a * b^T or as a * (b^T
        // materialized); both contract over the same axis in ascending
        // order, so they must agree bit for bit.
        let mut rng = Rng::new(77);
        for (m, k, n) in [(3, 5, 4), (200, 10_000, 400), (64, 400, 100)] {
            let a = random_matrix(m, k, &mut rng).map(|x| x as f32);
            let b = random_matrix(n, k, &mut rng).map(|x| x as f32);
            let mut via_bt = Matrix::zeros(m, n);
            mul_bt_into(&mut via_bt, &a, &b);
            let mut via_t = Matrix::zeros(m, n);
            mul_into(&mut via_t, &a, &b.transposed());
            assert_eq!(via_bt, via_t, "{m}x{k}x{n}");
        }
    }

    #[test]
    fn bit_identical_for_any_thread_count() {
        // Well above the parallel threshold; row partitioning must never
        // change the per-element summation order.
        let mut rng = Rng::new(41);
        let a = random_matrix(96, 80, &mut rng).map(|x| x as f32);
        let b = random_matrix(80, 96, &mut rng).map(|x| x as f32);
        let mut results = Vec::new();
        for threads in [1usize, 2, 7] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let product = pool.install(|| a.matmul(&b).unwrap());
            let mut at_p = Matrix::zeros(80, 96);
            let mut a_at = Matrix::zeros(96, 96);
            pool.install(|| {
                mul_at_into(&mut at_p, &a, &product);
                mul_bt_into(&mut a_at, &a, &a);
            });
            results.push((product, at_p, a_at));
        }
        assert_eq!(results[0], results[1]);
        assert_eq!(results[0], results[2]);
    }

    #[test]
    fn large_product_deterministic_across_runs() {
        // Crosses the parallel threshold; row partitioning must not change
        // the summation order.
        let mut rng = Rng::new(31);
        let a = random_matrix(64, 48, &mut rng);
        let b = random_matrix(48, 64, &mut rng);
        let first = a.matmul(&b).unwrap();
        for _ in 0..3 {
            assert_eq!(first, a.matmul(&b).unwrap());
        }
        let want = naive_matmul(&a, &b);
        for i in 0..64 {
            for j in 0..64 {
                assert!((first.get(i, j) - want.get(i, j)).abs() < 1e-10);
            }
        }
    }
}
