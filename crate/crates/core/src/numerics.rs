//! Dense numerical kernels: a small row-major matrix, Gaussian elimination,
//! power iteration and a bracketed root finder. Self-contained on purpose so
//! the model code has no opaque solver behind it.

use crate::error::Error;
use crate::Result;

/// Relative pivot threshold below which elimination reports a singular system.
pub const SINGULAR_TOL: f64 = 1e-13;
/// Default convergence tolerance on successive eigenvalue estimates.
pub const EIG_TOL: f64 = 1e-12;
/// Default iteration cap for power iteration.
pub const EIG_MAX_ITER: u64 = 1_000_000;
/// Default interval width tolerance for bisection.
pub const ROOT_TOL: f64 = 1e-12;

const EIG_VECTOR_TOL: f64 = 1e-10;
const EIG_RESIDUAL_TOL: f64 = 5e-11;
const ROOT_MAX_ITER: u32 = 200;

/// Row-major dense matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        DenseMatrix { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Elementwise sum; panics on shape mismatch.
    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Copy of the block with rows r0..r1 and columns c0..c1.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> DenseMatrix {
        assert!(r0 <= r1 && r1 <= self.rows && c0 <= c1 && c1 <= self.cols);
        let mut out = DenseMatrix::zeros(r1 - r0, c1 - c0);
        for i in r0..r1 {
            for j in c0..c1 {
                out.set(i - r0, j - c0, self.get(i, j));
            }
        }
        out
    }

    /// A x.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for (i, o) in out.iter_mut().enumerate() {
            let row = self.row(i);
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            *o = acc;
        }
        out
    }

    /// A^T x (x as a row vector from the left).
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            let row = self.row(i);
            for (o, a) in out.iter_mut().zip(row) {
                *o += xi * a;
            }
        }
        out
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum())
            .fold(0.0, f64::max)
    }
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
pub fn solve_linear(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "solve_linear needs a square matrix");
    assert_eq!(n, b.len());
    let scale = a.norm_inf();
    if n == 0 {
        return Ok(Vec::new());
    }
    if scale == 0.0 {
        return Err(Error::SingularSystem);
    }

    let mut m = a.clone();
    let mut rhs = b.to_vec();
    for col in 0..n {
        // Pivot: largest magnitude on or below the diagonal.
        let mut pivot_row = col;
        let mut pivot_val = m.get(col, col).abs();
        for r in col + 1..n {
            let v = m.get(r, col).abs();
            if v > pivot_val {
                pivot_row = r;
                pivot_val = v;
            }
        }
        if pivot_val < SINGULAR_TOL * scale {
            return Err(Error::SingularSystem);
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = m.get(col, j);
                m.set(col, j, m.get(pivot_row, j));
                m.set(pivot_row, j, tmp);
            }
            rhs.swap(col, pivot_row);
        }
        let pivot = m.get(col, col);
        for r in col + 1..n {
            let factor = m.get(r, col) / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                let v = m.get(r, j) - factor * m.get(col, j);
                m.set(r, j, v);
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    // Back substitution.
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        for (a, xv) in m.row(i)[i + 1..].iter().zip(&x[i + 1..]) {
            acc -= a * xv;
        }
        x[i] = acc / m.get(i, i);
    }
    Ok(x)
}

/// Dominant eigenvalue with right and left eigenvectors, both scaled to unit
/// infinity norm.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
    pub iterations: u64,
    pub residual: f64,
}

fn dominant_direction<F>(matvec: F, dim: usize, tol: f64, max_iter: u64) -> Result<(f64, Vec<f64>, u64, f64)>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut x = vec![1.0; dim];
    let mut lambda_prev = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let y = matvec(&x);
        let norm = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if norm == 0.0 {
            // x is annihilated exactly: a genuine eigenvector for eigenvalue 0.
            return Ok((0.0, x, it, 0.0));
        }
        let lambda = norm;
        residual = y
            .iter()
            .zip(&x)
            .map(|(yi, xi)| (yi - lambda * xi).abs())
            .fold(0.0, f64::max);
        let next: Vec<f64> = y.iter().map(|v| v / norm).collect();
        let delta_x = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let converged = (lambda - lambda_prev).abs() < tol
            && delta_x < EIG_VECTOR_TOL
            && residual <= EIG_RESIDUAL_TOL;
        x = next;
        lambda_prev = lambda;
        if converged {
            return Ok((lambda, x, it, residual));
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual,
    })
}

/// Power iteration for a nonnegative square matrix, from a deterministic
/// all-ones start. Converges when successive eigenvalue estimates move less
/// than `tol`, the normalized vector stabilizes, and the residual
/// `max(|A v - r v|, |w A - r w|)` drops below 1e-10.
pub fn power_iteration(a: &DenseMatrix, tol: f64, max_iter: u64) -> Result<EigenPair> {
    assert_eq!(a.rows(), a.cols(), "power_iteration needs a square matrix");
    let n = a.rows();
    let (rval, right, rit, rres) = dominant_direction(|x| a.mul_vec(x), n, tol, max_iter)?;
    let (lval, left, lit, _) = dominant_direction(|x| a.tr_mul_vec(x), n, tol, max_iter)?;
    if (rval - lval).abs() > 1e-9 * rval.max(1.0) {
        return Err(Error::NonConvergence {
            iterations: rit + lit,
            residual: (rval - lval).abs(),
        });
    }
    // Residual of the left vector against the unified eigenvalue.
    let lres = a
        .tr_mul_vec(&left)
        .iter()
        .zip(&left)
        .map(|(yi, xi)| (yi - rval * xi).abs())
        .fold(0.0, f64::max);
    Ok(EigenPair {
        value: rval,
        right,
        left,
        iterations: rit + lit,
        residual: rres.max(lres),
    })
}

/// Bisection on [lo, hi]; requires a sign change and returns the midpoint of
/// the final interval of width `tol`.
pub fn find_root_bracketed<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    assert!(lo < hi, "empty bracket");
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::InvalidBracket);
    }
    let mut a = lo;
    let mut b = hi;
    let mut fa = flo;
    for _ in 0..ROOT_MAX_ITER {
        if b - a <= tol {
            break;
        }
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}
