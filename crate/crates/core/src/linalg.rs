//! Dense linear algebra used by the trainers and bound evaluators.
//!
//! Everything here is deliberately small: a row-major [`Matrix`], a
//! Cholesky factorization with a ridge rescue for nearly singular inputs,
//! Gram matrix construction, and the log-determinants that appear in the
//! multi-view KL terms.

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("matrix is not numerically positive definite (pivot {index} = {pivot:e})")]
    Singular { index: usize, pivot: f64 },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(LinalgError::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square() && self.max_asymmetry() <= tol
    }

    /// Copies the upper triangle onto the lower one.
    pub fn symmetrize(&mut self) {
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    pub fn add_diagonal(&mut self, v: f64) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)] += v;
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, a) in self.row(i).iter().enumerate() {
                if *a == 0.0 {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · other` without materializing the transpose.
    pub fn tr_matmul(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.rows,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let b_row = other.row(k);
            for (i, a) in self.row(k).iter().enumerate() {
                if *a == 0.0 {
                    continue;
                }
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if self.cols != v.len() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    /// `selfᵀ · v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if self.rows != v.len() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.rows,
                found: v.len(),
            });
        }
        let mut out = vec![0.0; self.cols];
        for (i, vi) in v.iter().enumerate() {
            axpy(*vi, self.row(i), &mut out);
        }
        Ok(out)
    }

    /// Sub-matrix of the given rows and columns.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    /// Scales row `i` by `left[i]` and column `j` by `right[j]`.
    pub fn scale_rows_cols(&self, left: &[f64], right: &[f64]) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| left[i] * self[(i, j)] * right[j])
    }

    /// Smallest eigenvalue of a symmetric matrix (cyclic Jacobi).
    ///
    /// Intended for property checks on small matrices.
    pub fn min_symmetric_eigenvalue(&self) -> f64 {
        symmetric_eigenvalues(self)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// `y += a·x`.
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method.
pub fn symmetric_eigenvalues(m: &Matrix) -> Vec<f64> {
    let n = m.rows();
    let mut a = m.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |j| *j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        let scale: f64 = a.as_slice().iter().map(|v| v * v).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    a.diag()
}

/// Lower-triangular Cholesky factor `L` with `M = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Factors a symmetric positive definite matrix. Only the lower triangle
    /// is read.
    pub fn factor(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(LinalgError::DimensionMismatch {
                expected: m.rows(),
                found: m.cols(),
            });
        }
        let n = m.rows();
        let max_diag = m.diag().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let floor = 1e-14 * max_diag;
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let (upper, below) = l.data.split_at_mut((j + 1) * n);
            let row_j = &mut upper[j * n..];
            let d = m[(j, j)] - norm_sq(&row_j[..j]);
            if d.is_nan() || d <= floor {
                return Err(LinalgError::Singular { index: j, pivot: d });
            }
            let pivot = d.sqrt();
            row_j[j] = pivot;
            let row_j = &row_j[..j];
            for (off, row_i) in below.chunks_exact_mut(n).enumerate() {
                let i = j + 1 + off;
                row_i[j] = (m[(i, j)] - dot(&row_i[..j], row_j)) / pivot;
            }
        }
        Ok(Self { l })
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn lower(&self) -> &Matrix {
        &self.l
    }

    /// `ln |M|` as twice the sum of log-pivots.
    pub fn log_det(&self) -> f64 {
        2.0 * self.l.diag().iter().map(|v| v.ln()).sum::<f64>()
    }

    /// Solves `L y = b` in place.
    pub fn forward_substitute(&self, b: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let row = self.l.row(i);
            let s = b[i] - dot(&row[..i], &b[..i]);
            b[i] = s / row[i];
        }
    }

    /// Solves `Lᵀ x = y` in place.
    pub fn backward_substitute(&self, y: &mut [f64]) {
        let n = self.dim();
        for i in (0..n).rev() {
            y[i] /= self.l[(i, i)];
            let yi = y[i];
            let row = self.l.row(i);
            for k in 0..i {
                y[k] -= row[k] * yi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim(),
                found: b.len(),
            });
        }
        let mut x = b.to_vec();
        self.forward_substitute(&mut x);
        self.backward_substitute(&mut x);
        Ok(x)
    }

    /// Solves `M X = B` column by column.
    pub fn solve_matrix(&self, b: &Matrix) -> Result<Matrix> {
        if b.rows() != self.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim(),
                found: b.rows(),
            });
        }
        let bt = b.transpose();
        let mut xt = Matrix::zeros(b.cols(), b.rows());
        for j in 0..b.cols() {
            let mut col = bt.row(j).to_vec();
            self.forward_substitute(&mut col);
            self.backward_substitute(&mut col);
            xt.row_mut(j).copy_from_slice(&col);
        }
        Ok(xt.transpose())
    }

    /// `L⁻¹ B`, i.e. forward substitution applied to each column.
    pub fn forward_matrix(&self, b: &Matrix) -> Result<Matrix> {
        if b.rows() != self.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim(),
                found: b.rows(),
            });
        }
        let bt = b.transpose();
        let mut xt = Matrix::zeros(b.cols(), b.rows());
        for j in 0..b.cols() {
            let mut col = bt.row(j).to_vec();
            self.forward_substitute(&mut col);
            xt.row_mut(j).copy_from_slice(&col);
        }
        Ok(xt.transpose())
    }
}

/// Default rescue ridge `1e-10·trace(M)/dim` for nearly singular inputs.
pub fn default_ridge(m: &Matrix) -> f64 {
    let n = m.rows().max(1) as f64;
    let r = 1e-10 * m.trace().abs() / n;
    if r > 0.0 {
        r
    } else {
        1e-10
    }
}

/// Factors `M + ridge·I`. When `ridge == 0` and the plain factorization
/// fails, retries once with [`default_ridge`]. Returns the ridge used.
pub fn factor_psd(m: &Matrix, ridge: f64) -> Result<(Cholesky, f64)> {
    if ridge < 0.0 || !ridge.is_finite() {
        return Err(LinalgError::InvalidParameter(format!(
            "ridge must be a nonnegative finite number, got {ridge}"
        )));
    }
    let shifted = |r: f64| {
        let mut a = m.clone();
        a.add_diagonal(r);
        a
    };
    match Cholesky::factor(&shifted(ridge)) {
        Ok(c) => Ok((c, ridge)),
        Err(LinalgError::Singular { .. }) if ridge == 0.0 => {
            let r = default_ridge(m);
            Cholesky::factor(&shifted(r)).map(|c| (c, r))
        }
        Err(e) => Err(e),
    }
}

/// Solves `(M + ridge·I) x = b` for symmetric positive (semi)definite `M`.
pub fn solve_psd(m: &Matrix, b: &[f64], ridge: f64) -> Result<Vec<f64>> {
    if !m.is_square() || m.rows() != b.len() {
        return Err(LinalgError::DimensionMismatch {
            expected: m.rows(),
            found: b.len(),
        });
    }
    let (chol, _) = factor_psd(m, ridge)?;
    chol.solve(b)
}

/// Kernel used to build Gram matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Kernel::Linear => dot(a, b),
            Kernel::Rbf { gamma } => {
                let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d).exp()
            }
        }
    }
}

/// A Gram matrix tagged with the kernel that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub kernel: Kernel,
    pub values: Matrix,
}

impl KernelMatrix {
    pub fn new(kernel: Kernel, values: Matrix) -> Self {
        Self { kernel, values }
    }

    pub fn linear(values: Matrix) -> Self {
        Self::new(Kernel::Linear, values)
    }

    pub fn size(&self) -> usize {
        self.values.rows()
    }
}

/// Gram matrix `K[i][j] = k(xᵢ, xⱼ)`.
pub fn gram<S: AsRef<[f64]>>(samples: &[S], kernel: Kernel) -> Result<KernelMatrix> {
    let first = samples.first().ok_or(LinalgError::Empty("gram samples"))?;
    let dim = first.as_ref().len();
    for s in samples {
        if s.as_ref().len() != dim {
            return Err(LinalgError::DimensionMismatch {
                expected: dim,
                found: s.as_ref().len(),
            });
        }
    }
    let n = samples.len();
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(samples[i].as_ref(), samples[j].as_ref());
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(KernelMatrix::new(kernel, k))
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(LinalgError::InvalidParameter(format!(
            "sigma must be positive and finite, got {sigma}"
        )))
    }
}

/// `ln |I + x̃x̃ᵀ/σ²| = ln(1 + ‖x̃‖²/σ²)`; the outer product has a single
/// nonzero eigenvalue.
pub fn rank1_logdet(x_tilde: &[f64], sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok((norm_sq(x_tilde) / (sigma * sigma)).ln_1p())
}

/// Which side of `det(I_d + XᵀX) = det(I_u + XXᵀ)` to factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScatterSide {
    /// `d × d` feature-space matrix.
    Feature,
    /// `u × u` sample-space matrix.
    Sample,
}

/// `ln |I_d + (1/(uσ²)) Σⱼ x̃ⱼx̃ⱼᵀ|`, factoring whichever side is smaller.
pub fn logdet_identity_plus_scatter<S: AsRef<[f64]>>(rows: &[S], sigma: f64) -> Result<f64> {
    let d = rows.first().map_or(0, |r| r.as_ref().len());
    let side = if d <= rows.len() {
        ScatterSide::Feature
    } else {
        ScatterSide::Sample
    };
    logdet_identity_plus_scatter_on(rows, sigma, side)
}

pub fn logdet_identity_plus_scatter_on<S: AsRef<[f64]>>(
    rows: &[S],
    sigma: f64,
    side: ScatterSide,
) -> Result<f64> {
    check_sigma(sigma)?;
    let first = rows.first().ok_or(LinalgError::Empty("scatter rows"))?;
    let d = first.as_ref().len();
    for r in rows {
        if r.as_ref().len() != d {
            return Err(LinalgError::DimensionMismatch {
                expected: d,
                found: r.as_ref().len(),
            });
        }
    }
    let u = rows.len();
    let s = 1.0 / (u as f64 * sigma * sigma);
    let mut m = match side {
        ScatterSide::Feature => {
            let mut m = Matrix::zeros(d, d);
            for r in rows {
                let r = r.as_ref();
                for (i, ri) in r.iter().enumerate() {
                    if *ri == 0.0 {
                        continue;
                    }
                    axpy(s * ri, r, m.row_mut(i));
                }
            }
            m
        }
        ScatterSide::Sample => {
            let mut m = Matrix::zeros(u, u);
            for i in 0..u {
                for j in i..u {
                    let v = s * dot(rows[i].as_ref(), rows[j].as_ref());
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            m
        }
    };
    m.add_diagonal(1.0);
    Ok(Cholesky::factor(&m)?.log_det())
}
