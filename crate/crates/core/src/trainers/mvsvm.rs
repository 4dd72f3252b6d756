//! Co-regularized two-view SVM (MvSVM) and its semi-supervised variant
//! (SMvSVM).
//!
//! Primal, with `N = n + u` points of which the first `n` are labeled:
//!
//! ```text
//! min ½(α₁ᵀK₁α₁ + α₂ᵀK₂α₂) + C₁Σᵢ(ξ₁ᵢ + ξ₂ᵢ) + C₂‖K₁α₁ − K₂α₂‖²
//! s.t. yᵢ(K₁α₁)ᵢ ≥ 1 − ξ₁ᵢ,  yᵢ(K₂α₂)ᵢ ≥ 1 − ξ₂ᵢ,  ξ ≥ 0,  i ≤ n
//! ```
//!
//! The dual is a box QP over `(λ₁, λ₂) ∈ [0, C₁]²ⁿ`. Two ways of forming
//! its Hessian are provided:
//!
//! * [`DualRoute::Schur`] follows the block-elimination formulas with
//!   `M₁ = K̃₁ − K̄₁K̃₂⁻¹K̄₂`. It needs `K̃ᵥ` to be invertible, which fails
//!   for linear kernels with more points than features.
//! * [`DualRoute::Resolvent`] uses the identity
//!   `H = blockdiag(YK₁Y, YK₂Y) − 2C₂QᵀS⁻¹Q` with `S = I + 2C₂(K₁ + K₂)`
//!   and `Q = [K₁Y, −K₂Y]` restricted to labeled columns. `S` is always
//!   positive definite, so this route works for rank-deficient Gram
//!   matrices. The recovered coefficients satisfy
//!   `α₁ + 2C₂(K₁α₁ − K₂α₂) = Yλ₁`, which implies the stationarity
//!   conditions of the primal.

use serde::{Deserialize, Serialize};

use super::{check_labels, check_penalty, LinearWeights, Result, TrainError, View};
use crate::data::TwoViewSample;
use crate::linalg::{axpy, factor_psd, norm, norm_sq, Cholesky, Kernel, KernelMatrix, Matrix};
use crate::qp::{solve_box_qp, QpProblem, SolverOptions};

/// The co-regularized system matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct CoRegMatrices {
    /// `K₁ + 2C₂K₁K₁`.
    pub k_tilde1: Matrix,
    /// `2C₂K₁K₂`.
    pub k_bar1: Matrix,
    pub k_tilde2: Matrix,
    /// `2C₂K₂K₁`, stored as the exact transpose of `k_bar1`.
    pub k_bar2: Matrix,
    /// `K̃₁ − K̄₁K̃₂⁻¹K̄₂`.
    pub m1: Matrix,
    pub m2: Matrix,
}

fn check_gram_pair(k1: &Matrix, k2: &Matrix) -> Result<usize> {
    if !k1.is_square() || !k2.is_square() || k1.rows() != k2.rows() {
        return Err(TrainError::Input(format!(
            "Gram matrices must be square and equally sized, got {}x{} and {}x{}",
            k1.rows(),
            k1.cols(),
            k2.rows(),
            k2.cols()
        )));
    }
    Ok(k1.rows())
}

pub fn assemble_mvsvm_matrices(k1: &Matrix, k2: &Matrix, c2: f64) -> Result<CoRegMatrices> {
    check_gram_pair(k1, k2)?;
    check_penalty("C2", c2, true)?;
    let tilde = |k: &Matrix| -> Result<Matrix> {
        let mut t = k.add(&k.matmul(k)?.scale(2.0 * c2))?;
        t.symmetrize();
        Ok(t)
    };
    let k_tilde1 = tilde(k1)?;
    let k_tilde2 = tilde(k2)?;
    let k_bar1 = k1.matmul(k2)?.scale(2.0 * c2);
    let k_bar2 = k_bar1.transpose();

    let (m1, m2) = if c2 == 0.0 {
        (k_tilde1.clone(), k_tilde2.clone())
    } else {
        let schur = |kt: &Matrix, kb: &Matrix, kt_other: &Matrix, kb_other: &Matrix| -> Result<Matrix> {
            let (chol, _) = factor_psd(kt_other, 0.0)?;
            let mut m = kt.sub(&kb.matmul(&chol.solve_matrix(kb_other)?)?)?;
            m.symmetrize();
            Ok(m)
        };
        (
            schur(&k_tilde1, &k_bar1, &k_tilde2, &k_bar2)?,
            schur(&k_tilde2, &k_bar2, &k_tilde1, &k_bar1)?,
        )
    };
    Ok(CoRegMatrices {
        k_tilde1,
        k_bar1,
        k_tilde2,
        k_bar2,
        m1,
        m2,
    })
}

/// How the kernel-space dual Hessian is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualRoute {
    Schur,
    #[default]
    Resolvent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MvSvmModel {
    /// Expansion coefficients over all `n + u` points.
    pub alpha1: Vec<f64>,
    pub alpha2: Vec<f64>,
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub labels: Vec<f64>,
    pub c1: f64,
    pub c2: f64,
    pub semi_supervised: bool,
    pub kernel: Kernel,
    /// Value of `½λᵀHλ − 1ᵀλ` at the solution.
    pub objective: f64,
    pub iterations: usize,
}

/// `Y` applied to `λ` and zero-padded to length `total`.
fn padded(y: &[f64], lambda: &[f64], total: usize) -> Vec<f64> {
    let mut v = vec![0.0; total];
    for ((vi, yi), li) in v.iter_mut().zip(y).zip(lambda) {
        *vi = yi * li;
    }
    v
}

/// `K[:, 0..n]·Y`, an `N × n` matrix.
fn labeled_columns(k: &Matrix, y: &[f64]) -> Matrix {
    let n = y.len();
    Matrix::from_fn(k.rows(), n, |i, j| k[(i, j)] * y[j])
}

fn block_hessian(n: usize, f: impl Fn(usize, usize) -> f64) -> Matrix {
    let mut h = Matrix::from_fn(2 * n, 2 * n, f);
    h.symmetrize();
    h
}

/// Trains on kernel matrices over `n + u` points ordered labeled first;
/// `y` holds the `n` labels.
pub fn train_coregularized(
    k1: &KernelMatrix,
    k2: &KernelMatrix,
    y: &[f64],
    c1: f64,
    c2: f64,
    route: DualRoute,
    opts: &SolverOptions,
) -> Result<MvSvmModel> {
    check_labels(y)?;
    check_penalty("C1", c1, false)?;
    check_penalty("C2", c2, true)?;
    let total = check_gram_pair(&k1.values, &k2.values)?;
    if k1.kernel != k2.kernel {
        return Err(TrainError::Usage("both views must use the same kernel".into()));
    }
    let n = y.len();
    if total < n {
        return Err(TrainError::Input(format!("{n} labels for {total} kernel rows")));
    }
    let (k1v, k2v) = (&k1.values, &k2.values);
    let p1 = labeled_columns(k1v, y);
    let p2 = labeled_columns(k2v, y);

    // Hessian plus a recovery closure mapping (λ₁, λ₂) to (α₁, α₂).
    type Recover = Box<dyn Fn(&[f64], &[f64]) -> Result<(Vec<f64>, Vec<f64>)>>;
    let (h, recover): (Matrix, Recover) = match route {
        DualRoute::Resolvent => {
            let mut s = k1v.add(k2v)?.scale(2.0 * c2);
            s.add_diagonal(1.0);
            s.symmetrize();
            let chol = Cholesky::factor(&s)?;
            let q = Matrix::from_fn(total, 2 * n, |i, j| if j < n { p1[(i, j)] } else { -p2[(i, j - n)] });
            let w = chol.forward_matrix(&q)?;
            let wtw = w.tr_matmul(&w)?;
            let h = block_hessian(n, |i, j| {
                let base = match (i < n, j < n) {
                    (true, true) => y[i] * y[j] * k1v[(i, j)],
                    (false, false) => y[i - n] * y[j - n] * k2v[(i - n, j - n)],
                    _ => 0.0,
                };
                base - 2.0 * c2 * wtw[(i, j)]
            });
            let (p1, p2, y) = (p1.clone(), p2.clone(), y.to_vec());
            let recover: Recover = Box::new(move |l1, l2| {
                let mut v = p1.mul_vec(l1)?;
                axpy(-1.0, &p2.mul_vec(l2)?, &mut v);
                let t = chol.solve(&v)?;
                let mut a1 = padded(&y, l1, total);
                let mut a2 = padded(&y, l2, total);
                axpy(-2.0 * c2, &t, &mut a1);
                axpy(2.0 * c2, &t, &mut a2);
                Ok((a1, a2))
            });
            (h, recover)
        }
        DualRoute::Schur => {
            let mats = assemble_mvsvm_matrices(k1v, k2v, c2)?;
            let (cm1, _) = factor_psd(&mats.m1, 0.0)?;
            let (cm2, _) = factor_psd(&mats.m2, 0.0)?;
            let m1p1 = cm1.solve_matrix(&p1)?;
            let m2p2 = cm2.solve_matrix(&p2)?;
            let a = p1.tr_matmul(&m1p1)?;
            let d = p2.tr_matmul(&m2p2)?;
            // K̃ᵥ⁻¹ only matters when the views are coupled
            let tilde_inv = if c2 > 0.0 {
                Some((factor_psd(&mats.k_tilde1, 0.0)?.0, factor_psd(&mats.k_tilde2, 0.0)?.0))
            } else {
                None
            };
            let b = match &tilde_inv {
                Some((_, kt2)) => m1p1.tr_matmul(&mats.k_bar1.matmul(&kt2.solve_matrix(&p2)?)?)?,
                None => Matrix::zeros(n, n),
            };
            let h = block_hessian(n, |i, j| match (i < n, j < n) {
                (true, true) => a[(i, j)],
                (true, false) => b[(i, j - n)],
                (false, true) => b[(j, i - n)],
                (false, false) => d[(i - n, j - n)],
            });
            let (p1, p2) = (p1.clone(), p2.clone());
            let recover: Recover = Box::new(move |l1, l2| {
                let big1 = p1.mul_vec(l1)?;
                let big2 = p2.mul_vec(l2)?;
                let (mut r1, mut r2) = (big1.clone(), big2.clone());
                if let Some((kt1, kt2)) = &tilde_inv {
                    axpy(1.0, &mats.k_bar1.mul_vec(&kt2.solve(&big2)?)?, &mut r1);
                    axpy(1.0, &mats.k_bar2.mul_vec(&kt1.solve(&big1)?)?, &mut r2);
                }
                Ok((cm1.solve(&r1)?, cm2.solve(&r2)?))
            });
            (h, recover)
        }
    };

    let sol = solve_box_qp(
        &QpProblem::new(h, vec![-1.0; 2 * n], vec![0.0; 2 * n], vec![c1; 2 * n])?,
        opts,
    )?;
    let (l1, l2) = sol.x.split_at(n);
    let (alpha1, alpha2) = recover(l1, l2)?;
    Ok(MvSvmModel {
        alpha1,
        alpha2,
        lambda1: l1.to_vec(),
        lambda2: l2.to_vec(),
        labels: y.to_vec(),
        c1,
        c2,
        semi_supervised: total > n,
        kernel: k1.kernel,
        objective: sol.objective,
        iterations: sol.iterations,
    })
}

/// Supervised MvSVM on `n × n` Gram matrices.
pub fn train_mvsvm(
    k1: &KernelMatrix,
    k2: &KernelMatrix,
    y: &[f64],
    c1: f64,
    c2: f64,
    opts: &SolverOptions,
) -> Result<MvSvmModel> {
    if k1.size() != y.len() {
        return Err(TrainError::Input(format!(
            "{} labels for a {}x{} Gram matrix",
            y.len(),
            k1.size(),
            k1.size()
        )));
    }
    train_coregularized(k1, k2, y, c1, c2, DualRoute::default(), opts)
}

/// SMvSVM on `(n+u) × (n+u)` Gram matrices, labeled points first.
#[allow(clippy::too_many_arguments)]
pub fn train_smvsvm(
    k1: &KernelMatrix,
    k2: &KernelMatrix,
    y: &[f64],
    n: usize,
    u: usize,
    c1: f64,
    c2: f64,
    opts: &SolverOptions,
) -> Result<MvSvmModel> {
    if y.len() != n || k1.size() != n + u {
        return Err(TrainError::Input(format!(
            "expected {n} labels and {} kernel rows, got {} and {}",
            n + u,
            y.len(),
            k1.size()
        )));
    }
    let mut model = train_coregularized(k1, k2, y, c1, c2, DualRoute::default(), opts)?;
    model.semi_supervised = true;
    Ok(model)
}

/// Linear-kernel (S)MvSVM from feature vectors; `samples` holds the `n`
/// labeled points followed by any unlabeled ones.
///
/// With `X̃` stacking `x̃ = [x₁; −x₂]` over all points, the Hessian is
/// `PᵀG⁻¹P` with `G = I + 2C₂X̃ᵀX̃` and `P = blockdiag(X₁ᵀY, X₂ᵀY)`, kept in
/// factored form. The weight vector is `[w₁; w₂] = G⁻¹Pλ`.
pub fn train_coregularized_linear(
    samples: &[TwoViewSample],
    y: &[f64],
    c1: f64,
    c2: f64,
    opts: &SolverOptions,
) -> Result<MvSvmModel> {
    check_labels(y)?;
    check_penalty("C1", c1, false)?;
    check_penalty("C2", c2, true)?;
    let n = y.len();
    let total = samples.len();
    if total < n {
        return Err(TrainError::Input(format!("{n} labels for {total} samples")));
    }
    let (d1, d2) = (samples[0].x1.len(), samples[0].x2.len());
    if samples.iter().any(|x| x.x1.len() != d1 || x.x2.len() != d2) {
        return Err(TrainError::Input("samples have inconsistent view sizes".into()));
    }
    let d = d1 + d2;

    let xt = Matrix::from_rows(&samples.iter().map(TwoViewSample::disagreement).collect::<Vec<_>>())?;
    let mut g = xt.tr_matmul(&xt)?.scale(2.0 * c2);
    g.add_diagonal(1.0);
    g.symmetrize();
    let chol = Cholesky::factor(&g)?;

    let mut p = Matrix::zeros(d, 2 * n);
    for (i, (x, yi)) in samples.iter().zip(y).enumerate() {
        for (k, v) in x.x1.iter().enumerate() {
            p[(k, i)] = yi * v;
        }
        for (k, v) in x.x2.iter().enumerate() {
            p[(d1 + k, n + i)] = yi * v;
        }
    }
    let factor = chol.forward_matrix(&p)?.transpose();
    let problem = QpProblem::gram(factor.clone(), vec![-1.0; 2 * n], vec![0.0; 2 * n], vec![c1; 2 * n])?;
    let sol = solve_box_qp(&problem, opts)?;

    let mut z = factor.tr_mul_vec(&sol.x)?;
    chol.backward_substitute(&mut z);
    let xz = xt.mul_vec(&z)?;
    let (l1, l2) = sol.x.split_at(n);
    let mut alpha1 = padded(y, l1, total);
    let mut alpha2 = padded(y, l2, total);
    axpy(-2.0 * c2, &xz, &mut alpha1);
    axpy(2.0 * c2, &xz, &mut alpha2);
    Ok(MvSvmModel {
        alpha1,
        alpha2,
        lambda1: l1.to_vec(),
        lambda2: l2.to_vec(),
        labels: y.to_vec(),
        c1,
        c2,
        semi_supervised: total > n,
        kernel: Kernel::Linear,
        objective: sol.objective,
        iterations: sol.iterations,
    })
}

impl MvSvmModel {
    pub fn n_labeled(&self) -> usize {
        self.labels.len()
    }

    /// `w₁ = Σᵢ α₁ⁱx₁ⁱ`, `w₂ = Σᵢ α₂ⁱx₂ⁱ` over the training points.
    pub fn linear_weights(&self, samples: &[TwoViewSample]) -> Result<LinearWeights> {
        if self.kernel != Kernel::Linear {
            return Err(TrainError::Usage("explicit weights need a linear kernel".into()));
        }
        if samples.len() != self.alpha1.len() {
            return Err(TrainError::Input(format!(
                "{} samples for {} coefficients",
                samples.len(),
                self.alpha1.len()
            )));
        }
        let (d1, d2) = (samples[0].x1.len(), samples[0].x2.len());
        let mut w1 = vec![0.0; d1];
        let mut w2 = vec![0.0; d2];
        for ((x, a1), a2) in samples.iter().zip(&self.alpha1).zip(&self.alpha2) {
            if x.x1.len() != d1 || x.x2.len() != d2 {
                return Err(TrainError::Input("samples have inconsistent view sizes".into()));
            }
            axpy(*a1, &x.x1, &mut w1);
            axpy(*a2, &x.x2, &mut w2);
        }
        Ok(LinearWeights::new(w1, w2, View::Both))
    }

    fn view_outputs(&self, k1: &Matrix, k2: &Matrix) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((k1.mul_vec(&self.alpha1)?, k2.mul_vec(&self.alpha2)?))
    }

    /// `‖K₁α₁ − K₂α₂‖²`.
    pub fn co_regularization_penalty(&self, k1: &Matrix, k2: &Matrix) -> Result<f64> {
        let (f1, f2) = self.view_outputs(k1, k2)?;
        Ok(f1.iter().zip(&f2).map(|(a, b)| (a - b) * (a - b)).sum())
    }

    /// Primal objective at `(α₁, α₂)` with the optimal slacks
    /// `ξᵥᵢ = max(0, 1 − yᵢ(Kᵥαᵥ)ᵢ)`.
    pub fn primal_objective(&self, k1: &Matrix, k2: &Matrix) -> Result<f64> {
        let (f1, f2) = self.view_outputs(k1, k2)?;
        let quad = 0.5 * (crate::linalg::dot(&self.alpha1, &f1) + crate::linalg::dot(&self.alpha2, &f2));
        let coreg: f64 = f1.iter().zip(&f2).map(|(a, b)| (a - b) * (a - b)).sum();
        let hinge: f64 = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, y)| (1.0 - y * f1[i]).max(0.0) + (1.0 - y * f2[i]).max(0.0))
            .sum();
        Ok(quad + self.c2 * coreg + self.c1 * hinge)
    }

    /// Largest relative residual of `K̃₁α₁ − K̄₁α₂ = Λ₁` and
    /// `K̃₂α₂ − K̄₂α₁ = Λ₂`, each measured as `‖r‖ / max(1, ‖Λ‖)`.
    pub fn stationarity_residual(&self, k1: &Matrix, k2: &Matrix) -> Result<f64> {
        let total = self.alpha1.len();
        let (f1, f2) = self.view_outputs(k1, k2)?;
        let diff: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| a - b).collect();
        let mut worst = 0.0f64;
        for (k, f, lambda, sign) in [(k1, &f1, &self.lambda1, 1.0), (k2, &f2, &self.lambda2, -1.0)] {
            let big = k.mul_vec(&padded(&self.labels, lambda, total))?;
            let coupling = k.mul_vec(&diff)?;
            let r: Vec<f64> = (0..total)
                .map(|i| f[i] + sign * 2.0 * self.c2 * coupling[i] - big[i])
                .collect();
            worst = worst.max(norm(&r) / norm_sq(&big).sqrt().max(1.0));
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{gram, Kernel};
    use crate::trainers::train_svm;
    use approx::assert_abs_diff_eq;

    fn tight() -> SolverOptions {
        SolverOptions::with_tol(1e-11)
    }

    #[test]
    fn no_coupling_leaves_the_gram_matrices() {
        let k1 = Matrix::from_rows(&[[2.0, 1.0], [1.0, 3.0]]).unwrap();
        let k2 = Matrix::identity(2);
        let m = assemble_mvsvm_matrices(&k1, &k2, 0.0).unwrap();
        assert_eq!(m.k_tilde1, k1);
        assert_eq!(m.m2, k2);
        assert!(m.k_bar1.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_views_at_half() {
        let i = Matrix::identity(3);
        let m = assemble_mvsvm_matrices(&i, &i, 0.5).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let e = if r == c { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(m.k_tilde1[(r, c)], 2.0 * e, epsilon = 1e-15);
                assert_abs_diff_eq!(m.k_bar1[(r, c)], e, epsilon = 1e-15);
                assert_abs_diff_eq!(m.m1[(r, c)], 1.5 * e, epsilon = 1e-12);
                assert_abs_diff_eq!(m.m2[(r, c)], 1.5 * e, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn decoupled_problem_reduces_to_two_svms() {
        let x1 = [[1.0, 0.2], [-0.4, 1.0], [0.3, -0.9], [-1.0, -0.1]];
        let x2 = [[0.5, 0.5, 0.1], [-0.2, 0.8, 0.0], [0.9, -0.3, 0.4], [-0.6, 0.1, -0.7]];
        let y = [1.0, -1.0, 1.0, -1.0];
        let k1 = gram(&x1, Kernel::Linear).unwrap();
        let k2 = gram(&x2, Kernel::Linear).unwrap();
        let mv = train_mvsvm(&k1, &k2, &y, 2.0, 0.0, &tight()).unwrap();
        let s1 = train_svm(&k1, &y, 2.0, &tight()).unwrap();
        let s2 = train_svm(&k2, &y, 2.0, &tight()).unwrap();
        // compare through the weights; duals of rank-deficient problems
        // need not be unique
        let w = |l: &[f64], x: &[[f64; 2]]| -> Vec<f64> {
            let mut w = vec![0.0; 2];
            for ((li, yi), xi) in l.iter().zip(&y).zip(x) {
                axpy(li * yi, xi, &mut w);
            }
            w
        };
        let (a, b) = (w(&mv.lambda1, &x1), w(&s1.lambda, &x1));
        for (p, q) in a.iter().zip(&b) {
            assert_abs_diff_eq!(p, q, epsilon = 1e-6);
        }
        assert_abs_diff_eq!(mv.objective, s1.objective + s2.objective, epsilon = 1e-9);
    }
}
