use serde::{Deserialize, Serialize};

use super::{check_labels, check_penalty, LinearWeights, Result, TrainError, View};
use crate::data::TwoViewSample;
use crate::linalg::{axpy, Kernel, KernelMatrix, Matrix};
use crate::qp::{solve_box_qp, QpProblem, SolverOptions};

/// Dual solution of `min ½λᵀ(YKY)λ − 1ᵀλ` over `[0, C]ⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub lambda: Vec<f64>,
    /// Training labels, aligned with `lambda`.
    pub labels: Vec<f64>,
    pub c: f64,
    pub kernel: Kernel,
    /// Value of `½λᵀDλ − 1ᵀλ` at the solution.
    pub objective: f64,
    pub iterations: usize,
}

fn box_problem(c: f64, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    (vec![-1.0; n], vec![0.0; n], vec![c; n])
}

/// Trains on a precomputed Gram matrix.
pub fn train_svm(k: &KernelMatrix, y: &[f64], c: f64, opts: &SolverOptions) -> Result<SvmModel> {
    check_labels(y)?;
    check_penalty("C", c, false)?;
    if !k.values.is_square() || k.size() != y.len() {
        return Err(TrainError::Input(format!(
            "Gram matrix is {}x{}, expected {n}x{n}",
            k.values.rows(),
            k.values.cols(),
            n = y.len()
        )));
    }
    let h = k.values.scale_rows_cols(y, y);
    let (lin, lo, hi) = box_problem(c, y.len());
    let sol = solve_box_qp(&QpProblem::new(h, lin, lo, hi)?, opts)?;
    Ok(SvmModel {
        lambda: sol.x,
        labels: y.to_vec(),
        c,
        kernel: k.kernel,
        objective: sol.objective,
        iterations: sol.iterations,
    })
}

/// Linear-kernel training straight from feature vectors. The Hessian is
/// kept in factored form with rows `yᵢxᵢ`.
pub fn train_svm_linear<S: AsRef<[f64]>>(
    features: &[S],
    y: &[f64],
    c: f64,
    opts: &SolverOptions,
) -> Result<SvmModel> {
    check_labels(y)?;
    check_penalty("C", c, false)?;
    if features.len() != y.len() {
        return Err(TrainError::Input(format!(
            "{} feature vectors for {} labels",
            features.len(),
            y.len()
        )));
    }
    let rows: Vec<Vec<f64>> = features
        .iter()
        .zip(y)
        .map(|(x, &yi)| x.as_ref().iter().map(|v| yi * v).collect())
        .collect();
    let factor = Matrix::from_rows(&rows)?;
    let (lin, lo, hi) = box_problem(c, y.len());
    let sol = solve_box_qp(&QpProblem::gram(factor, lin, lo, hi)?, opts)?;
    Ok(SvmModel {
        lambda: sol.x,
        labels: y.to_vec(),
        c,
        kernel: Kernel::Linear,
        objective: sol.objective,
        iterations: sol.iterations,
    })
}

impl SvmModel {
    /// `Σᵢ yᵢλᵢ φ(xᵢ)` for a linear kernel, where `φ` is given by `view`.
    pub fn weight_vector<S: AsRef<[f64]>>(&self, features: &[S]) -> Result<Vec<f64>> {
        if self.kernel != Kernel::Linear {
            return Err(TrainError::Usage("explicit weights need a linear kernel".into()));
        }
        if features.len() != self.lambda.len() {
            return Err(TrainError::Input(format!(
                "{} training samples for {} dual variables",
                features.len(),
                self.lambda.len()
            )));
        }
        let d = features.first().map_or(0, |x| x.as_ref().len());
        let mut w = vec![0.0; d];
        for ((x, l), yi) in features.iter().zip(&self.lambda).zip(&self.labels) {
            if x.as_ref().len() != d {
                return Err(TrainError::Input("ragged feature vectors".into()));
            }
            axpy(yi * l, x.as_ref(), &mut w);
        }
        Ok(w)
    }

    /// Explicit two-view weights of a model trained on `view.features` of
    /// `samples`.
    pub fn linear_weights(&self, samples: &[TwoViewSample], view: View) -> Result<LinearWeights> {
        let first = samples
            .first()
            .ok_or_else(|| TrainError::Input("no training samples".into()))?;
        let features: Vec<Vec<f64>> = samples.iter().map(|x| view.features(x)).collect();
        let w = self.weight_vector(&features)?;
        LinearWeights::from_view_vector(&w, view, first.x1.len(), first.x2.len())
    }

    /// Decision values `Σᵢ yᵢλᵢ k(xᵢ, x)` from a cross-kernel matrix whose
    /// row `t` holds `k(xᵢ, x_t)` over the training points `i`.
    pub fn decision_values(&self, cross: &Matrix) -> Result<Vec<f64>> {
        let coef: Vec<f64> = self.lambda.iter().zip(&self.labels).map(|(l, y)| l * y).collect();
        Ok(cross.mul_vec(&coef)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, gram};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tight() -> SolverOptions {
        SolverOptions::with_tol(1e-10)
    }

    #[test]
    fn two_point_hand_kkt() {
        let k = gram(&[[1.0], [-1.0]], Kernel::Linear).unwrap();
        let y = [1.0, -1.0];
        let m = train_svm(&k, &y, 10.0, &tight()).unwrap();
        assert_abs_diff_eq!(m.lambda[0] + m.lambda[1], 1.0, epsilon = 1e-8);
        let w = m.weight_vector(&[[1.0], [-1.0]]).unwrap();
        assert_abs_diff_eq!(w[0], 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(y[0] * w[0] * 1.0, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(y[1] * w[0] * -1.0, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(m.objective, -0.5, epsilon = 1e-10);
    }

    #[test]
    fn identical_labels_stay_in_envelope() {
        let xs = [[1.0, 0.2], [0.5, 1.0], [2.0, -0.3], [0.7, 0.7]];
        let k = gram(&xs, Kernel::Linear).unwrap();
        let y = [1.0; 4];
        let c = 3.0;
        let m = train_svm(&k, &y, c, &tight()).unwrap();
        assert!(m.objective >= -(y.len() as f64));
        assert!(m.lambda.iter().all(|&l| (0.0..=c).contains(&l)));
    }

    #[test]
    fn separable_points_get_zero_training_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let truth = [0.6, -0.8];
        let mut xs = Vec::new();
        let mut y = Vec::new();
        while xs.len() < 20 {
            let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let s: f64 = dot(&x, &truth);
            if s.abs() > 0.1 {
                y.push(s.signum());
                xs.push(x);
            }
        }
        let k = gram(&xs, Kernel::Linear).unwrap();
        let m = train_svm(&k, &y, 1e4, &tight()).unwrap();
        let w = m.weight_vector(&xs).unwrap();
        for (x, yi) in xs.iter().zip(&y) {
            assert!(yi * dot(&w, x) > 0.0);
        }
    }

    #[test]
    fn linear_route_matches_gram_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xs: Vec<Vec<f64>> = (0..15).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let y: Vec<f64> = (0..15).map(|i| if i % 3 == 0 { -1.0 } else { 1.0 }).collect();
        let a = train_svm(&gram(&xs, Kernel::Linear).unwrap(), &y, 2.0, &tight()).unwrap();
        let b = train_svm_linear(&xs, &y, 2.0, &tight()).unwrap();
        assert_abs_diff_eq!(a.objective, b.objective, epsilon = 1e-9);
        let (wa, wb) = (a.weight_vector(&xs).unwrap(), b.weight_vector(&xs).unwrap());
        for (p, q) in wa.iter().zip(&wb) {
            assert_abs_diff_eq!(p, q, epsilon = 1e-6);
        }
    }

    #[test]
    fn weights_land_in_the_right_slot() {
        let samples = vec![
            TwoViewSample::new(vec![1.0], vec![2.0, 0.0]),
            TwoViewSample::new(vec![-1.0], vec![0.0, -2.0]),
        ];
        let y = [1.0, -1.0];
        let f2: Vec<Vec<f64>> = samples.iter().map(|x| x.x2.clone()).collect();
        let m = train_svm_linear(&f2, &y, 10.0, &tight()).unwrap();
        let w = m.linear_weights(&samples, View::Second).unwrap();
        assert_eq!(w.w1, vec![0.0]);
        assert_eq!(w.w2.len(), 2);
        assert!(w.concatenated_norm > 0.0);
    }

    #[test]
    fn rbf_model_refuses_explicit_weights() {
        let k = gram(&[[1.0], [-1.0]], Kernel::Rbf { gamma: 1.0 }).unwrap();
        let m = train_svm(&k, &[1.0, -1.0], 1.0, &tight()).unwrap();
        assert!(matches!(m.weight_vector(&[[1.0], [-1.0]]), Err(TrainError::Usage(_))));
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let k = gram(&[[1.0], [-1.0]], Kernel::Linear).unwrap();
        assert!(train_svm(&k, &[1.0, 0.0], 1.0, &tight()).is_err());
        assert!(train_svm(&k, &[1.0, -1.0], 0.0, &tight()).is_err());
        assert!(train_svm(&k, &[1.0], 1.0, &tight()).is_err());
    }
}
