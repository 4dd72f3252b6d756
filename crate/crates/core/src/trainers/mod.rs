//! SVM, multi-view SVM and semi-supervised multi-view SVM trainers.
//!
//! All three are trained through their box-constrained duals. Kernel
//! routes take Gram matrices; the `*_linear` routes take raw feature
//! vectors and build a low-rank Hessian factor, which is much faster when
//! the feature dimension is below the sample count.

mod mvsvm;
mod svm;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::TwoViewSample;
use crate::linalg::{dot, norm_sq, LinalgError};
use crate::qp::QpError;

pub use mvsvm::{
    assemble_mvsvm_matrices, train_coregularized, train_coregularized_linear, train_mvsvm, train_smvsvm,
    CoRegMatrices, DualRoute, MvSvmModel,
};
pub use svm::{train_svm, train_svm_linear, SvmModel};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Qp(#[from] QpError),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, TrainError>;

/// Which features a single-view classifier was trained on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum View {
    First,
    Second,
    /// Both views, either concatenated (SVM-3) or as a multi-view pair.
    Both,
}

impl View {
    /// Feature vector `φ(x)` seen by a classifier of this view.
    pub fn features(self, x: &TwoViewSample) -> Vec<f64> {
        match self {
            View::First => x.x1.clone(),
            View::Second => x.x2.clone(),
            View::Both => x.concatenated(),
        }
    }
}

/// Explicit weights of a linear-kernel classifier. A single-view model
/// stores zeros in the slot of the other view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearWeights {
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub view: View,
    pub concatenated_norm: f64,
}

impl LinearWeights {
    pub fn new(w1: Vec<f64>, w2: Vec<f64>, view: View) -> Self {
        let concatenated_norm = (norm_sq(&w1) + norm_sq(&w2)).sqrt();
        Self {
            w1,
            w2,
            view,
            concatenated_norm,
        }
    }

    /// Builds weights from a vector over `view.features(x)`.
    pub fn from_view_vector(w: &[f64], view: View, d1: usize, d2: usize) -> Result<Self> {
        let expected = match view {
            View::First => d1,
            View::Second => d2,
            View::Both => d1 + d2,
        };
        if w.len() != expected {
            return Err(TrainError::Input(format!(
                "weight vector has length {}, expected {expected}",
                w.len()
            )));
        }
        let (w1, w2) = match view {
            View::First => (w.to_vec(), vec![0.0; d2]),
            View::Second => (vec![0.0; d1], w.to_vec()),
            View::Both => (w[..d1].to_vec(), w[d1..].to_vec()),
        };
        Ok(Self::new(w1, w2, view))
    }

    /// The weights restricted to the model's own view, as a vector over
    /// `self.view.features(x)`.
    pub fn view_vector(&self) -> Vec<f64> {
        match self.view {
            View::First => self.w1.clone(),
            View::Second => self.w2.clone(),
            View::Both => {
                let mut w = self.w1.clone();
                w.extend_from_slice(&self.w2);
                w
            }
        }
    }

    /// [`Self::view_vector`] scaled to unit length.
    pub fn unit_view_vector(&self) -> Result<Vec<f64>> {
        let mut w = self.view_vector();
        let len = norm_sq(&w).sqrt();
        if !(len > 0.0) {
            return Err(TrainError::Input("weight vector is zero".into()));
        }
        w.iter_mut().for_each(|v| *v /= len);
        Ok(w)
    }

    /// `w₁ᵀx₁ + w₂ᵀx₂`.
    pub fn decision_value(&self, x: &TwoViewSample) -> Result<f64> {
        if x.x1.len() != self.w1.len() || x.x2.len() != self.w2.len() {
            return Err(TrainError::Input(format!(
                "sample has view sizes ({}, {}), weights expect ({}, {})",
                x.x1.len(),
                x.x2.len(),
                self.w1.len(),
                self.w2.len()
            )));
        }
        Ok(dot(&self.w1, &x.x1) + dot(&self.w2, &x.x2))
    }
}

/// `sign(w₁ᵀx₁ + w₂ᵀx₂)` with `sign(0) = +1`.
pub fn predict(weights: &LinearWeights, x: &TwoViewSample) -> Result<f64> {
    Ok(if weights.decision_value(x)? >= 0.0 { 1.0 } else { -1.0 })
}

/// Fraction of misclassified examples.
pub fn error_rate<'a>(
    weights: &LinearWeights,
    samples: impl IntoIterator<Item = (&'a TwoViewSample, f64)>,
) -> Result<f64> {
    let (mut wrong, mut total) = (0usize, 0usize);
    for (x, y) in samples {
        total += 1;
        if predict(weights, x)? != y {
            wrong += 1;
        }
    }
    if total == 0 {
        return Err(TrainError::Input("error rate of an empty set".into()));
    }
    Ok(wrong as f64 / total as f64)
}

pub(crate) fn check_labels(y: &[f64]) -> Result<()> {
    if y.is_empty() {
        return Err(TrainError::Input("no labeled examples".into()));
    }
    if let Some(i) = y.iter().position(|&v| v != 1.0 && v != -1.0) {
        return Err(TrainError::Input(format!("label {i} is {}, expected ±1", y[i])));
    }
    Ok(())
}

pub(crate) fn check_penalty(name: &str, c: f64, allow_zero: bool) -> Result<()> {
    let ok = c.is_finite() && (c > 0.0 || (allow_zero && c == 0.0));
    if ok {
        Ok(())
    } else {
        Err(TrainError::Input(format!("{name} must be positive and finite, got {c}")))
    }
}
