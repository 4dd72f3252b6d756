//! Two-view datasets: generation, file I/O, augmentation/scaling and
//! seeded splitting.

mod io;
mod split;
mod synthetic;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::norm_sq;

pub use io::{load_two_view, parse_two_view, save_two_view, write_two_view};
pub use split::{kfold, split, Fold, Partition, SplitPlan};
pub use synthetic::{gen_synthetic, SyntheticConfig};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, DataError>;

/// Feature vectors of one example in both views.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoViewSample {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
}

impl TwoViewSample {
    pub fn new(x1: Vec<f64>, x2: Vec<f64>) -> Self {
        Self { x1, x2 }
    }

    /// `x = [x₁; x₂]`.
    pub fn concatenated(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.x1.len() + self.x2.len());
        v.extend_from_slice(&self.x1);
        v.extend_from_slice(&self.x2);
        v
    }

    /// `x̃ = [x₁; −x₂]`, so that `uᵀx̃` is the disagreement of the two view
    /// outputs.
    pub fn disagreement(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.x1.len() + self.x2.len());
        v.extend_from_slice(&self.x1);
        v.extend(self.x2.iter().map(|x| -x));
        v
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.x1) + norm_sq(&self.x2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub x: TwoViewSample,
    /// `+1.0` or `-1.0`.
    pub y: f64,
}

impl LabeledSample {
    pub fn new(x1: Vec<f64>, x2: Vec<f64>, y: f64) -> Self {
        Self {
            x: TwoViewSample::new(x1, x2),
            y,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoViewDataset {
    /// View dimensions before augmentation.
    pub d1: usize,
    pub d2: usize,
    pub labeled: Vec<LabeledSample>,
    pub unlabeled: Vec<TwoViewSample>,
    pub augmented: bool,
    /// Common divisor applied by [`augment_and_scale`]; 1 before scaling.
    pub scale_factor: f64,
}

impl TwoViewDataset {
    pub fn new(d1: usize, d2: usize) -> Self {
        Self {
            d1,
            d2,
            labeled: Vec::new(),
            unlabeled: Vec::new(),
            augmented: false,
            scale_factor: 1.0,
        }
    }

    /// Current per-view vector lengths.
    pub fn view_dims(&self) -> (usize, usize) {
        let extra = usize::from(self.augmented);
        (self.d1 + extra, self.d2 + extra)
    }

    pub fn len(&self) -> usize {
        self.labeled.len() + self.unlabeled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Largest concatenated norm over labeled and unlabeled examples.
    pub fn max_norm(&self) -> f64 {
        self.labeled
            .iter()
            .map(|s| &s.x)
            .chain(&self.unlabeled)
            .map(|x| x.norm_sq().sqrt())
            .fold(0.0, f64::max)
    }

    /// Checks dimensions and labels.
    pub fn validate(&self) -> Result<()> {
        let (e1, e2) = self.view_dims();
        let check = |x: &TwoViewSample, what: &str, i: usize| -> Result<()> {
            if x.x1.len() != e1 || x.x2.len() != e2 {
                return Err(DataError::Input(format!(
                    "{what} example {i} has view sizes ({}, {}), expected ({e1}, {e2})",
                    x.x1.len(),
                    x.x2.len()
                )));
            }
            if x.x1.iter().chain(&x.x2).any(|v| !v.is_finite()) {
                return Err(DataError::Input(format!("{what} example {i} has non-finite features")));
            }
            Ok(())
        };
        for (i, s) in self.labeled.iter().enumerate() {
            check(&s.x, "labeled", i)?;
            if s.y != 1.0 && s.y != -1.0 {
                return Err(DataError::Input(format!("labeled example {i} has label {}", s.y)));
            }
        }
        for (i, x) in self.unlabeled.iter().enumerate() {
            check(x, "unlabeled", i)?;
        }
        Ok(())
    }
}

/// Appends a constant 1 to each view, then divides every example by the
/// largest concatenated norm over all examples so that `R = 1`.
pub fn augment_and_scale(dataset: &TwoViewDataset) -> Result<TwoViewDataset> {
    if dataset.augmented {
        return Err(DataError::Usage("dataset is already augmented".into()));
    }
    let mut out = dataset.clone();
    let augment = |x: &mut TwoViewSample| {
        x.x1.push(1.0);
        x.x2.push(1.0);
    };
    out.labeled.iter_mut().for_each(|s| augment(&mut s.x));
    out.unlabeled.iter_mut().for_each(augment);
    out.augmented = true;

    let scale = out.max_norm();
    let rescale = |x: &mut TwoViewSample| {
        x.x1.iter_mut().chain(x.x2.iter_mut()).for_each(|v| *v /= scale);
    };
    out.labeled.iter_mut().for_each(|s| rescale(&mut s.x));
    out.unlabeled.iter_mut().for_each(rescale);
    out.scale_factor = scale;
    Ok(out)
}
