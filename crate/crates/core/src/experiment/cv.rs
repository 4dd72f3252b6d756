use serde::Serialize;

use super::Algorithm;
use crate::data::{kfold, LabeledSample, TwoViewSample};
use crate::qp::SolverOptions;
use crate::trainers::{
    error_rate, train_coregularized_linear, train_svm_linear, LinearWeights, Result, TrainError, View,
};

/// Single-view SVM penalty grid.
pub const C_GRID: [f64; 36] = [
    1e-8, 5e-8, 1e-7, 5e-7, 1e-6, 5e-6, 1e-5, 5e-5, 1e-4, 5e-4, 1e-3, 5e-3, 1e-2, 5e-2, 1e-1, 5e-1, 1.0, 5.0, 10.0,
    20.0, 25.0, 30.0, 40.0, 50.0, 55.0, 60.0, 70.0, 80.0, 85.0, 90.0, 100.0, 300.0, 500.0, 700.0, 900.0, 1000.0,
];

/// Grid for each of `C₁` and `C₂`.
pub const C12_GRID: [f64; 6] = [1e-6, 1e-4, 1e-2, 1.0, 10.0, 100.0];

/// Penalties of a trained model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Penalty {
    Single { c: f64 },
    Pair { c1: f64, c2: f64 },
}

impl Penalty {
    pub fn grid(algorithm: Algorithm) -> Vec<Penalty> {
        match algorithm {
            Algorithm::Svm1 | Algorithm::Svm2 | Algorithm::Svm3 => {
                C_GRID.iter().map(|&c| Penalty::Single { c }).collect()
            }
            Algorithm::MvSvm | Algorithm::SMvSvm => C12_GRID
                .iter()
                .flat_map(|&c1| C12_GRID.iter().map(move |&c2| Penalty::Pair { c1, c2 }))
                .collect(),
        }
    }
}

fn svm_view(algorithm: Algorithm) -> Option<View> {
    match algorithm {
        Algorithm::Svm1 => Some(View::First),
        Algorithm::Svm2 => Some(View::Second),
        Algorithm::Svm3 => Some(View::Both),
        _ => None,
    }
}

/// Dual solution of a trained model.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum DualCoefficients {
    Svm { lambda: Vec<f64> },
    CoRegularized {
        lambda1: Vec<f64>,
        lambda2: Vec<f64>,
        alpha1: Vec<f64>,
        alpha2: Vec<f64>,
    },
}

/// Trains `algorithm` on `train`; the semi-supervised trainer also sees
/// `unlabeled`.
pub fn fit_model(
    algorithm: Algorithm,
    penalty: Penalty,
    train: &[LabeledSample],
    unlabeled: &[TwoViewSample],
    opts: &SolverOptions,
) -> Result<(LinearWeights, DualCoefficients)> {
    let y: Vec<f64> = train.iter().map(|s| s.y).collect();
    let mut xs: Vec<TwoViewSample> = train.iter().map(|s| s.x.clone()).collect();
    match (svm_view(algorithm), penalty) {
        (Some(view), Penalty::Single { c }) => {
            let feats: Vec<Vec<f64>> = xs.iter().map(|x| view.features(x)).collect();
            let model = train_svm_linear(&feats, &y, c, opts)?;
            Ok((model.linear_weights(&xs, view)?, DualCoefficients::Svm { lambda: model.lambda }))
        }
        (None, Penalty::Pair { c1, c2 }) => {
            if algorithm == Algorithm::SMvSvm {
                xs.extend(unlabeled.iter().cloned());
            }
            let model = train_coregularized_linear(&xs, &y, c1, c2, opts)?;
            let w = model.linear_weights(&xs)?;
            Ok((
                w,
                DualCoefficients::CoRegularized {
                    lambda1: model.lambda1,
                    lambda2: model.lambda2,
                    alpha1: model.alpha1,
                    alpha2: model.alpha2,
                },
            ))
        }
        (_, penalty) => Err(TrainError::Usage(format!("{algorithm} cannot use penalty {penalty:?}"))),
    }
}

/// [`fit_model`] without the dual coefficients.
pub fn fit(
    algorithm: Algorithm,
    penalty: Penalty,
    train: &[LabeledSample],
    unlabeled: &[TwoViewSample],
    opts: &SolverOptions,
) -> Result<LinearWeights> {
    Ok(fit_model(algorithm, penalty, train, unlabeled, opts)?.0)
}

/// Validation error of each grid point averaged over `k` folds; returns the
/// grid point with the smallest error, the first one on ties.
pub fn select(
    algorithm: Algorithm,
    train: &[LabeledSample],
    unlabeled: &[TwoViewSample],
    folds: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<(Penalty, f64)> {
    let folds = kfold(train.len(), folds, seed).map_err(|e| TrainError::Input(e.to_string()))?;
    let mut best: Option<(Penalty, f64)> = None;
    for penalty in Penalty::grid(algorithm) {
        let mut err = 0.0;
        for fold in &folds {
            let part: Vec<LabeledSample> = fold.train.iter().map(|&i| train[i].clone()).collect();
            let w = fit(algorithm, penalty, &part, unlabeled, opts)?;
            err += error_rate(&w, fold.validate.iter().map(|&i| (&train[i].x, train[i].y)))?;
        }
        err /= folds.len() as f64;
        if best.is_none_or(|(_, e)| err < e) {
            best = Some((penalty, err));
        }
    }
    Ok(best.expect("grid is non-empty"))
}
