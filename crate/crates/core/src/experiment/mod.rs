//! Partitioned train/evaluate pipeline producing table-shaped reports.
//!
//! For every random partition: cross-validate and train the requested
//! algorithms on the labeled training set, measure test errors, then
//! evaluate the requested bounds on the trained classifiers. Partitions run
//! in parallel; the report lists them in index order, so it is identical
//! for any thread count.

mod cv;
mod report;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::bounds::{
    compute_subset_prior, evaluate_bound, BoundConfig, BoundError, BoundInputs, BoundName, BoundReport, PriorMode,
};
use crate::data::{
    augment_and_scale, gen_synthetic, load_two_view, split, DataError, Partition, SplitPlan, SyntheticConfig,
    TwoViewDataset,
};
use crate::qp::SolverOptions;
use crate::trainers::{error_rate, LinearWeights, TrainError};

pub use cv::{fit, fit_model, select, DualCoefficients, Penalty, C12_GRID, C_GRID};
pub use report::{summarize, write_csv, SummaryRow, CSV_HEADER};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Svm1,
    Svm2,
    Svm3,
    MvSvm,
    SMvSvm,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Svm1,
        Algorithm::Svm2,
        Algorithm::Svm3,
        Algorithm::MvSvm,
        Algorithm::SMvSvm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Svm1 => "SVM-1",
            Algorithm::Svm2 => "SVM-2",
            Algorithm::Svm3 => "SVM-3",
            Algorithm::MvSvm => "MvSVM",
            Algorithm::SMvSvm => "SMvSVM",
        }
    }

    /// The classifier a bound is evaluated on.
    pub fn for_bound(bound: BoundName) -> Algorithm {
        match bound {
            BoundName::Pb1 => Algorithm::Svm1,
            BoundName::Pb2 => Algorithm::Svm2,
            BoundName::Pb3 => Algorithm::Svm3,
            BoundName::SMvPb1 | BoundName::SMvPb2 => Algorithm::SMvSvm,
            _ => Algorithm::MvSvm,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        let alias = match key.as_str() {
            "svm1" => "svm-1",
            "svm2" => "svm-2",
            "svm3" => "svm-3",
            other => other,
        };
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(alias))
            .ok_or_else(|| {
                let names: Vec<_> = Algorithm::ALL.iter().map(|a| a.as_str()).collect();
                ExperimentError::Usage(format!("unknown algorithm {s:?}; valid names: {}", names.join(", ")))
            })
    }
}

impl Serialize for Algorithm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSource {
    Synthetic(SyntheticConfig),
    File { path: PathBuf },
}

impl DatasetSource {
    pub fn load(&self) -> Result<TwoViewDataset> {
        Ok(match self {
            DatasetSource::Synthetic(cfg) => gen_synthetic(cfg)?,
            DatasetSource::File { path } => load_two_view(path)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub labeled_fraction: f64,
    pub seed: u64,
    pub partitions: usize,
    pub bounds: Vec<BoundName>,
    pub algorithms: Vec<Algorithm>,
    pub bound_config: BoundConfig,
    pub cv_folds: usize,
    pub solver_tol: f64,
}

impl ExperimentConfig {
    /// Every algorithm and bound with default settings.
    pub fn new(dataset: DatasetSource, labeled_fraction: f64, seed: u64) -> Self {
        Self {
            dataset,
            labeled_fraction,
            seed,
            partitions: 10,
            bounds: BoundName::ALL.to_vec(),
            algorithms: Algorithm::ALL.to_vec(),
            bound_config: BoundConfig::default(),
            cv_folds: 3,
            solver_tol: 1e-6,
        }
    }

    pub fn split_plan(&self) -> SplitPlan {
        SplitPlan {
            partitions: self.partitions,
            prior_subset_fraction: self.bound_config.r_fraction,
            ..SplitPlan::new(self.seed, self.labeled_fraction)
        }
    }

    /// Requested algorithms plus those the requested bounds need, in
    /// canonical order.
    pub fn trained_algorithms(&self) -> Vec<Algorithm> {
        Algorithm::ALL
            .into_iter()
            .filter(|a| self.algorithms.contains(a) || self.bounds.iter().any(|&b| Algorithm::for_bound(b) == *a))
            .collect()
    }

    pub fn setting_label(&self) -> String {
        format!("{}%", (self.labeled_fraction * 100.0).round())
    }

    pub fn validate(&self) -> Result<()> {
        self.split_plan().validate()?;
        self.bound_config.validate()?;
        if self.cv_folds < 2 {
            return Err(ExperimentError::Usage("cross-validation needs at least 2 folds".into()));
        }
        if !(self.solver_tol > 0.0) {
            return Err(ExperimentError::Usage("solver tolerance must be positive".into()));
        }
        if self.bounds.is_empty() && self.algorithms.is_empty() {
            return Err(ExperimentError::Usage("nothing to run: no algorithms and no bounds".into()));
        }
        Ok(())
    }

    fn solver(&self) -> SolverOptions {
        SolverOptions::with_tol(self.solver_tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmResult {
    pub algorithm: Algorithm,
    pub penalty: Penalty,
    pub cv_error: f64,
    pub test_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionRecord {
    pub index: usize,
    /// Diagnostic of the stage that failed, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub algorithms: Vec<AlgorithmResult>,
    pub bounds: Vec<BoundReport>,
}

impl PartitionRecord {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub setting: String,
    pub scale_factor: f64,
    pub complete: bool,
    pub summary: Vec<SummaryRow>,
    pub partitions: Vec<PartitionRecord>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        write_csv(&self.summary)
    }

    pub fn row(&self, method: &str) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.method == method)
    }
}

/// Cross-validates and trains one algorithm on a training set, returning
/// the selected penalty, its validation error and the weights.
pub fn train_with_cv(
    algorithm: Algorithm,
    partition: &Partition,
    folds: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<(Penalty, f64, LinearWeights)> {
    let (penalty, cv_error) = select(algorithm, &partition.train, &partition.unlabeled, folds, seed, opts)?;
    let w = fit(algorithm, penalty, &partition.train, &partition.unlabeled, opts)?;
    Ok((penalty, cv_error, w))
}

fn fold_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index as u64 + 1)
}

fn run_partition(config: &ExperimentConfig, data: &TwoViewDataset, index: usize) -> Result<PartitionRecord> {
    let part = split(data, &config.split_plan(), index)?;
    let opts = config.solver();
    let mut algorithms = Vec::new();
    let mut weights = Vec::new();
    for algorithm in config.trained_algorithms() {
        let (penalty, cv_error, w) =
            train_with_cv(algorithm, &part, config.cv_folds, fold_seed(config.seed, index), &opts)?;
        let test_error = error_rate(&w, part.test.iter().map(|s| (&s.x, s.y)))?;
        algorithms.push(AlgorithmResult {
            algorithm,
            penalty,
            cv_error,
            test_error,
        });
        weights.push((algorithm, w));
    }

    let mut bounds = Vec::new();
    for &name in &config.bounds {
        let algorithm = Algorithm::for_bound(name);
        let (_, w) = weights.iter().find(|(a, _)| *a == algorithm).expect("trained above");
        let prior = match name {
            BoundName::MvPb5 => Some(compute_subset_prior(
                part.prior_subset(),
                &PriorMode::LeastSquares {
                    ridge: config.bound_config.prior_ridge,
                },
            )?),
            BoundName::MvPb6 => {
                let penalty = algorithms.iter().find(|r| r.algorithm == algorithm).expect("trained").penalty;
                let Penalty::Pair { c1, c2 } = penalty else {
                    unreachable!("MvSVM penalties are pairs")
                };
                Some(compute_subset_prior(
                    part.prior_subset(),
                    &PriorMode::MvSvm {
                        c1,
                        c2,
                        solver: opts.clone(),
                    },
                )?)
            }
            _ => None,
        };
        let inputs = BoundInputs {
            weights: w,
            labeled: &part.train,
            unlabeled: &part.unlabeled,
            prior_count: part.prior_count,
            prior_weights: prior.as_deref(),
        };
        bounds.push(evaluate_bound(name, &inputs, &config.bound_config)?);
    }

    algorithms.retain(|r| config.algorithms.contains(&r.algorithm));
    Ok(PartitionRecord {
        index,
        failure: None,
        algorithms,
        bounds,
    })
}

/// Runs every partition. Failures of individual partitions are recorded
/// in the report; errors that stop all partitions (bad config, unreadable
/// data) are returned.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let data = augment_and_scale(&config.dataset.load()?)?;
    data.validate()?;
    let partitions: Vec<PartitionRecord> = (0..config.partitions)
        .into_par_iter()
        .map(|index| {
            run_partition(config, &data, index).unwrap_or_else(|e| PartitionRecord {
                index,
                failure: Some(e.to_string()),
                algorithms: Vec::new(),
                bounds: Vec::new(),
            })
        })
        .collect();
    let summary = summarize(config, &partitions);
    Ok(ExperimentReport {
        config: config.clone(),
        setting: config.setting_label(),
        scale_factor: data.scale_factor,
        complete: partitions.iter().all(PartitionRecord::completed),
        summary,
        partitions,
    })
}
