//! PAC-Bayes bounds for linear classifiers.
//!
//! The posterior is always `Q = N(μw, I)` with `‖w‖ = 1`. Each bound gives
//! a budget `B` on `KL₊(Ê‖E)`, where `Ê` is the empirical error of the
//! stochastic classifier; inverting the binary KL turns `(Ê, B)` into an
//! upper bound on the true stochastic risk `E`. The deterministic sign
//! classifier errs at most `2E`.
//!
//! | name    | prior                                   | data                         |
//! |---------|-----------------------------------------|------------------------------|
//! | PB-k    | `N(0, I)`                               | one view / concatenation     |
//! | MvPB-1  | `N(0, I)` × view agreement              | `f_m`, `H_m`                 |
//! | MvPB-2  | same                                    | `f̃`                          |
//! | MvPB-3  | `N(ηw_p, I)` × view agreement           | `f_m`, `Ĥ_m`, `ŵ_p`          |
//! | MvPB-4  | same                                    | `H̃_m`, `ŵ_p`                 |
//! | MvPB-5  | `N(ηw_p, I)`, least-squares `w_p`       | held-out prior subset        |
//! | MvPB-6  | `N(ηw_p, I)`, MvSVM `w_p`               | held-out prior subset        |
//! | SMvPB-1 | `N(0, I)` × agreement on unlabeled pool | unlabeled scatter            |
//! | SMvPB-2 | `N(ηw_p, I)` × same                     | unlabeled scatter, `ŵ_p`     |

mod formulas;
mod kl;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::data::{LabeledSample, TwoViewSample};
use crate::linalg::{norm, LinalgError};
use crate::qp::SolverOptions;
use crate::trainers::{train_coregularized_linear, LinearWeights, TrainError, View};

pub use formulas::{
    bound_mvpb1, bound_mvpb2, bound_mvpb3, bound_mvpb4, bound_mvpb5_6, bound_pb, bound_smvpb1,
    bound_smvpb1_from_terms, bound_smvpb2, bound_smvpb2_from_terms, empirical_aggregates, least_squares_prior,
    unlabeled_terms, EmpiricalAggregates, KlBudget, UnlabeledTerms,
};
pub use kl::{
    gaussian_tail, invert_kl, kl_plus, margins, normalized_margin, stochastic_error, stochastic_error_from_margins,
    P_CAP,
};

use formulas::SampleTerms;

#[derive(Debug, Error)]
pub enum BoundError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Train(#[from] TrainError),
}

pub type Result<T> = std::result::Result<T, BoundError>;

/// `{0.5, 1, 2, …, 10, 15, 20, 30, 50, 100}`.
pub fn default_mu_grid() -> Vec<f64> {
    let mut g = vec![0.5];
    g.extend((1..=10).map(f64::from));
    g.extend([15.0, 20.0, 30.0, 50.0, 100.0]);
    g
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct BoundConfig {
    pub delta: f64,
    pub sigma: f64,
    pub eta: f64,
    pub mu_grid: Vec<f64>,
    /// Fraction of the training set held out for the MvPB-5/6 prior.
    pub r_fraction: f64,
    /// Ridge of the least-squares prior of MvPB-5.
    pub prior_ridge: f64,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self {
            delta: 0.05,
            sigma: 100.0,
            eta: 1.0,
            mu_grid: default_mu_grid(),
            r_fraction: 0.2,
            prior_ridge: 1.0,
        }
    }
}

impl BoundConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(BoundError::Input(format!("delta must lie in (0, 1], got {}", self.delta)));
        }
        for (name, v) in [("sigma", self.sigma), ("eta", self.eta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(BoundError::Input(format!("{name} must be positive, got {v}")));
            }
        }
        if self.mu_grid.is_empty() || self.mu_grid.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(BoundError::Input("mu grid must be a non-empty list of positive values".into()));
        }
        if !(self.r_fraction > 0.0 && self.r_fraction < 1.0) {
            return Err(BoundError::Input(format!("r_fraction must lie in (0, 1), got {}", self.r_fraction)));
        }
        if !(self.prior_ridge >= 0.0) {
            return Err(BoundError::Input("prior ridge must be nonnegative".into()));
        }
        Ok(())
    }
}

/// The eleven bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundName {
    Pb1,
    Pb2,
    Pb3,
    MvPb1,
    MvPb2,
    MvPb3,
    MvPb4,
    MvPb5,
    MvPb6,
    SMvPb1,
    SMvPb2,
}

impl BoundName {
    pub const ALL: [BoundName; 11] = [
        BoundName::Pb1,
        BoundName::Pb2,
        BoundName::Pb3,
        BoundName::MvPb1,
        BoundName::MvPb2,
        BoundName::MvPb3,
        BoundName::MvPb4,
        BoundName::MvPb5,
        BoundName::MvPb6,
        BoundName::SMvPb1,
        BoundName::SMvPb2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundName::Pb1 => "PB-1",
            BoundName::Pb2 => "PB-2",
            BoundName::Pb3 => "PB-3",
            BoundName::MvPb1 => "MvPB-1",
            BoundName::MvPb2 => "MvPB-2",
            BoundName::MvPb3 => "MvPB-3",
            BoundName::MvPb4 => "MvPB-4",
            BoundName::MvPb5 => "MvPB-5",
            BoundName::MvPb6 => "MvPB-6",
            BoundName::SMvPb1 => "SMvPB-1",
            BoundName::SMvPb2 => "SMvPB-2",
        }
    }

    /// Whether the theorem holds simultaneously for all `μ`, which makes
    /// minimizing over the grid legitimate.
    pub fn uniform_over_mu(self) -> bool {
        matches!(
            self,
            BoundName::Pb1 | BoundName::Pb2 | BoundName::Pb3 | BoundName::MvPb1 | BoundName::MvPb2 | BoundName::SMvPb1
        )
    }

    /// View of the classifier the bound is evaluated on.
    pub fn view(self) -> View {
        match self {
            BoundName::Pb1 => View::First,
            BoundName::Pb2 => View::Second,
            _ => View::Both,
        }
    }

    pub fn is_multi_view(self) -> bool {
        !matches!(self, BoundName::Pb1 | BoundName::Pb2 | BoundName::Pb3)
    }
}

impl fmt::Display for BoundName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundName {
    type Err = BoundError;

    fn from_str(s: &str) -> Result<Self> {
        BoundName::ALL
            .into_iter()
            .find(|b| b.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                let names: Vec<_> = BoundName::ALL.iter().map(|b| b.as_str()).collect();
                BoundError::Usage(format!("unknown bound {s:?}; valid names: {}", names.join(", ")))
            })
    }
}

impl Serialize for BoundName {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// `Q = N(μw, I)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorSpec {
    w: Vec<f64>,
    mu: f64,
}

impl PosteriorSpec {
    pub fn new(w: Vec<f64>, mu: f64) -> Result<Self> {
        if (norm(&w) - 1.0).abs() > 1e-10 {
            return Err(BoundError::Input(format!("posterior direction has norm {}", norm(&w))));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(BoundError::Input(format!("mu must be positive, got {mu}")));
        }
        Ok(Self { w, mu })
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// How the MvPB-5/6 prior center is computed from the prior subset.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorMode {
    LeastSquares { ridge: f64 },
    /// MvSVM trained on the subset with the given penalties; the result is
    /// scaled to unit length.
    MvSvm { c1: f64, c2: f64, solver: SolverOptions },
}

/// Prior center `w_p` over the concatenated feature space.
pub fn compute_subset_prior(subset: &[LabeledSample], mode: &PriorMode) -> Result<Vec<f64>> {
    if subset.is_empty() {
        return Err(BoundError::Input("prior subset is empty".into()));
    }
    match mode {
        PriorMode::LeastSquares { ridge } => least_squares_prior(subset, *ridge),
        PriorMode::MvSvm { c1, c2, solver } => {
            let xs: Vec<TwoViewSample> = subset.iter().map(|s| s.x.clone()).collect();
            let y: Vec<f64> = subset.iter().map(|s| s.y).collect();
            let model = train_coregularized_linear(&xs, &y, *c1, *c2, solver)?;
            Ok(model.linear_weights(&xs)?.unit_view_vector()?)
        }
    }
}

/// Everything a bound may look at.
#[derive(Debug, Clone, Copy)]
pub struct BoundInputs<'a> {
    /// Classifier; only its direction is used.
    pub weights: &'a LinearWeights,
    /// The labeled training set of size `m`.
    pub labeled: &'a [LabeledSample],
    /// Unlabeled pool for the semi-supervised bounds.
    pub unlabeled: &'a [TwoViewSample],
    /// For MvPB-5/6: the first `prior_count` labeled examples produced
    /// `prior_weights`, and the bound is evaluated on the rest.
    pub prior_count: usize,
    pub prior_weights: Option<&'a [f64]>,
}

fn finite_or_none<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound_name: BoundName,
    /// Numerator of the KL budget; `null` in JSON when vacuous.
    #[serde(serialize_with = "finite_or_none")]
    pub kl_numerator: f64,
    #[serde(serialize_with = "finite_or_none")]
    pub kl_budget: f64,
    /// Sample size the budget is divided by and `Ê` is averaged over.
    pub sample_size: usize,
    pub stochastic_error: f64,
    /// Bound on the true risk of the stochastic classifier.
    pub risk_bound: f64,
    /// `min(1, 2·risk_bound)`, a bound for the sign classifier.
    pub deterministic_risk_bound: f64,
    pub mu_used: f64,
    pub vacuous: bool,
    pub uniform_over_mu: bool,
    #[serde(serialize_with = "finite_components")]
    pub components: BTreeMap<String, f64>,
}

fn finite_components<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        map.serialize_entry(k, &v.is_finite().then_some(*v))?;
    }
    map.end()
}

fn direction(weights: &LinearWeights, name: BoundName) -> Result<Vec<f64>> {
    let wanted = name.view();
    if weights.view != wanted {
        return Err(BoundError::Usage(format!(
            "{name} needs a classifier over view {wanted:?}, got {:?}",
            weights.view
        )));
    }
    Ok(weights.unit_view_vector()?)
}

/// Evaluates one bound: for each `μ` in the grid computes `(Ê, B)` and
/// the inverted risk, then reports the `μ` with the smallest risk (the
/// first one on ties).
pub fn evaluate_bound(name: BoundName, inputs: &BoundInputs<'_>, config: &BoundConfig) -> Result<BoundReport> {
    config.validate()?;
    let w = direction(inputs.weights, name)?;
    let (sigma, eta, delta) = (config.sigma, config.eta, config.delta);

    let eval_set: &[LabeledSample] = match name {
        BoundName::MvPb5 | BoundName::MvPb6 => {
            let r = inputs.prior_count;
            if r == 0 || r >= inputs.labeled.len() {
                return Err(BoundError::Input(format!(
                    "prior subset of {r} examples out of {}",
                    inputs.labeled.len()
                )));
            }
            &inputs.labeled[r..]
        }
        _ => inputs.labeled,
    };
    if eval_set.is_empty() {
        return Err(BoundError::Input("empty labeled set".into()));
    }
    let view = name.view();
    let phis: Vec<Vec<f64>> = eval_set.iter().map(|s| view.features(&s.x)).collect();
    let labels: Vec<f64> = eval_set.iter().map(|s| s.y).collect();
    let gammas = margins(&phis, &labels, &w)?;

    // μ-independent preparation
    let terms = if name.is_multi_view() {
        Some(SampleTerms::new(inputs.labeled, &w)?)
    } else {
        formulas::check_scaled(inputs.labeled.iter().map(|s| &s.x))?;
        None
    };
    let pool = match name {
        BoundName::SMvPb1 | BoundName::SMvPb2 => Some(unlabeled_terms(inputs.unlabeled, &w, sigma)?),
        _ => None,
    };
    let prior = match name {
        BoundName::MvPb5 | BoundName::MvPb6 => Some(
            inputs
                .prior_weights
                .ok_or_else(|| BoundError::Usage(format!("{name} needs prior weights")))?,
        ),
        _ => None,
    };
    let m = inputs.labeled.len();

    let mut best: Option<BoundReport> = None;
    for &mu in &config.mu_grid {
        let budget = match name {
            BoundName::Pb1 | BoundName::Pb2 | BoundName::Pb3 => bound_pb(m, mu, delta)?,
            BoundName::MvPb5 | BoundName::MvPb6 => {
                bound_mvpb5_6(prior.expect("checked"), &w, mu, eta, m, inputs.prior_count, delta)?
            }
            BoundName::SMvPb1 => bound_smvpb1_from_terms(pool.as_ref().expect("checked"), mu, sigma, m, delta)?,
            _ => {
                let agg = terms.as_ref().expect("multi-view").aggregates(mu, sigma, eta);
                match name {
                    BoundName::MvPb1 => bound_mvpb1(&agg, mu, sigma, delta)?,
                    BoundName::MvPb2 => bound_mvpb2(&agg, mu, sigma, delta)?,
                    BoundName::MvPb3 => bound_mvpb3(&agg, &w, mu, sigma, eta, delta)?,
                    BoundName::MvPb4 => bound_mvpb4(&agg, &w, mu, sigma, eta, delta)?,
                    BoundName::SMvPb2 => {
                        bound_smvpb2_from_terms(pool.as_ref().expect("checked"), &agg, &w, mu, sigma, eta, delta)?
                    }
                    _ => unreachable!("handled above"),
                }
            }
        };
        let q = stochastic_error_from_margins(&gammas, mu)?;
        let vacuous = budget.is_vacuous();
        let risk = if vacuous { 1.0 } else { invert_kl(q, budget.value().max(0.0)).max(q) };
        let report = BoundReport {
            bound_name: name,
            kl_numerator: budget.numerator,
            kl_budget: budget.value(),
            sample_size: eval_set.len(),
            stochastic_error: q,
            risk_bound: risk,
            deterministic_risk_bound: (2.0 * risk).min(1.0),
            mu_used: mu,
            vacuous,
            uniform_over_mu: name.uniform_over_mu(),
            components: budget.components,
        };
        if best.as_ref().is_none_or(|b| report.risk_bound < b.risk_bound) {
            best = Some(report);
        }
    }
    Ok(best.expect("mu grid is non-empty"))
}
