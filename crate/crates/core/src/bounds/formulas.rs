//! Empirical aggregates and the KL budgets of the individual bounds.
//!
//! Every budget is returned as a [`KlBudget`]: an additive breakdown of the
//! numerator and the sample size it is divided by.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{BoundError, Result};
use crate::data::{LabeledSample, TwoViewSample};
use crate::linalg::{dot, logdet_identity_plus_scatter, norm, norm_sq, solve_psd, Matrix};

/// Slack allowed on the `‖x‖ ≤ R = 1` scaling contract.
const SCALE_SLACK: f64 = 1e-9;

/// KL budget `B = numerator / denominator`, with the additive terms of the
/// numerator kept by name. A vacuous budget has an infinite numerator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KlBudget {
    pub numerator: f64,
    pub denominator: f64,
    pub components: BTreeMap<String, f64>,
}

impl KlBudget {
    fn from_terms(terms: &[(&str, f64)], denominator: f64) -> Self {
        let numerator = terms.iter().map(|(_, v)| v).sum();
        let components = terms.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        Self {
            numerator,
            denominator,
            components,
        }
    }

    pub fn value(&self) -> f64 {
        self.numerator / self.denominator
    }

    pub fn is_vacuous(&self) -> bool {
        self.numerator.is_infinite()
    }
}

/// Data-dependent quantities shared by the multi-view bounds, evaluated at
/// one `(w, μ, σ, η)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalAggregates {
    /// `(1/m)Σ(1 + ‖x̃ᵢ‖²/σ²)^{1/d}`.
    pub f_m: f64,
    /// `f_m − 1`, kept separately because `f_m` is within ~1e-6 of one
    /// at `σ = 100`.
    pub f_m_minus_one: f64,
    pub f_tilde: f64,
    pub h_m: f64,
    pub h_hat_m: f64,
    pub h_tilde_m: f64,
    pub s_bar_m: f64,
    /// `(1/m)Σ yᵢxᵢ` on concatenated features.
    pub w_hat_p: Vec<f64>,
    pub r: f64,
    pub d: usize,
    pub m: usize,
}

/// Per-example quantities that do not depend on `μ` or `η`.
#[derive(Debug, Clone)]
pub(crate) struct SampleTerms {
    /// `‖x̃ᵢ‖²`.
    norm_sq: Vec<f64>,
    /// `wᵀx̃ᵢ`.
    w_xt: Vec<f64>,
    /// `yᵢwᵀxᵢ`.
    yw_x: Vec<f64>,
    w_hat_p: Vec<f64>,
    d: usize,
}

pub(crate) fn check_scaled<'a>(xs: impl IntoIterator<Item = &'a TwoViewSample>) -> Result<()> {
    for (i, x) in xs.into_iter().enumerate() {
        let len = x.norm_sq().sqrt();
        if len > 1.0 + SCALE_SLACK {
            return Err(BoundError::Contract(format!(
                "example {i} has norm {len}; bounds need data scaled to R = 1"
            )));
        }
    }
    Ok(())
}

/// Splits a concatenated vector into its two view parts.
fn split_w<'a>(w: &'a [f64], x: &TwoViewSample) -> Result<(&'a [f64], &'a [f64])> {
    let d1 = x.x1.len();
    if w.len() != d1 + x.x2.len() {
        return Err(BoundError::Input(format!(
            "weight vector has length {}, samples have dimension {}",
            w.len(),
            d1 + x.x2.len()
        )));
    }
    Ok(w.split_at(d1))
}

/// `wᵀx̃ = w₁ᵀx₁ − w₂ᵀx₂`.
fn w_dot_disagreement(w: &[f64], x: &TwoViewSample) -> Result<f64> {
    let (w1, w2) = split_w(w, x)?;
    Ok(dot(w1, &x.x1) - dot(w2, &x.x2))
}

impl SampleTerms {
    pub(crate) fn new(samples: &[LabeledSample], w: &[f64]) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| BoundError::Input("empty labeled set".into()))?;
        check_scaled(samples.iter().map(|s| &s.x))?;
        let d = first.x.x1.len() + first.x.x2.len();
        let mut terms = Self {
            norm_sq: Vec::with_capacity(samples.len()),
            w_xt: Vec::with_capacity(samples.len()),
            yw_x: Vec::with_capacity(samples.len()),
            w_hat_p: vec![0.0; d],
            d,
        };
        let m = samples.len() as f64;
        for s in samples {
            let (w1, w2) = split_w(w, &s.x)?;
            let (a, b) = (dot(w1, &s.x.x1), dot(w2, &s.x.x2));
            terms.norm_sq.push(s.x.norm_sq());
            terms.w_xt.push(a - b);
            terms.yw_x.push(s.y * (a + b));
            for (acc, v) in terms.w_hat_p.iter_mut().zip(s.x.x1.iter().chain(&s.x.x2)) {
                *acc += s.y * v / m;
            }
        }
        Ok(terms)
    }

    pub(crate) fn aggregates(&self, mu: f64, sigma: f64, eta: f64) -> EmpiricalAggregates {
        let m = self.norm_sq.len();
        let mf = m as f64;
        let s2 = sigma * sigma;
        let d = self.d as f64;
        let mut acc = EmpiricalAggregates {
            f_m: 0.0,
            f_m_minus_one: 0.0,
            f_tilde: 0.0,
            h_m: 0.0,
            h_hat_m: 0.0,
            h_tilde_m: 0.0,
            s_bar_m: 0.0,
            w_hat_p: self.w_hat_p.clone(),
            r: 1.0,
            d: self.d,
            m,
        };
        for i in 0..m {
            let logdet = (self.norm_sq[i] / s2).ln_1p();
            let quad = self.norm_sq[i] + mu * mu * self.w_xt[i] * self.w_xt[i];
            let centered = quad - 2.0 * eta * mu * s2 * self.yw_x[i];
            acc.f_m_minus_one += (logdet / d).exp_m1();
            acc.f_tilde += quad / s2 - logdet;
            acc.h_m += quad;
            acc.h_hat_m += centered;
            acc.h_tilde_m += centered / s2 - logdet;
            acc.s_bar_m += -eta * mu * self.yw_x[i];
        }
        acc.f_m_minus_one /= mf;
        acc.f_m = 1.0 + acc.f_m_minus_one;
        acc.f_tilde /= mf;
        acc.h_m /= mf;
        acc.h_hat_m /= mf;
        acc.h_tilde_m /= mf;
        acc.s_bar_m /= mf;
        acc
    }
}

/// All aggregates for labeled, scaled samples and a unit vector `w` over
/// the concatenated feature space.
pub fn empirical_aggregates(
    samples: &[LabeledSample],
    w: &[f64],
    mu: f64,
    sigma: f64,
    eta: f64,
) -> Result<EmpiricalAggregates> {
    check_positive("sigma", sigma)?;
    Ok(SampleTerms::new(samples, w)?.aggregates(mu, sigma, eta))
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(BoundError::Input(format!("{name} must be positive, got {v}")))
    }
}

/// `√(ln(k/δ)/(2m))`.
fn mcdiarmid_width(k: f64, delta: f64, m: f64) -> f64 {
    ((k / delta).ln() / (2.0 * m)).sqrt()
}

/// `−(d/2)·ln[f_m − ((R/σ)² + 1)^{1/d} − 1)·width]₊`, infinite when the
/// bracket is not positive.
fn log_det_term(agg: &EmpiricalAggregates, sigma: f64, width: f64) -> f64 {
    let d = agg.d as f64;
    let r2 = agg.r * agg.r / (sigma * sigma);
    let slack = (r2.ln_1p() / d).exp_m1() * width;
    let inner_minus_one = agg.f_m_minus_one - slack;
    if 1.0 + inner_minus_one <= 0.0 {
        f64::INFINITY
    } else {
        -0.5 * d * inner_minus_one.ln_1p()
    }
}

/// `½(ηR/√m·(2 + √(2ln(k/δ))) + ‖ηŵ_p − μw‖ + μ)²`.
fn center_term(w_hat_p: &[f64], w: &[f64], r: f64, m: f64, mu: f64, eta: f64, k: f64, delta: f64) -> f64 {
    let mismatch: Vec<f64> = w_hat_p.iter().zip(w).map(|(p, wi)| eta * p - mu * wi).collect();
    let a = eta * r / m.sqrt() * (2.0 + (2.0 * (k / delta).ln()).sqrt()) + norm(&mismatch) + mu;
    0.5 * a * a
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(BoundError::Input(format!("delta must lie in (0, 1], got {delta}")))
    }
}

/// Single-view budget `(μ²/2 + ln((m+1)/δ))/m`.
pub fn bound_pb(m: usize, mu: f64, delta: f64) -> Result<KlBudget> {
    check_delta(delta)?;
    if m == 0 {
        return Err(BoundError::Input("m must be at least 1".into()));
    }
    let mf = m as f64;
    Ok(KlBudget::from_terms(
        &[("mu_sq_half", 0.5 * mu * mu), ("log_confidence", ((mf + 1.0) / delta).ln())],
        mf,
    ))
}

pub fn bound_mvpb1(agg: &EmpiricalAggregates, mu: f64, sigma: f64, delta: f64) -> Result<KlBudget> {
    check_delta(delta)?;
    let m = agg.m as f64;
    let r2 = agg.r * agg.r;
    let s2 = sigma * sigma;
    let width = mcdiarmid_width(3.0, delta, m);
    Ok(KlBudget::from_terms(
        &[
            ("log_det", log_det_term(agg, sigma, width)),
            ("h_m", agg.h_m / (2.0 * s2)),
            ("concentration", (1.0 + mu * mu) * r2 / (2.0 * s2) * width),
            ("mu_sq_half", 0.5 * mu * mu),
            ("log_confidence", ((m + 1.0) / (delta / 3.0)).ln()),
        ],
        m,
    ))
}

pub fn bound_mvpb2(agg: &EmpiricalAggregates, mu: f64, sigma: f64, delta: f64) -> Result<KlBudget> {
    check_delta(delta)?;
    let m = agg.m as f64;
    let r2 = agg.r * agg.r;
    let s2 = sigma * sigma;
    let width = mcdiarmid_width(2.0, delta, m);
    Ok(KlBudget::from_terms(
        &[
            ("f_tilde", 0.5 * agg.f_tilde),
            ("concentration", 0.5 * ((1.0 + mu * mu) * r2 / s2 + (r2 / s2).ln_1p()) * width),
            ("mu_sq_half", 0.5 * mu * mu),
            ("log_confidence", ((m + 1.0) / (delta / 2.0)).ln()),
        ],
        m,
    ))
}

/// `w` is the unit posterior direction the aggregates were computed with.
pub fn bound_mvpb3(
    agg: &EmpiricalAggregates,
    w: &[f64],
    mu: f64,
    sigma: f64,
    eta: f64,
    delta: f64,
) -> Result<KlBudget> {
    check_delta(delta)?;
    let m = agg.m as f64;
    let r = agg.r;
    let s2 = sigma * sigma;
    let width = mcdiarmid_width(4.0, delta, m);
    Ok(KlBudget::from_terms(
        &[
            ("log_det", log_det_term(agg, sigma, width)),
            ("center", center_term(&agg.w_hat_p, w, r, m, mu, eta, 4.0, delta)),
            ("h_hat_m", agg.h_hat_m / (2.0 * s2)),
            (
                "concentration",
                (r * r + mu * mu * r * r + 4.0 * eta * mu * s2 * r) / (2.0 * s2) * width,
            ),
            ("mu_sq_half", 0.5 * mu * mu),
            ("log_confidence", ((m + 1.0) / (delta / 4.0)).ln()),
        ],
        m,
    ))
}

pub fn bound_mvpb4(
    agg: &EmpiricalAggregates,
    w: &[f64],
    mu: f64,
    sigma: f64,
    eta: f64,
    delta: f64,
) -> Result<KlBudget> {
    check_delta(delta)?;
    let m = agg.m as f64;
    let r = agg.r;
    let s2 = sigma * sigma;
    let width = mcdiarmid_width(3.0, delta, m);
    let spread = r * r + 4.0 * eta * mu * s2 * r + mu * mu * r * r + s2 * (r * r / s2).ln_1p();
    Ok(KlBudget::from_terms(
        &[
            ("center", center_term(&agg.w_hat_p, w, r, m, mu, eta, 3.0, delta)),
            ("h_tilde_m", 0.5 * agg.h_tilde_m),
            ("concentration", spread / (2.0 * s2) * width),
            ("mu_sq_half", 0.5 * mu * mu),
            ("log_confidence", ((m + 1.0) / (delta / 3.0)).ln()),
        ],
        m,
    ))
}

/// Budget of the separate-subset bounds: `m` is the full training size
/// and `r` the size of the subset the prior was computed from.
pub fn bound_mvpb5_6(w_p: &[f64], w: &[f64], mu: f64, eta: f64, m: usize, r: usize, delta: f64) -> Result<KlBudget> {
    check_delta(delta)?;
    if r >= m {
        return Err(BoundError::Input(format!("prior subset size {r} must be below m = {m}")));
    }
    if w_p.len() != w.len() {
        return Err(BoundError::Input(format!(
            "prior weights have length {}, posterior {}",
            w_p.len(),
            w.len()
        )));
    }
    let rest = (m - r) as f64;
    let mismatch: f64 = w_p.iter().zip(w).map(|(p, wi)| (eta * p - mu * wi).powi(2)).sum();
    Ok(KlBudget::from_terms(
        &[
            ("center", 0.5 * mismatch),
            ("log_confidence", ((rest + 1.0) / delta).ln()),
        ],
        rest,
    ))
}

/// Unlabeled-pool statistics for the semi-supervised bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnlabeledTerms {
    /// `ln|I + E_U(x̃x̃ᵀ)/σ²|`.
    pub log_det: f64,
    /// `E_U‖x̃‖²`.
    pub mean_norm_sq: f64,
    /// `E_U(wᵀx̃)²`.
    pub mean_w_sq: f64,
}

pub fn unlabeled_terms(unlabeled: &[TwoViewSample], w: &[f64], sigma: f64) -> Result<UnlabeledTerms> {
    if unlabeled.is_empty() {
        return Err(BoundError::Input("unlabeled pool is empty".into()));
    }
    check_positive("sigma", sigma)?;
    check_scaled(unlabeled)?;
    let rows: Vec<Vec<f64>> = unlabeled.iter().map(TwoViewSample::disagreement).collect();
    let u = unlabeled.len() as f64;
    let mut mean_w_sq = 0.0;
    for x in unlabeled {
        mean_w_sq += w_dot_disagreement(w, x)?.powi(2) / u;
    }
    Ok(UnlabeledTerms {
        log_det: logdet_identity_plus_scatter(&rows, sigma)?,
        mean_norm_sq: rows.iter().map(|r| norm_sq(r)).sum::<f64>() / u,
        mean_w_sq,
    })
}

/// `½(−ln|I + E_U/σ²| + E_U[x̃ᵀx̃ + μ²(wᵀx̃)²]/σ² + μ²)`.
fn unlabeled_kl(t: &UnlabeledTerms, mu: f64, sigma: f64) -> f64 {
    0.5 * (-t.log_det + (t.mean_norm_sq + mu * mu * t.mean_w_sq) / (sigma * sigma) + mu * mu)
}

pub fn bound_smvpb1_from_terms(t: &UnlabeledTerms, mu: f64, sigma: f64, m: usize, delta: f64) -> Result<KlBudget> {
    check_delta(delta)?;
    let mf = m as f64;
    Ok(KlBudget::from_terms(
        &[
            ("kl", unlabeled_kl(t, mu, sigma)),
            ("log_confidence", ((mf + 1.0) / delta).ln()),
        ],
        mf,
    ))
}

pub fn bound_smvpb1(
    unlabeled: &[TwoViewSample],
    w: &[f64],
    mu: f64,
    sigma: f64,
    m: usize,
    delta: f64,
) -> Result<KlBudget> {
    bound_smvpb1_from_terms(&unlabeled_terms(unlabeled, w, sigma)?, mu, sigma, m, delta)
}

/// `agg` provides `ŵ_p`, `S̄_m` and `m` from the labeled set.
pub fn bound_smvpb2_from_terms(
    t: &UnlabeledTerms,
    agg: &EmpiricalAggregates,
    w: &[f64],
    mu: f64,
    sigma: f64,
    eta: f64,
    delta: f64,
) -> Result<KlBudget> {
    check_delta(delta)?;
    let m = agg.m as f64;
    let r = agg.r;
    Ok(KlBudget::from_terms(
        &[
            ("center", center_term(&agg.w_hat_p, w, r, m, mu, eta, 3.0, delta)),
            ("kl", unlabeled_kl(t, mu, sigma)),
            ("s_bar_m", agg.s_bar_m),
            ("concentration", eta * mu * r * ((2.0 / m) * (3.0 / delta).ln()).sqrt()),
            ("log_confidence", ((m + 1.0) / (delta / 3.0)).ln()),
        ],
        m,
    ))
}

pub fn bound_smvpb2(
    unlabeled: &[TwoViewSample],
    labeled: &[LabeledSample],
    w: &[f64],
    mu: f64,
    sigma: f64,
    eta: f64,
    delta: f64,
) -> Result<KlBudget> {
    let t = unlabeled_terms(unlabeled, w, sigma)?;
    let agg = empirical_aggregates(labeled, w, mu, sigma, eta)?;
    bound_smvpb2_from_terms(&t, &agg, w, mu, sigma, eta, delta)
}

/// `((1/r)Σx̃ₖx̃ₖᵀ + ridge·I)⁻¹ (1/r)Σyₖxₖ` over the prior subset.
pub fn least_squares_prior(subset: &[LabeledSample], ridge: f64) -> Result<Vec<f64>> {
    let first = subset
        .first()
        .ok_or_else(|| BoundError::Input("prior subset is empty".into()))?;
    let d = first.x.x1.len() + first.x.x2.len();
    let r = subset.len() as f64;
    let mut scatter = Matrix::zeros(d, d);
    let mut rhs = vec![0.0; d];
    for s in subset {
        let xt = s.x.disagreement();
        if xt.len() != d {
            return Err(BoundError::Input("prior subset has inconsistent dimensions".into()));
        }
        for i in 0..d {
            for j in 0..d {
                scatter[(i, j)] += xt[i] * xt[j] / r;
            }
        }
        for (acc, v) in rhs.iter_mut().zip(s.x.x1.iter().chain(&s.x.x2)) {
            *acc += s.y * v / r;
        }
    }
    Ok(solve_psd(&scatter, &rhs, ridge)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample(x1: Vec<f64>, x2: Vec<f64>, y: f64) -> LabeledSample {
        LabeledSample::new(x1, x2, y)
    }

    #[test]
    fn zero_sample_aggregates() {
        let s = [sample(vec![0.0, 0.0], vec![0.0], 1.0)];
        let agg = empirical_aggregates(&s, &[1.0, 0.0, 0.0], 2.0, 1.0, 1.0).unwrap();
        assert_eq!(agg.f_m, 1.0);
        assert_eq!(agg.h_m, 0.0);
        assert_eq!(agg.f_tilde, 0.0);
    }

    #[test]
    fn sample_at_sigma_orthogonal_to_w() {
        // ‖x̃‖ = σ = 0.5 and wᵀx̃ = 0
        let s = [sample(vec![0.3], vec![0.4], 1.0)];
        let w = [0.8, 0.6];
        let agg = empirical_aggregates(&s, &w, 7.0, 0.5, 1.0).unwrap();
        assert_abs_diff_eq!(agg.h_m, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(agg.f_tilde, 1.0 - 2f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn unscaled_data_is_a_contract_error() {
        let s = [sample(vec![1.0], vec![1.0], 1.0)];
        assert!(matches!(
            empirical_aggregates(&s, &[1.0, 0.0], 1.0, 1.0, 1.0),
            Err(BoundError::Contract(_))
        ));
    }

    #[test]
    fn pb_arithmetic() {
        let b = bound_pb(100, 1.0, 0.05).unwrap().value();
        assert_abs_diff_eq!(b, (0.5 + (101.0f64 / 0.05).ln()) / 100.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 0.0811, epsilon = 1e-4);
        let b0 = bound_pb(100, 0.0, 0.05).unwrap().value();
        assert_abs_diff_eq!(b0, (101.0f64 / 0.05).ln() / 100.0, epsilon = 1e-15);
        let seq: Vec<f64> = [10, 100, 1000].iter().map(|&m| bound_pb(m, 2.0, 0.05).unwrap().value()).collect();
        assert!(seq[0] > seq[1] && seq[1] > seq[2]);
    }

    #[test]
    fn tiny_m_makes_bound_one_vacuous() {
        // with a huge slack the bracket goes negative
        let s = [sample(vec![0.0], vec![0.0], 1.0)];
        let agg = empirical_aggregates(&s, &[1.0, 0.0], 1.0, 0.01, 1.0).unwrap();
        let b = bound_mvpb1(&agg, 1.0, 0.01, 0.05).unwrap();
        assert!(b.is_vacuous());
        assert!(b.value().is_infinite());
    }

    #[test]
    fn mvpb2_with_zero_disagreement() {
        let s: Vec<_> = (0..4).map(|i| sample(vec![0.0], vec![0.0], if i % 2 == 0 { 1.0 } else { -1.0 })).collect();
        let (mu, sigma, delta) = (3.0, 100.0, 0.05);
        let agg = empirical_aggregates(&s, &[0.6, 0.8], mu, sigma, 1.0).unwrap();
        let m = 4.0f64;
        let expected = mu * mu / 2.0
            + 0.5 * (1.0 / (sigma * sigma) as f64).ln_1p() * ((2.0f64 / delta).ln() / (2.0 * m)).sqrt()
            + ((m + 1.0) / (delta / 2.0)).ln();
        let b = bound_mvpb2(&agg, mu, sigma, delta).unwrap();
        // the concentration term still carries (1+μ²)R²/σ²
        let extra = 0.5 * (1.0 + mu * mu) / (sigma * sigma) * ((2.0f64 / delta).ln() / (2.0 * m)).sqrt();
        assert_abs_diff_eq!(b.numerator, expected + extra, epsilon = 1e-12);
    }

    #[test]
    fn mvpb3_center_term_without_eta() {
        let s = [sample(vec![0.1], vec![0.2], 1.0), sample(vec![-0.3], vec![0.1], -1.0)];
        let w = [0.6, 0.8];
        let mu = 2.5;
        let agg = empirical_aggregates(&s, &w, mu, 100.0, 0.0).unwrap();
        let b = bound_mvpb3(&agg, &w, mu, 100.0, 0.0, 0.05).unwrap();
        assert_abs_diff_eq!(b.components["center"], 2.0 * mu * mu, epsilon = 1e-12);
    }

    #[test]
    fn separate_subset_budget() {
        let w = [0.6, 0.8];
        let b = bound_mvpb5_6(&[1.2, 1.6], &w, 2.0, 1.0, 100, 20, 0.05).unwrap();
        assert_abs_diff_eq!(b.value(), (81.0f64 / 0.05).ln() / 80.0, epsilon = 1e-15);
        let b = bound_mvpb5_6(&[0.0, 0.0], &[1.0, 0.0], 1.0, 1.0, 100, 20, 0.05).unwrap();
        assert_abs_diff_eq!(b.value(), (0.5 + (81.0f64 / 0.05).ln()) / 80.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.value(), 0.0986, epsilon = 1e-4);
        assert!(bound_mvpb5_6(&[0.0, 0.0], &w, 1.0, 1.0, 20, 20, 0.05).is_err());
    }

    #[test]
    fn smvpb1_with_zero_pool_is_pb() {
        let pool = vec![TwoViewSample::new(vec![0.0, 0.0], vec![0.0]); 5];
        let w = [0.0, 0.6, 0.8];
        for mu in [0.5, 3.0, 20.0] {
            let a = bound_smvpb1(&pool, &w, mu, 100.0, 50, 0.05).unwrap().value();
            let b = bound_pb(50, mu, 0.05).unwrap().value();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn least_squares_prior_cases() {
        let p = least_squares_prior(&[sample(vec![0.0], vec![0.0], -1.0)], 1.0).unwrap();
        assert_eq!(p, vec![0.0, 0.0]);
        let s = [sample(vec![0.5], vec![0.0], -1.0)];
        // scatter diag(0.25, 0) plus the unit ridge
        let p = least_squares_prior(&s, 1.0).unwrap();
        assert_abs_diff_eq!(p[0], -0.5 / 1.25, epsilon = 1e-15);
        assert_eq!(p[1], 0.0);
    }
}
