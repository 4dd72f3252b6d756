use statrs::function::erf::erfc;

use super::{BoundError, Result};
use crate::linalg::{dot, norm};

/// Upper cap for KL inversion.
pub const P_CAP: f64 = 1.0 - 1e-15;

/// `F̃(x) = ∫ₓ^∞ N(0,1)`, the upper Gaussian tail.
pub fn gaussian_tail(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// `γ = y·wᵀφ/‖φ‖`.
pub fn normalized_margin(phi: &[f64], y: f64, w: &[f64]) -> Result<f64> {
    if phi.len() != w.len() {
        return Err(BoundError::Input(format!(
            "feature vector has length {}, weight vector {}",
            phi.len(),
            w.len()
        )));
    }
    let len = norm(phi);
    if !(len > 0.0) {
        return Err(BoundError::Input("zero feature vector has no normalized margin".into()));
    }
    Ok((y * dot(w, phi) / len).clamp(-1.0, 1.0))
}

/// Normalized margins of a labeled set.
pub fn margins<S: AsRef<[f64]>>(features: &[S], labels: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    if features.len() != labels.len() {
        return Err(BoundError::Input(format!(
            "{} feature vectors for {} labels",
            features.len(),
            labels.len()
        )));
    }
    features
        .iter()
        .zip(labels)
        .map(|(phi, &y)| normalized_margin(phi.as_ref(), y, w))
        .collect()
}

/// `Ê = mean F̃(μγᵢ)` from precomputed margins.
pub fn stochastic_error_from_margins(margins: &[f64], mu: f64) -> Result<f64> {
    if margins.is_empty() {
        return Err(BoundError::Input("stochastic error of an empty set".into()));
    }
    Ok(margins.iter().map(|g| gaussian_tail(mu * g)).sum::<f64>() / margins.len() as f64)
}

/// Empirical error of the Gibbs classifier `N(μw, I)`; `w` must be unit
/// length.
pub fn stochastic_error<S: AsRef<[f64]>>(features: &[S], labels: &[f64], w: &[f64], mu: f64) -> Result<f64> {
    stochastic_error_from_margins(&margins(features, labels, w)?, mu)
}

fn xlogx_ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * (a / b).ln()
    }
}

/// `KL₊(q‖p)`: the binary relative entropy when `p > q`, else 0.
pub fn kl_plus(q: f64, p: f64) -> f64 {
    if p <= q {
        return 0.0;
    }
    if p >= 1.0 {
        return if q < 1.0 { f64::INFINITY } else { 0.0 };
    }
    (xlogx_ratio(q, p) + xlogx_ratio(1.0 - q, 1.0 - p)).max(0.0)
}

/// Largest `p ∈ [q̂, 1 − 1e-15]` with `KL₊(q̂‖p) ≤ B`, by bisection.
pub fn invert_kl(q_hat: f64, budget: f64) -> f64 {
    let q = q_hat.clamp(0.0, 1.0);
    if q >= P_CAP {
        return q;
    }
    if !(budget > 0.0) {
        return q;
    }
    if budget.is_infinite() || kl_plus(q, P_CAP) <= budget {
        return P_CAP;
    }
    let (mut lo, mut hi) = (q, P_CAP);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if kl_plus(q, mid) <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    /// Composite Simpson rule on `[x, x + 12]` for the standard normal
    /// density; the tail beyond is below 1e-30.
    fn tail_by_quadrature(x: f64) -> f64 {
        let n = 20_000;
        let h = 12.0 / n as f64;
        let f = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = f(x) + f(x + 12.0);
        for i in 1..n {
            let t = x + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(t);
        }
        s * h / 3.0
    }

    #[test]
    fn tail_values() {
        assert_eq!(gaussian_tail(0.0), 0.5);
        assert!(gaussian_tail(40.0) < 1e-300);
        assert_eq!(gaussian_tail(-40.0), 1.0);
        assert_relative_eq!(gaussian_tail(1.6449), tail_by_quadrature(1.6449), max_relative = 1e-10);
        assert_abs_diff_eq!(gaussian_tail(1.6449), 0.05, epsilon = 1e-5);
        for x in [-2.5, -0.3, 0.7, 1.0, 3.3, 6.0] {
            assert_relative_eq!(gaussian_tail(x), tail_by_quadrature(x), max_relative = 1e-10);
        }
    }

    #[test]
    fn tail_is_strictly_decreasing() {
        let xs: Vec<f64> = (-80..=80).map(|i| i as f64 * 0.1).collect();
        for pair in xs.windows(2) {
            assert!(gaussian_tail(pair[0]) > gaussian_tail(pair[1]));
        }
    }

    #[test]
    fn margins_of_simple_cases() {
        assert_abs_diff_eq!(normalized_margin(&[3.0, 4.0], -1.0, &[-0.6, -0.8]).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(normalized_margin(&[1.0, 0.0], 1.0, &[0.0, 1.0]).unwrap(), 0.0);
        let (phi, w) = ([0.3, -1.2, 2.0], [0.48, 0.6, 0.64]);
        let direct = -1.0 * (0.3 * 0.48 - 1.2 * 0.6 + 2.0 * 0.64) / (0.09f64 + 1.44 + 4.0).sqrt();
        assert_abs_diff_eq!(normalized_margin(&phi, -1.0, &w).unwrap(), direct, epsilon = 1e-15);
        assert!(normalized_margin(&[0.0, 0.0], 1.0, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn stochastic_error_limits() {
        let xs = [[1.0, 0.2], [0.5, -0.1], [2.0, 1.0]];
        let y = [1.0, 1.0, 1.0];
        let w = [1.0, 0.0];
        assert_abs_diff_eq!(stochastic_error(&xs, &y, &w, 1e-12).unwrap(), 0.5, epsilon = 1e-12);
        assert!(stochastic_error(&xs, &y, &w, 1e6).unwrap() <= 1e-9);
        let one = stochastic_error(&[[1.0, 0.0]], &[1.0], &w, 1.0).unwrap();
        assert_abs_diff_eq!(one, tail_by_quadrature(1.0), epsilon = 1e-10);
        assert_abs_diff_eq!(one, 0.1587, epsilon = 1e-4);
    }

    #[test]
    fn kl_plus_cases() {
        assert_eq!(kl_plus(0.3, 0.3), 0.0);
        assert_abs_diff_eq!(kl_plus(0.0, 0.5), 2f64.ln(), epsilon = 1e-15);
        assert_eq!(kl_plus(0.1, 0.05), 0.0);
        assert_abs_diff_eq!(kl_plus(1.0, 1.0), 0.0);
        assert!(kl_plus(0.5, 1.0).is_infinite());
    }

    #[test]
    fn inversion_cases() {
        assert_eq!(invert_kl(0.2, 0.0), 0.2);
        assert_abs_diff_eq!(invert_kl(0.0, 2f64.ln()), 0.5, epsilon = 1e-12);
        // fine scan for the largest admissible p
        let (q, b) = (0.1, 0.05);
        let scan = (0..=1_000_000)
            .map(|i| i as f64 * 1e-6)
            .filter(|&p| kl_plus(q, p) <= b)
            .fold(0.0, f64::max);
        let p = invert_kl(q, b);
        assert_abs_diff_eq!(p, scan, epsilon = 2e-6);
        assert_abs_diff_eq!(p, 0.220, epsilon = 1e-3);
        assert_eq!(invert_kl(0.0, f64::INFINITY), P_CAP);
        assert_eq!(invert_kl(0.3, 1e6), P_CAP);
    }
}
