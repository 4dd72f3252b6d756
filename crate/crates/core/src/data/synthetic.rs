use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{DataError, LabeledSample, Result, TwoViewDataset};
use crate::linalg::{dot, norm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub n: usize,
    pub d_per_view: usize,
    pub noise_sd: f64,
    /// Scale of the signed projection magnitudes.
    #[serde(default = "default_signal_scale")]
    pub signal_scale: f64,
}

fn default_signal_scale() -> f64 {
    0.25
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n: 2000,
            d_per_view: 50,
            noise_sd: 0.1,
            signal_scale: default_signal_scale(),
        }
    }
}

fn normal_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

fn unit_direction(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let mut u = normal_vec(rng, d);
        let len = norm(&u);
        if len > 1e-8 {
            u.iter_mut().for_each(|v| *v /= len);
            return u;
        }
    }
}

/// `s·u` plus an isotropic component orthogonal to `u`, plus white noise.
fn view_point(rng: &mut ChaCha8Rng, u: &[f64], s: f64, noise_sd: f64) -> Vec<f64> {
    let mut z = normal_vec(rng, u.len());
    let along = dot(&z, u);
    for (zi, ui) in z.iter_mut().zip(u) {
        *zi += (s - along) * ui;
    }
    if noise_sd > 0.0 {
        for zi in &mut z {
            *zi += noise_sd * rng.sample::<f64, _>(StandardNormal);
        }
    }
    z
}

/// Two-view synthetic data: the first half of the examples is positive,
/// the second half negative. Before noise, both views project onto their
/// direction vectors with the same signed magnitude `s = y·a·|N(0,1)|`,
/// where `a` is `signal_scale`.
pub fn gen_synthetic(config: &SyntheticConfig) -> Result<TwoViewDataset> {
    let SyntheticConfig {
        seed,
        n,
        d_per_view: d,
        noise_sd,
        signal_scale,
    } = *config;
    if n == 0 || n % 2 != 0 {
        return Err(DataError::Input(format!("n must be even and positive, got {n}")));
    }
    if d == 0 {
        return Err(DataError::Input("view dimension must be positive".into()));
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(DataError::Input(format!("noise_sd must be nonnegative, got {noise_sd}")));
    }
    if !(signal_scale > 0.0 && signal_scale.is_finite()) {
        return Err(DataError::Input(format!("signal_scale must be positive, got {signal_scale}")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u1 = unit_direction(&mut rng, d);
    let u2 = unit_direction(&mut rng, d);
    let mut ds = TwoViewDataset::new(d, d);
    ds.labeled.reserve(n);
    for i in 0..n {
        let y = if i < n / 2 { 1.0 } else { -1.0 };
        let s = y * signal_scale * rng.sample::<f64, _>(StandardNormal).abs();
        let x1 = view_point(&mut rng, &u1, s, noise_sd);
        let x2 = view_point(&mut rng, &u2, s, noise_sd);
        ds.labeled.push(LabeledSample::new(x1, x2, y));
    }
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn directions(seed: u64, d: usize) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u1 = unit_direction(&mut rng, d);
        (u1, unit_direction(&mut rng, d))
    }

    #[test]
    fn noiseless_views_agree_along_their_directions() {
        let cfg = SyntheticConfig {
            seed: 4,
            n: 40,
            d_per_view: 7,
            noise_sd: 0.0,
            signal_scale: 1.0,
        };
        let ds = gen_synthetic(&cfg).unwrap();
        let (u1, u2) = directions(4, 7);
        for s in &ds.labeled {
            let (p1, p2) = (dot(&u1, &s.x.x1), dot(&u2, &s.x.x2));
            assert!((p1 - p2).abs() < 1e-12, "{p1} vs {p2}");
            assert_eq!(p1 >= 0.0, s.y > 0.0);
        }
    }

    #[test]
    fn sizes_and_balance() {
        let ds = gen_synthetic(&SyntheticConfig::default()).unwrap();
        assert_eq!(ds.labeled.len(), 2000);
        assert_eq!(ds.labeled.iter().filter(|s| s.y > 0.0).count(), 1000);
        assert!(ds.labeled.iter().all(|s| s.x.x1.len() == 50 && s.x.x2.len() == 50));
        ds.validate().unwrap();
    }

    #[test]
    fn equal_seeds_give_identical_data() {
        let cfg = SyntheticConfig {
            seed: 99,
            n: 20,
            ..SyntheticConfig::default()
        };
        assert_eq!(gen_synthetic(&cfg).unwrap(), gen_synthetic(&cfg).unwrap());
        let other = SyntheticConfig { seed: 100, ..cfg.clone() };
        assert_ne!(gen_synthetic(&cfg).unwrap(), gen_synthetic(&other).unwrap());
    }

    #[test]
    fn odd_n_is_rejected() {
        let cfg = SyntheticConfig {
            n: 2001,
            ..SyntheticConfig::default()
        };
        let msg = gen_synthetic(&cfg).unwrap_err().to_string();
        assert!(msg.contains("even"), "{msg}");
    }
}
