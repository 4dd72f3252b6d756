//! Independent oracles and random instance builders shared by the
//! integration tests.
#![allow(dead_code)]

use mvpac::data::{LabeledSample, TwoViewSample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn unit_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v = normal_vec(rng, d);
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Two-view point drawn uniformly in direction with norm at most 1.
pub fn ball_sample(rng: &mut ChaCha8Rng, d1: usize, d2: usize) -> TwoViewSample {
    let dir = unit_vec(rng, d1 + d2);
    let r: f64 = rng.random_range(0.05..1.0);
    let v: Vec<f64> = dir.iter().map(|x| x * r).collect();
    TwoViewSample::new(v[..d1].to_vec(), v[d1..].to_vec())
}

pub fn labeled_ball_sample(rng: &mut ChaCha8Rng, d1: usize, d2: usize) -> LabeledSample {
    let x = ball_sample(rng, d1, d2);
    let y = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    LabeledSample::new(x.x1, x.x2, y)
}

/// `ln|det A|` by Gaussian elimination with partial pivoting.
pub fn dense_logdet(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut acc = 0.0;
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, p);
        let pivot = m[col][col];
        acc += pivot.abs().ln();
        for r in col + 1..n {
            let f = m[r][col] / pivot;
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    acc
}

/// `I + (1/(uσ²)) Σ rᵢrᵢᵀ` as nested vectors.
pub fn identity_plus_scatter(rows: &[Vec<f64>], sigma: f64) -> Vec<Vec<f64>> {
    let d = rows[0].len();
    let s = 1.0 / (rows.len() as f64 * sigma * sigma);
    let mut m = vec![vec![0.0; d]; d];
    for (i, mi) in m.iter_mut().enumerate() {
        mi[i] = 1.0;
        for (j, v) in mi.iter_mut().enumerate() {
            *v += s * rows.iter().map(|r| r[i] * r[j]).sum::<f64>();
        }
    }
    m
}

pub fn quad(h: &[[f64; 3]; 3], c: &[f64; 3], x: &[f64; 3]) -> f64 {
    let mut f = 0.0;
    for i in 0..3 {
        f += c[i] * x[i];
        for j in 0..3 {
            f += 0.5 * x[i] * h[i][j] * x[j];
        }
    }
    f
}

/// Box QP minimum by a grid scan at `step` followed by exact cyclic
/// coordinate minimization from the best grid point.
pub fn grid_polish_qp(h: &[[f64; 3]; 3], c: &[f64; 3], lo: &[f64; 3], hi: &[f64; 3], step: f64) -> f64 {
    let axis = |k: usize| -> Vec<f64> {
        let n = ((hi[k] - lo[k]) / step).floor() as usize;
        let mut v: Vec<f64> = (0..=n).map(|i| lo[k] + i as f64 * step).collect();
        v.push(hi[k]);
        v
    };
    let (a0, a1, a2) = (axis(0), axis(1), axis(2));
    let mut best = (f64::INFINITY, [0.0; 3]);
    for &x0 in &a0 {
        for &x1 in &a1 {
            for &x2 in &a2 {
                let x = [x0, x1, x2];
                let f = quad(h, c, &x);
                if f < best.0 {
                    best = (f, x);
                }
            }
        }
    }
    let mut x = best.1;
    for _ in 0..200_000 {
        let mut moved = 0.0f64;
        for i in 0..3 {
            let g: f64 = c[i] + (0..3).map(|j| h[i][j] * x[j]).sum::<f64>();
            let target = if h[i][i] > 0.0 {
                (x[i] - g / h[i][i]).clamp(lo[i], hi[i])
            } else if g > 0.0 {
                lo[i]
            } else {
                hi[i]
            };
            moved = moved.max((target - x[i]).abs());
            x[i] = target;
        }
        if moved < 1e-15 {
            break;
        }
    }
    quad(h, c, &x)
}

/// Solves `Ax = b` by Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &bi)| {
        let mut r = r.clone();
        r.push(bi);
        r
    }).collect();
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, p);
        for r in 0..n {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..=n {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    (0..n).map(|i| m[i][n] / m[i][i]).collect()
}
