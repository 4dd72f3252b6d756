mod common;

use approx::assert_abs_diff_eq;
use common::*;
use mvpac::linalg::{gram, logdet_identity_plus_scatter, rank1_logdet, solve_psd, Kernel, Matrix};
use mvpac::qp::{solve_box_qp, QpProblem, SolverOptions};
use proptest::prelude::*;

fn rows(max_rows: usize, max_dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=max_rows, 1..=max_dim).prop_flat_map(|(n, d)| prop::collection::vec(prop::collection::vec(-3.0..3.0f64, d), n))
}

#[test]
fn gram_examples() {
    let k = gram(&[[1.0, 0.0], [0.0, 1.0]], Kernel::Linear).unwrap();
    assert_eq!(k.values, Matrix::identity(2));
    let k = gram(&[[3.0, 4.0]], Kernel::Linear).unwrap();
    assert_eq!(k.values[(0, 0)], 25.0);

    let mut r = rng(11);
    let xs: Vec<Vec<f64>> = (0..5).map(|_| normal_vec(&mut r, 3)).collect();
    let k = gram(&xs, Kernel::Linear).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            let naive: f64 = (0..3).map(|t| xs[i][t] * xs[j][t]).sum();
            assert_abs_diff_eq!(k.values[(i, j)], naive, epsilon = 1e-12);
        }
    }
}

#[test]
fn gram_rejects_ragged_input() {
    assert!(gram(&[vec![1.0, 2.0], vec![1.0]], Kernel::Linear).is_err());
}

#[test]
fn rank1_examples() {
    assert_eq!(rank1_logdet(&[0.0, 0.0], 1.0).unwrap(), 0.0);
    assert_abs_diff_eq!(rank1_logdet(&[0.6, 0.8], 1.0).unwrap(), 2f64.ln(), epsilon = 1e-15);
    assert!(rank1_logdet(&[1.0], 0.0).is_err());
    let mut r = rng(12);
    let x = normal_vec(&mut r, 6);
    let dense = dense_logdet(&identity_plus_scatter(&[x.clone()], 2.0));
    assert_abs_diff_eq!(rank1_logdet(&x, 2.0).unwrap(), dense, epsilon = 1e-10);
}

#[test]
fn scatter_logdet_examples() {
    assert_eq!(logdet_identity_plus_scatter(&[vec![0.0; 4], vec![0.0; 4]], 1.0).unwrap(), 0.0);
    let x = vec![0.3, -1.2, 2.0];
    assert_abs_diff_eq!(
        logdet_identity_plus_scatter(&[x.clone()], 0.7).unwrap(),
        rank1_logdet(&x, 0.7).unwrap(),
        epsilon = 1e-14
    );
    let mut r = rng(13);
    let rows: Vec<Vec<f64>> = (0..4).map(|_| normal_vec(&mut r, 50)).collect();
    let dense = dense_logdet(&identity_plus_scatter(&rows, 100.0));
    assert_abs_diff_eq!(logdet_identity_plus_scatter(&rows, 100.0).unwrap(), dense, epsilon = 1e-9);
}

#[test]
fn solve_psd_examples() {
    assert_eq!(solve_psd(&Matrix::identity(3), &[1.0, -2.0, 0.5], 0.0).unwrap(), vec![1.0, -2.0, 0.5]);
    let x = solve_psd(&Matrix::identity(2).scale(2.0), &[4.0, 6.0], 0.0).unwrap();
    assert_abs_diff_eq!(x[0], 2.0, epsilon = 1e-15);
    assert_abs_diff_eq!(x[1], 3.0, epsilon = 1e-15);
}

#[test]
fn qp_examples() {
    let p = QpProblem::new(Matrix::identity(2), vec![-1.0; 2], vec![0.0; 2], vec![10.0; 2]).unwrap();
    let s = solve_box_qp(&p, &SolverOptions::default()).unwrap();
    assert_abs_diff_eq!(s.x[0], 1.0, epsilon = 1e-8);
    assert_abs_diff_eq!(s.x[1], 1.0, epsilon = 1e-8);
    assert_abs_diff_eq!(s.objective, -1.0, epsilon = 1e-12);

    let ones = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
    let p = QpProblem::new(ones, vec![-1.0; 2], vec![0.0; 2], vec![3.0; 2]).unwrap();
    let s = solve_box_qp(&p, &SolverOptions::default()).unwrap();
    assert_abs_diff_eq!(s.x[0] + s.x[1], 1.0, epsilon = 1e-8);
    assert_abs_diff_eq!(s.objective, -0.5, epsilon = 1e-12);
}

#[test]
fn qp_matches_grid_oracle() {
    let mut r = rng(14);
    for _ in 0..25 {
        let a: Vec<Vec<f64>> = (0..3).map(|_| normal_vec(&mut r, 3)).collect();
        let h: [[f64; 3]; 3] = std::array::from_fn(|i| {
            std::array::from_fn(|j| (0..3).map(|k| a[k][i] * a[k][j]).sum::<f64>() + if i == j { 0.1 } else { 0.0 })
        });
        let c = [1.5, -2.0, 0.7];
        let (lo, hi) = ([-1.0, 0.0, -0.5], [1.0, 2.0, 0.5]);
        let p = QpProblem::new(Matrix::from_rows(&h).unwrap(), c.to_vec(), lo.to_vec(), hi.to_vec()).unwrap();
        let s = solve_box_qp(&p, &SolverOptions::with_tol(1e-10)).unwrap();
        assert_abs_diff_eq!(s.objective, grid_polish_qp(&h, &c, &lo, &hi, 0.05), epsilon = 1e-6);
    }
}

fn spd(n: usize, entries: Vec<f64>, shift: f64) -> Matrix {
    let a = Matrix::from_vec(n, n, entries).unwrap();
    let mut m = a.tr_matmul(&a).unwrap();
    m.add_diagonal(shift);
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gram_is_symmetric_psd(xs in rows(8, 6)) {
        let k = gram(&xs, Kernel::Linear).unwrap().values;
        prop_assert!(k.is_symmetric(0.0));
        prop_assert!(k.min_symmetric_eigenvalue() >= -1e-9 * k.trace().max(1.0));
    }

    #[test]
    fn rank1_matches_dense(x in prop::collection::vec(-3.0..3.0f64, 1..=20), sigma in 0.2..5.0f64) {
        let dense = dense_logdet(&identity_plus_scatter(&[x.clone()], sigma));
        prop_assert!((rank1_logdet(&x, sigma).unwrap() - dense).abs() <= 1e-10);
    }

    #[test]
    fn solve_psd_residual(n in 1usize..=8, seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = spd(n, normal_vec(&mut r, n * n), 0.5);
        let b = normal_vec(&mut r, n);
        let x = solve_psd(&m, &b, 0.0).unwrap();
        let back = m.mul_vec(&x).unwrap();
        let res = back.iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(res <= 1e-8 * (1.0 + bn));
    }

    #[test]
    fn qp_stays_in_box_and_descends(n in 1usize..=6, seed in any::<u64>()) {
        let mut r = rng(seed);
        let h = spd(n, normal_vec(&mut r, n * n), 0.0);
        let c = normal_vec(&mut r, n);
        let lo: Vec<f64> = normal_vec(&mut r, n).iter().map(|v| -v.abs()).collect();
        let hi: Vec<f64> = lo.iter().zip(normal_vec(&mut r, n)).map(|(l, v)| l + v.abs()).collect();
        let p = QpProblem::new(h, c, lo.clone(), hi.clone()).unwrap();
        let opts = SolverOptions { record_history: true, ..SolverOptions::default() };
        let s = solve_box_qp(&p, &opts).unwrap();
        for i in 0..n {
            prop_assert!(lo[i] <= s.x[i] && s.x[i] <= hi[i]);
        }
        prop_assert!(s.kkt_residual <= opts.tol);
        let start = p.objective(&p.default_start());
        let mut prev = start;
        for &f in &s.history {
            prop_assert!(f <= prev + 1e-12 * (1.0 + prev.abs()));
            prev = f;
        }
    }

    #[test]
    fn strictly_convex_qp_ignores_the_start(n in 1usize..=6, seed in any::<u64>()) {
        let mut r = rng(seed);
        let h = spd(n, normal_vec(&mut r, n * n), 0.2);
        let c = normal_vec(&mut r, n);
        let (lo, hi) = (vec![-1.0; n], vec![1.0; n]);
        let p = QpProblem::new(h, c, lo, hi).unwrap();
        let tol = 1e-9;
        let a = solve_box_qp(&p, &SolverOptions::with_tol(tol)).unwrap();
        let other: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let b = solve_box_qp(&p, &SolverOptions { start: Some(other), ..SolverOptions::with_tol(tol) }).unwrap();
        prop_assert!((a.objective - b.objective).abs() <= 10.0 * tol);
    }
}
