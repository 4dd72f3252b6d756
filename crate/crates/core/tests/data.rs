use approx::assert_abs_diff_eq;
use mvpac::data::{
    augment_and_scale, gen_synthetic, kfold, load_two_view, save_two_view, split, LabeledSample, SplitPlan,
    SyntheticConfig, TwoViewDataset,
};
use mvpac::experiment::{fit, Algorithm, Penalty};
use mvpac::qp::SolverOptions;
use mvpac::trainers::error_rate;
use proptest::prelude::*;

fn small(seed: u64, noise_sd: f64) -> SyntheticConfig {
    SyntheticConfig { seed, n: 60, d_per_view: 5, noise_sd, ..SyntheticConfig::default() }
}

fn key(s: &LabeledSample) -> Vec<u64> {
    s.x.x1.iter().chain(&s.x.x2).map(|v| v.to_bits()).chain([s.y.to_bits()]).collect()
}

#[test]
fn default_recipe_sizes() {
    let ds = gen_synthetic(&SyntheticConfig::default()).unwrap();
    assert_eq!(ds.labeled.len(), 2000);
    assert_eq!(ds.view_dims(), (50, 50));
    assert_eq!(ds.labeled.iter().filter(|s| s.y > 0.0).count(), 1000);
}

#[test]
fn noiseless_data_is_separable_in_each_view() {
    let ds = augment_and_scale(&gen_synthetic(&small(3, 0.0)).unwrap()).unwrap();
    let opts = SolverOptions::with_tol(1e-8);
    for alg in [Algorithm::Svm1, Algorithm::Svm2] {
        let w = fit(alg, Penalty::Single { c: 1e8 }, &ds.labeled, &[], &opts).unwrap();
        let err = error_rate(&w, ds.labeled.iter().map(|s| (&s.x, s.y))).unwrap();
        assert_eq!(err, 0.0, "{alg}");
    }
}

#[test]
fn file_roundtrip_is_lossless() {
    let mut ds = gen_synthetic(&small(4, 0.3)).unwrap();
    ds.unlabeled.push(ds.labeled[0].x.clone());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("syn.tv");
    save_two_view(&ds, &path).unwrap();
    assert_eq!(load_two_view(&path).unwrap(), ds);
}

#[test]
fn generation_is_deterministic() {
    assert_eq!(gen_synthetic(&small(5, 0.3)).unwrap(), gen_synthetic(&small(5, 0.3)).unwrap());
    assert_ne!(gen_synthetic(&small(5, 0.3)).unwrap(), gen_synthetic(&small(6, 0.3)).unwrap());
}

#[test]
fn odd_sizes_are_rejected() {
    let err = gen_synthetic(&SyntheticConfig { n: 2001, ..SyntheticConfig::default() }).unwrap_err();
    assert!(err.to_string().contains("even"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scaling_reaches_unit_radius(seed in any::<u64>(), noise in 0.0..1.0f64) {
        let raw = gen_synthetic(&small(seed, noise)).unwrap();
        let ds = augment_and_scale(&raw).unwrap();
        prop_assert!((ds.max_norm() - 1.0).abs() <= 1e-12);
        prop_assert_eq!(ds.labeled[0].x.x1.len(), 6);
        prop_assert!(ds.scale_factor > 0.0);
    }

    #[test]
    fn split_parts_partition_the_data(seed in any::<u64>(), frac in 0.2..0.8f64, index in 0usize..10) {
        let ds: TwoViewDataset = gen_synthetic(&SyntheticConfig { n: 100, ..small(seed, 0.3) }).unwrap();
        let plan = SplitPlan { seed, ..SplitPlan::new(seed, frac) };
        let p = split(&ds, &plan, index).unwrap();
        prop_assert_eq!(p.train.len() + p.test.len() + p.unlabeled.len(), 100);
        let mut seen: Vec<Vec<u64>> = p.train.iter().chain(&p.test).map(key).collect();
        for x in &p.unlabeled {
            let twin = ds.labeled.iter().find(|s| s.x == *x).unwrap();
            seen.push(key(twin));
        }
        seen.sort();
        let mut all: Vec<Vec<u64>> = ds.labeled.iter().map(key).collect();
        all.sort();
        prop_assert_eq!(seen, all);
        prop_assert_eq!(p, split(&ds, &plan, index).unwrap());
    }

    #[test]
    fn folds_cover_each_index_once(n in 2usize..200, k in 2usize..6, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let folds = kfold(n, k, seed).unwrap();
        let mut hits = vec![0; n];
        for f in &folds {
            prop_assert_eq!(f.train.len() + f.validate.len(), n);
            for &i in &f.validate {
                hits[i] += 1;
            }
        }
        prop_assert!(hits.iter().all(|&h| h == 1));
        let sizes: Vec<usize> = folds.iter().map(|f| f.validate.len()).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }
}

#[test]
fn remainder_rule() {
    let sizes: Vec<usize> = kfold(10, 3, 0).unwrap().iter().map(|f| f.validate.len()).collect();
    assert_eq!(sizes, vec![4, 3, 3]);
    assert!(kfold(2, 3, 0).is_err());
    assert_abs_diff_eq!(SplitPlan::new(0, 0.2).prior_subset_fraction, 0.2);
}
