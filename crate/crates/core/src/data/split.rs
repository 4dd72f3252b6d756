use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DataError, LabeledSample, Result, TwoViewDataset, TwoViewSample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub unlabeled_fraction: f64,
    pub labeled_fraction: f64,
    pub partitions: usize,
    pub prior_subset_fraction: f64,
}

impl SplitPlan {
    pub fn new(seed: u64, labeled_fraction: f64) -> Self {
        Self {
            seed,
            unlabeled_fraction: 0.2,
            labeled_fraction,
            partitions: 10,
            prior_subset_fraction: 0.2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, f) in [
            ("unlabeled_fraction", self.unlabeled_fraction),
            ("labeled_fraction", self.labeled_fraction),
            ("prior_subset_fraction", self.prior_subset_fraction),
        ] {
            if !(f > 0.0 && f < 1.0) {
                return Err(DataError::Input(format!("{name} must lie in (0, 1), got {f}")));
            }
        }
        if self.partitions == 0 {
            return Err(DataError::Input("partitions must be at least 1".into()));
        }
        Ok(())
    }
}

/// One random partition of a dataset.
///
/// The first `prior_count` training examples form the prior subset used
/// by the separate-subset bounds; the remaining ones are the examples
/// those bounds are evaluated on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub train: Vec<LabeledSample>,
    pub prior_count: usize,
    pub test: Vec<LabeledSample>,
    pub unlabeled: Vec<TwoViewSample>,
}

impl Partition {
    pub fn prior_subset(&self) -> &[LabeledSample] {
        &self.train[..self.prior_count]
    }

    pub fn bound_subset(&self) -> &[LabeledSample] {
        &self.train[self.prior_count..]
    }
}

/// Generator for partition `index`: one ChaCha stream per partition.
fn partition_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn count(n: usize, fraction: f64) -> usize {
    (n as f64 * fraction).round() as usize
}

/// Shuffles the labeled examples, carves the unlabeled pool, then splits
/// the remainder into training and test sets. Any pre-existing unlabeled
/// examples of the dataset join the unlabeled pool after the carved ones.
pub fn split(dataset: &TwoViewDataset, plan: &SplitPlan, partition_index: usize) -> Result<Partition> {
    plan.validate()?;
    if partition_index >= plan.partitions {
        return Err(DataError::Input(format!(
            "partition index {partition_index} out of range (partitions = {})",
            plan.partitions
        )));
    }
    let mut order: Vec<usize> = (0..dataset.labeled.len()).collect();
    order.shuffle(&mut partition_rng(plan.seed, partition_index));

    let n = order.len();
    let n_unlabeled = count(n, plan.unlabeled_fraction);
    let rest = n - n_unlabeled.min(n);
    let n_train = count(rest, plan.labeled_fraction);
    let n_prior = count(n_train, plan.prior_subset_fraction);
    if n_unlabeled == 0 || n_train == 0 || n_train >= rest || n_prior == 0 || n_prior >= n_train {
        return Err(DataError::Input(format!(
            "{n} labeled examples give an empty part (unlabeled {n_unlabeled}, train {n_train}, \
             test {}, prior {n_prior})",
            rest.saturating_sub(n_train)
        )));
    }

    let pick = |idx: &[usize]| idx.iter().map(|&i| dataset.labeled[i].clone()).collect::<Vec<_>>();
    let mut unlabeled: Vec<TwoViewSample> = order[..n_unlabeled]
        .iter()
        .map(|&i| dataset.labeled[i].x.clone())
        .collect();
    unlabeled.extend(dataset.unlabeled.iter().cloned());
    Ok(Partition {
        train: pick(&order[n_unlabeled..n_unlabeled + n_train]),
        prior_count: n_prior,
        test: pick(&order[n_unlabeled + n_train..]),
        unlabeled,
    })
}

/// Index sets of one cross-validation fold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub validate: Vec<usize>,
}

/// Seeded `k`-fold split of `0..n`. Fold sizes differ by at most one,
/// with the larger folds first.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 || k > n {
        return Err(DataError::Input(format!("cannot make {k} folds from {n} examples")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        let validate = order[start..start + len].to_vec();
        let train = order[..start].iter().chain(&order[start + len..]).copied().collect();
        folds.push(Fold { train, validate });
        start += len;
    }
    Ok(folds)
}
