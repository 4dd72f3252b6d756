use std::fmt::Write;

use serde::Serialize;

use super::{Algorithm, ExperimentConfig, PartitionRecord};
use crate::bounds::BoundName;

pub const CSV_HEADER: &str = "method,setting,mean_pct,sd_pct,n_partitions,vacuous_count";

/// One table row: mean and sample standard deviation (in percent) over the
/// completed partitions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: String,
    pub setting: String,
    pub mean_pct: f64,
    pub sd_pct: f64,
    pub n_partitions: usize,
    pub vacuous_count: usize,
}

/// Mean and `n − 1` standard deviation; the deviation of a single value
/// is 0.
pub(crate) fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

fn row(method: &str, setting: &str, values: &[f64], vacuous_count: usize) -> SummaryRow {
    let pct: Vec<f64> = values.iter().map(|v| 100.0 * v).collect();
    let (mean_pct, sd_pct) = mean_sd(&pct);
    SummaryRow {
        method: method.to_string(),
        setting: setting.to_string(),
        mean_pct,
        sd_pct,
        n_partitions: values.len(),
        vacuous_count,
    }
}

/// Algorithm rows (test error) followed by bound rows (risk bound), each
/// in canonical order.
pub fn summarize(config: &ExperimentConfig, partitions: &[PartitionRecord]) -> Vec<SummaryRow> {
    let setting = config.setting_label();
    let done: Vec<&PartitionRecord> = partitions.iter().filter(|p| p.completed()).collect();
    let mut rows = Vec::new();
    for a in Algorithm::ALL.into_iter().filter(|a| config.algorithms.contains(a)) {
        let v: Vec<f64> = done
            .iter()
            .filter_map(|p| p.algorithms.iter().find(|r| r.algorithm == a))
            .map(|r| r.test_error)
            .collect();
        rows.push(row(a.as_str(), &setting, &v, 0));
    }
    for b in BoundName::ALL.into_iter().filter(|b| config.bounds.contains(b)) {
        let reports: Vec<_> = done
            .iter()
            .filter_map(|p| p.bounds.iter().find(|r| r.bound_name == b))
            .collect();
        let v: Vec<f64> = reports.iter().map(|r| r.risk_bound).collect();
        let vacuous = reports.iter().filter(|r| r.vacuous).count();
        rows.push(row(b.as_str(), &setting, &v, vacuous));
    }
    rows
}

pub fn write_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{:.4},{:.4},{},{}",
            r.method, r.setting, r.mean_pct, r.sd_pct, r.n_partitions, r.vacuous_count
        )
        .expect("writing to a String");
    }
    out
}
