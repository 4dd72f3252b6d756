//! Plain-text two-view format.
//!
//! ```text
//! # comment
//! d1 d2
//! label v1 ... v_{d1+d2}
//! ```
//!
//! Labels are `-1`, `0` (unlabeled) or `+1`. Values are written with
//! Rust's shortest round-trip float formatting, so a write/read cycle is
//! lossless.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{DataError, LabeledSample, Result, TwoViewDataset, TwoViewSample};

/// Reads a dataset file. Label-0 rows go to the unlabeled pool.
pub fn load_two_view(path: impl AsRef<Path>) -> Result<TwoViewDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_two_view(&text, &path.display().to_string())
}

/// Parses the text format; `origin` is only used in error messages.
pub fn parse_two_view(text: &str, origin: &str) -> Result<TwoViewDataset> {
    let err = |line: usize, message: String| DataError::Parse {
        path: origin.to_string(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or_else(|| err(1, "missing header".into()))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(err(hline, format!("header must be \"d1 d2\", got {header:?}")));
    }
    let parse_dim = |s: &str| {
        s.parse::<usize>()
            .ok()
            .filter(|&d| d > 0)
            .ok_or_else(|| err(hline, format!("invalid dimension {s:?}")))
    };
    let (d1, d2) = (parse_dim(dims[0])?, parse_dim(dims[1])?);

    let mut ds = TwoViewDataset::new(d1, d2);
    for (lineno, line) in lines {
        let mut fields = line.split_whitespace();
        let label = match fields.next() {
            Some("+1" | "1") => 1.0,
            Some("-1") => -1.0,
            Some("0") => 0.0,
            Some(other) => return Err(err(lineno, format!("label must be -1, 0 or +1, got {other:?}"))),
            None => continue,
        };
        let values = fields
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(lineno, format!("invalid value {f:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != d1 + d2 {
            return Err(err(
                lineno,
                format!("expected {} values, found {}", d1 + d2, values.len()),
            ));
        }
        let x = TwoViewSample::new(values[..d1].to_vec(), values[d1..].to_vec());
        if label == 0.0 {
            ds.unlabeled.push(x);
        } else {
            ds.labeled.push(LabeledSample { x, y: label });
        }
    }
    Ok(ds)
}

/// Renders a dataset in the text format. Labeled rows come first.
pub fn write_two_view(dataset: &TwoViewDataset) -> String {
    let (d1, d2) = dataset.view_dims();
    let mut out = format!("{d1} {d2}\n");
    let mut row = |label: &str, x: &TwoViewSample| {
        out.push_str(label);
        for v in x.x1.iter().chain(&x.x2) {
            let _ = write!(out, " {v:?}");
        }
        out.push('\n');
    };
    for s in &dataset.labeled {
        row(if s.y > 0.0 { "+1" } else { "-1" }, &s.x);
    }
    for x in &dataset.unlabeled {
        row("0", x);
    }
    out
}

pub fn save_two_view(dataset: &TwoViewDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_two_view(dataset)).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}
