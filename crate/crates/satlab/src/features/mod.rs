//! Fixed-length feature vectors computed from solver traces.
//!
//! One trace yields a 618-dimensional vector, laid out as:
//!
//! * for each of the 4 per-step signals (`break_value`, `unsat_count`,
//!   `steps_since_chosen`, `hamming_from_start`), and for each of 3
//!   transforms of that series (`raw`, first difference `d1`, second
//!   difference `d2`): the 22 summary statistics of
//!   [`summary::SUMMARY_NAMES`] followed by the 22 dynamical features of
//!   [`tsbank::TS_NAMES`] — `4 × 3 × 44 = 528` values;
//! * for each of the 4 event distributions (`var_count`, `var_period`,
//!   `clause_count`, `clause_period`): the 22 summary statistics — 88 values;
//! * the `solved` flag (0/1) and the number of steps taken — 2 values.
//!
//! Keys are `signal.transform.feature` (distributions use the `raw`
//! transform tag). A formula's feature vector is the element-wise mean of its
//! per-trial trace vectors, so `solved` becomes the fraction of trials
//! solved. Pair instances concatenate two formula vectors under `slot0.` and
//! `slot1.` prefixes. Every non-finite value is mapped to 0.0, and series too
//! short to support a statistic contribute 0.0 for it.

pub mod spectral;
pub mod summary;
pub mod tsbank;

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::cnf::Formula;
use crate::walksat::{run_many, SolverParams, Trace};
use crate::{Error, Result};

pub use summary::{summary_stats, N_SUMMARY, SUMMARY_NAMES};
pub use tsbank::{ts_features, N_TS, TS_NAMES};

/// Per-step signals extracted from a trace, in schema order.
pub const SIGNAL_NAMES: [&str; 4] =
    ["break_value", "unsat_count", "steps_since_chosen", "hamming_from_start"];

/// Series transforms applied to each signal, in schema order.
pub const TRANSFORM_NAMES: [&str; 3] = ["raw", "d1", "d2"];

/// Whole-trial event distributions, in schema order.
pub const DISTRIBUTION_NAMES: [&str; 4] =
    ["var_count", "var_period", "clause_count", "clause_period"];

/// Length of one formula's feature vector.
pub const N_FORMULA_FEATURES: usize =
    SIGNAL_NAMES.len() * TRANSFORM_NAMES.len() * (N_SUMMARY + N_TS)
        + DISTRIBUTION_NAMES.len() * N_SUMMARY
        + 2;

/// Length of one pair instance's feature vector.
pub const N_PAIR_FEATURES: usize = 2 * N_FORMULA_FEATURES;

/// The 618 feature names, in vector order.
pub fn feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(N_FORMULA_FEATURES);
    for signal in SIGNAL_NAMES {
        for transform in TRANSFORM_NAMES {
            for stat in SUMMARY_NAMES {
                names.push(format!("{signal}.{transform}.{stat}"));
            }
            for ts in TS_NAMES {
                names.push(format!("{signal}.{transform}.{ts}"));
            }
        }
    }
    for dist in DISTRIBUTION_NAMES {
        for stat in SUMMARY_NAMES {
            names.push(format!("{dist}.raw.{stat}"));
        }
    }
    names.push("solved".to_string());
    names.push("steps_taken".to_string());
    debug_assert_eq!(names.len(), N_FORMULA_FEATURES);
    names
}

/// The 1236 pair feature names: the formula schema under `slot0.`, then
/// under `slot1.`.
pub fn pair_feature_names() -> Vec<String> {
    let base = feature_names();
    let mut names = Vec::with_capacity(N_PAIR_FEATURES);
    for slot in 0..2 {
        names.extend(base.iter().map(|n| format!("slot{slot}.{n}")));
    }
    names
}

fn first_difference(series: &[f64]) -> Vec<f64> {
    series.windows(2).map(|w| w[1] - w[0]).collect()
}

fn signal_series(trace: &Trace, signal: usize) -> Vec<f64> {
    trace
        .records
        .iter()
        .map(|r| match signal {
            0 => f64::from(r.break_value),
            1 => f64::from(r.unsat_count),
            2 => f64::from(r.steps_since_chosen),
            3 => f64::from(r.hamming_from_start),
            _ => unreachable!("four signals"),
        })
        .collect()
}

/// Computes the 618-entry feature vector of one trace.
pub fn trace_features(trace: &Trace) -> Vec<f64> {
    let mut out = Vec::with_capacity(N_FORMULA_FEATURES);
    for signal in 0..SIGNAL_NAMES.len() {
        let raw = signal_series(trace, signal);
        let d1 = first_difference(&raw);
        let d2 = first_difference(&d1);
        for series in [&raw, &d1, &d2] {
            out.extend(summary_stats(series));
            out.extend(ts_features(series));
        }
    }
    let as_f64 = |counts: &[u32]| counts.iter().map(|&c| f64::from(c)).collect::<Vec<f64>>();
    for dist in [
        &as_f64(&trace.var_flip_counts),
        &trace.var_flip_periods,
        &as_f64(&trace.clause_sel_counts),
        &trace.clause_sel_periods,
    ] {
        out.extend(summary_stats(dist));
    }
    out.push(f64::from(u8::from(trace.solved)));
    out.push(trace.steps_taken() as f64);
    for v in &mut out {
        if !v.is_finite() {
            *v = 0.0;
        }
    }
    out
}

/// Element-wise mean of equally long vectors.
pub fn mean_vector(vectors: &[Vec<f64>]) -> Vec<f64> {
    assert!(!vectors.is_empty(), "mean of no vectors");
    let len = vectors[0].len();
    let mut out = vec![0.0; len];
    for v in vectors {
        assert_eq!(v.len(), len, "inconsistent vector lengths");
        for (o, x) in out.iter_mut().zip(v) {
            *o += x;
        }
    }
    for o in &mut out {
        *o /= vectors.len() as f64;
    }
    out
}

/// Featurizes a formula: runs `trials` solver restarts and averages the
/// per-trace vectors.
pub fn formula_features(
    formula: &Formula,
    params: &SolverParams,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let traces = run_many(formula, params, trials, seed)?;
    let vectors: Vec<Vec<f64>> = traces.par_iter().map(trace_features).collect();
    Ok(mean_vector(&vectors))
}

/// Concatenates two formula vectors into one pair vector (`slot0` then
/// `slot1`).
pub fn pair_vector(slot0: &[f64], slot1: &[f64]) -> Vec<f64> {
    assert_eq!(slot0.len(), N_FORMULA_FEATURES);
    assert_eq!(slot1.len(), N_FORMULA_FEATURES);
    let mut out = Vec::with_capacity(N_PAIR_FEATURES);
    out.extend_from_slice(slot0);
    out.extend_from_slice(slot1);
    out
}

/// A labeled feature matrix serialized as CSV: the label column first, then
/// one column per feature. Floats use the shortest round-tripping decimal
/// form, so files are byte-stable across runs.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledMatrix {
    pub label_name: String,
    pub feature_names: Vec<String>,
    pub labels: Vec<u8>,
    pub rows: Vec<Vec<f64>>,
}

impl LabeledMatrix {
    pub fn new(label_name: impl Into<String>, feature_names: Vec<String>) -> LabeledMatrix {
        LabeledMatrix {
            label_name: label_name.into(),
            feature_names,
            labels: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, label: u8, row: Vec<f64>) {
        assert_eq!(row.len(), self.feature_names.len(), "row width mismatch");
        self.labels.push(label);
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// The matrix restricted to the given feature columns (labels kept).
    pub fn select_columns(&self, columns: &[usize]) -> LabeledMatrix {
        LabeledMatrix {
            label_name: self.label_name.clone(),
            feature_names: columns.iter().map(|&c| self.feature_names[c].clone()).collect(),
            labels: self.labels.clone(),
            rows: self.rows.iter().map(|r| columns.iter().map(|&c| r[c]).collect()).collect(),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let mut header = Vec::with_capacity(1 + self.feature_names.len());
        header.push(self.label_name.clone());
        header.extend(self.feature_names.iter().cloned());
        writer.write_record(&header)?;
        for (label, row) in self.labels.iter().zip(&self.rows) {
            let mut record = Vec::with_capacity(1 + row.len());
            record.push(label.to_string());
            record.extend(row.iter().map(|v| v.to_string()));
            writer.write_record(&record)?;
        }
        let bytes = writer.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
        fs::write(path, bytes)?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<LabeledMatrix> {
        let mut reader = csv::Reader::from_path(path)?;
        let header = reader.headers()?.clone();
        if header.is_empty() {
            return Err(Error::parse(format!("{}: empty header", path.display())));
        }
        let label_name = header[0].to_string();
        let feature_names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut matrix = LabeledMatrix::new(label_name, feature_names);
        for (line, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() != matrix.feature_names.len() + 1 {
                return Err(Error::parse(format!(
                    "{}: row {} has {} fields, expected {}",
                    path.display(),
                    line + 2,
                    record.len(),
                    matrix.feature_names.len() + 1
                )));
            }
            let label: u8 = record[0].parse().map_err(|_| {
                Error::parse(format!("{}: bad label {:?}", path.display(), &record[0]))
            })?;
            let row = record
                .iter()
                .skip(1)
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::parse(format!("{}: bad value {f:?}", path.display())))
                })
                .collect::<Result<Vec<f64>>>()?;
            matrix.push(label, row);
        }
        Ok(matrix)
    }
}
