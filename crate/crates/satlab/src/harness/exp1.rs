//! The classification experiment: for each `(r, q)` cell, build an exactly
//! balanced dataset of uniform (unsatisfiable) and deceptive (satisfiable)
//! formulas, featurize each formula from short solver traces, and report the
//! repeated-holdout accuracy of a small decision tree.

use std::fs;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::config::Exp1Config;
use super::{assert_no_label_leak, persist_csv, write_json, write_manifest};
use crate::features::{feature_names, formula_features, LabeledMatrix};
use crate::genlab::{gen_deceptive, gen_uniform};
use crate::learn::{repeated_holdout, TrainReport};
use crate::seeding;
use crate::{Error, Result};

/// Label column name of the per-formula feature matrices.
pub const EXP1_LABEL: &str = "satisfiable";

/// Named seed sub-streams this experiment draws from (recorded in the
/// manifest). The starred entries are consumed inside the generator, solver,
/// and classifier.
pub const EXP1_SEED_STREAMS: &[&str] = &[
    "exp1/cell",
    "exp1/gen-unsat",
    "exp1/gen-sat",
    "exp1/solve-unsat",
    "exp1/solve-sat",
    "gen/assignment",
    "gen/clauses",
    "solve/trial",
    "split/class",
];

/// One `(r, q)` cell's accuracy report.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct Exp1Cell {
    pub r: f64,
    pub q: f64,
    pub report: TrainReport,
}

/// The full experiment outcome.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct Exp1Result {
    pub config: Exp1Config,
    pub cells: Vec<Exp1Cell>,
}

/// One row of `results.csv`.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub(crate) struct Exp1Row {
    pub r: f64,
    pub q: f64,
    pub n: u32,
    pub formulas_per_class: usize,
    pub classifier_seeds: u64,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
}

impl Exp1Result {
    pub(crate) fn rows(&self) -> Vec<Exp1Row> {
        self.cells
            .iter()
            .map(|c| Exp1Row {
                r: c.r,
                q: c.q,
                n: self.config.n,
                formulas_per_class: self.config.formulas_per_class,
                classifier_seeds: self.config.classifier_seeds,
                mean_accuracy: c.report.mean,
                std_accuracy: c.report.std,
            })
            .collect()
    }
}

/// Runs the experiment, checkpointing one feature CSV per cell and emitting
/// `results.csv`, `table1.csv`, `results.json`, and `manifest.json` under
/// the configured output directory.
pub fn run_exp1(cfg: &Exp1Config) -> Result<Exp1Result> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out)?;
    let schema = feature_names();
    assert_no_label_leak(&schema);
    write_manifest(&cfg.out, "exp1", cfg.seed, EXP1_SEED_STREAMS, cfg)?;

    let mut cells = Vec::new();
    let mut cell_index = 0u64;
    for &r in &cfg.densities {
        for &q in &cfg.hardness {
            let matrix = cell_features(cfg, r, q, cell_index, &schema)?;
            let report =
                repeated_holdout(&matrix, cfg.test_fraction, cfg.max_depth, cfg.classifier_seeds)?;
            log::info!(
                "exp1 cell r={r} q={q}: accuracy {:.2} ± {:.2} over {} seeds",
                report.mean,
                report.std,
                report.seeds
            );
            cells.push(Exp1Cell { r, q, report });
            cell_index += 1;
        }
    }

    let result = Exp1Result { config: cfg.clone(), cells };
    write_outputs(&result)?;
    Ok(result)
}

/// Path of one cell's feature checkpoint.
fn cell_path(cfg: &Exp1Config, r: f64, q: f64) -> PathBuf {
    cfg.out.join(format!("features_r{r}_q{q}.csv"))
}

/// Builds the balanced feature matrix for one cell, or loads its checkpoint
/// if the cell already completed. Rows are the per-class unsatisfiable
/// formulas (label 0) followed by the satisfiable ones (label 1).
fn cell_features(
    cfg: &Exp1Config,
    r: f64,
    q: f64,
    cell_index: u64,
    schema: &[String],
) -> Result<LabeledMatrix> {
    let path = cell_path(cfg, r, q);
    if path.exists() {
        let matrix = LabeledMatrix::read_csv(&path)?;
        validate_checkpoint(&matrix, cfg, schema).map_err(|e| {
            Error::invalid(format!("checkpoint {} does not fit the config: {e}", path.display()))
        })?;
        log::info!("exp1 cell r={r} q={q}: resumed from {}", path.display());
        return Ok(matrix);
    }

    let cell_seed = seeding::derive_seed(cfg.seed, "exp1/cell", cell_index);
    let params = cfg.solver.params_for(cfg.n);
    let per_class = cfg.formulas_per_class as u64;
    let mut matrix = LabeledMatrix::new(EXP1_LABEL, schema.to_vec());
    for k in 0..per_class {
        let f = gen_uniform(cfg.n, r, seeding::derive_seed(cell_seed, "exp1/gen-unsat", k))?;
        let feats = formula_features(
            &f.formula,
            &params,
            cfg.solver.trials,
            seeding::derive_seed(cell_seed, "exp1/solve-unsat", k),
        )?;
        matrix.push(0, feats);
        if (k + 1) % 25 == 0 {
            log::info!("exp1 cell r={r} q={q}: {}/{per_class} unsatisfiable formulas", k + 1);
        }
    }
    for k in 0..per_class {
        let f = gen_deceptive(cfg.n, r, q, seeding::derive_seed(cell_seed, "exp1/gen-sat", k))?;
        let feats = formula_features(
            &f.formula,
            &params,
            cfg.solver.trials,
            seeding::derive_seed(cell_seed, "exp1/solve-sat", k),
        )?;
        matrix.push(1, feats);
        if (k + 1) % 25 == 0 {
            log::info!("exp1 cell r={r} q={q}: {}/{per_class} satisfiable formulas", k + 1);
        }
    }
    persist_csv(&matrix, &path)?;
    Ok(matrix)
}

fn validate_checkpoint(matrix: &LabeledMatrix, cfg: &Exp1Config, schema: &[String]) -> Result<()> {
    if matrix.label_name != EXP1_LABEL {
        return Err(Error::invalid(format!("label column is {:?}", matrix.label_name)));
    }
    if matrix.feature_names != schema {
        return Err(Error::invalid("feature schema differs"));
    }
    let per_class = cfg.formulas_per_class;
    if matrix.len() != 2 * per_class {
        return Err(Error::invalid(format!(
            "expected {} rows, found {}",
            2 * per_class,
            matrix.len()
        )));
    }
    let balanced = matrix.labels[..per_class].iter().all(|&l| l == 0)
        && matrix.labels[per_class..].iter().all(|&l| l == 1);
    if !balanced {
        return Err(Error::invalid("rows are not the expected balanced label blocks"));
    }
    Ok(())
}

fn write_outputs(result: &Exp1Result) -> Result<()> {
    let out = &result.config.out;
    write_json(&out.join("results.json"), result)?;

    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in result.rows() {
        writer.serialize(row)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    fs::write(out.join("results.csv"), bytes)?;

    fs::write(out.join("table1.csv"), table1(result)?)?;
    Ok(())
}

/// Pivot table of mean (std) accuracy: one row per q, one column per r.
fn table1(result: &Exp1Result) -> Result<String> {
    let mut densities: Vec<f64> = result.cells.iter().map(|c| c.r).collect();
    densities.sort_by(f64::total_cmp);
    densities.dedup();
    let mut hardness: Vec<f64> = result.cells.iter().map(|c| c.q).collect();
    hardness.sort_by(f64::total_cmp);
    hardness.dedup();

    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["q".to_string()];
    header.extend(densities.iter().map(|r| format!("r={r}")));
    writer.write_record(&header)?;
    for &q in &hardness {
        let mut record = vec![format!("{q}")];
        for &r in &densities {
            let cell = result.cells.iter().find(|c| c.r == r && c.q == q);
            record.push(match cell {
                Some(c) => format!("{:.2} ({:.2})", c.report.mean, c.report.std),
                None => String::new(),
            });
        }
        writer.write_record(&record)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::invalid(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::SolverConfig;

    fn tiny_config(out: PathBuf) -> Exp1Config {
        Exp1Config {
            n: 20,
            densities: vec![3.0],
            hardness: vec![0.5, 0.9],
            formulas_per_class: 10,
            solver: SolverConfig { wp: 0.48, max_steps: Some(40), trials: 2 },
            max_depth: Some(3),
            test_fraction: 0.2,
            classifier_seeds: 3,
            seed: 11,
            out,
        }
    }

    #[test]
    fn tiny_run_emits_balanced_checkpoints_and_all_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(dir.path().join("exp1"));
        let result = run_exp1(&cfg).unwrap();
        assert_eq!(result.cells.len(), 2);
        for cell in &result.cells {
            assert_eq!(cell.report.per_seed.len(), 3);
            assert!((0.0..=100.0).contains(&cell.report.mean));
        }
        for name in ["manifest.json", "results.json", "results.csv", "table1.csv"] {
            assert!(cfg.out.join(name).exists(), "{name} missing");
        }
        let matrix = LabeledMatrix::read_csv(&cfg.out.join("features_r3_q0.5.csv")).unwrap();
        assert_eq!(matrix.len(), 20);
        assert_eq!(matrix.labels.iter().filter(|&&l| l == 0).count(), 10);
        assert_eq!(matrix.label_name, EXP1_LABEL);

        let table = fs::read_to_string(cfg.out.join("table1.csv")).unwrap();
        assert!(table.starts_with("q,r=3\n"));
        assert_eq!(table.lines().count(), 3);
    }

    #[test]
    fn reruns_are_byte_identical_and_resume_skips_recomputation() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(dir.path().join("a"));
        let first = run_exp1(&cfg).unwrap();
        let results_a = fs::read(cfg.out.join("results.csv")).unwrap();
        let features_a = fs::read(cfg.out.join("features_r3_q0.9.csv")).unwrap();

        // Independent directory, same seed: byte-identical outputs.
        let mut cfg_b = cfg.clone();
        cfg_b.out = dir.path().join("b");
        run_exp1(&cfg_b).unwrap();
        assert_eq!(fs::read(cfg_b.out.join("results.csv")).unwrap(), results_a);
        assert_eq!(fs::read(cfg_b.out.join("features_r3_q0.9.csv")).unwrap(), features_a);

        // Doctor one checkpoint; the rerun must trust it rather than
        // recompute, so the doctored numbers flow into the results.
        let path = cfg.out.join("features_r3_q0.5.csv");
        let mut doctored = LabeledMatrix::read_csv(&path).unwrap();
        for (i, row) in doctored.rows.iter_mut().enumerate() {
            row[0] = if doctored.labels[i] == 0 { -1.0 } else { 1.0 };
            for v in row.iter_mut().skip(1) {
                *v = 0.0;
            }
        }
        doctored.write_csv(&path).unwrap();
        let resumed = run_exp1(&cfg).unwrap();
        assert_eq!(resumed.cells[0].report.mean, 100.0, "doctored checkpoint was recomputed");
        assert_eq!(resumed.cells[1].report, first.cells[1].report);
    }

    #[test]
    fn corrupt_checkpoints_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny_config(dir.path().join("exp1"));
        fs::create_dir_all(&cfg.out).unwrap();
        let mut wrong = LabeledMatrix::new(EXP1_LABEL, feature_names());
        wrong.push(0, vec![0.0; feature_names().len()]);
        wrong.write_csv(&cell_path(&cfg, 3.0, 0.5)).unwrap();
        let err = run_exp1(&cfg).unwrap_err().to_string();
        assert!(err.contains("does not fit the config"), "{err}");
    }
}
