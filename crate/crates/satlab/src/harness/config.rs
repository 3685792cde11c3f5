//! Experiment configurations: JSON-loadable, defaulted to the desk-scale
//! runs, and validated before anything expensive starts.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::genlab::GenParams;
use crate::walksat::{SolverParams, DEFAULT_STEPS_PER_VAR, DEFAULT_TRIALS, DEFAULT_WP};
use crate::{Error, Result};

/// Balanced-hardness value `(√5 − 1)/2`, rounded as configs usually write it.
pub const BALANCED_Q_DESK: f64 = 0.618;

/// Solver settings shared by both experiments.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Noise probability.
    pub wp: f64,
    /// Flip budget per trial; `None` means `2n`.
    pub max_steps: Option<usize>,
    /// Independent restarts averaged into one feature vector per formula.
    pub trials: usize,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig { wp: DEFAULT_WP, max_steps: None, trials: DEFAULT_TRIALS }
    }
}

impl SolverConfig {
    /// Concrete solver parameters for a formula over `n` variables.
    pub fn params_for(&self, n: u32) -> SolverParams {
        SolverParams {
            wp: self.wp,
            max_steps: self.max_steps.unwrap_or(DEFAULT_STEPS_PER_VAR * n as usize),
        }
    }

    fn validate(&self, n: u32) -> Result<()> {
        self.params_for(n).validate()?;
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        Ok(())
    }
}

fn validate_grid(n: u32, densities: &[f64], hardness: &[f64]) -> Result<()> {
    if densities.is_empty() {
        return Err(Error::invalid("at least one density r is required"));
    }
    if hardness.is_empty() {
        return Err(Error::invalid("at least one hardness q is required"));
    }
    for &r in densities {
        for &q in hardness {
            GenParams { n, r, q: Some(q), seed: 0 }.validate()?;
        }
    }
    Ok(())
}

fn validate_classifier(
    test_fraction: f64,
    classifier_seeds: u64,
    max_depth: Option<usize>,
) -> Result<()> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "test_fraction must lie strictly between 0 and 1, got {test_fraction}"
        )));
    }
    if classifier_seeds == 0 {
        return Err(Error::invalid("classifier_seeds must be at least 1"));
    }
    if max_depth == Some(0) {
        return Err(Error::invalid("max_depth 0 cannot split; use null for unconstrained"));
    }
    Ok(())
}

/// Configuration of the classification experiment: one balanced dataset per
/// `(r, q)` cell, one accuracy mean ± std per cell.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Exp1Config {
    /// Variable count of every generated formula.
    pub n: u32,
    /// Clause densities r to sweep.
    pub densities: Vec<f64>,
    /// Hardness values q to sweep.
    pub hardness: Vec<f64>,
    /// Formulas per class per cell; the dataset is exactly balanced.
    pub formulas_per_class: usize,
    pub solver: SolverConfig,
    /// Tree depth cap; `None` is unconstrained.
    pub max_depth: Option<usize>,
    /// Test share of each repeated holdout.
    pub test_fraction: f64,
    /// Number of holdout seeds averaged per cell.
    pub classifier_seeds: u64,
    /// Master seed; all streams derive from it by name.
    pub seed: u64,
    /// Output directory for checkpoints, results, and the manifest.
    pub out: PathBuf,
}

impl Default for Exp1Config {
    fn default() -> Exp1Config {
        Exp1Config {
            n: 2000,
            densities: vec![5.0],
            hardness: vec![0.3, 0.4, 0.5, BALANCED_Q_DESK],
            formulas_per_class: 200,
            solver: SolverConfig::default(),
            max_depth: Some(3),
            test_fraction: 0.2,
            classifier_seeds: 10,
            seed: 42,
            out: PathBuf::from("out/exp1"),
        }
    }
}

impl Exp1Config {
    pub fn validate(&self) -> Result<()> {
        validate_grid(self.n, &self.densities, &self.hardness)?;
        self.solver.validate(self.n)?;
        validate_classifier(self.test_fraction, self.classifier_seeds, self.max_depth)?;
        if self.formulas_per_class < 10 {
            return Err(Error::invalid(format!(
                "formulas_per_class must be at least 10, got {}",
                self.formulas_per_class
            )));
        }
        Ok(())
    }
}

/// How satisfiable formulas are assigned to pair slots.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotBalance {
    /// Exactly half the pairs (rounding down) put the satisfiable formula
    /// in slot 0.
    Exact,
    /// Each pair draws its slot with a fair coin.
    Random,
}

/// Configuration of the distinguishability experiment: per `(r, q)` cell,
/// the minimal number of broken clauses u at which pairs become separable.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Exp2Config {
    pub n: u32,
    pub densities: Vec<f64>,
    pub hardness: Vec<f64>,
    /// Pairs per cell, each with its own fresh base formula.
    pub pairs_per_cell: usize,
    /// Accuracy (percent) that counts as "distinguishable"; must lie
    /// strictly between 50 and 100.
    pub threshold: f64,
    pub slot_balance: SlotBalance,
    pub solver: SolverConfig,
    pub max_depth: Option<usize>,
    pub test_fraction: f64,
    pub classifier_seeds: u64,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for Exp2Config {
    fn default() -> Exp2Config {
        Exp2Config {
            n: 2000,
            densities: vec![5.0],
            hardness: vec![0.3, BALANCED_Q_DESK],
            pairs_per_cell: 100,
            threshold: 70.0,
            slot_balance: SlotBalance::Exact,
            solver: SolverConfig::default(),
            max_depth: Some(3),
            test_fraction: 0.2,
            classifier_seeds: 10,
            seed: 42,
            out: PathBuf::from("out/exp2"),
        }
    }
}

impl Exp2Config {
    pub fn validate(&self) -> Result<()> {
        validate_grid(self.n, &self.densities, &self.hardness)?;
        self.solver.validate(self.n)?;
        validate_classifier(self.test_fraction, self.classifier_seeds, self.max_depth)?;
        if self.pairs_per_cell < 10 {
            return Err(Error::invalid(format!(
                "pairs_per_cell must be at least 10, got {}",
                self.pairs_per_cell
            )));
        }
        if !(self.threshold > 50.0 && self.threshold < 100.0) {
            return Err(Error::invalid(format!(
                "threshold must lie strictly between 50 and 100, got {}",
                self.threshold
            )));
        }
        Ok(())
    }
}

/// Loads a JSON config file into any of the config types.
pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read config {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}
