//! The distinguishability experiment: for each `(r, q)` cell, find the
//! minimal number of broken clauses u at which a classifier can tell a
//! satisfiable formula from its broken counterpart at the configured
//! accuracy threshold.
//!
//! Each pair uses a fresh deceptive base formula. Its counterpart at u is
//! the base with the first u clauses of one per-pair random order rewritten
//! so the planted assignment falsifies them — so the broken-clause sets are
//! nested across u within a pair. Three controls are asserted at runtime on
//! every featurized counterpart:
//!
//! 1. nested flip sets — the counterpart differs from the base exactly in
//!    the first u positions of the pair's recomputed flip order;
//! 2. one permutation per pair — both formulas of a pair receive identical
//!    variable renamings and clause reorderings before solving;
//! 3. one solver seed per pair — both formulas are solved from the same
//!    trial seeds.
//!
//! The minimal u is located by doubling until the threshold is crossed
//! (capping at m, where failure is the first-class "not distinguishable"
//! outcome), then binary search over the last doubling interval, then an
//! explicit walk-down so the reported u satisfies
//! `accuracy(u) ≥ threshold > accuracy(u − 1)` even where the measured
//! curve is locally non-monotone.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{Exp2Config, SlotBalance};
use super::{assert_no_label_leak, persist_csv, write_json, write_manifest};
use crate::features::{
    formula_features, pair_feature_names, pair_vector, LabeledMatrix, N_FORMULA_FEATURES,
};
use crate::genlab::{
    clause_count, gen_deceptive, make_pair_family, shuffle_formula_recorded, LabeledFormula,
};
use crate::learn::repeated_holdout;
use crate::seeding;
use crate::walksat::SolverParams;
use crate::{Error, Result};

/// Label column name: the slot (0 or 1) holding the satisfiable formula.
pub const EXP2_LABEL: &str = "sat_slot";

/// Named seed sub-streams this experiment draws from (recorded in the
/// manifest).
pub const EXP2_SEED_STREAMS: &[&str] = &[
    "exp2/cell",
    "exp2/slot-balance",
    "exp2/base",
    "exp2/family",
    "exp2/shuffle",
    "exp2/solve",
    "gen/assignment",
    "gen/clauses",
    "pairs/flip-order",
    "shuffle/vars",
    "shuffle/clauses",
    "solve/trial",
    "split/class",
];

/// One evaluated point of a cell's accuracy-vs-u curve.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct CurvePoint {
    pub u: usize,
    pub accuracy: f64,
}

/// Outcome of one `(r, q)` cell.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Exp2Outcome {
    /// The threshold was crossed at `u_star`, verified on both sides.
    Distinguishable {
        u_star: usize,
        /// `u_star / (r · n)`.
        relative_fraction: f64,
        accuracy_at: f64,
        accuracy_below: f64,
    },
    /// Even fully broken counterparts (u = m) stay below the threshold.
    NotDistinguishable { max_u_tested: usize, accuracy_at_max: f64 },
}

/// One `(r, q)` cell's result.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct Exp2Cell {
    pub r: f64,
    pub q: f64,
    pub n: u32,
    /// Clause count of every formula in the cell.
    pub m: usize,
    pub threshold: f64,
    pub outcome: Exp2Outcome,
    /// Every evaluated `(u, accuracy)` point, ascending in u.
    pub curve: Vec<CurvePoint>,
}

/// The full experiment outcome.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct Exp2Result {
    pub config: Exp2Config,
    pub cells: Vec<Exp2Cell>,
}

/// One row of `results.csv`.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub(crate) struct Exp2Row {
    pub r: f64,
    pub q: f64,
    pub n: u32,
    pub m: usize,
    pub threshold: f64,
    pub outcome: String,
    pub u_star: Option<usize>,
    pub relative_fraction: Option<f64>,
    pub accuracy_at: Option<f64>,
    pub accuracy_below: Option<f64>,
    pub max_u_tested: Option<usize>,
    pub accuracy_at_max: Option<f64>,
}

impl Exp2Result {
    pub(crate) fn rows(&self) -> Vec<Exp2Row> {
        self.cells
            .iter()
            .map(|c| {
                let mut row = Exp2Row {
                    r: c.r,
                    q: c.q,
                    n: c.n,
                    m: c.m,
                    threshold: c.threshold,
                    outcome: String::new(),
                    u_star: None,
                    relative_fraction: None,
                    accuracy_at: None,
                    accuracy_below: None,
                    max_u_tested: None,
                    accuracy_at_max: None,
                };
                match c.outcome {
                    Exp2Outcome::Distinguishable {
                        u_star,
                        relative_fraction,
                        accuracy_at,
                        accuracy_below,
                    } => {
                        row.outcome = "distinguishable".into();
                        row.u_star = Some(u_star);
                        row.relative_fraction = Some(relative_fraction);
                        row.accuracy_at = Some(accuracy_at);
                        row.accuracy_below = Some(accuracy_below);
                    }
                    Exp2Outcome::NotDistinguishable { max_u_tested, accuracy_at_max } => {
                        row.outcome = "not_distinguishable".into();
                        row.max_u_tested = Some(max_u_tested);
                        row.accuracy_at_max = Some(accuracy_at_max);
                    }
                }
                row
            })
            .collect()
    }
}

/// Runs the experiment and emits `results.csv`, `curves.csv`,
/// `results.json`, and `manifest.json` under the configured output
/// directory, with per-cell checkpoints under `cells/`.
pub fn run_exp2(cfg: &Exp2Config) -> Result<Exp2Result> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out)?;
    assert_no_label_leak(&pair_feature_names());
    write_manifest(&cfg.out, "exp2", cfg.seed, EXP2_SEED_STREAMS, cfg)?;

    let mut cells = Vec::new();
    let mut cell_index = 0u64;
    for &r in &cfg.densities {
        for &q in &cfg.hardness {
            let cell = CellRunner::new(cfg, r, q, cell_index)?.run()?;
            cells.push(cell);
            cell_index += 1;
        }
    }

    let result = Exp2Result { config: cfg.clone(), cells };
    write_outputs(&result)?;
    Ok(result)
}

/// Outcome of the threshold search, before accuracies are attached.
#[derive(PartialEq, Debug)]
enum SearchOutcome {
    Found { u_star: usize },
    NotFound,
}

/// Locates the minimal u in `[1, m]` whose accuracy reaches `threshold`:
/// doubling from 1 (capped at m), binary search over the last interval,
/// then an explicit walk-down until `eval(u_star − 1) < threshold`.
///
/// `eval` is expected to memoize; the search may ask for a u twice.
/// Errors if even u = 0 reaches the threshold, which would mean the pair
/// rows leak their labels through something other than the broken clauses.
fn search_minimal_u(
    m: usize,
    threshold: f64,
    eval: &mut impl FnMut(usize) -> Result<f64>,
) -> Result<SearchOutcome> {
    let mut prev_below: Option<usize> = None;
    let mut u = 1usize;
    let found = loop {
        if eval(u)? >= threshold {
            break Some(u);
        }
        if u >= m {
            break None;
        }
        prev_below = Some(u);
        u = (u * 2).min(m);
    };
    let Some(found_u) = found else {
        return Ok(SearchOutcome::NotFound);
    };

    let mut lo = prev_below.map_or(found_u, |p| p + 1);
    let mut hi = found_u;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if eval(mid)? >= threshold {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }

    let mut u_star = lo;
    loop {
        if u_star == 0 {
            return Err(Error::invalid(
                "accuracy at u = 0 reached the threshold; identical pairs must be indistinguishable",
            ));
        }
        if eval(u_star - 1)? < threshold {
            return Ok(SearchOutcome::Found { u_star });
        }
        u_star -= 1;
    }
}

/// One pair's fixed ingredients. Both solver-seed fields derive from the
/// same stream; keeping them separate lets the shared-seed control be a
/// real runtime assertion rather than a tautology.
struct Pair {
    base: LabeledFormula,
    /// Which slot (0 or 1) the satisfiable formula occupies.
    slot: u8,
    family_seed: u64,
    shuffle_seed: u64,
    sat_solver_seed: u64,
    broken_solver_seed: u64,
    sat_var_perm: Vec<u32>,
    sat_clause_perm: Vec<usize>,
}

struct CellRunner<'c> {
    cfg: &'c Exp2Config,
    r: f64,
    q: f64,
    m: usize,
    params: SolverParams,
    dir: PathBuf,
    pairs: Vec<Pair>,
    sat_features: Vec<Vec<f64>>,
    evals: BTreeMap<usize, f64>,
    schema: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct EvalLog {
    format_version: u32,
    evaluations: Vec<CurvePoint>,
}

const EVAL_LOG_FORMAT_VERSION: u32 = 1;

impl<'c> CellRunner<'c> {
    fn new(cfg: &'c Exp2Config, r: f64, q: f64, cell_index: u64) -> Result<CellRunner<'c>> {
        let dir = cfg.out.join("cells").join(format!("r{r}_q{q}"));
        fs::create_dir_all(&dir)?;
        let cell_seed = seeding::derive_seed(cfg.seed, "exp2/cell", cell_index);
        let pair_count = cfg.pairs_per_cell;

        let mut slot_rng = seeding::rng(cell_seed, "exp2/slot-balance", 0);
        let slots: Vec<u8> = match cfg.slot_balance {
            SlotBalance::Exact => {
                let mut slots: Vec<u8> =
                    (0..pair_count).map(|p| u8::from(p >= pair_count / 2)).collect();
                slots.shuffle(&mut slot_rng);
                slots
            }
            SlotBalance::Random => {
                (0..pair_count).map(|_| u8::from(slot_rng.gen_bool(0.5))).collect()
            }
        };

        let mut pairs = Vec::with_capacity(pair_count);
        for (p, &slot) in slots.iter().enumerate() {
            let p = p as u64;
            let base = gen_deceptive(cfg.n, r, q, seeding::derive_seed(cell_seed, "exp2/base", p))?;
            let shuffle_seed = seeding::derive_seed(cell_seed, "exp2/shuffle", p);
            let solver_seed = seeding::derive_seed(cell_seed, "exp2/solve", p);
            let shuffled_sat = shuffle_formula_recorded(&base.formula, shuffle_seed);
            pairs.push(Pair {
                base,
                slot,
                family_seed: seeding::derive_seed(cell_seed, "exp2/family", p),
                shuffle_seed,
                sat_solver_seed: solver_seed,
                broken_solver_seed: solver_seed,
                sat_var_perm: shuffled_sat.var_perm,
                sat_clause_perm: shuffled_sat.clause_perm,
            });
        }

        let mut runner = CellRunner {
            cfg,
            r,
            q,
            m: clause_count(cfg.n, r),
            params: cfg.solver.params_for(cfg.n),
            dir,
            pairs,
            sat_features: Vec::new(),
            evals: BTreeMap::new(),
            schema: pair_feature_names(),
        };
        runner.sat_features = runner.load_or_solve_sat_side()?;
        runner.evals = runner.load_eval_log()?;
        Ok(runner)
    }

    /// Featurizes the (shuffled) satisfiable side of every pair, once per
    /// cell, checkpointed as `sat_features.csv`.
    fn load_or_solve_sat_side(&self) -> Result<Vec<Vec<f64>>> {
        let path = self.dir.join("sat_features.csv");
        if path.exists() {
            let matrix = LabeledMatrix::read_csv(&path)?;
            let slots: Vec<u8> = self.pairs.iter().map(|p| p.slot).collect();
            if matrix.len() != self.pairs.len()
                || matrix.labels != slots
                || matrix.feature_names.len() != N_FORMULA_FEATURES
            {
                return Err(Error::invalid(format!(
                    "checkpoint {} does not fit the config",
                    path.display()
                )));
            }
            log::info!("exp2 cell r={} q={}: satisfiable side resumed", self.r, self.q);
            return Ok(matrix.rows);
        }
        let mut matrix = LabeledMatrix::new(EXP2_LABEL, crate::features::feature_names());
        for (i, pair) in self.pairs.iter().enumerate() {
            let shuffled = shuffle_formula_recorded(&pair.base.formula, pair.shuffle_seed);
            let feats = formula_features(
                &shuffled.formula,
                &self.params,
                self.cfg.solver.trials,
                pair.sat_solver_seed,
            )?;
            matrix.push(pair.slot, feats);
            if (i + 1) % 25 == 0 {
                log::info!(
                    "exp2 cell r={} q={}: {}/{} satisfiable sides solved",
                    self.r,
                    self.q,
                    i + 1,
                    self.pairs.len()
                );
            }
        }
        persist_csv(&matrix, &path)?;
        Ok(matrix.rows)
    }

    fn load_eval_log(&self) -> Result<BTreeMap<usize, f64>> {
        let path = self.dir.join("evals.json");
        if !path.exists() {
            return Ok(BTreeMap::new());
        }
        let log: EvalLog = serde_json::from_str(&fs::read_to_string(&path)?)?;
        if log.format_version != EVAL_LOG_FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported evaluation-log version {}",
                log.format_version
            )));
        }
        Ok(log.evaluations.into_iter().map(|p| (p.u, p.accuracy)).collect())
    }

    fn save_eval_log(&self) -> Result<()> {
        let log = EvalLog {
            format_version: EVAL_LOG_FORMAT_VERSION,
            evaluations: self
                .evals
                .iter()
                .map(|(&u, &accuracy)| CurvePoint { u, accuracy })
                .collect(),
        };
        write_json(&self.dir.join("evals.json"), &log)
    }

    /// Featurizes one pair's counterpart at u, asserting the three
    /// experimental controls.
    fn broken_features(&self, pair: &Pair, u: usize) -> Result<Vec<f64>> {
        let family = make_pair_family(&pair.base, &[u], pair.family_seed)?;
        let broken = &family[0].broken_formula;

        // Control 1: nested flip sets. The counterpart must differ from the
        // base in exactly the first u positions of the pair's flip order,
        // recomputed here from the family seed.
        let mut order: Vec<usize> = (0..self.m).collect();
        order.shuffle(&mut seeding::rng(pair.family_seed, "pairs/flip-order", 0));
        let mut expected: Vec<usize> = order[..u].to_vec();
        expected.sort_unstable();
        let differing: Vec<usize> = (0..self.m)
            .filter(|&i| pair.base.formula.clauses()[i] != broken.clauses()[i])
            .collect();
        assert_eq!(differing, expected, "broken-clause sets are not nested");

        // Control 2: one permutation per pair, applied before solving.
        let shuffled = shuffle_formula_recorded(broken, pair.shuffle_seed);
        assert_eq!(shuffled.var_perm, pair.sat_var_perm, "slots shuffled differently");
        assert_eq!(shuffled.clause_perm, pair.sat_clause_perm, "slots shuffled differently");

        // Control 3: one solver seed per pair.
        assert_eq!(
            pair.sat_solver_seed, pair.broken_solver_seed,
            "slots solved with different seeds"
        );

        formula_features(
            &shuffled.formula,
            &self.params,
            self.cfg.solver.trials,
            pair.broken_solver_seed,
        )
    }

    /// The pair feature matrix at u, checkpointed as `features_u{u}.csv`.
    /// At u = 0 the counterpart is the base itself, so its features are
    /// reused rather than re-solved (same formula, same solver seed).
    fn pair_matrix(&self, u: usize) -> Result<LabeledMatrix> {
        let path = self.dir.join(format!("features_u{u}.csv"));
        if path.exists() {
            let matrix = LabeledMatrix::read_csv(&path)?;
            let slots: Vec<u8> = self.pairs.iter().map(|p| p.slot).collect();
            if matrix.labels != slots || matrix.feature_names != self.schema {
                return Err(Error::invalid(format!(
                    "checkpoint {} does not fit the config",
                    path.display()
                )));
            }
            return Ok(matrix);
        }
        let mut matrix = LabeledMatrix::new(EXP2_LABEL, self.schema.clone());
        for (i, pair) in self.pairs.iter().enumerate() {
            let broken =
                if u == 0 { self.sat_features[i].clone() } else { self.broken_features(pair, u)? };
            let row = match pair.slot {
                0 => pair_vector(&self.sat_features[i], &broken),
                _ => pair_vector(&broken, &self.sat_features[i]),
            };
            matrix.push(pair.slot, row);
        }
        persist_csv(&matrix, &path)?;
        Ok(matrix)
    }

    /// Memoized accuracy at u; a completed (r, q, u) cell is never
    /// recomputed, either within a run or across resumes.
    fn eval(&mut self, u: usize) -> Result<f64> {
        if let Some(&acc) = self.evals.get(&u) {
            return Ok(acc);
        }
        let matrix = self.pair_matrix(u)?;
        let report = repeated_holdout(
            &matrix,
            self.cfg.test_fraction,
            self.cfg.max_depth,
            self.cfg.classifier_seeds,
        )?;
        log::info!(
            "exp2 cell r={} q={}: accuracy at u={u} is {:.2} ± {:.2}",
            self.r,
            self.q,
            report.mean,
            report.std
        );
        self.evals.insert(u, report.mean);
        self.save_eval_log()?;
        Ok(report.mean)
    }

    fn run(mut self) -> Result<Exp2Cell> {
        let threshold = self.cfg.threshold;
        let m = self.m;
        let mut eval = |u: usize| -> Result<f64> { self.eval(u) };
        let outcome = match search_minimal_u(m, threshold, &mut eval)? {
            SearchOutcome::NotFound => {
                Exp2Outcome::NotDistinguishable { max_u_tested: m, accuracy_at_max: self.evals[&m] }
            }
            SearchOutcome::Found { u_star } => Exp2Outcome::Distinguishable {
                u_star,
                relative_fraction: u_star as f64 / (self.r * f64::from(self.cfg.n)),
                accuracy_at: self.evals[&u_star],
                accuracy_below: self.evals[&(u_star - 1)],
            },
        };
        let cell = Exp2Cell {
            r: self.r,
            q: self.q,
            n: self.cfg.n,
            m,
            threshold,
            outcome,
            curve: self.evals.iter().map(|(&u, &accuracy)| CurvePoint { u, accuracy }).collect(),
        };
        write_json(&self.dir.join("result.json"), &cell)?;
        Ok(cell)
    }
}

fn write_outputs(result: &Exp2Result) -> Result<()> {
    let out = &result.config.out;
    write_json(&out.join("results.json"), result)?;

    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in result.rows() {
        writer.serialize(row)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    fs::write(out.join("results.csv"), bytes)?;

    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["r", "q", "u", "accuracy"])?;
    for cell in &result.cells {
        for point in &cell.curve {
            writer.write_record(&[
                format!("{}", cell.r),
                format!("{}", cell.q),
                format!("{}", point.u),
                format!("{}", point.accuracy),
            ])?;
        }
    }
    let bytes = writer.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    fs::write(out.join("curves.csv"), bytes)?;
    Ok(())
}
