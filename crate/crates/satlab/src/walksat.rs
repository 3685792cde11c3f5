//! A WalkSAT-style stochastic local-search solver that records, step by step,
//! the observables the feature extractor consumes.
//!
//! The solver is run not to decide satisfiability — the generator already
//! knows the label — but to produce a short behavioral trace whose statistics
//! separate the two formula classes. One *step* flips one variable:
//!
//! 1. pick a uniformly random unsatisfied clause;
//! 2. if any of its variables can be flipped without breaking a currently
//!    satisfied clause (break value 0), flip a uniformly random such variable;
//! 3. otherwise, with probability `wp` flip a uniformly random variable of the
//!    clause, and with probability `1 − wp` flip a variable of minimum break
//!    value (ties resolved uniformly at random).
//!
//! Satisfied-literal counts, the unsatisfied-clause set, and break values are
//! maintained incrementally, so a step costs time proportional to the number
//! of clauses touching the flipped variable. A from-scratch reference
//! implementation in the test suite replays traces against this one.
//!
//! The exact random-draw protocol is part of the trace format (a replay must
//! consume draws identically): per step, draw the clause index, then — only in
//! the order given above — the freebie index, or the `wp` coin followed by
//! either the random-variable index or the tie-break index. Each trial draws
//! its initial assignment from the same stream before the first step.

use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cnf::{count_unsat, satisfied_literal_count, Assignment, Formula};
use crate::seeding;
use crate::{Error, Result};

/// Default noise probability for the random-walk branch.
pub const DEFAULT_WP: f64 = 0.48;

/// Default number of restarts ("trials") per formula.
pub const DEFAULT_TRIALS: usize = 16;

/// Default step cap as a multiple of the variable count.
pub const DEFAULT_STEPS_PER_VAR: usize = 2;

/// Solver configuration.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct SolverParams {
    /// Noise probability in `[0, 1]`: chance of flipping a random clause
    /// variable instead of a minimum-break one when no freebie exists.
    pub wp: f64,
    /// Maximum number of flips per trial.
    pub max_steps: usize,
}

impl SolverParams {
    /// The defaults used throughout: `wp = 0.48`, `max_steps = 2n`.
    pub fn for_n(n: u32) -> SolverParams {
        SolverParams { wp: DEFAULT_WP, max_steps: DEFAULT_STEPS_PER_VAR * n as usize }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.wp) {
            return Err(Error::invalid(format!("wp must lie in [0, 1], got {}", self.wp)));
        }
        if self.max_steps == 0 {
            return Err(Error::invalid("max_steps must be at least 1"));
        }
        Ok(())
    }
}

/// What the solver observed at one step, recorded *after* the flip.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct StepRecord {
    /// 1-based step number.
    pub step: u32,
    /// Index of the selected unsatisfied clause.
    pub clause: u32,
    /// The variable that was flipped.
    pub var: u32,
    /// Break value of the flipped variable (clauses newly falsified).
    pub break_value: u32,
    /// Number of unsatisfied clauses after the flip.
    pub unsat_count: u32,
    /// Steps since the selected clause was last selected; equals `step` on
    /// its first selection.
    pub steps_since_chosen: u32,
    /// Hamming distance of the current assignment from the trial's initial
    /// assignment, after the flip.
    pub hamming_from_start: u32,
}

/// Everything one trial produced.
#[derive(Clone, PartialEq, Debug)]
pub struct Trace {
    pub n: u32,
    pub m: usize,
    /// Whether a satisfying assignment was reached within the step cap.
    pub solved: bool,
    pub initial_assignment: Assignment,
    pub final_assignment: Assignment,
    pub records: Vec<StepRecord>,
    /// Flips per variable (index `v − 1`), over the whole trial.
    pub var_flip_counts: Vec<u32>,
    /// Mean gap between successive flips of each variable:
    /// `(last − first) / (count − 1)`; variables flipped at most once get the
    /// trial length [`Trace::steps_taken`] as a no-recurrence sentinel.
    pub var_flip_periods: Vec<f64>,
    /// Selections per clause.
    pub clause_sel_counts: Vec<u32>,
    /// Mean gap between successive selections of each clause, with the same
    /// sentinel convention as [`Trace::var_flip_periods`].
    pub clause_sel_periods: Vec<f64>,
}

impl Trace {
    /// Number of flips executed (equals `max_steps` when unsolved).
    pub fn steps_taken(&self) -> usize {
        self.records.len()
    }

    pub fn summary(&self) -> TraceSummary {
        TraceSummary {
            solved: self.solved,
            steps_taken: self.steps_taken(),
            final_unsat_count: self.records.last().map_or(0, |r| r.unsat_count),
            final_hamming_from_start: self.records.last().map_or(0, |r| r.hamming_from_start),
            n: self.n,
            m: self.m,
        }
    }
}

/// Compact JSON-friendly digest of a trace.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TraceSummary {
    pub solved: bool,
    pub steps_taken: usize,
    pub final_unsat_count: u32,
    pub final_hamming_from_start: u32,
    pub n: u32,
    pub m: usize,
}

/// Break value computed from scratch in time `O(m)`: the number of clauses
/// that are currently satisfied but would not be if `var` were flipped.
///
/// The solver maintains this incrementally; this function is the slow
/// reference the tests compare against.
pub fn break_value_naive(f: &Formula, a: &Assignment, var: u32) -> u32 {
    let mut broken = 0;
    for c in f.clauses() {
        let sat = satisfied_literal_count(c, a);
        if sat != 1 {
            continue;
        }
        let saving = c.lits().iter().find(|l| l.satisfied_by(a)).expect("sat == 1");
        if saving.var() == var {
            broken += 1;
        }
    }
    broken
}

/// Incrementally maintained solver state.
struct State {
    assignment: Assignment,
    /// Satisfied-literal count per clause.
    sat_counts: Vec<u32>,
    /// Indices of clauses with `sat_counts == 0`, in arbitrary order.
    unsat: Vec<u32>,
    /// Position of each clause inside `unsat`, or `NOT_IN_UNSAT`.
    unsat_pos: Vec<u32>,
    /// Clauses containing each variable, as `(clause index, polarity)`.
    occurrences: Vec<Vec<(u32, bool)>>,
}

const NOT_IN_UNSAT: u32 = u32::MAX;

impl State {
    fn new(formula: &Formula, assignment: Assignment) -> State {
        let n = formula.n() as usize;
        let m = formula.m();
        let mut occurrences = vec![Vec::new(); n];
        let mut sat_counts = vec![0u32; m];
        let mut unsat = Vec::new();
        let mut unsat_pos = vec![NOT_IN_UNSAT; m];
        for (idx, clause) in formula.clauses().iter().enumerate() {
            for lit in clause.lits() {
                occurrences[(lit.var() - 1) as usize].push((idx as u32, lit.positive()));
            }
            sat_counts[idx] = satisfied_literal_count(clause, &assignment);
            if sat_counts[idx] == 0 {
                unsat_pos[idx] = unsat.len() as u32;
                unsat.push(idx as u32);
            }
        }
        State { assignment, sat_counts, unsat, unsat_pos, occurrences }
    }

    /// Clauses that flipping `var` would newly falsify: those it alone keeps
    /// satisfied.
    fn break_value(&self, var: u32) -> u32 {
        let value = self.assignment.get(var);
        self.occurrences[(var - 1) as usize]
            .iter()
            .filter(|&&(c, pol)| pol == value && self.sat_counts[c as usize] == 1)
            .count() as u32
    }

    fn flip(&mut self, var: u32) {
        let old = self.assignment.get(var);
        self.assignment.set(var, !old);
        for &(c, pol) in &self.occurrences[(var - 1) as usize] {
            let ci = c as usize;
            if pol == old {
                // This literal was satisfied and no longer is.
                self.sat_counts[ci] -= 1;
                if self.sat_counts[ci] == 0 {
                    self.unsat_pos[ci] = self.unsat.len() as u32;
                    self.unsat.push(c);
                }
            } else {
                self.sat_counts[ci] += 1;
                if self.sat_counts[ci] == 1 {
                    let pos = self.unsat_pos[ci];
                    debug_assert_ne!(pos, NOT_IN_UNSAT);
                    let last = *self.unsat.last().expect("clause is present");
                    self.unsat.swap_remove(pos as usize);
                    if last != c {
                        self.unsat_pos[last as usize] = pos;
                    }
                    self.unsat_pos[ci] = NOT_IN_UNSAT;
                }
            }
        }
    }
}

/// Runs one trial from the given initial assignment, consuming randomness
/// from `rng` exactly as documented in the module header.
pub fn run_from(
    formula: &Formula,
    params: &SolverParams,
    initial: Assignment,
    rng: &mut impl Rng,
) -> Result<Trace> {
    params.validate()?;
    if initial.len() != formula.n() as usize {
        return Err(Error::invalid(format!(
            "initial assignment has {} variables, formula has {}",
            initial.len(),
            formula.n()
        )));
    }
    let mut state = State::new(formula, initial.clone());
    let mut records = Vec::new();
    let mut hamming = 0u32;
    // Last step at which each clause was selected (0 = never) and each
    // variable flipped, plus first-occurrence steps and counts for the
    // recurrence-period distributions.
    let m = formula.m();
    let n = formula.n() as usize;
    let mut clause_last = vec![0u32; m];
    let mut clause_first = vec![0u32; m];
    let mut clause_count = vec![0u32; m];
    let mut var_last = vec![0u32; n];
    let mut var_first = vec![0u32; n];
    let mut var_count = vec![0u32; n];

    for step in 1..=params.max_steps as u32 {
        if state.unsat.is_empty() {
            break;
        }
        let clause_idx = state.unsat[rng.gen_range(0..state.unsat.len())];
        let clause = &formula.clauses()[clause_idx as usize];
        let breaks = clause.lits().map(|l| state.break_value(l.var()));

        let pick = if breaks.contains(&0) {
            let free: Vec<usize> = (0..3).filter(|&i| breaks[i] == 0).collect();
            free[rng.gen_range(0..free.len())]
        } else if rng.gen_bool(params.wp) {
            rng.gen_range(0..3)
        } else {
            let min = *breaks.iter().min().expect("three literals");
            let best: Vec<usize> = (0..3).filter(|&i| breaks[i] == min).collect();
            best[rng.gen_range(0..best.len())]
        };
        let var = clause.lits()[pick].var();
        let break_value = breaks[pick];

        // Flip and update the observables.
        let was_initial = initial.get(var) == state.assignment.get(var);
        state.flip(var);
        if was_initial {
            hamming += 1;
        } else {
            hamming -= 1;
        }
        let ci = clause_idx as usize;
        let vi = (var - 1) as usize;
        let steps_since_chosen = step - clause_last[ci];
        clause_last[ci] = step;
        if clause_count[ci] == 0 {
            clause_first[ci] = step;
        }
        clause_count[ci] += 1;
        if var_count[vi] == 0 {
            var_first[vi] = step;
        }
        var_last[vi] = step;
        var_count[vi] += 1;

        records.push(StepRecord {
            step,
            clause: clause_idx,
            var,
            break_value,
            unsat_count: state.unsat.len() as u32,
            steps_since_chosen,
            hamming_from_start: hamming,
        });
    }

    let steps_taken = records.len() as f64;
    let period = |first: &[u32], last: &[u32], count: &[u32], i: usize| {
        if count[i] >= 2 {
            f64::from(last[i] - first[i]) / f64::from(count[i] - 1)
        } else {
            steps_taken
        }
    };
    let var_flip_periods = (0..n).map(|i| period(&var_first, &var_last, &var_count, i)).collect();
    let clause_sel_periods =
        (0..m).map(|i| period(&clause_first, &clause_last, &clause_count, i)).collect();

    Ok(Trace {
        n: formula.n(),
        m,
        solved: state.unsat.is_empty(),
        initial_assignment: initial,
        final_assignment: state.assignment,
        records,
        var_flip_counts: var_count,
        var_flip_periods,
        clause_sel_counts: clause_count,
        clause_sel_periods,
    })
}

/// Runs one trial: draws a uniformly random initial assignment from `rng`,
/// then walks from it.
pub fn run(formula: &Formula, params: &SolverParams, rng: &mut impl Rng) -> Result<Trace> {
    let initial = Assignment::random(formula.n(), rng);
    run_from(formula, params, initial, rng)
}

/// [`run`] plus a from-scratch audit of the incremental bookkeeping: the
/// final unsatisfied-clause count, the solved flag, and the final Hamming
/// distance are recomputed directly and must agree with the trace.
pub fn run_checked(formula: &Formula, params: &SolverParams, rng: &mut impl Rng) -> Result<Trace> {
    let trace = run(formula, params, rng)?;
    let recount = count_unsat(formula, &trace.final_assignment);
    let recorded = trace.records.last().map_or_else(
        || count_unsat(formula, &trace.initial_assignment),
        |r| r.unsat_count as usize,
    );
    if recount != recorded {
        return Err(Error::invalid(format!(
            "incremental unsat count {recorded} disagrees with recount {recount}"
        )));
    }
    if trace.solved != (recount == 0) {
        return Err(Error::invalid("solved flag disagrees with final state"));
    }
    let distance = crate::cnf::hamming(&trace.initial_assignment, &trace.final_assignment)?;
    let recorded_distance = trace.records.last().map_or(0, |r| r.hamming_from_start as usize);
    if distance != recorded_distance {
        return Err(Error::invalid(format!(
            "incremental hamming {recorded_distance} disagrees with recount {distance}"
        )));
    }
    Ok(trace)
}

/// Runs `trials` independent restarts. Trial `i` uses the random stream
/// `("solve/trial", i)` derived from `seed`, so results are independent of
/// scheduling and identical across thread counts.
pub fn run_many(
    formula: &Formula,
    params: &SolverParams,
    trials: usize,
    seed: u64,
) -> Result<Vec<Trace>> {
    params.validate()?;
    if trials == 0 {
        return Err(Error::invalid("trial count must be at least 1"));
    }
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng: ChaCha8Rng = seeding::rng(seed, "solve/trial", trial as u64);
            run(formula, params, &mut rng)
        })
        .collect()
}

/// Renders a trace's step records as CSV (one row per flip).
pub fn trace_to_csv(trace: &Trace) -> String {
    let mut out = String::from(
        "step,clause,var,break_value,unsat_count,steps_since_chosen,hamming_from_start\n",
    );
    for r in &trace.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.step,
            r.clause,
            r.var,
            r.break_value,
            r.unsat_count,
            r.steps_since_chosen,
            r.hamming_from_start
        )
        .expect("writing to a String cannot fail");
    }
    out
}
