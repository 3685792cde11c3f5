//! Labeled formula generation and the analytic machinery that justifies the
//! labels.
//!
//! Two samplers produce the two classes:
//!
//! * [`gen_uniform`] draws clauses i.i.d. uniformly over all `8·C(n,3)`
//!   3-clauses. At clause density `r` above the critical value (≈ 4.667, see
//!   [`critical_density`]) the probability that such a formula is satisfiable
//!   is at most [`bound_f`]`(r,n)^n`, which for the densities used here is so
//!   small (see [`unsat_risk`]) that the UNSAT label is safe without ever
//!   calling a solver.
//! * [`gen_deceptive`] plants a hidden assignment `A` and accepts a uniformly
//!   proposed clause with probability `q^t`, where `t ≥ 1` is the clause's
//!   number of satisfied literals under `A`. Every emitted clause satisfies
//!   `A`, so the SAT label carries a certificate, while `q` tunes how strongly
//!   per-variable statistics point away from `A` (see [`mean_sat_literals`]
//!   and [`balanced_q`]).
//!
//! The module also builds the nested formula pairs used by the pair-
//! classification experiment ([`make_pair_family`]) and the permutation
//! control ([`shuffle_formula`]).

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cnf::{
    count_unsat, parse_dimacs, satisfied_literal_count, write_dimacs, Assignment, Clause, Formula,
    Lit,
};
use crate::seeding;
use crate::{Error, Result};

/// Smallest accepted deceptive parameter: below this the rejection sampler
/// degenerates (expected proposals per accepted clause exceed ~260).
pub const MIN_Q: f64 = 0.01;

/// Class label of a generated formula.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Unsat,
    Sat,
}

/// Parameters of one generator call.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct GenParams {
    /// Variable count (≥ 3).
    pub n: u32,
    /// Clause density; the clause count is `round(r·n)`, rounding half up.
    pub r: f64,
    /// Deceptive parameter in `[MIN_Q, 1]`; `None` for the uniform sampler.
    pub q: Option<f64>,
    /// Generator seed; sub-streams are derived from it by name.
    pub seed: u64,
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::invalid(format!("n must be at least 3, got {}", self.n)));
        }
        if !self.r.is_finite() || self.r <= 0.0 {
            return Err(Error::invalid(format!("density r must be positive, got {}", self.r)));
        }
        if clause_count(self.n, self.r) < 1 {
            return Err(Error::invalid(format!(
                "round(r·n) must be at least 1, got r = {}, n = {}",
                self.r, self.n
            )));
        }
        if let Some(q) = self.q {
            if !q.is_finite() || q <= 0.0 || q > 1.0 {
                return Err(Error::invalid(format!("q must lie in (0, 1], got {q}")));
            }
            if q < MIN_Q {
                return Err(Error::invalid(format!(
                    "q = {q} is below {MIN_Q}; the acceptance loop degenerates for such small q"
                )));
            }
        }
        Ok(())
    }
}

/// A formula together with its label and provenance.
#[derive(Clone, Debug)]
pub struct LabeledFormula {
    pub formula: Formula,
    pub label: Label,
    /// The planted satisfying assignment; present iff `label == Sat`.
    pub planted: Option<Assignment>,
    pub params: GenParams,
}

/// One element of a pair-classification dataset: a satisfiable formula and a
/// counterpart that differs in exactly `u` clauses, none of which satisfy the
/// planted assignment.
#[derive(Clone, Debug)]
pub struct PairInstance {
    pub sat_formula: Formula,
    pub broken_formula: Formula,
    pub planted: Assignment,
    /// Number of clause positions where the two formulas differ.
    pub u: usize,
    /// Which slot (0 or 1) holds the satisfiable formula.
    pub slot_label: u8,
}

/// Clause count at density `r` over `n` variables: `round(r·n)`, half up.
pub fn clause_count(n: u32, r: f64) -> usize {
    (r * f64::from(n) + 0.5).floor() as usize
}

/// Draws one clause uniformly over all `8·C(n,3)` 3-clauses: three distinct
/// variables, then an independent fair sign for each.
pub fn sample_clause_uniform(n: u32, rng: &mut impl Rng) -> Clause {
    let idx = rand::seq::index::sample(rng, n as usize, 3);
    let lits = [
        Lit::new(idx.index(0) as u32 + 1, rng.gen_bool(0.5)),
        Lit::new(idx.index(1) as u32 + 1, rng.gen_bool(0.5)),
        Lit::new(idx.index(2) as u32 + 1, rng.gen_bool(0.5)),
    ];
    Clause::new(lits).expect("sampled variables are distinct")
}

/// Generates a uniform random formula, labeled UNSAT.
///
/// The label is justified probabilistically, not by solving: the caller is
/// responsible for picking `r` in the regime where [`unsat_risk`] is
/// negligible (r ≥ 5 is comfortably safe for any n ≥ a few hundred).
pub fn gen_uniform(n: u32, r: f64, seed: u64) -> Result<LabeledFormula> {
    let params = GenParams { n, r, q: None, seed };
    params.validate()?;
    let m = clause_count(n, r);
    let mut rng = seeding::rng(seed, "gen/clauses", 0);
    let clauses = (0..m).map(|_| sample_clause_uniform(n, &mut rng)).collect();
    Ok(LabeledFormula {
        formula: Formula::new(n, clauses)?,
        label: Label::Unsat,
        planted: None,
        params,
    })
}

/// Generates a deceptively planted satisfiable formula.
///
/// A hidden assignment `A` is drawn uniformly; clauses are then drawn by
/// rejection: propose a uniform clause, reject it outright if `A` satisfies
/// none of its literals, otherwise accept with probability `q^t` where `t` is
/// the number of satisfied literals. Every emitted clause satisfies `A`, so
/// the formula is satisfiable by construction.
pub fn gen_deceptive(n: u32, r: f64, q: f64, seed: u64) -> Result<LabeledFormula> {
    let params = GenParams { n, r, q: Some(q), seed };
    params.validate()?;
    let m = clause_count(n, r);
    let planted = Assignment::random(n, &mut seeding::rng(seed, "gen/assignment", 0));
    let mut rng = seeding::rng(seed, "gen/clauses", 0);
    let mut clauses = Vec::with_capacity(m);
    while clauses.len() < m {
        let c = sample_clause_uniform(n, &mut rng);
        let t = satisfied_literal_count(&c, &planted);
        if t == 0 {
            continue;
        }
        if rng.gen_bool(q.powi(t as i32)) {
            clauses.push(c);
        }
    }
    let formula = Formula::new(n, clauses)?;
    debug_assert_eq!(count_unsat(&formula, &planted), 0);
    Ok(LabeledFormula { formula, label: Label::Sat, planted: Some(planted), params })
}

/// The per-variable factor `f(r, n)` bounding the satisfiability probability
/// of a uniform random 3-CNF formula with `n` variables and `round(r·n)`
/// clauses: the probability is at most `f(r,n)^n`.
///
/// `f(r,n) = (7/8)^r · (2 − (1 − 3/(7n))^{r·n})`, evaluated with the power
/// terms in log space for numerical stability.
pub fn bound_f(r: f64, n: u64) -> f64 {
    let nf = n as f64;
    let a = (r * (7.0f64 / 8.0).ln()).exp();
    let b = (r * nf * (-3.0 / (7.0 * nf)).ln_1p()).exp();
    a * (2.0 - b)
}

/// The `n → ∞` limit of [`bound_f`]: `(7/8)^r · (2 − e^{−3r/7})`.
pub fn bound_f_limit(r: f64) -> f64 {
    (r * (7.0f64 / 8.0).ln()).exp() * (2.0 - (-3.0 * r / 7.0).exp())
}

/// The density at which the limiting bound [`bound_f_limit`] crosses 1
/// (≈ 4.667), found by bisection on [4, 5] to within `tol`.
///
/// Below this density the bound is vacuous (≥ 1) and says nothing; above it
/// the bound decays exponentially in `n`.
pub fn critical_density(tol: f64) -> Result<f64> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let (mut lo, mut hi) = (4.0f64, 5.0f64);
    debug_assert!(bound_f_limit(lo) > 1.0 && bound_f_limit(hi) < 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if bound_f_limit(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// log10 of the union bound `N · f(r,n)^n` on the probability that any of `N`
/// uniform formulas at density `r` over `n` variables is satisfiable.
///
/// Computed entirely in log space, so astronomically small probabilities are
/// exact. Errors when `f(r,n) ≥ 1` (the bound is vacuous at that density).
pub fn unsat_risk(r: f64, n: u64, dataset_size: u64) -> Result<f64> {
    if dataset_size == 0 {
        return Err(Error::invalid("dataset size must be at least 1"));
    }
    let f = bound_f(r, n);
    if f >= 1.0 {
        return Err(Error::invalid(format!(
            "bound is vacuous: f({r}, {n}) = {f:.4} >= 1; increase the density above {:.3}",
            critical_density(1e-6)?
        )));
    }
    Ok((dataset_size as f64).log10() + n as f64 * f.log10())
}

/// Expected number of satisfied literals per accepted clause under the planted
/// assignment, as a function of `q`:
/// `(3q + 6q² + 3q³) / (3q + 3q² + q³)`.
///
/// Accepted clauses have `t` satisfied literals with probability proportional
/// to `C(3,t)·q^t`; this is the mean of that distribution.
pub fn mean_sat_literals(q: f64) -> Result<f64> {
    if !q.is_finite() || q <= 0.0 || q > 1.0 {
        return Err(Error::invalid(format!("q must lie in (0, 1], got {q}")));
    }
    let q2 = q * q;
    let q3 = q2 * q;
    Ok((3.0 * q + 6.0 * q2 + 3.0 * q3) / (3.0 * q + 3.0 * q2 + q3))
}

/// The unique `q` in (0, 1) at which [`mean_sat_literals`] equals 3/2 — the
/// same expectation a uniformly random assignment gives — namely
/// `(√5 − 1)/2 ≈ 0.618`. At this value per-variable majority statistics carry
/// no signal about the planted assignment.
pub fn balanced_q() -> f64 {
    (5.0f64.sqrt() - 1.0) / 2.0
}

/// Replaces a clause by its uniquely determined "broken" version: every
/// literal's polarity is set to the value falsified by `a`, so the result has
/// no satisfied literal under `a`.
pub fn break_clause(c: &Clause, a: &Assignment) -> Clause {
    let lits = c.lits().map(|l| Lit::new(l.var(), !a.get(l.var())));
    Clause::new(lits).expect("variables unchanged")
}

/// Builds a family of formula pairs from one satisfiable base formula.
///
/// A single random permutation of clause positions is drawn; the counterpart
/// for distance `u` breaks the first `u` positions of that permutation, so the
/// broken-clause sets are nested across the family: the pair at distance `u`
/// and the pair at distance `v > u` differ only in the additional `v − u`
/// broken clauses. Each instance is assigned a uniformly random slot for the
/// satisfiable formula; callers needing an exactly balanced dataset rebalance
/// at the dataset level.
pub fn make_pair_family(
    base: &LabeledFormula,
    u_list: &[usize],
    seed: u64,
) -> Result<Vec<PairInstance>> {
    let planted = match (&base.label, &base.planted) {
        (Label::Sat, Some(a)) => a,
        _ => {
            return Err(Error::invalid(
                "pair families need a satisfiable base with a planted assignment",
            ))
        }
    };
    let m = base.formula.m();
    if u_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("u values must be strictly ascending"));
    }
    if u_list.last().is_some_and(|&u| u > m) {
        return Err(Error::invalid(format!(
            "largest u = {} exceeds clause count m = {m}",
            u_list.last().unwrap()
        )));
    }

    let mut rng = seeding::rng(seed, "pairs/flip-order", 0);
    let mut positions: Vec<usize> = (0..m).collect();
    positions.shuffle(&mut rng);
    let mut slot_rng = seeding::rng(seed, "pairs/slots", 0);

    let mut out = Vec::with_capacity(u_list.len());
    let mut broken_clauses = base.formula.clauses().to_vec();
    let mut broken_so_far = 0usize;
    for &u in u_list {
        for &pos in &positions[broken_so_far..u] {
            broken_clauses[pos] = break_clause(&broken_clauses[pos], planted);
        }
        broken_so_far = u;
        let broken_formula = Formula::new(base.formula.n(), broken_clauses.clone())?;
        debug_assert_eq!(count_unsat(&broken_formula, planted), u);
        out.push(PairInstance {
            sat_formula: base.formula.clone(),
            broken_formula,
            planted: planted.clone(),
            u,
            slot_label: u8::from(slot_rng.gen_bool(0.5)),
        });
    }
    Ok(out)
}

/// A formula shuffled by [`shuffle_formula_recorded`], together with the
/// permutations that produced it.
#[derive(Clone, Debug)]
pub struct ShuffledFormula {
    pub formula: Formula,
    /// `var_perm[v-1]` is the new name of old variable `v`.
    pub var_perm: Vec<u32>,
    /// `clause_perm[i]` is the old position of the clause now at position `i`.
    pub clause_perm: Vec<usize>,
}

/// Applies a uniformly random variable renaming and clause-order permutation,
/// returning the permutations used. Satisfiability is preserved; if `a`
/// satisfies the input then `a.permuted(&var_perm)` satisfies the output.
///
/// The permutations depend only on `(n, m, seed)`, never on the clauses, so
/// two same-shape formulas shuffled with one seed receive identical
/// permutations — the property the pair experiment relies on.
pub fn shuffle_formula_recorded(f: &Formula, seed: u64) -> ShuffledFormula {
    let mut rng = seeding::rng(seed, "shuffle/vars", 0);
    let mut var_perm: Vec<u32> = (1..=f.n()).collect();
    var_perm.shuffle(&mut rng);
    let mut clause_rng = seeding::rng(seed, "shuffle/clauses", 0);
    let mut clause_perm: Vec<usize> = (0..f.m()).collect();
    clause_perm.shuffle(&mut clause_rng);

    let clauses = clause_perm
        .iter()
        .map(|&old| {
            let lits = f.clauses()[old]
                .lits()
                .map(|l| Lit::new(var_perm[(l.var() - 1) as usize], l.positive()));
            Clause::new(lits).expect("renaming keeps variables distinct")
        })
        .collect();
    let formula = Formula::new(f.n(), clauses).expect("renaming keeps variables in range");
    ShuffledFormula { formula, var_perm, clause_perm }
}

/// [`shuffle_formula_recorded`] without the permutation bookkeeping.
pub fn shuffle_formula(f: &Formula, seed: u64) -> Formula {
    shuffle_formula_recorded(f, seed).formula
}

/// JSON sidecar persisted next to each generated DIMACS file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format_version: u32,
    pub label: Label,
    pub n: u32,
    pub m: usize,
    pub r: f64,
    pub q: Option<f64>,
    pub seed: u64,
    /// Planted assignment as a `0`/`1` string (variable 1 first); SAT only.
    pub planted_assignment: Option<String>,
}

pub const SIDECAR_FORMAT_VERSION: u32 = 1;

impl LabeledFormula {
    pub fn sidecar(&self) -> Sidecar {
        Sidecar {
            format_version: SIDECAR_FORMAT_VERSION,
            label: self.label,
            n: self.formula.n(),
            m: self.formula.m(),
            r: self.params.r,
            q: self.params.q,
            seed: self.params.seed,
            planted_assignment: self.planted.as_ref().map(Assignment::to_bit_string),
        }
    }

    /// Writes `<stem>.cnf` and `<stem>.json`.
    pub fn write_files(&self, stem: &Path) -> Result<(PathBuf, PathBuf)> {
        let cnf_path = stem.with_extension("cnf");
        let json_path = stem.with_extension("json");
        fs::write(&cnf_path, write_dimacs(&self.formula))?;
        let mut payload = serde_json::to_string_pretty(&self.sidecar())?;
        payload.push('\n');
        fs::write(&json_path, payload)?;
        Ok((cnf_path, json_path))
    }
}

/// Reads a DIMACS file plus its JSON sidecar if one sits next to it.
pub fn read_formula_with_sidecar(cnf_path: &Path) -> Result<(Formula, Option<Sidecar>)> {
    let formula = parse_dimacs(&fs::read_to_string(cnf_path)?)?;
    let json_path = cnf_path.with_extension("json");
    let sidecar = if json_path.is_file() {
        let sc: Sidecar = serde_json::from_str(&fs::read_to_string(&json_path)?)?;
        if sc.n != formula.n() || sc.m != formula.m() {
            return Err(Error::invalid(format!(
                "sidecar {json_path:?} disagrees with formula shape ({}, {}) vs ({}, {})",
                sc.n,
                sc.m,
                formula.n(),
                formula.m()
            )));
        }
        Some(sc)
    } else {
        None
    };
    Ok((formula, sidecar))
}
