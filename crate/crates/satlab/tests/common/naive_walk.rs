//! An independent WalkSAT reimplementation with no incremental state: the
//! unsatisfied-clause set and every break value are recomputed from scratch
//! at each step by full scans. Same algorithm, own random choices — used for
//! distributional comparisons against the fast solver, not bit-level replay.

use rand::Rng;
use satlab::cnf::Formula;

/// `(variable, polarity)` triples; the formula as plain data.
type PlainClause = [(u32, bool); 3];

pub struct NaiveOutcome {
    pub solved: bool,
    pub steps: usize,
}

fn plain_clauses(f: &Formula) -> Vec<PlainClause> {
    f.clauses()
        .iter()
        .map(|c| {
            let l = c.lits();
            [
                (l[0].var(), l[0].positive()),
                (l[1].var(), l[1].positive()),
                (l[2].var(), l[2].positive()),
            ]
        })
        .collect()
}

fn clause_satisfied(c: &PlainClause, a: &[bool]) -> bool {
    c.iter().any(|&(v, pol)| a[(v - 1) as usize] == pol)
}

/// Clauses currently kept satisfied solely by a literal of `var`.
fn break_value(clauses: &[PlainClause], a: &[bool], var: u32) -> usize {
    clauses
        .iter()
        .filter(|c| {
            let sat: Vec<&(u32, bool)> =
                c.iter().filter(|&&(v, pol)| a[(v - 1) as usize] == pol).collect();
            sat.len() == 1 && sat[0].0 == var
        })
        .count()
}

/// One trial from a random initial assignment: per step, pick a uniformly
/// random unsatisfied clause; flip a uniform zero-break variable if one
/// exists; otherwise flip a uniform clause variable with probability `wp`,
/// else a uniform minimum-break variable.
pub fn naive_walksat(
    formula: &Formula,
    wp: f64,
    max_steps: usize,
    rng: &mut impl Rng,
) -> NaiveOutcome {
    let clauses = plain_clauses(formula);
    let mut a: Vec<bool> = (0..formula.n()).map(|_| rng.gen()).collect();

    for step in 0..max_steps {
        let unsat: Vec<usize> =
            (0..clauses.len()).filter(|&i| !clause_satisfied(&clauses[i], &a)).collect();
        if unsat.is_empty() {
            return NaiveOutcome { solved: true, steps: step };
        }
        let clause = &clauses[unsat[rng.gen_range(0..unsat.len())]];
        let breaks: Vec<usize> =
            clause.iter().map(|&(v, _)| break_value(&clauses, &a, v)).collect();
        let pick = if breaks.contains(&0) {
            let free: Vec<usize> = (0..3).filter(|&i| breaks[i] == 0).collect();
            free[rng.gen_range(0..free.len())]
        } else if rng.gen_bool(wp) {
            rng.gen_range(0..3)
        } else {
            let min = *breaks.iter().min().unwrap();
            let best: Vec<usize> = (0..3).filter(|&i| breaks[i] == min).collect();
            best[rng.gen_range(0..best.len())]
        };
        let var = clause[pick].0;
        a[(var - 1) as usize] = !a[(var - 1) as usize];
    }

    let solved = clauses.iter().all(|c| clause_satisfied(c, &a));
    NaiveOutcome { solved, steps: max_steps }
}
