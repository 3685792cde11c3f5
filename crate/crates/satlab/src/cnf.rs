//! Core 3-CNF representation: literals, clauses, formulas, assignments,
//! DIMACS interchange, and a brute-force satisfiability oracle for tiny
//! instances.
//!
//! Variables are 1-indexed to match DIMACS. A clause always holds exactly
//! three literals over pairwise distinct variables and is kept in canonical
//! form (literals sorted by variable index), so clause equality and
//! serialization are stable. Formulas are ordered multisets of clauses:
//! duplicates are allowed because the samplers draw clauses with replacement.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest variable count accepted by [`brute_force_sat`].
pub const BRUTE_FORCE_MAX_VARS: u32 = 26;

/// A literal: a 1-indexed variable with a polarity, stored DIMACS-style as a
/// nonzero `i32` (positive = the variable itself, negative = its negation).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Lit(i32);

impl Lit {
    /// Builds a literal over `var` (must be ≥ 1).
    pub fn new(var: u32, positive: bool) -> Lit {
        assert!(var >= 1 && var <= i32::MAX as u32, "variable index out of range: {var}");
        let v = var as i32;
        Lit(if positive { v } else { -v })
    }

    /// Parses a literal from its DIMACS integer encoding.
    pub fn from_dimacs(code: i32) -> Result<Lit> {
        if code == 0 {
            return Err(Error::parse("literal code 0 is the clause terminator"));
        }
        Ok(Lit(code))
    }

    /// DIMACS integer encoding.
    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    /// The 1-indexed variable.
    pub fn var(self) -> u32 {
        self.0.unsigned_abs()
    }

    /// Whether the literal is the positive occurrence of its variable.
    pub fn positive(self) -> bool {
        self.0 > 0
    }

    /// True iff the literal evaluates to true under `a`.
    pub fn satisfied_by(self, a: &Assignment) -> bool {
        a.get(self.var()) == self.positive()
    }

    /// The same variable with the opposite polarity.
    pub fn negated(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A 3-clause: exactly three literals over pairwise distinct variables,
/// stored sorted by variable index.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Clause([Lit; 3]);

impl Clause {
    /// Builds a clause, sorting the literals into canonical order.
    ///
    /// Fails if two literals share a variable (a 3-clause ranges over three
    /// distinct variables).
    pub fn new(lits: [Lit; 3]) -> Result<Clause> {
        let mut lits = lits;
        lits.sort_unstable_by_key(|l| l.var());
        if lits[0].var() == lits[1].var() || lits[1].var() == lits[2].var() {
            return Err(Error::parse(format!(
                "repeated variable in clause ({} {} {})",
                lits[0].to_dimacs(),
                lits[1].to_dimacs(),
                lits[2].to_dimacs()
            )));
        }
        Ok(Clause(lits))
    }

    /// The literals in canonical (variable-sorted) order.
    pub fn lits(&self) -> &[Lit; 3] {
        &self.0
    }

    /// The largest variable index mentioned by the clause.
    pub fn max_var(&self) -> u32 {
        self.0[2].var()
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {} {})", self.0[0].to_dimacs(), self.0[1].to_dimacs(), self.0[2].to_dimacs())
    }
}

/// A 3-CNF formula: `n` variables and an ordered multiset of clauses.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Formula {
    n: u32,
    clauses: Vec<Clause>,
}

impl Formula {
    /// Builds a formula after checking every clause fits within `n` variables.
    pub fn new(n: u32, clauses: Vec<Clause>) -> Result<Formula> {
        if n == 0 {
            return Err(Error::invalid("formula needs at least one variable"));
        }
        for c in &clauses {
            if c.max_var() > n {
                return Err(Error::parse(format!(
                    "variable index out of range: clause {c:?} exceeds n = {n}"
                )));
            }
        }
        Ok(Formula { n, clauses })
    }

    /// Number of variables.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of clauses.
    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    /// The clauses in order.
    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }
}

/// A full truth assignment: one boolean per variable, indexed 1..=n.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(values: Vec<bool>) -> Assignment {
        Assignment(values)
    }

    /// A uniformly random assignment over `n` variables.
    pub fn random(n: u32, rng: &mut impl Rng) -> Assignment {
        Assignment((0..n).map(|_| rng.gen_bool(0.5)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Value of the 1-indexed variable `var`.
    pub fn get(&self, var: u32) -> bool {
        self.0[(var - 1) as usize]
    }

    pub fn set(&mut self, var: u32, value: bool) {
        self.0[(var - 1) as usize] = value;
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }

    /// Encodes as a `0`/`1` string, variable 1 first.
    pub fn to_bit_string(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// Decodes a `0`/`1` string produced by [`Assignment::to_bit_string`].
    pub fn from_bit_string(s: &str) -> Result<Assignment> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::parse(format!("invalid assignment bit {other:?}"))),
            })
            .collect::<Result<Vec<bool>>>()
            .map(Assignment)
    }

    /// Re-indexes the assignment under a variable renaming: `var_perm[v-1]` is
    /// the new name of old variable `v`. The returned assignment gives the
    /// renamed variables the same values.
    pub fn permuted(&self, var_perm: &[u32]) -> Assignment {
        assert_eq!(var_perm.len(), self.0.len(), "permutation length mismatch");
        let mut out = vec![false; self.0.len()];
        for (old_idx, &new_var) in var_perm.iter().enumerate() {
            out[(new_var - 1) as usize] = self.0[old_idx];
        }
        Assignment(out)
    }
}

/// Number of literals of `c` that are true under `a` (0..=3).
pub fn satisfied_literal_count(c: &Clause, a: &Assignment) -> u32 {
    c.lits().iter().filter(|l| l.satisfied_by(a)).count() as u32
}

/// Number of clauses of `f` with no true literal under `a`.
pub fn count_unsat(f: &Formula, a: &Assignment) -> usize {
    f.clauses().iter().filter(|c| satisfied_literal_count(c, a) == 0).count()
}

/// Hamming distance between two assignments of equal length.
pub fn hamming(a: &Assignment, b: &Assignment) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "assignment length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.values().iter().zip(b.values()).filter(|(x, y)| x != y).count())
}

/// Exhaustive satisfiability check for formulas with at most
/// [`BRUTE_FORCE_MAX_VARS`] variables.
///
/// Returns the lexicographically first satisfying assignment (variable 1 is
/// the lowest bit, false before true), or `None` if every assignment falsifies
/// some clause.
pub fn brute_force_sat(f: &Formula) -> Result<Option<Assignment>> {
    let n = f.n();
    if n > BRUTE_FORCE_MAX_VARS {
        return Err(Error::invalid(format!(
            "brute force capped at {BRUTE_FORCE_MAX_VARS} variables, got {n}"
        )));
    }
    for bits in 0u64..(1u64 << n) {
        let a = Assignment((0..n).map(|v| bits >> v & 1 == 1).collect());
        if count_unsat(f, &a) == 0 {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

/// Parses DIMACS CNF text into a [`Formula`].
///
/// Comment lines (`c ...`) are tolerated anywhere; the `p cnf <n> <m>` header
/// must precede the clauses; clauses are whitespace-separated literal codes
/// terminated by `0` and may span lines. Every clause must contain exactly 3
/// literals over distinct in-range variables, and the clause count must match
/// the header. Clause order is preserved.
pub fn parse_dimacs(text: &str) -> Result<Formula> {
    let mut header: Option<(u32, usize)> = None;
    let mut tokens: Vec<i32> = Vec::new();

    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('p') {
            if header.is_some() {
                return Err(Error::parse("malformed header: multiple p-lines"));
            }
            let fields: Vec<&str> = rest.split_whitespace().collect();
            if fields.len() != 3 || fields[0] != "cnf" {
                return Err(Error::parse(format!("malformed header: p{rest}")));
            }
            let n: u32 = fields[1]
                .parse()
                .map_err(|_| Error::parse(format!("malformed header: bad n {:?}", fields[1])))?;
            let m: usize = fields[2]
                .parse()
                .map_err(|_| Error::parse(format!("malformed header: bad m {:?}", fields[2])))?;
            header = Some((n, m));
            continue;
        }
        if header.is_none() {
            return Err(Error::parse("malformed header: clause data before p-line"));
        }
        for tok in line.split_whitespace() {
            let code: i32 =
                tok.parse().map_err(|_| Error::parse(format!("invalid literal token {tok:?}")))?;
            tokens.push(code);
        }
    }

    let (n, m) = header.ok_or_else(|| Error::parse("malformed header: missing p-line"))?;
    let mut clauses = Vec::with_capacity(m);
    let mut current: Vec<Lit> = Vec::with_capacity(3);
    for code in tokens {
        if code == 0 {
            if current.len() != 3 {
                return Err(Error::parse(format!(
                    "clause arity must be 3, got {} literals",
                    current.len()
                )));
            }
            let lits = [current[0], current[1], current[2]];
            current.clear();
            let clause = Clause::new(lits)?;
            if clause.max_var() > n {
                return Err(Error::parse(format!(
                    "variable index out of range: clause {clause:?} exceeds n = {n}"
                )));
            }
            clauses.push(clause);
        } else {
            current.push(Lit::from_dimacs(code)?);
            if current.len() > 3 {
                return Err(Error::parse("clause arity must be 3, got more literals"));
            }
        }
    }
    if !current.is_empty() {
        return Err(Error::parse("unterminated clause at end of input"));
    }
    if clauses.len() != m {
        return Err(Error::parse(format!(
            "clause count mismatch: header says {m}, found {}",
            clauses.len()
        )));
    }
    Formula::new(n, clauses)
}

/// Serializes a formula as DIMACS CNF (no comments, canonical literal order,
/// one clause per line, trailing newline). Output is deterministic.
pub fn write_dimacs(f: &Formula) -> String {
    let mut out = String::with_capacity(16 + f.m() * 16);
    out.push_str(&format!("p cnf {} {}\n", f.n(), f.m()));
    for c in f.clauses() {
        let l = c.lits();
        out.push_str(&format!(
            "{} {} {} 0\n",
            l[0].to_dimacs(),
            l[1].to_dimacs(),
            l[2].to_dimacs()
        ));
    }
    out
}
