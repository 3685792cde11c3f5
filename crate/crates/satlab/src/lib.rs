//! Labeled random 3-SAT dataset generation and computation-trace classification.
//!
//! The crate has two halves that meet in the experiment harness:
//!
//! * **Generation** ([`cnf`], [`genlab`]): sample arbitrarily large 3-CNF
//!   formulas that are correctly labeled *without* calling a complete solver.
//!   Unsatisfiable instances are uniform random formulas at clause densities
//!   where an explicit probability bound makes mislabeling astronomically
//!   unlikely; satisfiable instances hide a planted assignment behind a
//!   rejection sampler whose hardness is tuned by a single scalar `q`.
//! * **Classification** ([`walksat`], [`features`], [`learn`]): run a short
//!   WalkSAT prefix on each formula, condense the per-step trace into a fixed
//!   named feature vector (summary statistics plus a bank of time-series
//!   features, with derivative channels), and classify with a small
//!   depth-limited decision tree.
//!
//! The [`harness`] module orchestrates the two dataset-level experiments and
//! the [`seeding`] module keeps every stage reproducible from one master seed.

pub mod cnf;
pub mod features;
pub mod genlab;
pub mod harness;
pub mod learn;
pub mod seeding;
pub mod walksat;

/// Version stamp recorded in manifests, schema files, and persisted models.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    /// Malformed textual input (DIMACS, CSV payloads, config files).
    #[error("parse error: {0}")]
    Parse(String),
    /// Structurally valid input that violates a documented precondition.
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// A parse error with the given message.
    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    /// An invalid-input error with the given message.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
