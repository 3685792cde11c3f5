//! Experiment orchestration: the classification experiment (accuracy per
//! `(r, q)` cell), the distinguishability experiment (minimal broken-clause
//! count per cell, found by doubling plus binary search), and SVG plotting
//! of both.
//!
//! Every run is reproducible from its config JSON alone: all randomness
//! derives from the config's master seed through named sub-streams, which
//! the emitted `manifest.json` lists. Expensive work is checkpointed — one
//! feature CSV per completed unit — and resuming never recomputes a
//! completed cell.

pub mod config;
pub mod exp1;
pub mod exp2;
pub mod plot;

pub use config::{load_config, Exp1Config, Exp2Config, SlotBalance, SolverConfig};
pub use exp1::{run_exp1, Exp1Cell, Exp1Result};
pub use exp2::{run_exp2, CurvePoint, Exp2Cell, Exp2Outcome, Exp2Result};
pub use plot::{plot, PlotKind};

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::features::LabeledMatrix;
use crate::Result;

/// Manifest format version.
pub const MANIFEST_FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    format_version: u32,
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    master_seed: u64,
    /// Named seed sub-streams the command draws from.
    seed_streams: &'a [&'a str],
    config: &'a C,
}

/// Writes `manifest.json` into `dir`, recording versions, the master seed,
/// the named seed streams, and the full config.
pub(crate) fn write_manifest<C: Serialize>(
    dir: &Path,
    command: &str,
    master_seed: u64,
    seed_streams: &[&str],
    config: &C,
) -> Result<()> {
    let manifest = Manifest {
        format_version: MANIFEST_FORMAT_VERSION,
        tool: "satlab",
        version: env!("CARGO_PKG_VERSION"),
        command,
        master_seed,
        seed_streams,
        config,
    };
    write_json(&dir.join("manifest.json"), &manifest)
}

/// Serializes `value` as pretty JSON (with a trailing newline) to `path`.
pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut payload = serde_json::to_string_pretty(value)?;
    payload.push('\n');
    fs::write(path, payload)?;
    Ok(())
}

/// Writes a feature matrix checkpoint atomically: a partial file never
/// masquerades as a completed cell.
pub(crate) fn persist_csv(matrix: &LabeledMatrix, path: &Path) -> Result<()> {
    let tmp = path.with_extension("csv.partial");
    matrix.write_csv(&tmp)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Control: the feature schema must not smuggle the label. Panics on a
/// schema with any label-derived key, since that is a bug, not user error.
pub(crate) fn assert_no_label_leak(names: &[String]) {
    assert!(
        names.iter().all(|n| !n.to_ascii_lowercase().contains("label")),
        "feature schema contains a label-derived key"
    );
}
