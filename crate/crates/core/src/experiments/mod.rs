//! Studies built from the solver, simulator and fluid evaluator, with CSV
//! output and a JSON sidecar describing the run.

pub mod compare_pd;
pub mod efficiency;
pub mod pareto;
pub mod regret;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};

pub use compare_pd::{compare_pd, CompareRow};
pub use efficiency::{estimator_efficiency, EfficiencyRow, QualityFamily};
pub use pareto::{pareto_sweep, remnant_baseline, FrontierPoint, SMALLEST_GAMMA};
pub use regret::{regret_constant, regret_experiment, RegretRow};

use crate::error::Result;

/// What was run, recorded next to the results.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gammas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub horizons: Vec<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sizes: Vec<usize>,
    pub reps: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra: Option<serde_json::Value>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    spec: &'a ExperimentSpec,
    version: String,
    rows: usize,
}

/// `git describe` of the working tree when available, else the crate
/// version.
pub fn version_string() -> String {
    Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| format!("{} ({})", env!("CARGO_PKG_VERSION"), s.trim()))
        .unwrap_or_else(|| env!("CARGO_PKG_VERSION").to_string())
}

/// Path of the sidecar for a result file: `out.csv` -> `out.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

/// Writes rows as CSV and the spec as a JSON sidecar.
pub fn write_results<T: Serialize>(out: &Path, spec: &ExperimentSpec, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(out)?));
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    let sidecar = Sidecar { spec, version: version_string(), rows: rows.len() };
    crate::config::write_json(&sidecar, BufWriter::new(File::create(sidecar_path(out))?))
}
