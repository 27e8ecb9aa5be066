//! Reproducible experiment runners.
//!
//! Each registry entry computes a set of [`Table`]s and named [`Check`]s.
//! [`run`] writes the tables as CSV files with a single `#`-prefixed JSON
//! header line and a `manifest.json` carrying checksums, check outcomes and
//! the wall time. Tables never contain timings, so re-running with the same
//! configuration reproduces them byte for byte.

pub mod blaschke;
pub mod consistency;
pub mod cusp;
pub mod lens;
pub mod polydisk;
pub mod shapiro;
pub mod spiral;
pub mod tensor;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Result};

pub use consistency::{bound_consistency, BoundConsistency};

/// Registry of experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    CuspDiagonal,
    LensTrichotomy,
    TensorLemma,
    SpiralHarmonic,
    BlaschkePassage,
    PolydiskPairs,
    ShapiroTaylor,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 7] = [
        ExperimentId::CuspDiagonal,
        ExperimentId::LensTrichotomy,
        ExperimentId::TensorLemma,
        ExperimentId::SpiralHarmonic,
        ExperimentId::BlaschkePassage,
        ExperimentId::PolydiskPairs,
        ExperimentId::ShapiroTaylor,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentId::CuspDiagonal => "cusp-diagonal",
            ExperimentId::LensTrichotomy => "lens-trichotomy",
            ExperimentId::TensorLemma => "tensor-lemma",
            ExperimentId::SpiralHarmonic => "spiral-harmonic",
            ExperimentId::BlaschkePassage => "blaschke-passage",
            ExperimentId::PolydiskPairs => "polydisk-pairs",
            ExperimentId::ShapiroTaylor => "shapiro-taylor",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|id| id.as_str() == s).ok_or_else(|| invalid(format!("unknown experiment '{s}'")))
    }
}

/// Run configuration. Unset knobs take per-experiment defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub out: PathBuf,
    pub seed: u64,
    /// Section size `K`.
    pub k: Option<usize>,
    /// Polydisk dimension `N`.
    pub n_dim: Option<usize>,
    /// Monte Carlo trajectories or boundary samples.
    pub samples: Option<usize>,
    pub theta: Option<f64>,
    /// Sub-item selector (polydisk-pairs).
    pub item: Option<u32>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId, out: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            experiment,
            out: out.into(),
            seed: 2024,
            k: None,
            n_dim: None,
            samples: None,
            theta: None,
            item: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(k) = self.k {
            if !(8..=crate::series::MAX_ORDER).contains(&k) {
                return Err(invalid(format!("K must lie in 8..={}", crate::series::MAX_ORDER)));
            }
        }
        if let Some(n) = self.n_dim {
            if !(1..=8).contains(&n) {
                return Err(invalid("N must lie in 1..=8"));
            }
        }
        if let Some(s) = self.samples {
            if s < 16 {
                return Err(invalid("samples must be at least 16"));
            }
        }
        if let Some(t) = self.theta {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid("theta must be positive"));
            }
        }
        Ok(())
    }
}

/// One CSV cell, formatted once so that output bytes are fixed.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell(String);

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell(format!("{v:e}"))
    }
}

macro_rules! int_cell {
    ($($t:ty),*) => {$(
        impl From<$t> for Cell {
            fn from(v: $t) -> Self {
                Cell(v.to_string())
            }
        }
    )*};
}
int_cell!(usize, u64, u32, i32, i64, bool);

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell(v)
    }
}

/// Builds a row from heterogeneous values.
#[macro_export]
macro_rules! row {
    ($($v:expr),* $(,)?) => {
        vec![$($crate::experiments::Cell::from($v)),*]
    };
}

/// A named output table.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    /// Column values of `col` parsed as `f64`.
    pub fn column(&self, col: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == col)?;
        self.rows.iter().map(|r| r[i].0.parse().ok()).collect()
    }

    pub fn to_csv(&self, experiment: ExperimentId, seed: u64) -> String {
        let header = serde_json::json!({
            "experiment": experiment.as_str(),
            "seed": seed,
            "table": self.name,
            "columns": self.columns,
            "version": env!("CARGO_PKG_VERSION"),
        });
        let mut s = format!("# {header}\n{}\n", self.columns.join(","));
        for r in &self.rows {
            let cells: Vec<&str> = r.iter().map(|c| c.0.as_str()).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Named in-experiment assertion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

/// Tables and checks of one run, before anything is written.
#[derive(Clone, Debug, Default)]
pub struct ExperimentOutput {
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
}

impl ExperimentOutput {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub name: String,
    pub file: String,
    pub rows: usize,
    pub sha256: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Tables are being written; files present are not valid.
    Incomplete,
    Complete,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: ExperimentId,
    pub config: ExperimentConfig,
    pub version: String,
    pub status: RunStatus,
    pub wall_time_s: f64,
    pub tables: Vec<TableEntry>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Computes the experiment without touching the file system.
pub fn compute(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    match config.experiment {
        ExperimentId::CuspDiagonal => cusp::run(config),
        ExperimentId::LensTrichotomy => lens::run(config),
        ExperimentId::TensorLemma => tensor::run(config),
        ExperimentId::SpiralHarmonic => spiral::run(config),
        ExperimentId::BlaschkePassage => blaschke::run(config),
        ExperimentId::PolydiskPairs => polydisk::run(config),
        ExperimentId::ShapiroTaylor => shapiro::run(config),
    }
}

/// Runs an experiment and writes `<out>/<id>.<table>.csv` plus the manifest.
/// The manifest is first written with status `incomplete`, so an
/// interrupted run never leaves tables that look valid.
pub fn run(config: &ExperimentConfig) -> Result<(RunManifest, ExperimentOutput)> {
    let start = Instant::now();
    let output = compute(config)?;
    fs::create_dir_all(&config.out)?;
    let mut manifest = RunManifest {
        experiment: config.experiment,
        config: config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        status: RunStatus::Incomplete,
        wall_time_s: 0.0,
        tables: Vec::new(),
        checks: output.checks.clone(),
        passed: output.passed(),
    };
    write_manifest(&config.out, &manifest)?;
    for t in &output.tables {
        let file = format!("{}.{}.csv", config.experiment, t.name);
        let bytes = t.to_csv(config.experiment, config.seed).into_bytes();
        fs::write(config.out.join(&file), &bytes)?;
        let digest = Sha256::digest(&bytes);
        let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        manifest.tables.push(TableEntry { name: t.name.clone(), file, rows: t.rows.len(), sha256 });
    }
    manifest.status = RunStatus::Complete;
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    write_manifest(&config.out, &manifest)?;
    Ok((manifest, output))
}

fn write_manifest(dir: &Path, m: &RunManifest) -> Result<()> {
    let name = format!("{}.{MANIFEST_FILE}", m.experiment);
    fs::write(dir.join(name), serde_json::to_string_pretty(m)? + "\n")?;
    Ok(())
}

/// Least-squares slope of `ys` against `xs`, NaN when degenerate.
pub(crate) fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    crate::special::line_fit(xs, ys).map(|f| f.slope).unwrap_or(f64::NAN)
}
