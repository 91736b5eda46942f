//! Reproducible experiment runner.
//!
//! Replica `j` of an experiment always draws from [`derive_stream`] at
//! `(master_seed, j)` (plus a lane offset when a replica needs a second,
//! independent stream), so results do not depend on the number of worker
//! threads. Workers only produce per-replica records; tables and statistics
//! are assembled afterwards in replica order.

mod config;
mod experiments;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use config::{Experiment, ExperimentConfig, TailSampler, THREADS_ENV};

use crate::error::{Error, Result};

/// The generator behind every replica stream.
pub type Stream = ChaCha8Rng;

/// Statistical checks are skipped below this many replicas (except in
/// oracle-fuzz); smaller runs only produce data.
pub const MIN_REPLICAS_FOR_CHECKS: usize = 100;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// ChaCha8 keyed by a splitmix64 avalanche of `(master_seed, replica_index)`.
pub fn derive_stream(master_seed: u64, replica_index: u64) -> Stream {
    let mut state = splitmix64(master_seed) ^ splitmix64(replica_index ^ 0x6a09_e667_f3bc_c908);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Outcome of one statistical check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// A statistic compared against `lower < stat <= upper` (either side
/// optional; `lower` is inclusive unless `strict_lower`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub statistic: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub strict_lower: bool,
    pub status: Status,
}

impl Check {
    fn build(name: &str, statistic: f64, lower: Option<f64>, upper: Option<f64>, strict_lower: bool) -> Self {
        let above = match lower {
            Some(l) if strict_lower => statistic > l,
            Some(l) => statistic >= l,
            None => true,
        };
        let below = upper.is_none_or(|u| statistic <= u);
        let ok = statistic.is_finite() && above && below;
        Self {
            name: name.to_string(),
            statistic,
            lower,
            upper,
            strict_lower,
            status: if ok { Status::Pass } else { Status::Fail },
        }
    }

    pub fn at_most(name: &str, statistic: f64, upper: f64) -> Self {
        Self::build(name, statistic, None, Some(upper), false)
    }

    pub fn within(name: &str, statistic: f64, lower: f64, upper: f64) -> Self {
        Self::build(name, statistic, Some(lower), Some(upper), false)
    }

    pub fn exceeds(name: &str, statistic: f64, lower: f64) -> Self {
        Self::build(name, statistic, Some(lower), None, true)
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    /// `lo <= x <= hi` style description of the acceptance band.
    pub fn band(&self) -> String {
        match (self.lower, self.upper) {
            (Some(l), Some(u)) => format!("[{l}, {u}]"),
            (Some(l), None) if self.strict_lower => format!("> {l}"),
            (Some(l), None) => format!(">= {l}"),
            (None, Some(u)) => format!("<= {u}"),
            (None, None) => "any".to_string(),
        }
    }
}

/// An in-memory CSV table. Floats are written with 17 significant digits so
/// a replay can be compared byte for byte.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    header: Vec<&'static str>,
    body: String,
    rows: usize,
}

/// One CSV field.
pub enum Cell {
    Int(i64),
    Float(f64),
    Missing,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Float)
    }
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), body: String::new(), rows: 0 }
    }

    pub fn push(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.header.len(), "row width does not match header");
        for (j, cell) in cells.into_iter().enumerate() {
            if j > 0 {
                self.body.push(',');
            }
            match cell {
                Cell::Int(v) => write!(self.body, "{v}").expect("write to string"),
                Cell::Float(v) => self.body.push_str(&format_float(v)),
                Cell::Missing => {}
            }
        }
        self.body.push('\n');
        self.rows += 1;
    }

    pub fn header(&self) -> String {
        self.header.join(",")
    }

    pub fn row_count(&self) -> usize {
        self.rows
    }

    pub fn render(&self) -> String {
        format!("{}\n{}", self.header(), self.body)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub path: PathBuf,
    pub columns: String,
    pub rows: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub experiment: Experiment,
    pub version: &'static str,
    pub config: ExperimentConfig,
    pub outputs: Vec<OutputFile>,
    pub aggregates: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub passed: bool,
    /// Wall-clock seconds; the only field that varies between reruns.
    pub elapsed_seconds: f64,
    #[serde(skip)]
    pub tables: Vec<(String, Table)>,
}

impl ExperimentReport {
    /// The main table, `<experiment>.csv`.
    pub fn csv(&self) -> String {
        self.tables[0].1.render()
    }

    /// The `summary.json` document.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

/// Raw result of an experiment before it is written out.
pub(crate) struct Outcome {
    /// Main table first; extra tables are written as
    /// `<experiment>_<suffix>.csv`.
    pub tables: Vec<(&'static str, Table)>,
    pub aggregates: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Runs the configured experiment without touching the filesystem.
pub fn simulate(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} worker threads: {e}", config.threads)))?;
    let outcome = pool.install(|| experiments::run(config))?;
    // oracle-fuzz sizes its kernel sample independently of `replicas`.
    let gate = config.experiment == Experiment::OracleFuzz || config.replicas >= MIN_REPLICAS_FOR_CHECKS;
    let checks: Vec<Check> = outcome
        .checks
        .into_iter()
        .map(|mut c| {
            if !gate {
                c.status = Status::Skipped;
            }
            c
        })
        .collect();
    let passed = checks.iter().all(Check::passed);
    let name = config.experiment.name();
    let mut tables = Vec::new();
    let mut outputs = Vec::new();
    for (suffix, table) in outcome.tables {
        let file = if suffix.is_empty() { format!("{name}.csv") } else { format!("{name}_{suffix}.csv") };
        outputs.push(OutputFile {
            path: config.output_dir.join(&file),
            columns: table.header(),
            rows: table.row_count(),
        });
        tables.push((file, table));
    }
    Ok(ExperimentReport {
        experiment: config.experiment,
        version: VERSION,
        config: config.clone(),
        outputs,
        aggregates: outcome.aggregates,
        checks,
        passed,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        tables,
    })
}

/// Runs the experiment and writes its CSV tables and `summary.json` into
/// `output_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.clone(), source })?;
    let report = simulate(config)?;
    for (file, table) in &report.tables {
        write_file(&dir.join(file), &table.render())?;
    }
    write_file(&dir.join("summary.json"), &report.to_json())?;
    Ok(report)
}
