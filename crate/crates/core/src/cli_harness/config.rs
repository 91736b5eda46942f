//! Experiment configuration: flat `key = value` files, overridden key by key
//! from the command line.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frag_coag_chain::observation_index;

/// Environment variable supplying the default worker count.
pub const THREADS_ENV: &str = "CRT_SUBAGING_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    UrnCheck,
    Onedim,
    Subaging,
    Paircorr,
    Tail,
    OracleFuzz,
    SprExplore,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::UrnCheck,
        Experiment::Onedim,
        Experiment::Subaging,
        Experiment::Paircorr,
        Experiment::Tail,
        Experiment::OracleFuzz,
        Experiment::SprExplore,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::UrnCheck => "urn-check",
            Experiment::Onedim => "onedim",
            Experiment::Subaging => "subaging",
            Experiment::Paircorr => "paircorr",
            Experiment::Tail => "tail",
            Experiment::OracleFuzz => "oracle-fuzz",
            Experiment::SprExplore => "spr-explore",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

/// How the tail experiment draws block sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailSampler {
    /// Explicit reduced tree, marks and partition.
    Tree,
    /// Line-breaking construction, same law, cheap at large leaf counts.
    LineBreaking,
}

impl FromStr for TailSampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tree" => Ok(Self::Tree),
            "line-breaking" => Ok(Self::LineBreaking),
            _ => Err(Error::Config(format!("unknown tail sampler `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub t: f64,
    pub s_grid: Vec<f64>,
    pub delta_grid: Vec<f64>,
    pub replicas: usize,
    pub leaves: usize,
    /// Fixed mark intensity for the tail experiment.
    pub r: f64,
    /// Inclusive rank window for the tail experiment.
    pub window: (usize, usize),
    pub sampler: TailSampler,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::UrnCheck,
            n: 1000,
            t: 1.0,
            s_grid: vec![0.0],
            delta_grid: vec![0.0, 1.0, 2.0],
            replicas: 100,
            leaves: 256,
            r: 1.0,
            window: (100, 300),
            sampler: TailSampler::Tree,
            master_seed: 0,
            output_dir: PathBuf::from("."),
            threads: default_threads(),
        }
    }
}

fn default_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse `{value}` for `{key}`")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

impl ExperimentConfig {
    /// Keys accepted by [`ExperimentConfig::set`]; dashes and underscores
    /// are interchangeable.
    pub const KEYS: [&'static str; 13] = [
        "experiment",
        "n",
        "t",
        "s_grid",
        "delta_grid",
        "replicas",
        "leaves",
        "r",
        "window",
        "sampler",
        "master_seed",
        "output_dir",
        "threads",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        match key.as_str() {
            "experiment" => self.experiment = value.trim().parse()?,
            "n" => self.n = parse(&key, value)?,
            "t" => self.t = parse(&key, value)?,
            "s_grid" => self.s_grid = parse_list(&key, value)?,
            "delta_grid" => self.delta_grid = parse_list(&key, value)?,
            "replicas" => self.replicas = parse(&key, value)?,
            "leaves" => self.leaves = parse(&key, value)?,
            "r" => self.r = parse(&key, value)?,
            "window" => {
                let ends: Vec<usize> = value
                    .split(',')
                    .map(|s| parse(&key, s))
                    .collect::<Result<_>>()?;
                let [lo, hi] = ends[..] else {
                    return Err(Error::Config(format!("window needs `lo,hi`, got `{value}`")));
                };
                self.window = (lo, hi);
            }
            "sampler" => self.sampler = value.trim().parse()?,
            "master_seed" => self.master_seed = parse(&key, value)?,
            "output_dir" => self.output_dir = PathBuf::from(value.trim()),
            "threads" => self.threads = parse(&key, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text`. Blank lines and `#`
    /// comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    /// Observation steps for `s_grid`, in grid order.
    pub fn observation_steps(&self) -> Result<Vec<u64>> {
        self.s_grid.iter().map(|&s| observation_index(self.n, self.t, s)).collect()
    }

    /// Checks everything that can be checked before simulating.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n < 2 {
            return fail(format!("n must be at least 2, got {}", self.n));
        }
        if !(self.t.is_finite() && self.t > 0.0) {
            return fail(format!("t must be positive, got {}", self.t));
        }
        if self.replicas == 0 {
            return fail("replicas must be at least 1".into());
        }
        if self.threads == 0 {
            return fail("threads must be at least 1".into());
        }
        if self.s_grid.is_empty() || self.s_grid.iter().any(|s| !s.is_finite()) {
            return fail("s_grid needs finite values".into());
        }
        if self.s_grid.windows(2).any(|w| w[0] >= w[1]) {
            return fail("s_grid must be strictly increasing".into());
        }
        if let Err(e) = self.observation_steps() {
            return fail(format!("s_grid inadmissible for n={} t={}: {e}", self.n, self.t));
        }
        if self.delta_grid.is_empty() || self.delta_grid.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return fail("delta_grid needs nonnegative values".into());
        }
        if self.delta_grid.windows(2).any(|w| w[0] >= w[1]) {
            return fail("delta_grid must be strictly increasing".into());
        }
        if self.leaves < 2 {
            return fail(format!("leaves must be at least 2, got {}", self.leaves));
        }
        if !(self.r.is_finite() && self.r > 0.0) {
            return fail(format!("r must be positive, got {}", self.r));
        }
        let (lo, hi) = self.window;
        if lo == 0 || lo > hi {
            return fail(format!("window {lo},{hi} must satisfy 1 <= lo <= hi"));
        }
        if self.experiment == Experiment::Tail && hi > self.leaves {
            return fail(format!("window end {hi} exceeds leaves {}", self.leaves));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_files() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(
            "# comment\nexperiment = subaging\nn=4000\n  s-grid = 0, 1,2  # trailing\n\nmaster_seed = 42\nwindow = 5,9\n",
        )
        .unwrap();
        assert_eq!(cfg.experiment, Experiment::Subaging);
        assert_eq!(cfg.n, 4000);
        assert_eq!(cfg.s_grid, vec![0.0, 1.0, 2.0]);
        assert_eq!(cfg.master_seed, 42);
        assert_eq!(cfg.window, (5, 9));
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        let mut cfg = ExperimentConfig::default();
        assert!(matches!(cfg.set("bogus", "1"), Err(Error::Config(_))));
        assert!(matches!(cfg.set("n", "many"), Err(Error::Config(_))));
        assert!(matches!(cfg.set("experiment", "nope"), Err(Error::Config(_))));
        assert!(cfg.apply_text("n 4").is_err());
        assert!(cfg.set("window", "1,2,3").is_err());
    }

    #[test]
    fn inadmissible_grid_rejected() {
        let mut cfg = ExperimentConfig { n: 100, ..Default::default() };
        cfg.s_grid = vec![-20.0, 0.0];
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        cfg.s_grid = vec![1.0, 0.0];
        assert!(cfg.validate().is_err());
        cfg.s_grid = vec![-5.0, 0.0];
        cfg.validate().unwrap();
        assert_eq!(cfg.observation_steps().unwrap(), vec![50, 100]);
    }

    #[test]
    fn every_key_is_settable() {
        let values = [
            "tail", "50", "0.5", "0,1", "0,2", "7", "64", "2", "3,4", "line-breaking", "9", "/tmp/x", "3",
        ];
        let mut cfg = ExperimentConfig::default();
        for (k, v) in ExperimentConfig::KEYS.iter().zip(values) {
            cfg.set(k, v).unwrap();
        }
        assert_eq!(cfg.sampler, TailSampler::LineBreaking);
        assert_eq!(cfg.threads, 3);
        cfg.validate().unwrap();
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
            assert_eq!(serde_json::to_string(&e).unwrap(), format!("\"{}\"", e.name()));
        }
    }
}
