use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crt_subaging::cli_harness::{run_experiment, ExperimentConfig, Status};
use crt_subaging::Error;

/// Run a Monte Carlo experiment and write `<experiment>.csv` and
/// `summary.json`. Exit status: 0 pass, 1 threshold failure, 2 bad config.
#[derive(Parser, Debug)]
#[command(name = "crt-subaging", version)]
struct Cli {
    /// Flat `key = value` file; flags below override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// urn-check | onedim | subaging | paircorr | tail | oracle-fuzz | spr-explore
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    t: Option<String>,
    /// Comma-separated, increasing.
    #[arg(long)]
    s_grid: Option<String>,
    /// Comma-separated, increasing, nonnegative.
    #[arg(long)]
    delta_grid: Option<String>,
    #[arg(long)]
    replicas: Option<String>,
    #[arg(long)]
    leaves: Option<String>,
    /// Mark intensity for the tail experiment.
    #[arg(long)]
    r: Option<String>,
    /// Rank window `lo,hi` for the tail experiment.
    #[arg(long)]
    window: Option<String>,
    /// tree | line-breaking
    #[arg(long)]
    sampler: Option<String>,
    #[arg(long)]
    master_seed: Option<String>,
    #[arg(long)]
    output_dir: Option<String>,
    /// Worker threads (default: $CRT_SUBAGING_THREADS, else all cores).
    #[arg(long)]
    threads: Option<String>,
}

impl Cli {
    fn overrides(&self) -> Vec<(&'static str, &String)> {
        let fields = [
            ("experiment", &self.experiment),
            ("n", &self.n),
            ("t", &self.t),
            ("s_grid", &self.s_grid),
            ("delta_grid", &self.delta_grid),
            ("replicas", &self.replicas),
            ("leaves", &self.leaves),
            ("r", &self.r),
            ("window", &self.window),
            ("sampler", &self.sampler),
            ("master_seed", &self.master_seed),
            ("output_dir", &self.output_dir),
            ("threads", &self.threads),
        ];
        fields.into_iter().filter_map(|(k, v)| v.as_ref().map(|v| (k, v))).collect()
    }
}

fn build_config(cli: &Cli) -> crt_subaging::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    for (key, value) in cli.overrides() {
        cfg.set(key, value)?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli).and_then(|c| c.validate().map(|_| c)) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run_experiment(&cfg) {
        Ok(report) => {
            for check in &report.checks {
                let tag = match check.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Skipped => "SKIP",
                };
                println!("{tag} {}: {:.6} (band {})", check.name, check.statistic, check.band());
            }
            for out in &report.outputs {
                println!("wrote {} ({} rows)", out.path.display(), out.rows);
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = if matches!(e, Error::Config(_) | Error::InvalidArgument(_)) { 2 } else { 1 };
            ExitCode::from(code)
        }
    }
}
