use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use valign::config::{load_config, ConfigError, RawConfig};
use valign::run::{run, RunError};

/// Value alignment experiments on the two-agent iterated prisoner's dilemma.
#[derive(Debug, Parser)]
#[command(name = "valign", version)]
struct Cli {
    /// align | sweep-random | sweep-heterogeneous | equilibria | nash-check
    #[arg(long)]
    mode: Option<String>,
    /// TOML file with experiment settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Evenly spaced cooperation probabilities from 0 to 1.
    #[arg(long, allow_hyphen_values = true)]
    grid_points: Option<i64>,
    /// Transitions per path.
    #[arg(long, allow_hyphen_values = true)]
    length: Option<i64>,
    /// Sampled paths per profile.
    #[arg(long, allow_hyphen_values = true)]
    paths: Option<i64>,
    #[arg(long)]
    seed: Option<u64>,
    /// equality | gain
    #[arg(long)]
    value_alpha: Option<String>,
    /// equality | gain
    #[arg(long)]
    value_beta: Option<String>,
    /// random | heterogeneous
    #[arg(long)]
    space: Option<String>,
    /// Exact enumeration instead of Monte Carlo (path length <= 10).
    #[arg(long)]
    exact: bool,
    /// Fixed slack for equilibrium and Pareto comparisons.
    #[arg(long, allow_hyphen_values = true)]
    tolerance: Option<f64>,
    /// Results file; the manifest goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Alpha's strategy in align mode (random:<p>, tft, mostly_cooperate, mostly_defect).
    #[arg(long)]
    alpha: Option<String>,
    /// Beta's strategy in align mode.
    #[arg(long)]
    beta: Option<String>,
    /// Worker threads; results do not depend on it.
    #[arg(long, allow_hyphen_values = true)]
    workers: Option<i64>,
}

impl Cli {
    fn into_raw(self) -> (Option<PathBuf>, RawConfig) {
        let raw = RawConfig {
            mode: self.mode,
            grid_points: self.grid_points,
            path_length: self.length,
            num_paths: self.paths,
            master_seed: self.seed,
            value_alpha: self.value_alpha,
            value_beta: self.value_beta,
            space: self.space,
            use_exact: self.exact.then_some(true),
            tolerance: self.tolerance,
            alpha_strategy: self.alpha,
            beta_strategy: self.beta,
            workers: self.workers,
            output_path: self.out,
            ..Default::default()
        };
        (self.config, raw)
    }
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_IO: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let (file, flags) = cli.into_raw();
    let cfg = match load_config(file.as_deref(), flags) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(match e {
                ConfigError::Io { .. } => EXIT_IO,
                _ => EXIT_VALIDATION,
            });
        }
    };
    match run(&cfg) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            println!("results: {}", outcome.results_path.display());
            println!("manifest: {} ({})", outcome.manifest_path.display(), outcome.manifest_hash);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                RunError::Io { .. } => EXIT_IO,
                _ => EXIT_VALIDATION,
            })
        }
    }
}
