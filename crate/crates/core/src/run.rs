//! Experiment orchestration: evaluates a validated config and writes the
//! results file plus its manifest (`<results>.manifest.json`).

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::alignment::{
    profile_alignment, sweep_heterogeneous, sweep_random_grid, AlignmentError, SweepParams,
    ValueModel,
};
use crate::config::{ExperimentConfig, Mode};
use crate::equilibria::{
    classical_nash_check, find_alignment_equilibria, stage_pareto_optimal, EquilibriumError,
    SpaceKind, StrategySpace, Tolerance, ValueAssignment,
};
use crate::ipd::AgentId;
use crate::output::{self, Manifest, SweepBlock};
use crate::strategies::{StrategyError, StrategyProfile, StrategySpec};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Alignment(#[from] AlignmentError),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Paths written by a successful run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub results_path: PathBuf,
    pub manifest_path: PathBuf,
    pub manifest_hash: String,
    pub summary: String,
}

pub fn manifest_path_for(results: &Path) -> PathBuf {
    let mut s = results.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn sweep_params(cfg: &ExperimentConfig) -> SweepParams {
    if cfg.use_exact {
        SweepParams::exact(cfg.path_length)
    } else {
        SweepParams::monte_carlo(cfg.path_length, cfg.num_paths, cfg.master_seed)
    }
}

pub fn strategy_space(cfg: &ExperimentConfig) -> Result<StrategySpace, EquilibriumError> {
    match cfg.space {
        SpaceKind::RandomGrid => StrategySpace::random_grid(&cfg.grid),
        SpaceKind::Heterogeneous => StrategySpace::heterogeneous(&cfg.alpha_strategies, &cfg.grid),
    }
}

/// Renders the results file contents and a one-line summary.
pub fn render(cfg: &ExperimentConfig, hash: &str) -> Result<(String, String), RunError> {
    let model = ValueModel::new(cfg.payoff_matrix);
    let params = sweep_params(cfg);
    let grid_labels: Vec<String> = cfg.grid.iter().map(|&p| output::fmt_num(p)).collect();
    let views = [
        (AgentId::Alpha, cfg.value_alpha),
        (AgentId::Beta, cfg.value_beta),
    ];

    match cfg.mode {
        Mode::Align => {
            let profile = StrategyProfile::from_specs(cfg.alpha_strategy, cfg.beta_strategy)?;
            let pa = profile_alignment(&model, &profile, &params)?;
            let rows: Vec<_> = views.iter().map(|&(g, v)| (g, v, pa.get(g, v))).collect();
            let summary = rows
                .iter()
                .map(|(g, v, e)| format!("{g}/{v}: {}", output::fmt_num(e.mean)))
                .collect::<Vec<_>>()
                .join(", ");
            let text = output::align_csv(
                hash,
                &cfg.alpha_strategy.to_string(),
                &cfg.beta_strategy.to_string(),
                &rows,
            );
            Ok((text, summary))
        }
        Mode::SweepRandom => {
            let mats = views
                .iter()
                .map(|&(g, v)| sweep_random_grid(&model, &cfg.grid, g, v, &params))
                .collect::<Result<Vec<_>, _>>()?;
            let blocks: Vec<_> = views
                .iter()
                .zip(&mats)
                .map(|(&(agent, value), m)| SweepBlock { agent, value, matrix: m })
                .collect();
            let text = output::sweep_csv(hash, "p_alpha", "p_beta", &grid_labels, &grid_labels, &blocks);
            Ok((text, format!("{}x{} random-action grid", cfg.grid.len(), cfg.grid.len())))
        }
        Mode::SweepHeterogeneous => {
            let mats = views
                .iter()
                .map(|&(g, v)| sweep_heterogeneous(&model, &cfg.alpha_strategies, &cfg.grid, g, v, &params))
                .collect::<Result<Vec<_>, _>>()?;
            let blocks: Vec<_> = views
                .iter()
                .zip(&mats)
                .map(|(&(agent, value), m)| SweepBlock { agent, value, matrix: m })
                .collect();
            let labels: Vec<String> = cfg.alpha_strategies.iter().map(StrategySpec::to_string).collect();
            let text = output::sweep_csv(hash, "alpha_strategy", "p_beta", &labels, &grid_labels, &blocks);
            Ok((text, format!("{} strategies x {} beta probabilities", labels.len(), cfg.grid.len())))
        }
        Mode::Equilibria => {
            let space = strategy_space(cfg)?;
            let assignment = ValueAssignment::new(cfg.value_alpha, cfg.value_beta);
            let report = find_alignment_equilibria(
                &model,
                &space,
                assignment,
                &params,
                cfg.tolerance.map(Tolerance::Fixed),
            )?;
            let summary = report
                .equilibria
                .iter()
                .map(|&id| {
                    let flag = if report.is_pareto_optimal(id) { "pareto" } else { "not pareto" };
                    format!("{} [{flag}]", space.label(id))
                })
                .collect::<Vec<_>>()
                .join(", ");
            Ok((output::report_json(hash, &report)?, format!("equilibria: {summary}")))
        }
        Mode::NashCheck => {
            let nash = classical_nash_check(&cfg.payoff_matrix);
            let pareto = stage_pareto_optimal(&cfg.payoff_matrix);
            let summary = nash.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ");
            Ok((
                output::nash_json(hash, &cfg.payoff_matrix, &nash, &pareto),
                format!("stage-game Nash equilibria: {{{summary}}}"),
            ))
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<(), RunError> {
    let io = |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, contents).map_err(io)
}

/// Runs the experiment on a pool of `cfg.workers` threads (all cores when
/// unset) and writes the results and manifest files.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome, RunError> {
    let manifest = Manifest::new(cfg);
    let hash = manifest.hash();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.workers {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| RunError::ThreadPool(e.to_string()))?;
    let (text, summary) = pool.install(|| render(cfg, &hash))?;

    let manifest_path = manifest_path_for(&cfg.output_path);
    write(&cfg.output_path, &text)?;
    write(&manifest_path, &manifest.to_json())?;
    Ok(RunOutcome {
        results_path: cfg.output_path.clone(),
        manifest_path,
        manifest_hash: hash,
        summary,
    })
}
