//! Alignment of strategy profiles with respect to values.
//!
//! Alignment is the mean per-transition preference over fixed-length paths.
//! It is estimated by Monte Carlo over sampled paths, or computed exactly by
//! enumerating every joint-action sequence weighted by its probability under
//! the profile. The exact route is the expectation of the Monte Carlo
//! estimator and serves as its oracle.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::ipd::{AgentId, JointAction, PayoffMatrix, State};
use crate::strategies::{
    random_action, sample_path, IpdPath, MemoryOneStrategy, RngSpec, StrategyError,
    StrategyProfile, StrategySpec,
};
use crate::values::{prf_equality, prf_gain, GainScale, ValueId};

pub const DEFAULT_PATH_LENGTH: usize = 10;
pub const DEFAULT_NUM_PATHS: usize = 10_000;
/// Longest path the exact enumeration accepts (4^10 sequences).
pub const MAX_EXACT_PATH_LENGTH: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlignmentError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("exact enumeration needs path length <= {max}, got {length}")]
    PathTooLong { length: usize, max: usize },
    #[error("probability grid must be non-empty with values in [0, 1]")]
    InvalidGrid,
    #[error("`{0}` is not one of tft, mostly_cooperate, mostly_defect")]
    NotNamedStrategy(String),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

/// Payoff matrix plus the gain scale derived from it.
#[derive(Debug, Clone)]
pub struct ValueModel {
    pub matrix: PayoffMatrix,
    gain: GainScale,
}

impl ValueModel {
    pub fn new(matrix: PayoffMatrix) -> Self {
        Self {
            matrix,
            gain: GainScale::from_matrix(&matrix),
        }
    }

    /// Preferences of one transition: equality, gain for alpha, gain for beta.
    fn score(&self, pre: &State, post: &State) -> [f64; 3] {
        // Deltas always come from `self.matrix`, which `gain` was built from.
        let gain = |agent| prf_gain(&self.gain, agent, pre, post).expect("reward on gain scale");
        [
            prf_equality(AgentId::Alpha, pre, post),
            gain(AgentId::Alpha),
            gain(AgentId::Beta),
        ]
    }

    /// Mean preferences along a path, in the same slot order as `score`.
    pub fn path_means(&self, path: &IpdPath) -> [f64; 3] {
        let mut mean = [0.0; 3];
        for (d, t) in path.transitions().iter().enumerate() {
            let s = self.score(&t.pre, &t.post);
            running_mean(&mut mean, &s, d + 1);
        }
        mean
    }
}

impl Default for ValueModel {
    fn default() -> Self {
        Self::new(PayoffMatrix::default())
    }
}

fn slot(agent: AgentId, value: ValueId) -> usize {
    match (value, agent) {
        (ValueId::Equality, _) => 0,
        (ValueId::PersonalGain, AgentId::Alpha) => 1,
        (ValueId::PersonalGain, AgentId::Beta) => 2,
    }
}

// Incremental mean; leaves a constant sequence bit-exact.
fn running_mean(mean: &mut [f64; 3], x: &[f64; 3], count: usize) {
    for (m, v) in mean.iter_mut().zip(x) {
        *m += (v - *m) / count as f64;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentQuery {
    pub profile: StrategyProfile,
    pub agent: AgentId,
    pub value: ValueId,
    pub path_length: usize,
    pub num_paths: usize,
    pub rng: RngSpec,
}

impl AlignmentQuery {
    pub fn new(profile: StrategyProfile, agent: AgentId, value: ValueId, rng: RngSpec) -> Self {
        Self {
            profile,
            agent,
            value,
            path_length: DEFAULT_PATH_LENGTH,
            num_paths: DEFAULT_NUM_PATHS,
            rng,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlignmentEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// Sampled paths, or positive-probability sequences for exact results.
    pub num_paths: usize,
    pub path_length: usize,
    pub exact: bool,
}

/// Alignment of one profile for every (agent, value) pair, all computed
/// from the same paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileAlignment {
    estimates: [AlignmentEstimate; 3],
}

impl ProfileAlignment {
    pub fn get(&self, agent: AgentId, value: ValueId) -> AlignmentEstimate {
        self.estimates[slot(agent, value)]
    }
}

fn check_length(path_length: usize) -> Result<(), AlignmentError> {
    if path_length == 0 {
        return Err(AlignmentError::InvalidQuery("path_length must be >= 1".into()));
    }
    Ok(())
}

/// Monte Carlo alignment of a profile for all (agent, value) pairs.
///
/// Path `i` uses substream `i` of `rng`, so two profiles evaluated with the
/// same seed share random numbers.
pub fn profile_alignment_mc(
    model: &ValueModel,
    profile: &StrategyProfile,
    path_length: usize,
    num_paths: usize,
    rng: &RngSpec,
) -> Result<ProfileAlignment, AlignmentError> {
    check_length(path_length)?;
    if num_paths == 0 {
        return Err(AlignmentError::InvalidQuery("num_paths must be >= 1".into()));
    }
    let per_path: Vec<[f64; 3]> = (0..num_paths as u64)
        .into_par_iter()
        .map(|i| model.path_means(&sample_path(profile, &model.matrix, path_length, rng, i)))
        .collect();

    // Welford, in path-index order.
    let mut mean = [0.0; 3];
    let mut m2 = [0.0; 3];
    for (k, x) in per_path.iter().enumerate() {
        let n = (k + 1) as f64;
        for j in 0..3 {
            let delta = x[j] - mean[j];
            mean[j] += delta / n;
            m2[j] += delta * (x[j] - mean[j]);
        }
    }
    let estimates = std::array::from_fn(|j| {
        let std_error = if num_paths > 1 {
            (m2[j] / (num_paths - 1) as f64).sqrt() / (num_paths as f64).sqrt()
        } else {
            0.0
        };
        AlignmentEstimate {
            mean: mean[j],
            std_error,
            num_paths,
            path_length,
            exact: false,
        }
    });
    Ok(ProfileAlignment { estimates })
}

/// Monte Carlo estimate of alignment over `q.num_paths` sampled paths.
pub fn alignment_mc(model: &ValueModel, q: &AlignmentQuery) -> Result<AlignmentEstimate, AlignmentError> {
    profile_alignment_mc(model, &q.profile, q.path_length, q.num_paths, &q.rng)
        .map(|pa| pa.get(q.agent, q.value))
}

/// Exact expected alignment of a profile for all (agent, value) pairs.
///
/// Walks the tree of joint-action prefixes, skipping zero-probability
/// branches, and accumulates probability-weighted preferences per depth.
pub fn profile_alignment_exact(
    model: &ValueModel,
    profile: &StrategyProfile,
    path_length: usize,
) -> Result<ProfileAlignment, AlignmentError> {
    check_length(path_length)?;
    if path_length > MAX_EXACT_PATH_LENGTH {
        return Err(AlignmentError::PathTooLong {
            length: path_length,
            max: MAX_EXACT_PATH_LENGTH,
        });
    }

    struct Walk<'a> {
        model: &'a ValueModel,
        profile: &'a StrategyProfile,
        length: usize,
        by_depth: Vec<[f64; 3]>,
        leaves: usize,
    }

    impl Walk<'_> {
        fn visit(&mut self, depth: usize, state: State, previous: Option<JointAction>, weight: f64) {
            if depth == self.length {
                self.leaves += 1;
                return;
            }
            let dist = self.profile.joint_distribution(previous);
            for action in JointAction::ALL {
                let w = weight * dist[action.index()];
                if w == 0.0 {
                    continue;
                }
                let next = self.model.matrix.step(state, action);
                let s = self.model.score(&state, &next);
                for (acc, v) in self.by_depth[depth].iter_mut().zip(s) {
                    *acc += w * v;
                }
                self.visit(depth + 1, next, Some(action), w);
            }
        }
    }

    let mut walk = Walk {
        model,
        profile,
        length: path_length,
        by_depth: vec![[0.0; 3]; path_length],
        leaves: 0,
    };
    walk.visit(0, State::INITIAL, None, 1.0);

    let mut mean = [0.0; 3];
    for (d, e) in walk.by_depth.iter().enumerate() {
        running_mean(&mut mean, e, d + 1);
    }
    let estimates = std::array::from_fn(|j| AlignmentEstimate {
        mean: mean[j],
        std_error: 0.0,
        num_paths: walk.leaves,
        path_length,
        exact: true,
    });
    Ok(ProfileAlignment { estimates })
}

/// Exact expectation of the Monte Carlo estimator.
pub fn alignment_exact(
    model: &ValueModel,
    profile: &StrategyProfile,
    agent: AgentId,
    value: ValueId,
    path_length: usize,
) -> Result<AlignmentEstimate, AlignmentError> {
    profile_alignment_exact(model, profile, path_length).map(|pa| pa.get(agent, value))
}

/// How sweep cells are evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    Exact,
    /// Every cell uses the same seed and path indices.
    MonteCarlo { num_paths: usize, rng: RngSpec },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepParams {
    pub path_length: usize,
    pub estimator: Estimator,
}

impl SweepParams {
    pub fn exact(path_length: usize) -> Self {
        Self {
            path_length,
            estimator: Estimator::Exact,
        }
    }

    pub fn monte_carlo(path_length: usize, num_paths: usize, master_seed: u64) -> Self {
        Self {
            path_length,
            estimator: Estimator::MonteCarlo {
                num_paths,
                rng: RngSpec::new(master_seed),
            },
        }
    }
}

pub fn profile_alignment(
    model: &ValueModel,
    profile: &StrategyProfile,
    params: &SweepParams,
) -> Result<ProfileAlignment, AlignmentError> {
    match params.estimator {
        Estimator::Exact => profile_alignment_exact(model, profile, params.path_length),
        Estimator::MonteCarlo { num_paths, rng } => {
            profile_alignment_mc(model, profile, params.path_length, num_paths, &rng)
        }
    }
}

/// Alignment of every `(alpha, beta)` pair, indexed `[alpha][beta]`.
pub fn profile_table(
    model: &ValueModel,
    alpha_options: &[MemoryOneStrategy],
    beta_options: &[MemoryOneStrategy],
    params: &SweepParams,
) -> Result<Vec<Vec<ProfileAlignment>>, AlignmentError> {
    let cells: Vec<(usize, usize)> = (0..alpha_options.len())
        .flat_map(|i| (0..beta_options.len()).map(move |j| (i, j)))
        .collect();
    let flat = cells
        .par_iter()
        .map(|&(i, j)| {
            let profile = StrategyProfile::new(alpha_options[i], beta_options[j]);
            profile_alignment(model, &profile, params)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let width = beta_options.len().max(1);
    Ok(flat.chunks(width).map(<[_]>::to_vec).collect())
}

/// `points` evenly spaced probabilities from 0 to 1 inclusive.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

fn random_strategies(grid: &[f64]) -> Result<Vec<MemoryOneStrategy>, AlignmentError> {
    if grid.is_empty() || grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(AlignmentError::InvalidGrid);
    }
    grid.iter()
        .map(|&p| random_action(p).map_err(AlignmentError::from))
        .collect()
}

fn select(
    table: Vec<Vec<ProfileAlignment>>,
    agent: AgentId,
    value: ValueId,
) -> Vec<Vec<AlignmentEstimate>> {
    table
        .into_iter()
        .map(|row| row.into_iter().map(|c| c.get(agent, value)).collect())
        .collect()
}

/// Alignment over random-action profiles, indexed `[p_alpha][p_beta]`.
pub fn sweep_random_grid(
    model: &ValueModel,
    grid: &[f64],
    agent: AgentId,
    value: ValueId,
    params: &SweepParams,
) -> Result<Vec<Vec<AlignmentEstimate>>, AlignmentError> {
    let options = random_strategies(grid)?;
    Ok(select(profile_table(model, &options, &options, params)?, agent, value))
}

/// Alignment with alpha on a named strategy and beta on a random-action
/// strategy, indexed `[alpha strategy][p_beta]`.
pub fn sweep_heterogeneous(
    model: &ValueModel,
    alpha_strategies: &[StrategySpec],
    beta_grid: &[f64],
    agent: AgentId,
    value: ValueId,
    params: &SweepParams,
) -> Result<Vec<Vec<AlignmentEstimate>>, AlignmentError> {
    let alpha = alpha_strategies
        .iter()
        .map(|s| {
            if s.is_named() {
                s.build().map_err(AlignmentError::from)
            } else {
                Err(AlignmentError::NotNamedStrategy(s.to_string()))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let beta = random_strategies(beta_grid)?;
    Ok(select(profile_table(model, &alpha, &beta, params)?, agent, value))
}
