//! Alignment equilibria and Pareto optimal alignments over finite strategy
//! spaces, plus the single-round Nash check on the stage game.
//!
//! Each agent is judged under its own assigned value. A profile is an
//! alignment equilibrium when no agent can raise its alignment by switching
//! only its own strategy within the space; it is Pareto optimal when no
//! other profile in the space makes some agent better off and none worse.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alignment::{
    profile_table, AlignmentError, AlignmentEstimate, Estimator, SweepParams, ValueModel,
};
use crate::ipd::{Action, AgentId, JointAction, PayoffMatrix};
use crate::strategies::{StrategyError, StrategyProfile, StrategySpec};
use crate::values::ValueId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriumError {
    #[error("alignment table has no entry for profile ({alpha}, {beta})")]
    MissingTableEntry { alpha: usize, beta: usize },
    #[error("strategy space needs at least one option per agent")]
    EmptySpace,
    #[error(transparent)]
    Alignment(#[from] AlignmentError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueAssignment {
    pub value_alpha: ValueId,
    pub value_beta: ValueId,
}

impl ValueAssignment {
    pub fn new(value_alpha: ValueId, value_beta: ValueId) -> Self {
        Self {
            value_alpha,
            value_beta,
        }
    }

    pub fn both(value: ValueId) -> Self {
        Self::new(value, value)
    }

    pub fn value_for(&self, agent: AgentId) -> ValueId {
        match agent {
            AgentId::Alpha => self.value_alpha,
            AgentId::Beta => self.value_beta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    #[serde(rename = "random")]
    RandomGrid,
    Heterogeneous,
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpaceKind::RandomGrid => "random",
            SpaceKind::Heterogeneous => "heterogeneous",
        })
    }
}

impl FromStr for SpaceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(SpaceKind::RandomGrid),
            "heterogeneous" => Ok(SpaceKind::Heterogeneous),
            other => Err(format!("unknown space `{other}` (expected random or heterogeneous)")),
        }
    }
}

/// Index of a profile inside a [`StrategySpace`]. Orders lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProfileId {
    pub alpha: usize,
    pub beta: usize,
}

impl ProfileId {
    pub fn new(alpha: usize, beta: usize) -> Self {
        Self { alpha, beta }
    }
}

/// Finite options for each agent. Deviations are only considered within it.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategySpace {
    pub alpha_options: Vec<StrategySpec>,
    pub beta_options: Vec<StrategySpec>,
    pub kind: SpaceKind,
}

impl StrategySpace {
    /// Both agents pick a cooperation probability from `grid`.
    pub fn random_grid(grid: &[f64]) -> Result<Self, EquilibriumError> {
        let options = grid
            .iter()
            .map(|&p| StrategySpec::random(p))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(options.clone(), options, SpaceKind::RandomGrid)
    }

    /// Alpha picks a named strategy, beta a cooperation probability.
    pub fn heterogeneous(alpha: &[StrategySpec], beta_grid: &[f64]) -> Result<Self, EquilibriumError> {
        if let Some(s) = alpha.iter().find(|s| !s.is_named()) {
            return Err(AlignmentError::NotNamedStrategy(s.to_string()).into());
        }
        let beta = beta_grid
            .iter()
            .map(|&p| StrategySpec::random(p))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(alpha.to_vec(), beta, SpaceKind::Heterogeneous)
    }

    pub fn new(
        alpha_options: Vec<StrategySpec>,
        beta_options: Vec<StrategySpec>,
        kind: SpaceKind,
    ) -> Result<Self, EquilibriumError> {
        if alpha_options.is_empty() || beta_options.is_empty() {
            return Err(EquilibriumError::EmptySpace);
        }
        Ok(Self {
            alpha_options,
            beta_options,
            kind,
        })
    }

    pub fn profiles(&self) -> impl Iterator<Item = ProfileId> + '_ {
        (0..self.alpha_options.len())
            .flat_map(move |i| (0..self.beta_options.len()).map(move |j| ProfileId::new(i, j)))
    }

    pub fn specs(&self, id: ProfileId) -> (StrategySpec, StrategySpec) {
        (self.alpha_options[id.alpha], self.beta_options[id.beta])
    }

    pub fn profile(&self, id: ProfileId) -> Result<StrategyProfile, StrategyError> {
        let (a, b) = self.specs(id);
        StrategyProfile::from_specs(a, b)
    }

    pub fn label(&self, id: ProfileId) -> String {
        let (a, b) = self.specs(id);
        format!("({a}, {b})")
    }

    /// Profiles reachable from `id` when only `agent` changes strategy.
    fn deviations(&self, id: ProfileId, agent: AgentId) -> Vec<ProfileId> {
        match agent {
            AgentId::Alpha => (0..self.alpha_options.len())
                .filter(|&i| i != id.alpha)
                .map(|i| ProfileId::new(i, id.beta))
                .collect(),
            AgentId::Beta => (0..self.beta_options.len())
                .filter(|&j| j != id.beta)
                .map(|j| ProfileId::new(id.alpha, j))
                .collect(),
        }
    }
}

/// Alignment of each agent, under its assigned value, at one profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellAlignment {
    pub alpha: AlignmentEstimate,
    pub beta: AlignmentEstimate,
}

impl CellAlignment {
    pub fn of(&self, agent: AgentId) -> &AlignmentEstimate {
        match agent {
            AgentId::Alpha => &self.alpha,
            AgentId::Beta => &self.beta,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentTable {
    pub assignment: ValueAssignment,
    entries: BTreeMap<ProfileId, CellAlignment>,
}

impl AlignmentTable {
    pub fn new(assignment: ValueAssignment) -> Self {
        Self {
            assignment,
            entries: BTreeMap::new(),
        }
    }

    /// Evaluates every profile of `space`.
    pub fn build(
        model: &ValueModel,
        space: &StrategySpace,
        assignment: ValueAssignment,
        params: &SweepParams,
    ) -> Result<Self, EquilibriumError> {
        let build = |opts: &[StrategySpec]| {
            opts.iter()
                .map(StrategySpec::build)
                .collect::<Result<Vec<_>, _>>()
        };
        let alpha = build(&space.alpha_options)?;
        let beta = build(&space.beta_options)?;
        let grid = profile_table(model, &alpha, &beta, params)?;
        let mut table = Self::new(assignment);
        for (i, row) in grid.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                table.insert(
                    ProfileId::new(i, j),
                    CellAlignment {
                        alpha: cell.get(AgentId::Alpha, assignment.value_alpha),
                        beta: cell.get(AgentId::Beta, assignment.value_beta),
                    },
                );
            }
        }
        Ok(table)
    }

    pub fn insert(&mut self, id: ProfileId, cell: CellAlignment) {
        self.entries.insert(id, cell);
    }

    pub fn get(&self, id: ProfileId) -> Result<&CellAlignment, EquilibriumError> {
        self.entries
            .get(&id)
            .ok_or(EquilibriumError::MissingTableEntry {
                alpha: id.alpha,
                beta: id.beta,
            })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ProfileId, &CellAlignment)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Slack allowed when comparing two alignments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", content = "value", rename_all = "snake_case")]
pub enum Tolerance {
    /// Absolute slack.
    Fixed(f64),
    /// Multiple of the combined standard error `sqrt(se_a^2 + se_b^2)` of
    /// the two compared estimates.
    StdErrors(f64),
}

impl Tolerance {
    pub const MC_STD_ERRORS: f64 = 4.0;

    /// Default for an estimator: exact comparisons for the exact oracle,
    /// four combined standard errors for Monte Carlo.
    pub fn default_for(estimator: &Estimator) -> Self {
        match estimator {
            Estimator::Exact => Tolerance::Fixed(0.0),
            Estimator::MonteCarlo { .. } => Tolerance::StdErrors(Self::MC_STD_ERRORS),
        }
    }

    pub fn margin(&self, a: &AlignmentEstimate, b: &AlignmentEstimate) -> f64 {
        match *self {
            Tolerance::Fixed(t) => t,
            Tolerance::StdErrors(k) => k * a.std_error.hypot(b.std_error),
        }
    }

    /// `candidate` beats `current` by more than the slack.
    fn improves(&self, candidate: &AlignmentEstimate, current: &AlignmentEstimate) -> bool {
        candidate.mean - current.mean > self.margin(candidate, current)
    }
}

/// True iff neither agent gains more than `tol` by a unilateral deviation
/// within `space`.
pub fn is_alignment_equilibrium(
    space: &StrategySpace,
    profile: ProfileId,
    table: &AlignmentTable,
    tol: Tolerance,
) -> Result<bool, EquilibriumError> {
    let here = table.get(profile)?;
    for agent in AgentId::BOTH {
        for dev in space.deviations(profile, agent) {
            let there = table.get(dev)?;
            if tol.improves(there.of(agent), here.of(agent)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn dominates(a: &CellAlignment, b: &CellAlignment, tol: Tolerance) -> bool {
    let some_better = AgentId::BOTH.iter().any(|&g| tol.improves(a.of(g), b.of(g)));
    let none_worse = AgentId::BOTH.iter().all(|&g| !tol.improves(b.of(g), a.of(g)));
    some_better && none_worse
}

/// Profiles of `space` not dominated by any other profile in it.
pub fn find_pareto(
    space: &StrategySpace,
    table: &AlignmentTable,
    tol: Tolerance,
) -> Result<Vec<ProfileId>, EquilibriumError> {
    let cells = space
        .profiles()
        .map(|id| table.get(id).map(|c| (id, *c)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(cells
        .iter()
        .filter(|(_, c)| !cells.iter().any(|(_, other)| dominates(other, c, tol)))
        .map(|(id, _)| *id)
        .collect())
}

#[derive(Debug, Clone)]
pub struct EquilibriumReport {
    pub space: StrategySpace,
    pub assignment: ValueAssignment,
    pub params: SweepParams,
    pub tolerance: Tolerance,
    /// Lexicographic by profile.
    pub equilibria: Vec<ProfileId>,
    pub pareto_optimal: Vec<ProfileId>,
    pub table: AlignmentTable,
}

impl EquilibriumReport {
    pub fn is_pareto_optimal(&self, id: ProfileId) -> bool {
        self.pareto_optimal.binary_search(&id).is_ok()
    }

    pub fn equilibrium_specs(&self) -> Vec<(StrategySpec, StrategySpec)> {
        self.equilibria.iter().map(|&id| self.space.specs(id)).collect()
    }

    /// Other equilibria that differ from `id` in one agent's strategy but
    /// produce the same distribution over paths.
    pub fn behaviorally_equivalent(&self, id: ProfileId) -> Result<Vec<ProfileId>, EquilibriumError> {
        let here = self.space.profile(id)?;
        let mut out = Vec::new();
        for &other in &self.equilibria {
            if other == id {
                continue;
            }
            let there = self.space.profile(other)?;
            let same = if other.beta == id.beta {
                here.behaves_same_with(AgentId::Alpha, &there.alpha)
            } else if other.alpha == id.alpha {
                here.behaves_same_with(AgentId::Beta, &there.beta)
            } else {
                false
            };
            if same {
                out.push(other);
            }
        }
        Ok(out)
    }
}

/// Builds the alignment table for `space` and filters it for alignment
/// equilibria and Pareto optimal profiles.
///
/// `tol` defaults to [`Tolerance::default_for`] the chosen estimator.
pub fn find_alignment_equilibria(
    model: &ValueModel,
    space: &StrategySpace,
    assignment: ValueAssignment,
    params: &SweepParams,
    tol: Option<Tolerance>,
) -> Result<EquilibriumReport, EquilibriumError> {
    let tolerance = tol.unwrap_or_else(|| Tolerance::default_for(&params.estimator));
    let table = AlignmentTable::build(model, space, assignment, params)?;
    let mut equilibria = Vec::new();
    for id in space.profiles() {
        if is_alignment_equilibrium(space, id, &table, tolerance)? {
            equilibria.push(id);
        }
    }
    let pareto_optimal = find_pareto(space, &table, tolerance)?;
    Ok(EquilibriumReport {
        space: space.clone(),
        assignment,
        params: *params,
        tolerance,
        equilibria,
        pareto_optimal,
        table,
    })
}

/// Pure Nash equilibria of the single-round stage game.
pub fn classical_nash_check(matrix: &PayoffMatrix) -> Vec<JointAction> {
    JointAction::ALL
        .into_iter()
        .filter(|&ja| {
            Action::ALL.iter().all(|&a| {
                matrix.reward(AgentId::Alpha, ja)
                    >= matrix.reward(AgentId::Alpha, JointAction::new(a, ja.beta))
            }) && Action::ALL.iter().all(|&b| {
                matrix.reward(AgentId::Beta, ja)
                    >= matrix.reward(AgentId::Beta, JointAction::new(ja.alpha, b))
            })
        })
        .collect()
}

/// `a` Pareto-dominates `b` in single-round rewards.
pub fn stage_pareto_dominates(matrix: &PayoffMatrix, a: JointAction, b: JointAction) -> bool {
    let (a1, a2) = matrix.payoff(a);
    let (b1, b2) = matrix.payoff(b);
    a1 >= b1 && a2 >= b2 && (a1 > b1 || a2 > b2)
}

/// Joint actions not Pareto-dominated in single-round rewards.
pub fn stage_pareto_optimal(matrix: &PayoffMatrix) -> Vec<JointAction> {
    JointAction::ALL
        .into_iter()
        .filter(|&b| !JointAction::ALL.iter().any(|&a| stage_pareto_dominates(matrix, a, b)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::uniform_grid;
    use Action::*;

    fn est(mean: f64, se: f64) -> AlignmentEstimate {
        AlignmentEstimate {
            mean,
            std_error: se,
            num_paths: 1,
            path_length: 1,
            exact: se == 0.0,
        }
    }

    fn cell(a: f64, b: f64) -> CellAlignment {
        CellAlignment {
            alpha: est(a, 0.0),
            beta: est(b, 0.0),
        }
    }

    #[test]
    fn nash_default_matrix() {
        let m = PayoffMatrix::default();
        assert_eq!(classical_nash_check(&m), vec![JointAction::new(Defect, Defect)]);
        assert!(stage_pareto_dominates(
            &m,
            JointAction::new(Cooperate, Cooperate),
            JointAction::new(Defect, Defect)
        ));
        assert!(!stage_pareto_optimal(&m).contains(&JointAction::new(Defect, Defect)));
    }

    #[test]
    fn nash_flat_matrix() {
        let m = PayoffMatrix {
            cc: (1, 1),
            cd: (1, 1),
            dc: (1, 1),
            dd: (1, 1),
        };
        assert_eq!(classical_nash_check(&m), JointAction::ALL.to_vec());
    }

    #[test]
    fn nash_coordination_matrix() {
        let m = PayoffMatrix {
            cc: (2, 2),
            cd: (0, 0),
            dc: (0, 0),
            dd: (1, 1),
        };
        assert_eq!(
            classical_nash_check(&m),
            vec![JointAction::new(Cooperate, Cooperate), JointAction::new(Defect, Defect)]
        );
    }

    #[test]
    fn missing_entry_is_reported() {
        let space = StrategySpace::random_grid(&[0.0, 1.0]).unwrap();
        let mut table = AlignmentTable::new(ValueAssignment::both(ValueId::Equality));
        table.insert(ProfileId::new(0, 0), cell(1.0, 1.0));
        assert_eq!(
            is_alignment_equilibrium(&space, ProfileId::new(0, 0), &table, Tolerance::Fixed(0.0)),
            Err(EquilibriumError::MissingTableEntry { alpha: 1, beta: 0 })
        );
        assert!(find_pareto(&space, &table, Tolerance::Fixed(0.0)).is_err());
    }

    #[test]
    fn hand_built_prisoners_table() {
        // Stage-game rewards as alignments: (D,D) is the only equilibrium and
        // the only dominated profile.
        let space = StrategySpace::random_grid(&[1.0, 0.0]).unwrap();
        let mut t = AlignmentTable::new(ValueAssignment::both(ValueId::PersonalGain));
        t.insert(ProfileId::new(0, 0), cell(6.0, 6.0));
        t.insert(ProfileId::new(0, 1), cell(0.0, 9.0));
        t.insert(ProfileId::new(1, 0), cell(9.0, 0.0));
        t.insert(ProfileId::new(1, 1), cell(3.0, 3.0));
        let tol = Tolerance::Fixed(0.0);
        let eq: Vec<_> = space
            .profiles()
            .filter(|&id| is_alignment_equilibrium(&space, id, &t, tol).unwrap())
            .collect();
        assert_eq!(eq, vec![ProfileId::new(1, 1)]);
        assert_eq!(
            find_pareto(&space, &t, tol).unwrap(),
            vec![ProfileId::new(0, 0), ProfileId::new(0, 1), ProfileId::new(1, 0)]
        );
        // A large enough slack turns every profile into an equilibrium.
        assert!(is_alignment_equilibrium(&space, ProfileId::new(0, 0), &t, Tolerance::Fixed(3.0)).unwrap());
    }

    #[test]
    fn ties_are_not_domination() {
        let space = StrategySpace::random_grid(&[0.0, 1.0]).unwrap();
        let mut t = AlignmentTable::new(ValueAssignment::both(ValueId::Equality));
        for id in space.profiles() {
            t.insert(id, cell(0.5, 0.5));
        }
        assert_eq!(find_pareto(&space, &t, Tolerance::Fixed(0.0)).unwrap().len(), 4);
    }

    #[test]
    fn std_error_tolerance() {
        let tol = Tolerance::StdErrors(4.0);
        assert!((tol.margin(&est(0.0, 0.03), &est(0.0, 0.04)) - 0.2).abs() < 1e-12);
        assert!(!tol.improves(&est(0.19, 0.03), &est(0.0, 0.04)));
        assert!(tol.improves(&est(0.21, 0.03), &est(0.0, 0.04)));
    }

    #[test]
    fn heterogeneous_space_rejects_random_alpha() {
        assert!(StrategySpace::heterogeneous(&[StrategySpec::Random(0.2)], &[0.0]).is_err());
        assert_eq!(
            StrategySpace::random_grid(&[]),
            Err(EquilibriumError::EmptySpace)
        );
    }

    #[test]
    fn equality_equilibria_lie_on_diagonal_for_small_grid() {
        let model = ValueModel::default();
        let space = StrategySpace::random_grid(&uniform_grid(2)).unwrap();
        let r = find_alignment_equilibria(
            &model,
            &space,
            ValueAssignment::both(ValueId::Equality),
            &SweepParams::exact(4),
            None,
        )
        .unwrap();
        assert_eq!(r.equilibria, vec![ProfileId::new(0, 0), ProfileId::new(1, 1)]);
        assert_eq!(r.pareto_optimal, vec![ProfileId::new(0, 0), ProfileId::new(1, 1)]);
        assert_eq!(r.tolerance, Tolerance::Fixed(0.0));
    }
}
