//! The two-agent iterated prisoner's dilemma world.
//!
//! States are the agents' accumulated wealth; a joint action adds the
//! payoff-matrix rewards to each agent's wealth.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::lts::TransitionSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentId {
    Alpha,
    Beta,
}

impl AgentId {
    pub const BOTH: [AgentId; 2] = [AgentId::Alpha, AgentId::Beta];

    pub fn index(self) -> usize {
        match self {
            AgentId::Alpha => 0,
            AgentId::Beta => 1,
        }
    }

    pub fn other(self) -> AgentId {
        match self {
            AgentId::Alpha => AgentId::Beta,
            AgentId::Beta => AgentId::Alpha,
        }
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgentId::Alpha => "alpha",
            AgentId::Beta => "beta",
        })
    }
}

impl FromStr for AgentId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "alpha" => Ok(AgentId::Alpha),
            "beta" => Ok(AgentId::Beta),
            other => Err(format!("unknown agent `{other}` (expected alpha or beta)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Cooperate,
    Defect,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::Cooperate, Action::Defect];

    pub fn index(self) -> usize {
        match self {
            Action::Cooperate => 0,
            Action::Defect => 1,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Action::Cooperate => 'C',
            Action::Defect => 'D',
        }
    }
}

/// The actions of both agents in one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JointAction {
    pub alpha: Action,
    pub beta: Action,
}

impl JointAction {
    pub const ALL: [JointAction; 4] = [
        JointAction::new(Action::Cooperate, Action::Cooperate),
        JointAction::new(Action::Cooperate, Action::Defect),
        JointAction::new(Action::Defect, Action::Cooperate),
        JointAction::new(Action::Defect, Action::Defect),
    ];

    pub const fn new(alpha: Action, beta: Action) -> Self {
        Self { alpha, beta }
    }

    pub fn of(&self, agent: AgentId) -> Action {
        match agent {
            AgentId::Alpha => self.alpha,
            AgentId::Beta => self.beta,
        }
    }

    /// `(own, opponent)` view of the joint action for `agent`.
    pub fn from_perspective(&self, agent: AgentId) -> (Action, Action) {
        (self.of(agent), self.of(agent.other()))
    }

    pub fn swapped(&self) -> Self {
        Self::new(self.beta, self.alpha)
    }

    /// Position in [`JointAction::ALL`].
    pub fn index(&self) -> usize {
        2 * self.alpha.index() + self.beta.index()
    }
}

impl fmt::Display for JointAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.alpha.symbol(), self.beta.symbol())
    }
}

/// Accumulated wealth of both agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct State {
    pub wealth_alpha: u64,
    pub wealth_beta: u64,
}

impl State {
    pub const INITIAL: State = State::new(0, 0);

    pub const fn new(wealth_alpha: u64, wealth_beta: u64) -> Self {
        Self {
            wealth_alpha,
            wealth_beta,
        }
    }

    pub fn wealth(&self, agent: AgentId) -> u64 {
        match agent {
            AgentId::Alpha => self.wealth_alpha,
            AgentId::Beta => self.wealth_beta,
        }
    }

    pub fn total(&self) -> u64 {
        self.wealth_alpha + self.wealth_beta
    }

    pub fn swapped(&self) -> Self {
        Self::new(self.wealth_beta, self.wealth_alpha)
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.wealth_alpha, self.wealth_beta)
    }
}

/// Rewards `(r_alpha, r_beta)` for every joint action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    pub cc: (u64, u64),
    pub cd: (u64, u64),
    pub dc: (u64, u64),
    pub dd: (u64, u64),
}

impl Default for PayoffMatrix {
    fn default() -> Self {
        Self {
            cc: (6, 6),
            cd: (0, 9),
            dc: (9, 0),
            dd: (3, 3),
        }
    }
}

impl PayoffMatrix {
    pub fn payoff(&self, action: JointAction) -> (u64, u64) {
        use Action::*;
        match (action.alpha, action.beta) {
            (Cooperate, Cooperate) => self.cc,
            (Cooperate, Defect) => self.cd,
            (Defect, Cooperate) => self.dc,
            (Defect, Defect) => self.dd,
        }
    }

    pub fn reward(&self, agent: AgentId, action: JointAction) -> u64 {
        let (a, b) = self.payoff(action);
        match agent {
            AgentId::Alpha => a,
            AgentId::Beta => b,
        }
    }

    pub fn step(&self, state: State, action: JointAction) -> State {
        let (ra, rb) = self.payoff(action);
        State::new(state.wealth_alpha + ra, state.wealth_beta + rb)
    }

    /// `r_beta(a, b) == r_alpha(b, a)` for every joint action.
    pub fn is_symmetric(&self) -> bool {
        JointAction::ALL
            .iter()
            .all(|&a| self.reward(AgentId::Beta, a) == self.reward(AgentId::Alpha, a.swapped()))
    }

    /// Distinct reward values over both agents, ascending.
    pub fn reward_levels(&self) -> Vec<u64> {
        let mut levels: Vec<u64> = JointAction::ALL
            .iter()
            .flat_map(|&a| {
                let (x, y) = self.payoff(a);
                [x, y]
            })
            .collect();
        levels.sort_unstable();
        levels.dedup();
        levels
    }
}

/// The iterated prisoner's dilemma as a transition system.
#[derive(Debug, Clone, Default)]
pub struct IpdWorld {
    pub matrix: PayoffMatrix,
}

impl IpdWorld {
    pub fn new(matrix: PayoffMatrix) -> Self {
        Self { matrix }
    }
}

impl TransitionSystem for IpdWorld {
    type State = State;
    type Action = JointAction;

    fn actions(&self) -> &[JointAction] {
        &JointAction::ALL
    }

    fn step(&self, state: &State, action: JointAction) -> State {
        self.matrix.step(*state, action)
    }
}
