//! Memory-one strategies and stochastic path sampling.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ipd::{Action, AgentId, JointAction, PayoffMatrix, State};
use crate::lts::{Path, Transition};

pub type IpdPath = Path<State, JointAction>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrategyError {
    #[error("cooperation probability {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("cannot parse strategy `{0}` (expected random:<p>, tft, mostly_cooperate or mostly_defect)")]
    Parse(String),
}

fn check_prob(p: f64) -> Result<f64, StrategyError> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(StrategyError::OutOfRange(p))
    }
}

/// A strategy whose cooperation probability depends only on the previous
/// joint action, seen from the agent's own perspective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryOneStrategy {
    first_move: f64,
    /// Indexed by `JointAction::new(own, opponent).index()`.
    response: [f64; 4],
}

impl MemoryOneStrategy {
    pub fn new(first_move: f64, response: [f64; 4]) -> Result<Self, StrategyError> {
        check_prob(first_move)?;
        for p in response {
            check_prob(p)?;
        }
        Ok(Self {
            first_move,
            response,
        })
    }

    /// Builds the response table from a rule over `(own, opponent)` actions.
    pub fn from_rule(
        first_move: f64,
        rule: impl Fn(Action, Action) -> f64,
    ) -> Result<Self, StrategyError> {
        let mut response = [0.0; 4];
        for ja in JointAction::ALL {
            response[ja.index()] = rule(ja.alpha, ja.beta);
        }
        Self::new(first_move, response)
    }

    pub fn first_move_coop_prob(&self) -> f64 {
        self.first_move
    }

    /// Cooperation probability after the agent played `own` and the
    /// opponent played `opponent`.
    pub fn coop_prob_after(&self, own: Action, opponent: Action) -> f64 {
        self.response[JointAction::new(own, opponent).index()]
    }

    /// Cooperation probability for `agent` given the previous joint action
    /// (`None` in the first round).
    pub fn coop_prob(&self, agent: AgentId, previous: Option<JointAction>) -> f64 {
        match previous {
            None => self.first_move,
            Some(ja) => {
                let (own, opp) = ja.from_perspective(agent);
                self.coop_prob_after(own, opp)
            }
        }
    }

    /// True when every probability is 0 or 1.
    pub fn is_deterministic(&self) -> bool {
        std::iter::once(self.first_move)
            .chain(self.response)
            .all(|p| p == 0.0 || p == 1.0)
    }
}

/// Cooperates with a fixed probability every round, first round included.
pub fn random_action(p_coop: f64) -> Result<MemoryOneStrategy, StrategyError> {
    MemoryOneStrategy::new(check_prob(p_coop)?, [p_coop; 4])
}

/// Copies the opponent's previous action; fair coin in the first round.
pub fn tit_for_tat() -> MemoryOneStrategy {
    MemoryOneStrategy::from_rule(0.5, |_, opp| match opp {
        Action::Cooperate => 1.0,
        Action::Defect => 0.0,
    })
    .expect("valid probabilities")
}

/// Defects only after mutual defection; fair coin in the first round.
pub fn mostly_cooperate() -> MemoryOneStrategy {
    MemoryOneStrategy::from_rule(0.5, |own, opp| match (own, opp) {
        (Action::Defect, Action::Defect) => 0.0,
        _ => 1.0,
    })
    .expect("valid probabilities")
}

/// Cooperates only after mutual cooperation; fair coin in the first round.
pub fn mostly_defect() -> MemoryOneStrategy {
    MemoryOneStrategy::from_rule(0.5, |own, opp| match (own, opp) {
        (Action::Cooperate, Action::Cooperate) => 1.0,
        _ => 0.0,
    })
    .expect("valid probabilities")
}

/// Named strategy as written in configuration files and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum StrategySpec {
    Random(f64),
    TitForTat,
    MostlyCooperate,
    MostlyDefect,
}

impl StrategySpec {
    pub const NAMED: [StrategySpec; 3] = [
        StrategySpec::TitForTat,
        StrategySpec::MostlyCooperate,
        StrategySpec::MostlyDefect,
    ];

    pub fn random(p: f64) -> Result<Self, StrategyError> {
        Ok(StrategySpec::Random(check_prob(p)?))
    }

    pub fn build(&self) -> Result<MemoryOneStrategy, StrategyError> {
        match *self {
            StrategySpec::Random(p) => random_action(p),
            StrategySpec::TitForTat => Ok(tit_for_tat()),
            StrategySpec::MostlyCooperate => Ok(mostly_cooperate()),
            StrategySpec::MostlyDefect => Ok(mostly_defect()),
        }
    }

    pub fn is_named(&self) -> bool {
        !matches!(self, StrategySpec::Random(_))
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategySpec::Random(p) => write!(f, "random:{p:?}"),
            StrategySpec::TitForTat => f.write_str("tft"),
            StrategySpec::MostlyCooperate => f.write_str("mostly_cooperate"),
            StrategySpec::MostlyDefect => f.write_str("mostly_defect"),
        }
    }
}

impl FromStr for StrategySpec {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "tft" => Ok(StrategySpec::TitForTat),
            "mostly_cooperate" => Ok(StrategySpec::MostlyCooperate),
            "mostly_defect" => Ok(StrategySpec::MostlyDefect),
            other => {
                let p = other
                    .strip_prefix("random:")
                    .and_then(|p| p.parse::<f64>().ok())
                    .ok_or_else(|| StrategyError::Parse(other.to_string()))?;
                StrategySpec::random(p)
            }
        }
    }
}

impl TryFrom<String> for StrategySpec {
    type Error = StrategyError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<StrategySpec> for String {
    fn from(s: StrategySpec) -> String {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile {
    pub alpha: MemoryOneStrategy,
    pub beta: MemoryOneStrategy,
    pub label: Option<String>,
}

impl StrategyProfile {
    pub fn new(alpha: MemoryOneStrategy, beta: MemoryOneStrategy) -> Self {
        Self {
            alpha,
            beta,
            label: None,
        }
    }

    pub fn from_specs(alpha: StrategySpec, beta: StrategySpec) -> Result<Self, StrategyError> {
        Ok(Self {
            alpha: alpha.build()?,
            beta: beta.build()?,
            label: Some(format!("{alpha}|{beta}")),
        })
    }

    pub fn strategy(&self, agent: AgentId) -> &MemoryOneStrategy {
        match agent {
            AgentId::Alpha => &self.alpha,
            AgentId::Beta => &self.beta,
        }
    }

    /// Probabilities `(p_alpha, p_beta)` of cooperating this round.
    pub fn coop_probs(&self, previous: Option<JointAction>) -> (f64, f64) {
        (
            self.alpha.coop_prob(AgentId::Alpha, previous),
            self.beta.coop_prob(AgentId::Beta, previous),
        )
    }

    /// Probability of each joint action this round, in `JointAction::ALL` order.
    pub fn joint_distribution(&self, previous: Option<JointAction>) -> [f64; 4] {
        let (pa, pb) = self.coop_probs(previous);
        let mut out = [0.0; 4];
        for ja in JointAction::ALL {
            let wa = if ja.alpha == Action::Cooperate { pa } else { 1.0 - pa };
            let wb = if ja.beta == Action::Cooperate { pb } else { 1.0 - pb };
            out[ja.index()] = wa * wb;
        }
        out
    }

    pub fn is_deterministic(&self) -> bool {
        self.alpha.is_deterministic() && self.beta.is_deterministic()
    }

    /// Joint actions that occur with positive probability in some round.
    pub fn reachable_joint_actions(&self) -> Vec<JointAction> {
        let mut reached = [false; 4];
        let mut frontier: Vec<Option<JointAction>> = vec![None];
        while let Some(prev) = frontier.pop() {
            for (i, w) in self.joint_distribution(prev).into_iter().enumerate() {
                if w > 0.0 && !reached[i] {
                    reached[i] = true;
                    frontier.push(Some(JointAction::ALL[i]));
                }
            }
        }
        JointAction::ALL
            .into_iter()
            .filter(|ja| reached[ja.index()])
            .collect()
    }

    /// True when replacing `agent`'s strategy with `other` leaves the
    /// distribution over paths unchanged: both agree on the first move and
    /// on every reachable previous joint action.
    pub fn behaves_same_with(&self, agent: AgentId, other: &MemoryOneStrategy) -> bool {
        let mine = self.strategy(agent);
        mine.first_move_coop_prob() == other.first_move_coop_prob()
            && self.reachable_joint_actions().iter().all(|ja| {
                mine.coop_prob(agent, Some(*ja)) == other.coop_prob(agent, Some(*ja))
            })
    }
}

/// Source of per-path random substreams.
///
/// Each path index selects an independent ChaCha stream under the master
/// seed, so a path's draws do not depend on which thread samples it or in
/// which order paths are visited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngSpec {
    pub master_seed: u64,
}

impl RngSpec {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn stream(&self, path_index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(path_index);
        rng
    }
}

/// Samples one path of `length` rounds from the initial state.
///
/// Every round draws one uniform for alpha and then one for beta; an agent
/// cooperates when its uniform falls below its cooperation probability.
/// The fixed draw pattern couples paths across profiles that share a seed.
pub fn sample_path(
    profile: &StrategyProfile,
    matrix: &PayoffMatrix,
    length: usize,
    rng: &RngSpec,
    path_index: u64,
) -> IpdPath {
    assert!(length >= 1, "path length must be at least 1");
    let mut stream = rng.stream(path_index);
    let mut path = Path::with_capacity(length);
    let mut state = State::INITIAL;
    let mut previous = None;
    for _ in 0..length {
        let (pa, pb) = profile.coop_probs(previous);
        let ua: f64 = stream.random();
        let ub: f64 = stream.random();
        let pick = |u: f64, p: f64| if u < p { Action::Cooperate } else { Action::Defect };
        let action = JointAction::new(pick(ua, pa), pick(ub, pb));
        let next = matrix.step(state, action);
        path.push(Transition::new(state, action, next));
        state = next;
        previous = Some(action);
    }
    path
}
