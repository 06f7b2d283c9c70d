//! Value-based preference functions over state transitions.
//!
//! Two values are modelled. *Equality* scores the post-transition state by
//! its two-agent Gini index, mapped linearly from `[0, 1/2]` onto `[1, -1]`.
//! *Personal gain* ranks the reward an agent just received among the
//! distinct rewards of the payoff matrix and maps the ranks onto equally
//! spaced points of `[-1, 1]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ipd::{AgentId, PayoffMatrix, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueId {
    Equality,
    #[serde(rename = "gain")]
    PersonalGain,
}

impl ValueId {
    pub const ALL: [ValueId; 2] = [ValueId::Equality, ValueId::PersonalGain];

    pub fn as_str(self) -> &'static str {
        match self {
            ValueId::Equality => "equality",
            ValueId::PersonalGain => "gain",
        }
    }
}

impl fmt::Display for ValueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ValueId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "equality" => Ok(ValueId::Equality),
            "gain" => Ok(ValueId::PersonalGain),
            other => Err(format!("unknown value `{other}` (expected equality or gain)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValueError {
    #[error("wealth delta {delta} for {agent} is not a reward of the payoff matrix")]
    UnknownDelta { agent: AgentId, delta: i128 },
}

/// Two-agent Gini index, `|x_a - x_b| / (2 (x_a + x_b))`.
///
/// Zero total wealth counts as perfect equality.
pub fn gini(s: &State) -> f64 {
    let total = s.total();
    if total == 0 {
        return 0.0;
    }
    s.wealth_alpha.abs_diff(s.wealth_beta) as f64 / (2 * total) as f64
}

/// `1 - 4 GI(post)`. Identical for both agents and independent of `pre`.
pub fn prf_equality(_agent: AgentId, _pre: &State, post: &State) -> f64 {
    let total = post.total();
    if total == 0 {
        return 1.0;
    }
    // (total - 2|d|) / total, rounded once.
    let diff = post.wealth_alpha.abs_diff(post.wealth_beta) as i128;
    let total = total as i128;
    (total - 2 * diff) as f64 / total as f64
}

/// Rank-based mapping from received reward to gain preference.
#[derive(Debug, Clone, PartialEq)]
pub struct GainScale {
    levels: Vec<u64>,
}

impl GainScale {
    /// Scale over the distinct rewards of `matrix`. With the default matrix
    /// this maps 0, 3, 6, 9 to -1, -1/3, 1/3, 1.
    pub fn from_matrix(matrix: &PayoffMatrix) -> Self {
        Self {
            levels: matrix.reward_levels(),
        }
    }

    pub fn levels(&self) -> &[u64] {
        &self.levels
    }

    /// Preference for a reward at rank `k` of `n` levels: `(2k - (n-1)) / (n-1)`.
    pub fn preference_for_reward(&self, reward: u64) -> Option<f64> {
        let rank = self.levels.binary_search(&reward).ok()?;
        let steps = self.levels.len() - 1;
        if steps == 0 {
            return Some(0.0);
        }
        Some((2 * rank as i64 - steps as i64) as f64 / steps as f64)
    }
}

impl Default for GainScale {
    fn default() -> Self {
        Self::from_matrix(&PayoffMatrix::default())
    }
}

/// Gain preference of `agent` for the transition `pre -> post`.
pub fn prf_gain(
    scale: &GainScale,
    agent: AgentId,
    pre: &State,
    post: &State,
) -> Result<f64, ValueError> {
    let delta = post.wealth(agent) as i128 - pre.wealth(agent) as i128;
    u64::try_from(delta)
        .ok()
        .and_then(|d| scale.preference_for_reward(d))
        .ok_or(ValueError::UnknownDelta { agent, delta })
}

/// A value-based preference function bound to a payoff matrix.
#[derive(Debug, Clone)]
pub struct Preference {
    pub value: ValueId,
    gain: GainScale,
}

impl Preference {
    pub fn new(value: ValueId, matrix: &PayoffMatrix) -> Self {
        Self {
            value,
            gain: GainScale::from_matrix(matrix),
        }
    }

    pub fn evaluate(&self, agent: AgentId, pre: &State, post: &State) -> Result<f64, ValueError> {
        match self.value {
            ValueId::Equality => Ok(prf_equality(agent, pre, post)),
            ValueId::PersonalGain => prf_gain(&self.gain, agent, pre, post),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ipd::{JointAction, PayoffMatrix};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&State::new(6, 6)), 0.0);
        assert_eq!(gini(&State::new(9, 0)), 0.5);
        assert_eq!(gini(&State::new(12, 6)), 1.0 / 6.0);
        assert_eq!(gini(&State::new(0, 0)), 0.0);
    }

    #[test]
    fn equality_examples() {
        let pre = State::INITIAL;
        assert_eq!(prf_equality(AgentId::Alpha, &pre, &State::new(6, 6)), 1.0);
        assert_eq!(prf_equality(AgentId::Alpha, &pre, &State::new(9, 0)), -1.0);
        assert_eq!(prf_equality(AgentId::Beta, &pre, &State::new(12, 6)), 1.0 / 3.0);
    }

    #[test]
    fn gain_examples() {
        let scale = GainScale::default();
        let g = |agent, pre, post| prf_gain(&scale, agent, &pre, &post).unwrap();
        assert_eq!(g(AgentId::Alpha, State::new(0, 0), State::new(6, 6)), 1.0 / 3.0);
        assert_eq!(g(AgentId::Alpha, State::new(0, 0), State::new(0, 9)), -1.0);
        assert_eq!(g(AgentId::Beta, State::new(3, 3), State::new(6, 6)), -1.0 / 3.0);
        assert_eq!(g(AgentId::Beta, State::new(0, 0), State::new(0, 9)), 1.0);
    }

    #[test]
    fn gain_rejects_unknown_delta() {
        let scale = GainScale::default();
        let err = prf_gain(&scale, AgentId::Alpha, &State::new(0, 0), &State::new(4, 0));
        assert_eq!(
            err,
            Err(ValueError::UnknownDelta {
                agent: AgentId::Alpha,
                delta: 4
            })
        );
        let err = prf_gain(&scale, AgentId::Beta, &State::new(0, 9), &State::new(0, 3));
        assert!(matches!(err, Err(ValueError::UnknownDelta { delta: -6, .. })));
    }

    #[test]
    fn gain_scale_for_custom_matrix() {
        let m = PayoffMatrix {
            cc: (2, 2),
            cd: (0, 0),
            dc: (0, 0),
            dd: (1, 1),
        };
        let scale = GainScale::from_matrix(&m);
        assert_eq!(scale.levels(), &[0, 1, 2]);
        assert_eq!(scale.preference_for_reward(0), Some(-1.0));
        assert_eq!(scale.preference_for_reward(1), Some(0.0));
        assert_eq!(scale.preference_for_reward(2), Some(1.0));
        assert_eq!(scale.preference_for_reward(3), None);

        let flat = PayoffMatrix {
            cc: (5, 5),
            cd: (5, 5),
            dc: (5, 5),
            dd: (5, 5),
        };
        assert_eq!(GainScale::from_matrix(&flat).preference_for_reward(5), Some(0.0));
    }

    fn state() -> impl Strategy<Value = State> {
        (0u64..10_000, 0u64..10_000).prop_map(|(a, b)| State::new(a, b))
    }

    proptest! {
        #[test]
        fn equality_is_agent_and_pre_state_independent(s1 in state(), s2 in state(), post in state()) {
            let a = prf_equality(AgentId::Alpha, &s1, &post);
            prop_assert_eq!(a, prf_equality(AgentId::Beta, &s2, &post));
            prop_assert_eq!(a, prf_equality(AgentId::Alpha, &s1, &post.swapped()));
            prop_assert!((-1.0..=1.0).contains(&a));
            assert_relative_eq!(a, 1.0 - 4.0 * gini(&post), epsilon = 1e-12);
        }

        #[test]
        fn gini_in_range(s in state()) {
            let g = gini(&s);
            prop_assert!((0.0..=0.5).contains(&g));
        }

        #[test]
        fn gain_mirror_and_range(s in state(), i in 0usize..4) {
            let m = PayoffMatrix::default();
            let scale = GainScale::from_matrix(&m);
            let a = JointAction::ALL[i];
            let ga = prf_gain(&scale, AgentId::Alpha, &s, &m.step(s, a)).unwrap();
            let gb = prf_gain(&scale, AgentId::Beta, &s, &m.step(s, a.swapped())).unwrap();
            prop_assert_eq!(ga, gb);
            prop_assert!((-1.0..=1.0).contains(&ga));
        }
    }
}
