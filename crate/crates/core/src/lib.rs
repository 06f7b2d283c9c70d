//! Value alignment of agent strategies in the two-agent iterated prisoner's
//! dilemma, with alignment equilibria and Pareto optimal alignments over
//! finite strategy spaces.

pub mod alignment;
pub mod config;
pub mod equilibria;
pub mod ipd;
pub mod lts;
pub mod output;
pub mod run;
pub mod strategies;
pub mod values;

pub use alignment::{
    alignment_exact, alignment_mc, sweep_heterogeneous, sweep_random_grid, AlignmentEstimate,
    AlignmentQuery, Estimator, SweepParams, ValueModel,
};
pub use equilibria::{
    classical_nash_check, find_alignment_equilibria, find_pareto, is_alignment_equilibrium,
    EquilibriumReport, StrategySpace, Tolerance, ValueAssignment,
};
pub use ipd::{Action, AgentId, JointAction, PayoffMatrix, State};
pub use strategies::{MemoryOneStrategy, RngSpec, StrategyProfile, StrategySpec};
pub use values::ValueId;
