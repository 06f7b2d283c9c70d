//! Generic labelled transition system substrate.
//!
//! A world is a set of states, a finite set of (joint) actions and a
//! deterministic step rule. Norms restrict which `(state, action)` pairs may
//! fire; the normative world keeps only the transitions every norm allows.
//! Paths are finite runs of consecutive transitions.

use std::fmt::Debug;

/// A deterministic labelled transition system.
pub trait TransitionSystem {
    type State: Clone + PartialEq + Debug;
    type Action: Copy + PartialEq + Debug;

    /// The finite joint-action alphabet.
    fn actions(&self) -> &[Self::Action];

    /// Successor of `state` under `action`. Must be total and deterministic.
    fn step(&self, state: &Self::State, action: Self::Action) -> Self::State;
}

/// A norm is a pure predicate over `(state, action)` pairs.
pub trait Norm<S, A> {
    fn allows(&self, state: &S, action: A) -> bool;
}

impl<S, A, F> Norm<S, A> for F
where
    F: Fn(&S, A) -> bool,
{
    fn allows(&self, state: &S, action: A) -> bool {
        self(state, action)
    }
}

/// True iff every norm allows `(state, action)`. An empty norm set allows
/// everything.
pub fn apply_norms<S, A: Copy>(norms: &[&dyn Norm<S, A>], state: &S, action: A) -> bool {
    norms.iter().all(|n| n.allows(state, action))
}

/// A transition system together with the norms in force.
pub struct NormativeWorld<'a, T: TransitionSystem> {
    pub system: &'a T,
    pub norms: Vec<&'a dyn Norm<T::State, T::Action>>,
}

impl<'a, T: TransitionSystem> NormativeWorld<'a, T> {
    pub fn unconstrained(system: &'a T) -> Self {
        Self {
            system,
            norms: Vec::new(),
        }
    }

    pub fn with_norms(system: &'a T, norms: Vec<&'a dyn Norm<T::State, T::Action>>) -> Self {
        Self { system, norms }
    }

    pub fn allows(&self, state: &T::State, action: T::Action) -> bool {
        apply_norms(&self.norms, state, action)
    }

    /// Actions that may fire in `state`.
    pub fn allowed_actions(&self, state: &T::State) -> Vec<T::Action> {
        self.system
            .actions()
            .iter()
            .copied()
            .filter(|&a| self.allows(state, a))
            .collect()
    }

    /// Successor of `state` under `action`, or `None` if a norm forbids it.
    pub fn step(&self, state: &T::State, action: T::Action) -> Option<T::State> {
        self.allows(state, action)
            .then(|| self.system.step(state, action))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition<S, A> {
    pub pre: S,
    pub action: A,
    pub post: S,
}

impl<S, A> Transition<S, A> {
    pub fn new(pre: S, action: A, post: S) -> Self {
        Self { pre, action, post }
    }
}

/// A finite sequence of transitions.
///
/// Construction does not check consecutiveness so that malformed paths can
/// be represented and rejected by [`validate_path`].
#[derive(Debug, Clone, PartialEq)]
pub struct Path<S, A> {
    transitions: Vec<Transition<S, A>>,
}

impl<S: PartialEq, A> Path<S, A> {
    pub fn from_transitions(transitions: Vec<Transition<S, A>>) -> Self {
        Self { transitions }
    }

    pub fn with_capacity(length: usize) -> Self {
        Self {
            transitions: Vec::with_capacity(length),
        }
    }

    pub fn push(&mut self, transition: Transition<S, A>) {
        self.transitions.push(transition);
    }

    pub fn transitions(&self) -> &[Transition<S, A>] {
        &self.transitions
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn first_state(&self) -> Option<&S> {
        self.transitions.first().map(|t| &t.pre)
    }

    pub fn last_state(&self) -> Option<&S> {
        self.transitions.last().map(|t| &t.post)
    }
}

/// True iff the path is non-empty and the post-state of every transition is
/// the pre-state of the next one.
pub fn validate_path<S: PartialEq, A>(path: &Path<S, A>) -> bool {
    !path.is_empty()
        && path
            .transitions
            .windows(2)
            .all(|w| w[0].post == w[1].pre)
}
