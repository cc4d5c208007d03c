//! Finite-automaton agents: moves, observations and the transition-function
//! interface every protocol implements.

use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Cell, EdgeView, Labeling, OrientedMove, Port};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum WorldKind {
    Oriented,
    Unoriented,
}

/// What an agent does in the move phase of its cycle.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Move {
    Stay,
    /// Oriented worlds only.
    Oriented(OrientedMove),
    /// Unoriented worlds only: leave through this port.
    Port(Port),
    /// Unoriented worlds only: leave through this port with a co-located
    /// helper, updating the mover's orientation map.
    Handrail(Port),
}

impl Move {
    pub fn is_stay(&self) -> bool {
        matches!(self, Move::Stay) || matches!(self, Move::Oriented(m) if m.is_stay())
    }
}

impl From<OrientedMove> for Move {
    fn from(m: OrientedMove) -> Self {
        if m.is_stay() {
            Move::Stay
        } else {
            Move::Oriented(m)
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Stay => f.write_str("stay"),
            Move::Oriented(m) => write!(f, "{m}"),
            Move::Port(p) => write!(f, "port{p}"),
            Move::Handrail(p) => write!(f, "handrail{p}"),
        }
    }
}

/// The local snapshot an agent takes: the set of states in its cell
/// (including its own) and, on unoriented grids, the incident edge labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation<S> {
    states: Vec<S>,
    pub edges: Option<Vec<EdgeView>>,
}

impl<S: PartialEq> Observation<S> {
    /// Builds an observation with set semantics: duplicates collapse.
    pub fn new(states: impl IntoIterator<Item = S>, edges: Option<Vec<EdgeView>>) -> Self {
        let mut out: Vec<S> = Vec::new();
        for s in states {
            if !out.contains(&s) {
                out.push(s);
            }
        }
        Observation { states: out, edges }
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn contains(&self, s: &S) -> bool {
        self.states.contains(s)
    }

    pub fn any(&self, pred: impl Fn(&S) -> bool) -> bool {
        self.states.iter().any(pred)
    }
}

impl<S: fmt::Display> fmt::Display for Observation<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, s) in self.states.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("}")?;
        if let Some(e) = &self.edges {
            write!(f, " edges[")?;
            for (i, v) in e.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{}/{}", v.near_port, v.far_port)?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

/// A (state, observation) pair the transition function does not cover.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("undefined transition from state {state} under observation {observation}")]
pub struct UndefinedTransition {
    pub state: String,
    pub observation: String,
}

impl UndefinedTransition {
    pub fn new<S: fmt::Display>(s: &S, o: &Observation<S>) -> Self {
        UndefinedTransition { state: s.to_string(), observation: o.to_string() }
    }
}

/// A protocol: a finite state space, initial states for each agent, and a
/// deterministic transition function.
pub trait Protocol {
    type State: Clone + Eq + Hash + fmt::Debug + fmt::Display;

    fn kind(&self) -> WorldKind;

    fn agent_count(&self) -> usize;

    /// Initial states, in agent order. `lab` is the world's labeling on
    /// unoriented grids.
    fn initial_states(&self, lab: Option<&dyn Labeling>) -> Vec<Self::State>;

    fn delta(
        &self,
        s: &Self::State,
        obs: &Observation<Self::State>,
    ) -> Result<(Self::State, Move), UndefinedTransition>;

    /// Whether an agent in state `s` can serve as the helper of a handrail move.
    fn is_handrail_helper(&self, _s: &Self::State) -> bool {
        false
    }

    /// The mover's state after a handrail move from `from` to `to`.
    fn after_handrail(&self, s: Self::State, _lab: &dyn Labeling, _from: &Cell, _to: &Cell) -> Self::State {
        s
    }

    /// True once the protocol has nothing left to do.
    fn is_terminal(&self, _states: &[Self::State]) -> bool {
        false
    }

    /// A short label when the transition `before -> after` crosses a
    /// subroutine boundary; used for boundary-level traces.
    fn boundary(&self, _before: &Self::State, _after: &Self::State) -> Option<String> {
        None
    }

    /// Every state of the protocol, when the state space is enumerable.
    fn enumerate_states(&self) -> Option<Vec<Self::State>> {
        None
    }
}

/// Applies the transition function after checking that the observation
/// matches the protocol's world kind.
pub fn step_agent<P: Protocol>(
    p: &P,
    s: &P::State,
    o: &Observation<P::State>,
) -> Result<(P::State, Move), UndefinedTransition> {
    let unoriented = o.edges.is_some();
    if unoriented != (p.kind() == WorldKind::Unoriented) {
        return Err(UndefinedTransition::new(s, o));
    }
    p.delta(s, o)
}

/// The observation of agent `me` in a world snapshot.
pub fn observe<S: Clone + PartialEq>(
    agents: &[(Cell, S)],
    me: usize,
    lab: Option<&dyn Labeling>,
) -> Observation<S> {
    let here = agents[me].0;
    let states = agents.iter().filter(|(c, _)| *c == here).map(|(_, s)| s.clone());
    let edges = lab.map(|l| crate::grid::edge_views(l, &here).expect("edge views at a reachable cell"));
    Observation::new(states, edges)
}
