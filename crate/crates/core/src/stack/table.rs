//! Stand-alone three-agent multiplication and division automata, state for
//! state as given by their transition tables.
//!
//! The chained protocols use the equivalent fragments in `frag`; these are
//! kept separate so the tables can be checked on their own.

use std::fmt;

use crate::automaton::{Move, Observation, Protocol, UndefinedTransition, WorldKind};
use crate::grid::{Labeling, OrientedMove};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum RateState {
    /// `a1`, fixed for the whole run.
    Base,
    /// `a2` on its way south, wait counter `j < k-1`.
    Out(u8),
    /// `a2` on its way back north.
    Back(u8),
    FastFin,
    /// `a3`, wait counter `j <= k`.
    Slow(u8),
    SlowFin,
}

/// A state with the multiplier it belongs to, for display.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct RateTag {
    pub k: u8,
    pub div: bool,
    pub s: RateState,
}

impl fmt::Display for RateTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = if self.div { "Div" } else { "Mult" };
        let k = self.k;
        match self.s {
            RateState::Base => write!(f, "{name}:1:k{k}:phase0"),
            RateState::Out(j) => write!(f, "{name}:2:k{k}:phase{j}"),
            RateState::Back(j) => write!(f, "{name}back:2:k{k}:phase{j}"),
            RateState::FastFin => write!(f, "{name}:2:k{k}:fin"),
            RateState::Slow(j) => write!(f, "{name}:3:k{k}:phase{j}"),
            RateState::SlowFin => write!(f, "{name}:3:k{k}:fin"),
        }
    }
}

/// `a1` stays put; `a2` walks south at speed `1/(k-1)` to `a1` and back
/// north; `a3` walks north (multiplication) or south (division) at speed
/// `1/(k+1)`. Both stop when they meet in aligned states.
#[derive(Clone, Copy, Debug)]
pub struct RateTable {
    pub k: u8,
    pub div: bool,
}

pub fn build_mult_automaton(k: u8) -> RateTable {
    assert!(k >= 2, "multiplier must be at least 2");
    RateTable { k, div: false }
}

pub fn build_div_automaton(k: u8) -> RateTable {
    assert!(k >= 2, "divisor must be at least 2");
    RateTable { k, div: true }
}

impl RateTable {
    fn tag(&self, s: RateState) -> RateTag {
        RateTag { k: self.k, div: self.div, s }
    }

    /// The successor of wait counter `j` modulo `m`.
    fn tick(j: u8, m: u8) -> u8 {
        (j + 1) % m
    }
}

impl Protocol for RateTable {
    type State = RateTag;

    fn kind(&self) -> WorldKind {
        WorldKind::Oriented
    }

    fn agent_count(&self) -> usize {
        3
    }

    fn initial_states(&self, _: Option<&dyn Labeling>) -> Vec<RateTag> {
        vec![self.tag(RateState::Base), self.tag(RateState::Out(0)), self.tag(RateState::Slow(0))]
    }

    fn delta(&self, s: &RateTag, obs: &Observation<RateTag>) -> Result<(RateTag, Move), UndefinedTransition> {
        use RateState::*;
        let k = self.k;
        let north = Move::Oriented(OrientedMove::NORTH);
        let south = Move::Oriented(OrientedMove::SOUTH);
        let slow_dir = if self.div { south } else { north };
        let seen = |x: RateState| obs.contains(&self.tag(x));
        let (next, mv) = match s.s {
            Base => (Base, Move::Stay),
            Out(0) if seen(Base) => (Back(Self::tick(0, k - 1)), north),
            Out(0) => (Out(Self::tick(0, k - 1)), south),
            Out(j) => (Out(Self::tick(j, k - 1)), Move::Stay),
            Back(0) if seen(Slow(0)) => (FastFin, Move::Stay),
            Back(0) => (Back(Self::tick(0, k - 1)), north),
            Back(j) => (Back(Self::tick(j, k - 1)), Move::Stay),
            Slow(0) if seen(Back(0)) => (SlowFin, Move::Stay),
            Slow(0) => (Slow(Self::tick(0, k + 1)), slow_dir),
            Slow(j) => (Slow(Self::tick(j, k + 1)), Move::Stay),
            FastFin | SlowFin => (s.s, Move::Stay),
        };
        Ok((self.tag(next), mv))
    }

    fn is_terminal(&self, states: &[RateTag]) -> bool {
        states.iter().any(|t| t.s == RateState::FastFin) && states.iter().any(|t| t.s == RateState::SlowFin)
    }

    fn enumerate_states(&self) -> Option<Vec<RateTag>> {
        use RateState::*;
        let k = self.k;
        let mut v = vec![Base, FastFin, SlowFin];
        v.extend((0..k - 1).map(Out));
        v.extend((0..k - 1).map(Back));
        v.extend((0..=k).map(Slow));
        Some(v.into_iter().map(|s| self.tag(s)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::step_agent;

    fn obs(t: &RateTable, xs: &[RateState]) -> Observation<RateTag> {
        Observation::new(xs.iter().map(|&s| t.tag(s)), None)
    }

    #[test]
    fn fast_agent_heads_south_without_the_base() {
        let t = build_mult_automaton(3);
        let o = obs(&t, &[RateState::Out(0), RateState::Slow(0)]);
        let (s, m) = step_agent(&t, &t.tag(RateState::Out(0)), &o).unwrap();
        assert_eq!(s.to_string(), "Mult:2:k3:phase1");
        assert_eq!(m, Move::Oriented(OrientedMove::SOUTH));
    }

    #[test]
    fn fast_agent_turns_when_it_sees_the_base() {
        let t = build_mult_automaton(3);
        let o = obs(&t, &[RateState::Out(0), RateState::Base]);
        let (s, m) = step_agent(&t, &t.tag(RateState::Out(0)), &o).unwrap();
        assert_eq!(s.to_string(), "Multback:2:k3:phase1");
        assert_eq!(m, Move::Oriented(OrientedMove::NORTH));
    }

    #[test]
    fn slow_counter_wraps_in_place() {
        let t = build_mult_automaton(3);
        let o = obs(&t, &[RateState::Slow(3)]);
        let (s, m) = step_agent(&t, &t.tag(RateState::Slow(3)), &o).unwrap();
        assert_eq!(s.s, RateState::Slow(0));
        assert_eq!(m, Move::Stay);
    }

    #[test]
    fn state_count_matches_the_table() {
        // a1: 1, a2: 2(k-1) + fin, a3: k+1 + fin
        for k in 2..8u8 {
            let t = build_mult_automaton(k);
            assert_eq!(t.enumerate_states().unwrap().len(), 1 + 2 * (k as usize - 1) + 1 + k as usize + 1 + 1);
        }
    }
}
