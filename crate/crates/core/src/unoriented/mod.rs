//! Unoriented grids: the auxiliary forest given by port 1, the virtual
//! stacks laid along it, and the orientation map the base agent carries.
//!
//! Every cell `c` points to its parent through port 1. Since port-1 walks
//! never revisit a cell, these edges form a forest. `Virt_c` is the depth-first
//! traversal of that forest starting at `c` and always leaving subtrees
//! upwards: a virtual position is a cell together with a level telling which
//! incoming edge is the next to explore, `indeg + 1` meaning "go to the
//! parent".

pub mod protocol;
pub mod umove;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::automaton::{Move, Observation, Protocol, UndefinedTransition, WorldKind};
use crate::grid::{edge_views, far_port, EdgeView, Labeling, OrientedMove, Port, MAX_DIM};
use crate::grid::Cell;

pub use protocol::{run_explore_unoriented, run_virtual_script, UAgent, UProtocol, VirtualRun};

/// The parent port of every cell.
pub const PARENT: Port = 1;

/// A cell as an agent standing on it sees it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Local {
    /// Ports whose far end is the neighbor's port 1, ascending: the edges
    /// from children. The child behind `incoming[l-1]` has edge level `l`.
    pub incoming: Vec<Port>,
    /// The label, at the parent, of the edge to the parent.
    pub parent_far: Port,
}

impl Local {
    pub fn from_edges(edges: &[EdgeView]) -> Self {
        let mut incoming: Vec<Port> = edges.iter().filter(|e| e.far_port == PARENT).map(|e| e.near_port).collect();
        incoming.sort_unstable();
        let parent_far = edges.iter().find(|e| e.near_port == PARENT).expect("port 1 exists").far_port;
        Local { incoming, parent_far }
    }

    pub fn at(lab: &dyn Labeling, c: &Cell) -> Self {
        Local::from_edges(&edge_views(lab, c).expect("cell inside the grid"))
    }

    pub fn indeg(&self) -> u8 {
        self.incoming.len() as u8
    }

    /// The level of the base position `Virt_c[0]`.
    pub fn top(&self) -> u8 {
        self.indeg() + 1
    }

    /// Edge level of the incoming edge labelled `q` here.
    pub fn rank(&self, q: Port) -> Option<u8> {
        self.incoming.iter().position(|&p| p == q).map(|i| i as u8 + 1)
    }
}

/// Number of children of `c` in the forest.
pub fn indeg(lab: &dyn Labeling, c: &Cell) -> u8 {
    Local::at(lab, c).indeg()
}

/// The level of the edge from `child` to its parent, among the parent's
/// incoming edges ordered by their port at the parent.
pub fn edge_level(lab: &dyn Labeling, child: &Cell) -> u8 {
    let (parent, q) = far_port(lab, child, PARENT).expect("parent inside the grid");
    Local::at(lab, &parent).rank(q).expect("port 1 edge is incoming at the parent")
}

/// A position on a virtual stack.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct VirtPos {
    pub cell: Cell,
    pub level: u8,
}

impl fmt::Display for VirtPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.cell, self.level)
    }
}

/// How the level is fixed once a virtual move has landed.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Settle {
    /// Entered a child from its parent.
    One,
    /// Entered a cell from its parent's side at its base position, or
    /// crossed to a fresh cell.
    Top,
    /// Arrived at a parent through its incoming port `q`; the level is the
    /// edge level plus `plus`.
    Rank { q: Port, plus: u8 },
}

impl Settle {
    pub fn level(self, here: &Local) -> Option<u8> {
        match self {
            Settle::One => Some(1),
            Settle::Top => Some(here.top()),
            Settle::Rank { q, plus } => here.rank(q).map(|l| l + plus),
        }
    }
}

/// The port to leave by and the pending settlement for one virtual step
/// from `level` at a cell seen as `here`.
pub fn virt_act(here: &Local, level: u8, forward: bool) -> Option<(Port, Settle)> {
    let top = here.top();
    if level == 0 || level > top {
        return None;
    }
    let up = Settle::Rank { q: here.parent_far, plus: forward as u8 };
    Some(match (forward, level) {
        (true, l) if l == top => (PARENT, up),
        (true, l) => (here.incoming[l as usize - 1], Settle::One),
        (false, 1) => (PARENT, up),
        (false, l) => (here.incoming[l as usize - 2], Settle::Top),
    })
}

fn virt_step(lab: &dyn Labeling, p: VirtPos, forward: bool) -> VirtPos {
    let here = Local::at(lab, &p.cell);
    let (port, settle) = virt_act(&here, p.level, forward).expect("level within range");
    let cell = crate::grid::traverse_port(lab, &p.cell, port).expect("inside the grid");
    let level = settle.level(&Local::at(lab, &cell)).expect("arrived by an incoming edge");
    VirtPos { cell, level }
}

/// `Virt[j+1]` from `Virt[j]`.
pub fn virt_next(lab: &dyn Labeling, p: VirtPos) -> VirtPos {
    virt_step(lab, p, true)
}

/// `Virt[j-1]` from `Virt[j]`, for `j >= 1`.
pub fn virt_prev(lab: &dyn Labeling, p: VirtPos) -> VirtPos {
    virt_step(lab, p, false)
}

/// The base position `Virt_c[0]`.
pub fn virt_base(lab: &dyn Labeling, c: &Cell) -> VirtPos {
    VirtPos { cell: *c, level: Local::at(lab, c).top() }
}

/// `Virt_c[0..horizon]`.
pub fn virt_oracle(lab: &dyn Labeling, c: &Cell, horizon: usize) -> Vec<VirtPos> {
    let mut out = Vec::with_capacity(horizon);
    let mut p = virt_base(lab, c);
    for _ in 0..horizon {
        out.push(p);
        p = virt_next(lab, p);
    }
    out
}

/// The index of `p` in `Virt_c`, searching up to `horizon`.
pub fn virt_index(lab: &dyn Labeling, c: &Cell, p: VirtPos, horizon: usize) -> Option<u64> {
    let mut q = virt_base(lab, c);
    for j in 0..horizon as u64 {
        if q == p {
            return Some(j);
        }
        q = virt_next(lab, q);
    }
    None
}

/// The base agent's orientation map: for every global direction, the port
/// at its current cell leading there. The names are fixed once and carried
/// along by handrail moves.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Frame {
    ports: [Port; 2 * MAX_DIM],
}

impl Frame {
    fn index(m: OrientedMove) -> usize {
        2 * (m.dim as usize - 1) + (m.sign < 0) as usize
    }

    /// The map at `c` read from the labels.
    pub fn at(lab: &dyn Labeling, c: &Cell) -> Self {
        let mut ports = [0; 2 * MAX_DIM];
        for dim in 1..=lab.dim() as u8 {
            for sign in [1, -1] {
                let m = OrientedMove::new(sign, dim);
                ports[Self::index(m)] = lab.port_toward(c, m);
            }
        }
        Frame { ports }
    }

    pub fn port(&self, m: OrientedMove) -> Port {
        self.ports[Self::index(m)]
    }
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let used: Vec<Port> = self.ports.iter().copied().take_while(|&p| p != 0).collect();
        write!(f, "Frame{used:?}")
    }
}

/// State of the lone virtual walker: a direction, the current level, and a
/// pending settlement between the two steps of a move.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct WalkState {
    pub forward: bool,
    pub level: u8,
    pub settle: Option<Settle>,
}

impl fmt::Display for WalkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = if self.forward { "fwd" } else { "bwd" };
        match self.settle {
            Some(s) => write!(f, "{d}:{}:{s:?}", self.level),
            None => write!(f, "{d}:{}", self.level),
        }
    }
}

/// One agent walking its virtual stack in a fixed direction, two steps per
/// virtual move: leave through a port, then settle the level.
pub struct VirtualWalker {
    pub start: WalkState,
}

impl Protocol for VirtualWalker {
    type State = WalkState;

    fn kind(&self) -> WorldKind {
        WorldKind::Unoriented
    }

    fn agent_count(&self) -> usize {
        1
    }

    fn initial_states(&self, _: Option<&dyn Labeling>) -> Vec<WalkState> {
        vec![self.start]
    }

    fn delta(&self, s: &WalkState, obs: &Observation<WalkState>) -> Result<(WalkState, Move), UndefinedTransition> {
        let undefined = || UndefinedTransition::new(s, obs);
        let here = Local::from_edges(obs.edges.as_deref().ok_or_else(undefined)?);
        match s.settle {
            None => {
                let (port, settle) = virt_act(&here, s.level, s.forward).ok_or_else(undefined)?;
                Ok((WalkState { settle: Some(settle), ..*s }, Move::Port(port)))
            }
            Some(settle) => {
                let level = settle.level(&here).ok_or_else(undefined)?;
                Ok((WalkState { level, settle: None, ..*s }, Move::Stay))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PortLabeling;
    use crate::scheduler::{run_from, RunConfig, Schedule, World};
    use std::sync::Arc;

    #[test]
    fn edge_levels_follow_port_order() {
        // a cell whose incoming edges carry ports 3 and 5
        let here = Local { incoming: vec![3, 5], parent_far: 2 };
        assert_eq!(here.rank(3), Some(1));
        assert_eq!(here.rank(5), Some(2));
        assert_eq!(here.top(), 3);
    }

    #[test]
    fn forward_and_backward_are_inverse() {
        for seed in 0..10 {
            let lab = PortLabeling::potential_split(seed, 2);
            let path = virt_oracle(&lab, &Cell::origin(2), 300);
            for w in path.windows(2) {
                assert_eq!(virt_prev(&lab, w[1]), w[0]);
            }
        }
    }

    #[test]
    fn consistent_labeling_stack_is_a_straight_line() {
        let lab = PortLabeling::consistent(2);
        let path = virt_oracle(&lab, &Cell::origin(2), 20);
        let d = lab.direction(&Cell::origin(2), PARENT);
        for (j, p) in path.iter().enumerate() {
            let mut delta = vec![0i64; 2];
            delta[d.dim as usize - 1] = d.sign as i64 * j as i64;
            assert_eq!(p.cell, Cell::origin(2).offset(&delta).unwrap());
        }
    }

    #[test]
    fn lone_walker_takes_two_steps_per_move() {
        let lab = PortLabeling::potential_split(7, 2);
        let world = World::unoriented(Arc::new(lab.clone()));
        let c = Cell::origin(2);
        let path = virt_oracle(&lab, &c, 60);
        let start = WalkState { forward: true, level: path[0].level, settle: None };
        let proto = VirtualWalker { start };
        let cfg = RunConfig::new(Schedule::Fsync, 2 * 50);
        let mut seen = Vec::new();
        let mut mon = |t: u64, a: &[(Cell, WalkState)]| {
            if t % 2 == 0 {
                seen.push(VirtPos { cell: a[0].0, level: a[0].1.level });
            }
            false
        };
        let _ = run_from(&proto, &world, vec![(c, start)], &cfg, &mut mon);
        assert_eq!(seen, path[1..=50]);
    }

    #[test]
    fn frame_matches_labels() {
        let lab = PortLabeling::potential_split(3, 3);
        let c = Cell::new(&[2, -1, 4]);
        let f = Frame::at(&lab, &c);
        for dim in 1..=3 {
            for sign in [1, -1] {
                let m = OrientedMove::new(sign, dim);
                assert_eq!(lab.direction(&c, f.port(m)), m);
            }
        }
    }
}
