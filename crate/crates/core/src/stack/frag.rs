//! Subroutine fragments: the per-agent rules of every stack operation, in
//! their synchronous and orchestrated (semi-synchronous) forms.
//!
//! A fragment sees only what an agent can sense: whether the base agent is
//! co-located, and the roles/phases of co-located agents taking part in the
//! same subroutine instance. Which physical move `North`/`South` denote is
//! up to the world adapter (grid axis or virtual stack).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::grid::{OrientedMove, Port};

/// One stack operation.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Op {
    Init(u8),
    Inc(u8),
    /// Decrease by `k`, the mirror image of `Inc`.
    Dec(u8),
    Mult(u8),
    Div(u8),
    IsDiv(u8),
    /// Shift the whole stack (base included) one cell.
    Move(OrientedMove),
    /// Shift only the base: the fast agent notifies it and returns.
    Notify(OrientedMove),
    /// Shift the fast and slow agents (not the base).
    Shift(OrientedMove),
    /// The slow agent alone shifts on the fast agent's signal and leaves
    /// the subroutine.
    Push(OrientedMove),
    /// The fast agent walks north (or south) until it meets agent `target`.
    Seek { target: u8, north: bool },
}

impl Op {
    pub fn name(&self) -> String {
        match self {
            Op::Init(k) => format!("Init({k})"),
            Op::Inc(k) => format!("Inc({k})"),
            Op::Dec(k) => format!("Dec({k})"),
            Op::Mult(k) => format!("Mult({k})"),
            Op::Div(k) => format!("Div({k})"),
            Op::IsDiv(k) => format!("IsDiv({k})"),
            Op::Move(m) => format!("Move({m})"),
            Op::Notify(m) => format!("Notify({m})"),
            Op::Shift(m) => format!("Shift({m})"),
            Op::Push(m) => format!("Push({m})"),
            Op::Seek { target, north } => format!("Seek(a{target},{})", if *north { "north" } else { "south" }),
        }
    }

    /// Operations whose rate-based sync form is replaced by orchestration
    /// under SSYNC.
    pub fn is_rate_based(&self) -> bool {
        matches!(self, Op::Mult(_) | Op::Div(_))
    }

    /// Whether the slow agent stays in the subroutine until the end.
    fn slow_finishes(&self) -> bool {
        !matches!(self, Op::Push(_) | Op::Seek { .. })
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// An operation together with the agents that play its fast and slow parts.
/// For `Seek`, `slow` is unused; for `Push`, `slow` is the pushed agent.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct SubSpec {
    pub op: Op,
    pub fast: u8,
    pub slow: u8,
}

impl SubSpec {
    pub fn new(op: Op, fast: u8, slow: u8) -> Self {
        SubSpec { op, fast, slow }
    }

    /// The usual three-agent assignment.
    pub fn std(op: Op) -> Self {
        SubSpec { op, fast: 2, slow: 3 }
    }

    pub fn participates(&self, id: u8, orch: Option<u8>) -> bool {
        id == self.fast || (id == self.slow && !matches!(self.op, Op::Seek { .. })) || Some(id) == orch
    }

    /// Agents that end the subroutine in a `Fin` phase.
    pub fn finishers(&self, orch: Option<u8>) -> Vec<u8> {
        let mut v = vec![self.fast];
        if self.op.slow_finishes() {
            v.push(self.slow);
        }
        if let Some(o) = orch {
            v.push(o);
        }
        v
    }
}

/// The part an agent plays in the current subroutine.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Role {
    Fast,
    Slow,
    /// The semi-synchronous synchronizer driving a rate-based operation.
    Orch,
    /// The synchronizer travelling along in any other operation.
    Escort,
}

impl Role {
    pub fn of(spec: &SubSpec, id: u8, orch: Option<u8>) -> Option<Role> {
        if Some(id) == orch {
            Some(if spec.op.is_rate_based() { Role::Orch } else { Role::Escort })
        } else if id == spec.fast {
            Some(Role::Fast)
        } else if id == spec.slow && !matches!(spec.op, Op::Seek { .. }) {
            Some(Role::Slow)
        } else {
            None
        }
    }
}

/// Which of the two stack agents the synchronizer is attending.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Target {
    Fast,
    Slow,
}

/// Position inside a subroutine (plus the sequencing phases shared by all
/// subroutines).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Phase {
    /// Rate-based ops: outward leg (the slow agent's only leg), wait counter.
    Out(u8),
    /// Rate-based ops: the fast agent's return leg.
    Back(u8),
    /// IsDiv: counting steps towards the base; Move/Notify: walking to it.
    Down(u8),
    /// Walking back north carrying a verdict bit.
    Up(bool),
    Wait,
    Walk(u8),
    Notify,
    Go,
    Seek,
    /// Synchronizer: told `target` to step `north`/south, `count` steps done.
    Cmd { target: Target, north: bool, count: u8 },
    /// Synchronizer: followed `target`, `count` steps done.
    Arrive { target: Target, count: u8 },
    /// Synchronizer: walking to find `target`.
    Find { target: Target, north: bool },
    Halt,
    Fin(bool),
    /// Synchronizer: announcing the next subroutine.
    Launch,
    Idle,
    Done,
    /// Unoriented Move phases (see `unoriented::umove`).
    U(crate::unoriented::umove::UPhase),
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Out(j) => write!(f, "out{j}"),
            Phase::Back(j) => write!(f, "back{j}"),
            Phase::Down(c) => write!(f, "down{c}"),
            Phase::Up(v) => write!(f, "up{}", *v as u8),
            Phase::Wait => f.write_str("wait"),
            Phase::Walk(j) => write!(f, "walk{j}"),
            Phase::Notify => f.write_str("notify"),
            Phase::Go => f.write_str("go"),
            Phase::Seek => f.write_str("seek"),
            Phase::Cmd { target, north, count } => {
                write!(f, "cmd-{target:?}-{}-{count}", if *north { "n" } else { "s" })
            }
            Phase::Arrive { target, count } => write!(f, "arrive-{target:?}-{count}"),
            Phase::Find { target, north } => write!(f, "find-{target:?}-{}", if *north { "n" } else { "s" }),
            Phase::Halt => f.write_str("halt"),
            Phase::Fin(v) => write!(f, "fin{}", *v as u8),
            Phase::Launch => f.write_str("launch"),
            Phase::Idle => f.write_str("idle"),
            Phase::Done => f.write_str("done"),
            Phase::U(u) => write!(f, "{u}"),
        }
    }
}

/// The movement a fragment asks for, before the world adapter interprets it.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Dir {
    Stay,
    /// Away from the base along the stack.
    North,
    /// Towards the base along the stack.
    South,
    /// A step in a grid direction (oriented worlds).
    Shift(OrientedMove),
    /// A step through a port (unoriented worlds).
    Port(Port),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    Sync,
    Ssync,
}

/// What a fragment can sense.
#[derive(Clone, Copy)]
pub struct FragView<'a> {
    pub base_here: bool,
    /// Co-located agents of the same subroutine instance.
    pub peers: &'a [(Role, Phase)],
    /// Ids of all co-located agents, in any state.
    pub ids: &'a [u8],
    /// Unoriented grids: the base agent shares the physical cell (at any
    /// level).
    pub base_in_cell: bool,
    /// Unoriented grids: the port the base agent's orientation map assigns
    /// to the current move direction, when the base agent is in the cell.
    pub target_port: Option<Port>,
    /// Unoriented grids: the incident edges.
    pub edges: &'a [crate::grid::EdgeView],
    /// Unoriented grids: the observer stands at the base position of its
    /// cell's virtual stack.
    pub at_top: bool,
}

impl<'a> FragView<'a> {
    pub fn plain(base_here: bool, ids: &'a [u8]) -> Self {
        FragView { base_here, peers: &[], ids, base_in_cell: base_here, target_port: None, edges: &[], at_top: false }
    }

    pub fn has(&self, role: Role, pred: impl Fn(Phase) -> bool) -> bool {
        self.peers.iter().any(|(r, p)| *r == role && pred(*p))
    }

    pub fn has_role(&self, role: Role) -> bool {
        self.peers.iter().any(|(r, _)| *r == role)
    }
}

impl FragView<'_> {
    /// Slow agent or escort in phase `p`.
    fn slow_like(&self, pred: impl Fn(Phase) -> bool) -> bool {
        self.peers.iter().any(|(r, p)| matches!(r, Role::Slow | Role::Escort) && pred(*p))
    }
}

/// The phase an agent enters when a subroutine starts.
pub fn start_phase(op: Op, role: Role) -> Phase {
    match (op, role) {
        (Op::Init(_) | Op::Inc(_) | Op::Dec(_), _) => Phase::Walk(0),
        (Op::Mult(_) | Op::Div(_), Role::Orch) => {
            let first = if matches!(op, Op::Mult(_)) { Target::Slow } else { Target::Fast };
            Phase::Arrive { target: first, count: 0 }
        }
        (Op::Mult(_) | Op::Div(_), _) => Phase::Out(0),
        (Op::IsDiv(_), Role::Fast) => Phase::Down(0),
        (Op::IsDiv(_), _) => Phase::Wait,
        (Op::Move(_) | Op::Notify(_), Role::Fast) => Phase::Down(0),
        (Op::Move(_) | Op::Notify(_), _) => Phase::Wait,
        (Op::Shift(_), Role::Fast) => Phase::Go,
        (Op::Shift(_), _) => Phase::Wait,
        (Op::Push(_), Role::Slow) => Phase::Wait,
        (Op::Push(_), _) => Phase::Go,
        (Op::Seek { .. }, _) => Phase::Seek,
    }
}

fn step_mod(j: u8, m: u8) -> u8 {
    (j + 1) % m
}

/// The fragment transition. Returns `None` for pairs the fragment does not
/// define.
pub fn frag_step(op: Op, role: Role, phase: Phase, v: &FragView, mode: Mode) -> Option<(Phase, Dir)> {
    use Phase::*;
    let stay = |p: Phase| Some((p, Dir::Stay));
    match op {
        Op::Init(k) | Op::Inc(k) | Op::Dec(k) => match phase {
            Walk(j) if j >= k => stay(Fin(false)),
            Walk(j) => Some((Walk(j + 1), if matches!(op, Op::Dec(_)) { Dir::South } else { Dir::North })),
            _ => None,
        },
        Op::Mult(k) | Op::Div(k) => {
            let slow_dir = if matches!(op, Op::Mult(_)) { Dir::North } else { Dir::South };
            match mode {
                Mode::Sync => rate_sync(k, role, phase, v, slow_dir),
                Mode::Ssync => rate_ssync(op, k, role, phase, v, slow_dir),
            }
        }
        Op::IsDiv(k) => match (role, phase) {
            (Role::Fast, Down(c)) if v.base_here => Some((Up(c == 0), Dir::North)),
            (Role::Fast, Down(c)) => Some((Down(step_mod(c, k)), Dir::South)),
            (Role::Fast, Up(b)) if v.slow_like(|p| matches!(p, Wait | Fin(_))) => stay(Fin(b)),
            (Role::Fast, Up(b)) => Some((Up(b), Dir::North)),
            (Role::Slow | Role::Escort, Wait) => {
                for b in [false, true] {
                    if v.has(Role::Fast, |p| p == Up(b) || p == Fin(b)) {
                        return stay(Fin(b));
                    }
                }
                stay(Wait)
            }
            _ => None,
        },
        Op::Move(m) | Op::Notify(m) => {
            let full = matches!(op, Op::Move(_));
            match (role, phase) {
                (Role::Fast, Down(_)) if v.base_here => stay(Notify),
                (Role::Fast, Down(_)) => Some((Down(0), Dir::South)),
                (Role::Fast, Notify) if v.base_here => stay(Notify),
                (Role::Fast, Notify) => Some((Up(false), Dir::North)),
                (Role::Fast, Up(_)) if v.slow_like(|p| p == Wait) => stay(if full { Go } else { Fin(false) }),
                // under SSYNC the partner may have noticed us first
                (Role::Fast, Up(_)) if !full && v.slow_like(|p| matches!(p, Fin(_))) => stay(Fin(false)),
                (Role::Fast, Up(_)) => Some((Up(false), Dir::North)),
                (Role::Fast, Go) if full => go_step(m, v),
                (Role::Slow | Role::Escort, Wait) if full => {
                    if v.has(Role::Fast, |p| p == Go) {
                        Some((Fin(false), Dir::Shift(m)))
                    } else {
                        stay(Wait)
                    }
                }
                (Role::Slow | Role::Escort, Wait) => {
                    if v.has(Role::Fast, |p| p == Up(false) || p == Fin(false)) {
                        stay(Fin(false))
                    } else {
                        stay(Wait)
                    }
                }
                _ => None,
            }
        }
        Op::Shift(m) => match (role, phase) {
            (Role::Fast, Go) => go_step(m, v),
            (Role::Slow | Role::Escort, Wait) if v.has(Role::Fast, |p| p == Go) => Some((Fin(false), Dir::Shift(m))),
            (Role::Slow | Role::Escort, Wait) => stay(Wait),
            _ => None,
        },
        Op::Push(m) => match (role, phase) {
            (Role::Fast | Role::Escort, Go) if v.has_role(Role::Slow) => stay(Go),
            (Role::Fast | Role::Escort, Go) => stay(Fin(false)),
            (Role::Slow, Wait) if v.has(Role::Fast, |p| p == Go) => Some((Idle, Dir::Shift(m))),
            (Role::Slow, Wait) => stay(Wait),
            _ => None,
        },
        Op::Seek { target, north } => match phase {
            Seek if v.ids.contains(&target) => stay(Fin(false)),
            Seek => Some((Seek, if north { Dir::North } else { Dir::South })),
            _ => None,
        },
    }
}

/// The fast agent's final shift: once every slow-like agent has left.
fn go_step(m: OrientedMove, v: &FragView) -> Option<(Phase, Dir)> {
    if v.slow_like(|p| p == Phase::Wait) {
        Some((Phase::Go, Dir::Stay))
    } else {
        Some((Phase::Fin(false), Dir::Shift(m)))
    }
}

/// Multiplication/division with the fast agent at speed 1/(k-1) and the
/// slow one at speed 1/(k+1); the wait counters are the phase indices.
fn rate_sync(k: u8, role: Role, phase: Phase, v: &FragView, slow_dir: Dir) -> Option<(Phase, Dir)> {
    use Phase::*;
    let (mf, ms) = (k - 1, k + 1);
    match (role, phase) {
        (Role::Fast, Out(0)) if v.base_here => Some((Back(step_mod(0, mf)), Dir::North)),
        (Role::Fast, Out(0)) => Some((Out(step_mod(0, mf)), Dir::South)),
        (Role::Fast, Out(j)) => Some((Out(step_mod(j, mf)), Dir::Stay)),
        (Role::Fast, Back(0)) if v.has(Role::Slow, |p| p == Out(0)) => Some((Fin(false), Dir::Stay)),
        (Role::Fast, Back(0)) => Some((Back(step_mod(0, mf)), Dir::North)),
        (Role::Fast, Back(j)) => Some((Back(step_mod(j, mf)), Dir::Stay)),
        (Role::Slow, Out(0)) if v.has(Role::Fast, |p| p == Back(0)) => Some((Fin(false), Dir::Stay)),
        (Role::Slow, Out(0)) => Some((Out(step_mod(0, ms)), slow_dir)),
        (Role::Slow, Out(j)) => Some((Out(step_mod(j, ms)), Dir::Stay)),
        _ => None,
    }
}

/// Orchestrated multiplication/division: the slow agent takes k-1 steps,
/// then the fast agent k+1, and so on, each step on the synchronizer's
/// command. Multiplication starts with the slow agent, division with the
/// fast one, so that the fast agent never overtakes the slow one.
fn rate_ssync(op: Op, k: u8, role: Role, phase: Phase, v: &FragView, slow_dir: Dir) -> Option<(Phase, Dir)> {
    use Phase::*;
    let mult = matches!(op, Op::Mult(_));
    let orch_says = |t: Target| v.has(Role::Orch, |p| matches!(p, Cmd { target, .. } if target == t));
    let halted = v.has(Role::Orch, |p| p == Halt);
    match (role, phase) {
        (Role::Fast, Out(_) | Back(_)) if halted => Some((Fin(false), Dir::Stay)),
        (Role::Fast, Out(_)) if orch_says(Target::Fast) => {
            if v.base_here {
                Some((Back(0), Dir::North))
            } else {
                Some((Out(0), Dir::South))
            }
        }
        (Role::Fast, Back(_)) if orch_says(Target::Fast) => Some((Back(0), Dir::North)),
        (Role::Fast, Out(_) | Back(_)) => Some((phase, Dir::Stay)),
        (Role::Slow, Out(_)) if halted => Some((Fin(false), Dir::Stay)),
        (Role::Slow, Out(_)) if orch_says(Target::Slow) => Some((Out(0), slow_dir)),
        (Role::Slow, Out(_)) => Some((phase, Dir::Stay)),
        (Role::Orch, _) => orch_step(mult, k, phase, v),
        _ => None,
    }
}

fn orch_step(mult: bool, k: u8, phase: Phase, v: &FragView) -> Option<(Phase, Dir)> {
    use Phase::*;
    let quota = |t: Target| if t == Target::Slow { k - 1 } else { k + 1 };
    let present = |t: Target| v.has_role(if t == Target::Fast { Role::Fast } else { Role::Slow });
    let to_dir = |north: bool| if north { Dir::North } else { Dir::South };
    // the direction `t` will take when told to step now
    let heading = |t: Target| -> bool {
        match t {
            Target::Slow => mult,
            Target::Fast => v.has(Role::Fast, |p| matches!(p, Back(_))) || v.base_here,
        }
    };
    match phase {
        Cmd { target, north, count } => {
            if present(target) {
                Some((phase, Dir::Stay))
            } else {
                Some((Arrive { target, count: count + 1 }, to_dir(north)))
            }
        }
        Arrive { target, count } if count < quota(target) => {
            if present(target) {
                Some((Cmd { target, north: heading(target), count }, Dir::Stay))
            } else {
                Some((phase, Dir::Stay))
            }
        }
        Arrive { target, .. } => {
            // the batch is complete; the check follows the second agent's batch
            let check = if mult { Target::Fast } else { Target::Slow };
            let fast_turned = v.has(Role::Fast, |p| matches!(p, Back(_)));
            if target == check && fast_turned && v.has_role(Role::Slow) {
                return Some((Halt, Dir::Stay));
            }
            let other = if target == Target::Fast { Target::Slow } else { Target::Fast };
            // the slow agent is always north of the fast one
            let north = other == Target::Slow;
            if present(other) {
                Some((Cmd { target: other, north: heading(other), count: 0 }, Dir::Stay))
            } else {
                Some((Find { target: other, north }, to_dir(north)))
            }
        }
        Find { target, north } => {
            if present(target) {
                Some((Cmd { target, north: heading(target), count: 0 }, Dir::Stay))
            } else {
                Some((phase, to_dir(north)))
            }
        }
        Halt => {
            let fin = |r: Role| v.has(r, |p| matches!(p, Fin(_)));
            if fin(Role::Fast) && fin(Role::Slow) {
                Some((Fin(false), Dir::Stay))
            } else {
                Some((Halt, Dir::Stay))
            }
        }
        _ => None,
    }
}

/// Every phase a fragment of `op` can put an agent of `role` in, for
/// state-space enumeration.
pub fn phases_of(op: Op, role: Role, mode: Mode) -> Vec<Phase> {
    use Phase::*;
    let mut v = vec![Fin(false), Fin(true), Idle, Done];
    if role == Role::Orch {
        v.push(Launch);
    }
    if role == Role::Escort {
        v.push(Launch);
    }
    match op {
        Op::Init(k) | Op::Inc(k) | Op::Dec(k) => v.extend((0..=k).map(Walk)),
        Op::Mult(k) | Op::Div(k) => match (role, mode) {
            (Role::Fast, Mode::Sync) => {
                v.extend((0..k - 1).map(Out));
                v.extend((0..k - 1).map(Back));
            }
            (Role::Slow, Mode::Sync) => v.extend((0..k + 1).map(Out)),
            (Role::Fast, Mode::Ssync) => v.extend([Out(0), Back(0)]),
            (Role::Slow, Mode::Ssync) => v.push(Out(0)),
            (Role::Orch, _) => {
                for target in [Target::Fast, Target::Slow] {
                    for north in [false, true] {
                        v.push(Find { target, north });
                        for count in 0..=k + 1 {
                            v.push(Cmd { target, north, count });
                        }
                    }
                    for count in 0..=k + 2 {
                        v.push(Arrive { target, count });
                    }
                }
                v.push(Halt);
            }
            (Role::Escort, _) => {}
        },
        Op::IsDiv(k) => match role {
            Role::Fast => {
                v.extend((0..k).map(Down));
                v.extend([Up(false), Up(true)]);
            }
            _ => v.push(Wait),
        },
        Op::Move(_) | Op::Notify(_) | Op::Shift(_) | Op::Push(_) => {
            v.extend([Down(0), Notify, Up(false), Go, Wait]);
        }
        Op::Seek { .. } => v.push(Seek),
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn view<'a>(base_here: bool, peers: &'a [(Role, Phase)]) -> FragView<'a> {
        FragView { peers, ..FragView::plain(base_here, &[]) }
    }

    #[test]
    fn fast_agent_turns_at_the_base() {
        let v = view(true, &[]);
        assert_eq!(frag_step(Op::Mult(3), Role::Fast, Phase::Out(0), &v, Mode::Sync), Some((Phase::Back(1), Dir::North)));
        let v = view(false, &[]);
        assert_eq!(frag_step(Op::Mult(3), Role::Fast, Phase::Out(0), &v, Mode::Sync), Some((Phase::Out(1), Dir::South)));
    }

    #[test]
    fn speed_one_wraps_immediately_for_k2() {
        let v = view(false, &[]);
        assert_eq!(frag_step(Op::Mult(2), Role::Fast, Phase::Out(0), &v, Mode::Sync), Some((Phase::Out(0), Dir::South)));
    }

    #[test]
    fn division_sends_the_slow_agent_south() {
        let v = view(false, &[]);
        assert_eq!(frag_step(Op::Div(3), Role::Slow, Phase::Out(0), &v, Mode::Sync), Some((Phase::Out(1), Dir::South)));
    }

    #[test]
    fn meeting_in_aligned_states_terminates_both() {
        let peers = [(Role::Slow, Phase::Out(0))];
        let v = view(false, &peers);
        assert_eq!(frag_step(Op::Mult(5), Role::Fast, Phase::Back(0), &v, Mode::Sync), Some((Phase::Fin(false), Dir::Stay)));
        let peers = [(Role::Fast, Phase::Back(0))];
        let v = view(false, &peers);
        assert_eq!(frag_step(Op::Mult(5), Role::Slow, Phase::Out(0), &v, Mode::Sync), Some((Phase::Fin(false), Dir::Stay)));
    }

    #[test]
    fn stack_agents_wait_for_commands_under_ssync() {
        let v = view(false, &[]);
        assert_eq!(frag_step(Op::Mult(3), Role::Slow, Phase::Out(0), &v, Mode::Ssync), Some((Phase::Out(0), Dir::Stay)));
        let peers = [(Role::Orch, Phase::Cmd { target: Target::Slow, north: true, count: 0 })];
        let v = view(false, &peers);
        assert_eq!(frag_step(Op::Mult(3), Role::Slow, Phase::Out(0), &v, Mode::Ssync), Some((Phase::Out(0), Dir::North)));
    }

    #[test]
    fn isdiv_counts_modulo_k() {
        let v = view(false, &[]);
        assert_eq!(frag_step(Op::IsDiv(3), Role::Fast, Phase::Down(2), &v, Mode::Sync), Some((Phase::Down(0), Dir::South)));
        let v = view(true, &[]);
        assert_eq!(frag_step(Op::IsDiv(3), Role::Fast, Phase::Down(0), &v, Mode::Sync), Some((Phase::Up(true), Dir::North)));
    }
}
