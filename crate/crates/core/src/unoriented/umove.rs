//! Shifting a virtual stack by one cell.
//!
//! The base `a1` sits at `c'` and the stack lives on `Virt_{c'}`. Afterwards
//! `a1` sits at the neighbor `c''` and both mobile agents are at
//! `Virt_{c''}[X]`. `North` and `South` below are virtual steps; `Port`
//! crosses an edge and lands at the base position of the new cell.
//!
//! FSYNC: `a2` walks down at speed 1, crosses, and climbs at speed 1/2;
//! `a3` walks down at speed 1/2, serves as `a1`'s helper, crosses, and
//! climbs at speed 1. Each starts climbing a fixed hold after reaching the
//! base, so they meet exactly at height `X`.
//!
//! SSYNC: `a2` walks down and crosses alone, then the synchronizer `a4`
//! pairs every step of `a3` down the old stack with a step of `a2` up the
//! new one, shuttling between the two stacks. Once `a3` is at the base it
//! crosses, `a4` helps `a1` across, and `a3` climbs until it meets `a2`.
//!
//! `a4` finds `c''` from the new stack by remembering the port `p` at
//! `c'` and its far label `q`: at a base position whose port `q` has far
//! label `p` it crosses, and turns back unless `a1` is there.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::grid::Port;
use crate::stack::frag::{Dir, FragView, Mode, Phase, Role};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum UPhase {
    /// `a2` walking to the base of the old stack.
    Desc,
    /// FSYNC `a3` walking down at half speed.
    SlowDesc(u8),
    /// Helper of `a1`'s handrail move through `p`.
    Helper { p: Port },
    /// FSYNC: steps left before climbing.
    Hold(u8),
    /// FSYNC `a2` climbing at half speed.
    FastClimb(u8),
    /// `a3` climbing towards `a2`.
    Climb,
    /// SSYNC: waiting for the synchronizer's commands.
    Parked,
    /// SSYNC `a4` walking down behind `a2`.
    Escort,
    FindA2 { p: Port, q: Port },
    ToA3Down { p: Port, q: Port, probed: bool, last: bool },
    Probe { p: Port, q: Port, last: bool },
    ToA3Up { p: Port, q: Port, last: bool },
    CmdDown { p: Port, q: Port },
    ArrA3 { p: Port, q: Port },
    ToA2Down { p: Port, q: Port, last: bool },
    ToA2Up { p: Port, q: Port, last: bool },
    CmdUp { p: Port, q: Port, last: bool },
    ArrA2 { p: Port, q: Port, last: bool },
    CmdCross { p: Port, q: Port },
    EscUp,
}

impl fmt::Display for UPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use UPhase::*;
        match self {
            Desc => f.write_str("udesc"),
            SlowDesc(c) => write!(f, "uslow{c}"),
            Helper { p } => write!(f, "uhelp{p}"),
            Hold(r) => write!(f, "uhold{r}"),
            FastClimb(c) => write!(f, "ufclimb{c}"),
            Climb => f.write_str("uclimb"),
            Parked => f.write_str("upark"),
            Escort => f.write_str("uesc"),
            EscUp => f.write_str("uescup"),
            other => write!(f, "u{other:?}"),
        }
    }
}

/// Hold, in slots, between reaching the base and climbing: half of
/// `T_n = 4n + 8` steps, since every slot is two steps.
pub fn hold_slots(n: usize) -> u8 {
    (2 * n + 4) as u8
}

pub fn start(role: Role, mode: Mode) -> Phase {
    Phase::U(match (role, mode) {
        (Role::Fast, _) => UPhase::Desc,
        (Role::Slow, Mode::Sync) => UPhase::SlowDesc(0),
        (Role::Slow, Mode::Ssync) => UPhase::Parked,
        _ => UPhase::Escort,
    })
}

fn has(v: &FragView, role: Role, pred: impl Fn(UPhase) -> bool) -> bool {
    v.has(role, |p| match p {
        Phase::U(u) => pred(u),
        Phase::Fin(_) => false,
        _ => false,
    })
}

fn fin(v: &FragView, role: Role) -> bool {
    v.has(role, |p| matches!(p, Phase::Fin(_)))
}

/// One transition of the unoriented Move; `hold` is [`hold_slots`].
pub fn step(role: Role, phase: Phase, v: &FragView, mode: Mode, hold: u8) -> Option<(Phase, Dir)> {
    use UPhase::*;
    let Phase::U(u) = phase else {
        return match phase {
            Phase::Fin(_) => Some((phase, Dir::Stay)),
            _ => None,
        };
    };
    let stay = |u: UPhase| Some((Phase::U(u), Dir::Stay));
    let go = |u: UPhase, d: Dir| Some((Phase::U(u), d));
    let done = || Some((Phase::Fin(false), Dir::Stay));
    let sync = mode == Mode::Sync;
    match (role, u) {
        (Role::Fast, Desc) if v.base_here => {
            let p = v.target_port?;
            go(if sync { Hold(hold - 1) } else { Parked }, Dir::Port(p))
        }
        (_, Desc) => go(Desc, Dir::South),
        (_, SlowDesc(1)) => stay(SlowDesc(0)),
        (_, SlowDesc(_)) if v.base_here => stay(Helper { p: v.target_port? }),
        (_, SlowDesc(_)) => go(SlowDesc(1), Dir::South),
        (_, Helper { .. }) if v.base_in_cell => stay(u),
        (Role::Slow, Helper { p }) => go(Hold(hold - 3), Dir::Port(p)),
        (_, Helper { p }) => go(EscUp, Dir::Port(p)),
        (_, Hold(r)) if r > 0 => stay(Hold(r - 1)),
        (Role::Fast, Hold(_)) => go(FastClimb(1), Dir::North),
        (_, Hold(_)) => go(Climb, Dir::North),
        (_, FastClimb(1)) => stay(FastClimb(0)),
        (_, FastClimb(_)) if has(v, Role::Slow, |u| u == Climb) || fin(v, Role::Slow) => done(),
        (_, FastClimb(_)) => go(FastClimb(1), Dir::North),
        (_, Climb) if v.has_role(Role::Fast) => done(),
        (_, Climb) => go(Climb, Dir::North),
        (Role::Fast, Parked) if has(v, Role::Slow, |u| u == Climb) || fin(v, Role::Slow) => done(),
        (Role::Fast, Parked) if has(v, Role::Escort, |u| matches!(u, CmdUp { .. })) => go(Parked, Dir::North),
        (Role::Slow, Parked) if has(v, Role::Escort, |u| matches!(u, CmdDown { .. })) => go(Parked, Dir::South),
        (Role::Slow, Parked) => {
            let cross = v.peers.iter().find_map(|(r, ph)| match (r, ph) {
                (Role::Escort, Phase::U(CmdCross { p, .. })) => Some(*p),
                _ => None,
            });
            match cross {
                Some(p) => go(Climb, Dir::Port(p)),
                None => stay(Parked),
            }
        }
        (_, Parked) => stay(Parked),
        (_, Escort) if v.base_here => {
            let p = v.target_port?;
            let q = v.edges.iter().find(|e| e.near_port == p)?.far_port;
            go(FindA2 { p, q }, Dir::Port(p))
        }
        (_, Escort) => go(Escort, Dir::South),
        (_, FindA2 { p, q }) if has(v, Role::Fast, |u| u == Parked) => {
            stay(ToA3Down { p, q, probed: false, last: false })
        }
        (_, FindA2 { .. }) => stay(u),
        (_, ToA3Down { p, q, probed: false, last })
            if v.at_top && v.edges.iter().any(|e| e.near_port == q && e.far_port == p) =>
        {
            go(Probe { p, q, last }, Dir::Port(q))
        }
        (_, ToA3Down { p, q, last, .. }) => go(ToA3Down { p, q, probed: false, last }, Dir::South),
        (_, Probe { p, q, last }) if v.base_here => stay(ToA3Up { p, q, last }),
        (_, Probe { p, q, last }) => go(ToA3Down { p, q, probed: true, last }, Dir::Port(p)),
        (_, ToA3Up { p, q, last }) if has(v, Role::Slow, |u| u == Parked) => {
            stay(if last { CmdCross { p, q } } else { CmdDown { p, q } })
        }
        (_, ToA3Up { .. }) => go(u, Dir::North),
        (_, CmdDown { .. }) if v.has_role(Role::Slow) => stay(u),
        (_, CmdDown { p, q }) => go(ArrA3 { p, q }, Dir::South),
        (_, ArrA3 { p, q }) if has(v, Role::Slow, |u| u == Parked) => stay(ToA2Down { p, q, last: v.base_here }),
        (_, ArrA3 { .. }) => stay(u),
        (_, ToA2Down { p, q, last }) if v.base_here => go(ToA2Up { p, q, last }, Dir::Port(p)),
        (_, ToA2Down { .. }) => go(u, Dir::South),
        (_, ToA2Up { p, q, last }) if has(v, Role::Fast, |u| u == Parked) => stay(CmdUp { p, q, last }),
        (_, ToA2Up { .. }) => go(u, Dir::North),
        (_, CmdUp { .. }) if v.has_role(Role::Fast) => stay(u),
        (_, CmdUp { p, q, last }) => go(ArrA2 { p, q, last }, Dir::North),
        (_, ArrA2 { p, q, last }) if has(v, Role::Fast, |u| u == Parked) => {
            stay(ToA3Down { p, q, probed: false, last })
        }
        (_, ArrA2 { .. }) => stay(u),
        (_, CmdCross { .. }) if v.has_role(Role::Slow) => stay(u),
        (_, CmdCross { p, .. }) => stay(Helper { p }),
        (_, EscUp) if v.has_role(Role::Fast) => {
            if fin(v, Role::Fast) && fin(v, Role::Slow) {
                done()
            } else {
                stay(EscUp)
            }
        }
        (_, EscUp) => go(EscUp, Dir::North),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn view<'a>(base_here: bool, peers: &'a [(Role, Phase)]) -> FragView<'a> {
        FragView { peers, target_port: Some(3), ..FragView::plain(base_here, &[]) }
    }

    #[test]
    fn fast_agent_crosses_at_the_base() {
        let v = view(true, &[]);
        assert_eq!(step(Role::Fast, Phase::U(UPhase::Desc), &v, Mode::Sync, 8), Some((Phase::U(UPhase::Hold(7)), Dir::Port(3))));
        assert_eq!(step(Role::Fast, Phase::U(UPhase::Desc), &v, Mode::Ssync, 8), Some((Phase::U(UPhase::Parked), Dir::Port(3))));
    }

    #[test]
    fn helper_waits_for_the_base_to_leave() {
        let h = Phase::U(UPhase::Helper { p: 4 });
        assert_eq!(step(Role::Slow, h, &view(true, &[]), Mode::Sync, 8), Some((h, Dir::Stay)));
        assert_eq!(step(Role::Slow, h, &view(false, &[]), Mode::Sync, 8), Some((Phase::U(UPhase::Hold(5)), Dir::Port(4))));
    }

    #[test]
    fn climbers_stop_together() {
        let peers = [(Role::Slow, Phase::U(UPhase::Climb))];
        let v = view(false, &peers);
        assert_eq!(step(Role::Fast, Phase::U(UPhase::FastClimb(0)), &v, Mode::Sync, 8), Some((Phase::Fin(false), Dir::Stay)));
        let peers = [(Role::Fast, Phase::U(UPhase::FastClimb(0)))];
        let v = view(false, &peers);
        assert_eq!(step(Role::Slow, Phase::U(UPhase::Climb), &v, Mode::Sync, 8), Some((Phase::Fin(false), Dir::Stay)));
    }
}
