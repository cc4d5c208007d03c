//! Stack protocols run on virtual stacks.
//!
//! Every oriented step becomes a slot of two steps: the agent decides and
//! leaves through a port, then settles its level at the new cell. Agents
//! are together only when they share cell and level and neither is halfway
//! through a move. Under FSYNC every agent, `a1` included, spends two steps
//! per slot so the crew stays in lockstep.

use std::collections::HashMap;
use std::fmt::{self, Display};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{umove, virt_act, virt_index, virt_oracle, Frame, Local, Settle};
use crate::automaton::{Move, Observation, Protocol, UndefinedTransition, WorldKind};
use crate::explore::{mode_of, ExploreCtl, ExploreOptions, ExploreRun, ExploreSeq, Step, Stop};
use crate::grid::{Cell, Labeling};
use crate::scheduler::{run_from, RunConfig, Schedule, SimError, Trace, World};
use crate::stack::frag::{self, Dir, FragView, Mode, Op, Phase, Role};
use crate::stack::harness::{script_budget, Pos, Script};
use crate::stack::{all_done, boundary_label, enter, mobile_step, Crew, Fragments, Mobile, SeqView, Sequencer, SubSpec, BASE};

/// Fragments of the unoriented world: the oriented ones on virtual stacks,
/// with Move replaced.
pub struct UFragments {
    pub mode: Mode,
    pub hold: u8,
}

impl Fragments for UFragments {
    fn start(&self, op: Op, role: Role) -> Phase {
        match op {
            Op::Move(_) => umove::start(role, self.mode),
            _ => frag::start_phase(op, role),
        }
    }

    fn step(&self, op: Op, role: Role, phase: Phase, v: &FragView) -> Option<(Phase, Dir)> {
        match op {
            Op::Move(_) => umove::step(role, phase, v, self.mode, self.hold),
            Op::Notify(_) | Op::Shift(_) | Op::Push(_) | Op::Seek { .. } => None,
            _ => frag::frag_step(op, role, phase, v, self.mode),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum UAgent<C> {
    /// `odd` marks the second step of a slot under FSYNC.
    Base { frame: Frame, odd: bool },
    Mobile { m: Mobile<C>, level: u8, settle: Option<Settle>, odd: bool },
}

impl<C: Display> Display for UAgent<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UAgent::Base { odd, .. } => write!(f, "a1{}", if *odd { "'" } else { "" }),
            UAgent::Mobile { m, level, settle, odd } => {
                write!(f, "{m}@{level}")?;
                if let Some(s) = settle {
                    write!(f, "~{s:?}")?;
                }
                if *odd {
                    f.write_str("'")?;
                }
                Ok(())
            }
        }
    }
}

impl<C> UAgent<C> {
    pub fn mobile(&self) -> Option<&Mobile<C>> {
        match self {
            UAgent::Mobile { m, .. } => Some(m),
            UAgent::Base { .. } => None,
        }
    }

    pub fn level(&self) -> Option<u8> {
        match self {
            UAgent::Mobile { level, .. } => Some(*level),
            UAgent::Base { .. } => None,
        }
    }
}

pub struct UProtocol<Q> {
    pub seq: Q,
    pub crew: Crew,
    pub n: usize,
}

impl<Q: Sequencer> UProtocol<Q> {
    pub fn new(seq: Q, mode: Mode, agents: u8, n: usize) -> Self {
        UProtocol { seq, crew: Crew { mode, agents }, n }
    }

    fn fragments(&self) -> UFragments {
        UFragments { mode: self.crew.mode, hold: umove::hold_slots(self.n) }
    }

    fn sync(&self) -> bool {
        self.crew.mode == Mode::Sync
    }

    /// Agents in their starting states, `a1` holding the map of `base`.
    pub fn states_at(&self, lab: &dyn Labeling, base: &Cell) -> Vec<UAgent<Q::Ctl>> {
        let first = self.seq.first();
        let fr = self.fragments();
        std::iter::once(UAgent::Base { frame: Frame::at(lab, base), odd: false })
            .chain(self.crew.mobile_ids().map(|id| UAgent::Mobile {
                m: enter(&self.seq, self.crew, &fr, id, first, false),
                level: Local::at(lab, base).top(),
                settle: None,
                odd: false,
            }))
            .collect()
    }
}

fn helper_move<C>(m: &Mobile<C>, spec: &SubSpec) -> Option<crate::grid::OrientedMove> {
    match (m.phase, spec.op) {
        (Phase::U(umove::UPhase::Helper { .. }), Op::Move(mv)) => Some(mv),
        _ => None,
    }
}

impl<Q: Sequencer> Protocol for UProtocol<Q> {
    type State = UAgent<Q::Ctl>;

    fn kind(&self) -> WorldKind {
        WorldKind::Unoriented
    }

    fn agent_count(&self) -> usize {
        self.crew.agents as usize
    }

    fn initial_states(&self, lab: Option<&dyn Labeling>) -> Vec<Self::State> {
        let lab = lab.expect("unoriented protocols need a labeling");
        self.states_at(lab, &Cell::origin(self.n))
    }

    fn delta(&self, s: &Self::State, obs: &Observation<Self::State>) -> Result<(Self::State, Move), UndefinedTransition> {
        let undefined = || UndefinedTransition::new(s, obs);
        let edges = obs.edges.as_deref().ok_or_else(undefined)?;
        let sync = self.sync();
        match *s {
            UAgent::Base { odd: true, frame } => Ok((UAgent::Base { frame, odd: false }, Move::Stay)),
            UAgent::Base { frame, .. } => {
                let helped = obs.states().iter().find_map(|a| match a {
                    UAgent::Mobile { m, settle: None, .. } => helper_move(m, &self.seq.spec(&m.ctl)),
                    _ => None,
                });
                let mv = helped.map(|m| Move::Handrail(frame.port(m))).unwrap_or(Move::Stay);
                Ok((UAgent::Base { frame, odd: sync }, mv))
            }
            UAgent::Mobile { m, settle: Some(st), .. } => {
                let level = st.level(&Local::from_edges(edges)).ok_or_else(undefined)?;
                Ok((UAgent::Mobile { m, level, settle: None, odd: false }, Move::Stay))
            }
            UAgent::Mobile { m, level, odd: true, .. } => Ok((UAgent::Mobile { m, level, settle: None, odd: false }, Move::Stay)),
            UAgent::Mobile { m: me, level, .. } => {
                // an agent halfway through a move has no level yet; wait for it
                let unsettled = obs.states().iter().any(|a| matches!(a, UAgent::Mobile { settle: Some(_), .. }));
                if unsettled {
                    return Ok((UAgent::Mobile { m: me, level, settle: None, odd: sync }, Move::Stay));
                }
                let local = Local::from_edges(edges);
                let at_top = level == local.top();
                let mut frame = None;
                let mut others = Vec::new();
                for a in obs.states() {
                    match a {
                        UAgent::Base { frame: f, .. } => frame = Some(*f),
                        UAgent::Mobile { m, level: l, settle: None, .. } if m.id != me.id && *l == level => others.push(*m),
                        UAgent::Mobile { .. } => {}
                    }
                }
                let base_in_cell = frame.is_some();
                let base_here = base_in_cell && at_top;
                let mut ids: Vec<u8> = others.iter().map(|o| o.id).collect();
                ids.push(me.id);
                if base_here {
                    ids.push(BASE);
                }
                let target_port = match (frame, self.seq.spec(&me.ctl).op) {
                    (Some(f), Op::Move(mv)) => Some(f.port(mv)),
                    _ => None,
                };
                let fv = FragView { base_in_cell, target_port, edges, at_top, ..FragView::plain(base_here, &ids) };
                let v = SeqView { base_here, others: &others, frag: fv };
                let (m, d) = mobile_step(&self.seq, self.crew, &self.fragments(), &me, &v).ok_or_else(undefined)?;
                let (mv, settle) = match d {
                    Dir::Stay => (Move::Stay, None),
                    Dir::North | Dir::South => {
                        let (p, st) = virt_act(&local, level, d == Dir::North).ok_or_else(undefined)?;
                        (Move::Port(p), Some(st))
                    }
                    Dir::Port(p) => (Move::Port(p), Some(Settle::Top)),
                    Dir::Shift(_) => return Err(undefined()),
                };
                // under SSYNC a stay needs no second step
                let odd = sync && settle.is_none();
                Ok((UAgent::Mobile { m, level, settle, odd }, mv))
            }
        }
    }

    fn is_handrail_helper(&self, s: &Self::State) -> bool {
        matches!(s, UAgent::Mobile { m, settle: None, .. } if helper_move(m, &self.seq.spec(&m.ctl)).is_some())
    }

    fn after_handrail(&self, s: Self::State, lab: &dyn Labeling, _from: &Cell, to: &Cell) -> Self::State {
        match s {
            UAgent::Base { odd, .. } => UAgent::Base { frame: Frame::at(lab, to), odd },
            other => other,
        }
    }

    fn is_terminal(&self, states: &[Self::State]) -> bool {
        all_done(states.iter().filter_map(|a| a.mobile()))
    }

    fn boundary(&self, before: &Self::State, after: &Self::State) -> Option<String> {
        match (before.mobile(), after.mobile()) {
            (Some(b), Some(a)) => boundary_label(&self.seq, b, a),
            _ => None,
        }
    }
}

/// Outcome of a script on virtual stacks. Heights are indices into the
/// virtual stack of `a1`'s final cell.
#[derive(Clone, Debug)]
pub struct VirtualRun {
    pub base: Cell,
    pub heights: Vec<Option<u64>>,
    pub verdicts: Vec<Option<bool>>,
    pub steps: u64,
    pub trace: Trace,
}

/// Heights are searched up to this index.
const HORIZON: usize = 1 << 16;

/// Runs `specs` on the unoriented grid `lab` with `a1` at `base` and mobile
/// agent `a(i+2)` at `Virt_base[heights[i]]`.
pub fn run_virtual_script(
    lab: Arc<dyn Labeling>,
    specs: &[SubSpec],
    base: &Cell,
    heights: &[u64],
    schedule: &Schedule,
    watchdog: Option<u64>,
) -> Result<VirtualRun, SimError> {
    let n = lab.dim();
    let proto = UProtocol::new(Script(specs.to_vec()), mode_of(schedule), 1 + heights.len() as u8, n);
    let max_h = heights.iter().copied().max().unwrap_or(0) as usize;
    let path = virt_oracle(&*lab, base, max_h + 1);
    let mut placement: Vec<(Cell, UAgent<Pos>)> = Vec::new();
    for (i, s) in proto.states_at(&*lab, base).into_iter().enumerate() {
        match s {
            UAgent::Mobile { m, settle, odd, .. } => {
                let p = path[heights[i - 1] as usize];
                placement.push((p.cell, UAgent::Mobile { m, level: p.level, settle, odd }));
            }
            b => placement.push((*base, b)),
        }
    }
    let x = heights.first().copied().unwrap_or(0);
    let budget = watchdog.unwrap_or_else(|| 2 * script_budget(specs, x, schedule) + 4 * n as u64 * x * x);
    let cfg = RunConfig::new(schedule.clone(), budget);
    let mut verdicts: HashMap<usize, bool> = HashMap::new();
    let mut monitor = |_t: u64, agents: &[(Cell, UAgent<Pos>)]| {
        for (_, a) in agents {
            if let Some(m) = a.mobile() {
                if let Phase::Fin(v) = m.phase {
                    if m.id == specs[m.ctl.0].fast {
                        verdicts.entry(m.ctl.0).or_insert(v);
                    }
                }
            }
        }
        false
    };
    let world = World::unoriented(lab.clone());
    let out = run_from(&proto, &world, placement, &cfg, &mut monitor)?;
    let base = out.agents[0].0;
    let heights = out.agents[1..]
        .iter()
        .map(|(c, a)| {
            let p = super::VirtPos { cell: *c, level: a.level().expect("mobile") };
            virt_index(&*lab, &base, p, HORIZON)
        })
        .collect();
    Ok(VirtualRun {
        base,
        heights,
        verdicts: (0..specs.len()).map(|i| verdicts.get(&i).copied()).collect(),
        steps: out.trace.steps,
        trace: out.trace,
    })
}

/// The exploration protocol on the unoriented grid `lab`, `a1` starting at
/// the origin and naming directions after the labels there.
pub fn run_explore_unoriented(
    lab: Arc<dyn Labeling>,
    schedule: &Schedule,
    stop: &Stop,
    opts: &ExploreOptions,
) -> Result<ExploreRun, SimError> {
    let n = lab.dim();
    let mode = mode_of(schedule);
    let agents = if mode == Mode::Sync { 3 } else { 4 };
    let proto = UProtocol::new(ExploreSeq::new(n), mode, agents, n);
    let world = World::unoriented(lab.clone());
    let mut cfg = RunConfig::new(schedule.clone(), opts.watchdog);
    cfg.verbosity = opts.verbosity;
    if let Stop::Treasure(t) = stop {
        cfg.treasure = Some(*t);
    }
    let origin = Cell::origin(n);
    let placement: Vec<(Cell, UAgent<ExploreCtl>)> =
        proto.states_at(&*lab, &origin).into_iter().map(|s| (origin, s)).collect();
    let mut counter = 0;
    let mut pending: std::collections::HashSet<Cell> = match stop {
        Stop::Visited(v) => v.iter().copied().filter(|c| !c.is_origin()).collect(),
        _ => Default::default(),
    };
    let mut monitor = |_t: u64, agents: &[(Cell, UAgent<ExploreCtl>)]| {
        if let UAgent::Mobile { m, level, settle: None, .. } = &agents[1].1 {
            if m.ctl.step == Step::Inc && m.phase == Phase::Walk(0) {
                let p = super::VirtPos { cell: agents[1].0, level: *level };
                if let Some(j) = virt_index(&*lab, &agents[0].0, p, HORIZON) {
                    counter = j;
                }
            }
        }
        match stop {
            Stop::Counter(x) => counter >= *x,
            Stop::Visited(_) => {
                pending.remove(&agents[0].0);
                pending.is_empty()
            }
            Stop::Treasure(_) => false,
        }
    };
    let out = run_from(&proto, &world, placement, &cfg, &mut monitor)?;
    Ok(ExploreRun { trace: out.trace, counter, stop: out.stop })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{OrientedMove, PortLabeling};
    use crate::scheduler::Adversary;

    fn lab(seed: u64) -> Arc<dyn Labeling> {
        Arc::new(PortLabeling::potential_split(seed, 2))
    }

    fn run1(l: Arc<dyn Labeling>, op: Op, x: u64, s: &Schedule) -> VirtualRun {
        let k = if s.kind() == crate::scheduler::ScheduleKind::Fsync { 2 } else { 3 };
        run_virtual_script(l, &[SubSpec::std(op)], &Cell::origin(2), &vec![x; k], s, None).unwrap()
    }

    #[test]
    fn virtual_arithmetic() {
        let l = lab(7);
        assert_eq!(run1(l.clone(), Op::Mult(2), 5, &Schedule::Fsync).heights, vec![Some(10); 2]);
        assert_eq!(run1(l.clone(), Op::Div(3), 9, &Schedule::Fsync).heights, vec![Some(3); 2]);
        assert_eq!(run1(l.clone(), Op::IsDiv(3), 9, &Schedule::Fsync).verdicts, vec![Some(true)]);
        assert_eq!(run1(l, Op::Inc(2), 3, &Schedule::Fsync).heights, vec![Some(5); 2]);
    }

    #[test]
    fn virtual_steps_take_twice_as_long() {
        let l = lab(2);
        let v = run1(l, Op::Mult(3), 4, &Schedule::Fsync);
        let o = crate::stack::harness::run_subroutine(Op::Mult(3), 4, &Schedule::Fsync).unwrap();
        // the run ends on the first step of the last slot
        assert_eq!(v.steps, 2 * o.steps - 1);
    }

    #[test]
    fn unoriented_move_lands_on_the_neighbor_stack() {
        let m = OrientedMove::new(-1, 2);
        for seed in 0..5 {
            let l = lab(seed);
            for x in [1, 2, 5] {
                let r = run1(l.clone(), Op::Move(m), x, &Schedule::Fsync);
                assert_eq!(r.base, Cell::new(&[0, -1]), "seed {seed} x {x}");
                assert_eq!(r.heights, vec![Some(x); 2], "seed {seed} x {x}");
            }
        }
    }

    #[test]
    fn unoriented_move_under_ssync() {
        let m = OrientedMove::new(1, 1);
        for seed in 0..5 {
            let s = Schedule::ssync(Adversary::SeededRandom { seed, p: 0.5 }, 32);
            let r = run1(lab(seed), Op::Move(m), 4, &s);
            assert_eq!(r.base, Cell::new(&[1, 0]));
            assert_eq!(r.heights, vec![Some(4); 3]);
        }
    }
}
