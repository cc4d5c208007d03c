//! The agent-distance stack: a base agent `a1` and mobile agents whose
//! distance north of it encodes a number, plus the machinery that chains
//! subroutines into protocols.
//!
//! Mobile agents carry a control value naming the current subroutine.
//! When every agent that finishes a subroutine sits in a `Fin` phase in one
//! cell, the next control value is computed by each of them (FSYNC), or
//! announced by the synchronizer (SSYNC).

pub mod frag;
pub mod harness;
pub mod table;

use std::fmt::{self, Debug, Display};
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::automaton::{Move, Observation, Protocol, UndefinedTransition, WorldKind};
use crate::grid::{Labeling, OrientedMove};

pub use frag::{Dir, FragView, Mode, Op, Phase, Role, SubSpec, Target};

/// Id of the base agent.
pub const BASE: u8 = 1;

/// The control flow of a stack protocol over a finite control space.
pub trait Sequencer: Send + Sync {
    type Ctl: Copy + Eq + Hash + Debug + Display + Send + Sync;

    fn first(&self) -> Self::Ctl;

    fn spec(&self, c: &Self::Ctl) -> SubSpec;

    /// The control after `c` finished with `verdict`; `None` ends the protocol.
    fn next(&self, c: &Self::Ctl, verdict: bool) -> Option<Self::Ctl>;

    /// Every reachable control value.
    fn controls(&self) -> Vec<Self::Ctl>;
}

/// A mobile agent's state. `epoch` flips at every subroutine launch so
/// that two consecutive instances of the same subroutine differ.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Mobile<C> {
    pub id: u8,
    pub ctl: C,
    pub epoch: bool,
    pub phase: Phase,
}

impl<C: Display> Display for Mobile<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}[{}/{}]{}", self.id, self.ctl, self.epoch as u8, self.phase)
    }
}

impl<C: Copy + Eq> Mobile<C> {
    fn same_instance(&self, o: &Mobile<C>) -> bool {
        self.ctl == o.ctl && self.epoch == o.epoch
    }
}

/// Who plays which part: the number of agents (base included) and, under
/// SSYNC, the synchronizer (always the last agent).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Crew {
    pub mode: Mode,
    pub agents: u8,
}

impl Crew {
    pub fn orch(&self) -> Option<u8> {
        (self.mode == Mode::Ssync).then_some(self.agents)
    }

    pub fn mobile_ids(&self) -> std::ops::RangeInclusive<u8> {
        2..=self.agents
    }
}

/// The fragment set a world uses: start phases and transitions of every
/// subroutine.
pub trait Fragments {
    fn start(&self, op: Op, role: Role) -> Phase;
    fn step(&self, op: Op, role: Role, phase: Phase, v: &FragView) -> Option<(Phase, Dir)>;
}

/// The fragments of oriented grids.
pub struct OrientedFragments(pub Mode);

impl Fragments for OrientedFragments {
    fn start(&self, op: Op, role: Role) -> Phase {
        frag::start_phase(op, role)
    }

    fn step(&self, op: Op, role: Role, phase: Phase, v: &FragView) -> Option<(Phase, Dir)> {
        frag::frag_step(op, role, phase, v, self.0)
    }
}

/// The state agent `id` takes when control `ctl` starts.
pub fn enter<Q: Sequencer>(q: &Q, crew: Crew, fr: &dyn Fragments, id: u8, ctl: Q::Ctl, epoch: bool) -> Mobile<Q::Ctl> {
    let spec = q.spec(&ctl);
    let phase = match Role::of(&spec, id, crew.orch()) {
        Some(r) => fr.start(spec.op, r),
        None => Phase::Idle,
    };
    Mobile { id, ctl, epoch, phase }
}

/// The fast agent's verdict when every agent in `fin` is in a `Fin` phase of
/// the same instance as `me`.
fn finishers_in_fin<C: Copy + Eq>(me: &Mobile<C>, others: &[Mobile<C>], fin: &[u8], fast: u8) -> Option<bool> {
    let get = |id: u8| if id == me.id { Some(me) } else { others.iter().find(|o| o.id == id) };
    for &id in fin {
        match get(id) {
            Some(m) if me.same_instance(m) && matches!(m.phase, Phase::Fin(_)) => {}
            _ => return None,
        }
    }
    match get(fast)?.phase {
        Phase::Fin(v) => Some(v),
        _ => None,
    }
}

/// What a mobile agent senses.
pub struct SeqView<'a, C> {
    pub base_here: bool,
    /// Co-located mobile agents other than the observer.
    pub others: &'a [Mobile<C>],
    /// Everything else a fragment may look at; `peers` is filled in by
    /// [`mobile_step`].
    pub frag: FragView<'a>,
}

/// One transition of a mobile agent.
pub fn mobile_step<Q: Sequencer>(
    q: &Q,
    crew: Crew,
    fr: &dyn Fragments,
    me: &Mobile<Q::Ctl>,
    v: &SeqView<Q::Ctl>,
) -> Option<(Mobile<Q::Ctl>, Dir)> {
    let stay = |m: Mobile<Q::Ctl>| Some((m, Dir::Stay));
    let orch = crew.orch();
    let spec = q.spec(&me.ctl);
    let advance = |ctl: &Q::Ctl, epoch: bool, verdict: bool| match q.next(ctl, verdict) {
        Some(c) => enter(q, crew, fr, me.id, c, !epoch),
        None => Mobile { phase: Phase::Done, ..*me },
    };
    match me.phase {
        Phase::Done => stay(*me),
        Phase::Idle | Phase::Fin(_) if crew.mode == Mode::Sync => {
            if me.phase != Phase::Idle {
                let fin = spec.finishers(None);
                return match finishers_in_fin(me, v.others, &fin, spec.fast) {
                    Some(verdict) => stay(advance(&me.ctl, me.epoch, verdict)),
                    None => stay(*me),
                };
            }
            for o in v.others {
                if let Phase::Fin(_) = o.phase {
                    let fin = q.spec(&o.ctl).finishers(None);
                    if fin.contains(&me.id) {
                        continue;
                    }
                    if let Some(verdict) = finishers_in_fin(o, v.others, &fin, q.spec(&o.ctl).fast) {
                        let next = advance(&o.ctl, o.epoch, verdict);
                        return stay(Mobile { id: me.id, ..next });
                    }
                }
            }
            stay(*me)
        }
        Phase::Fin(_) if Some(me.id) == orch => {
            let fin = spec.finishers(orch);
            match finishers_in_fin(me, v.others, &fin, spec.fast) {
                Some(verdict) => {
                    match q.next(&me.ctl, verdict) {
                        Some(c) => stay(Mobile { id: me.id, ctl: c, epoch: !me.epoch, phase: Phase::Launch }),
                        None => stay(Mobile { phase: Phase::Done, ..*me }),
                    }
                }
                None => stay(*me),
            }
        }
        Phase::Idle | Phase::Fin(_) => {
            // SSYNC: follow the synchronizer's announcement
            let Some(o) = v.others.iter().find(|o| Some(o.id) == orch) else {
                return stay(*me);
            };
            match o.phase {
                Phase::Launch if !o.same_instance(me) => stay(enter(q, crew, fr, me.id, o.ctl, o.epoch)),
                Phase::Done => stay(Mobile { phase: Phase::Done, ..*me }),
                _ => stay(*me),
            }
        }
        Phase::Launch => {
            let waiting = v.others.iter().any(|o| {
                !o.same_instance(me)
                    && match o.phase {
                        Phase::Fin(_) => true,
                        Phase::Idle => spec.participates(o.id, orch),
                        _ => false,
                    }
            });
            if waiting {
                stay(*me)
            } else {
                let role = Role::of(&spec, me.id, orch).expect("synchronizer takes part in every subroutine");
                stay(Mobile { phase: fr.start(spec.op, role), ..*me })
            }
        }
        phase => {
            let role = Role::of(&spec, me.id, orch)?;
            // nobody starts before everyone has heard the announcement
            if v.others.iter().any(|o| Some(o.id) == orch && o.same_instance(me) && o.phase == Phase::Launch) {
                return stay(*me);
            }
            let peers: Vec<(Role, Phase)> = v
                .others
                .iter()
                .filter(|o| o.same_instance(me) && !matches!(o.phase, Phase::Idle | Phase::Launch | Phase::Done))
                .filter_map(|o| Role::of(&spec, o.id, orch).map(|r| (r, o.phase)))
                .collect();
            let fv = FragView { peers: &peers, ..v.frag };
            let (p, d) = fr.step(spec.op, role, phase, &fv)?;
            Some((Mobile { phase: p, ..*me }, d))
        }
    }
}

/// The base agent's only action on an oriented grid: follow a notification.
pub fn base_shift<C: Copy>(q: &impl Sequencer<Ctl = C>, others: &[Mobile<C>]) -> Option<OrientedMove> {
    others.iter().find_map(|o| {
        if o.phase != Phase::Notify {
            return None;
        }
        match q.spec(&o.ctl).op {
            Op::Move(m) | Op::Notify(m) => Some(m),
            _ => None,
        }
    })
}

/// A stack-protocol agent on an oriented grid.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Agent<C> {
    Base,
    Mobile(Mobile<C>),
}

impl<C: Display> Display for Agent<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Agent::Base => f.write_str("a1"),
            Agent::Mobile(m) => write!(f, "{m}"),
        }
    }
}

impl<C> Agent<C> {
    pub fn mobile(&self) -> Option<&Mobile<C>> {
        match self {
            Agent::Mobile(m) => Some(m),
            Agent::Base => None,
        }
    }
}

/// A sequencer run by a crew on an oriented grid, stacks growing north
/// along dimension 1.
pub struct StackProtocol<Q> {
    pub seq: Q,
    pub crew: Crew,
}

impl<Q: Sequencer> StackProtocol<Q> {
    pub fn new(seq: Q, mode: Mode, agents: u8) -> Self {
        StackProtocol { seq, crew: Crew { mode, agents } }
    }
}

/// Whether the run is over: somebody finished and nobody is still busy.
pub fn all_done<'a, C: 'a>(mobiles: impl Iterator<Item = &'a Mobile<C>>) -> bool {
    let mut any = false;
    for m in mobiles {
        match m.phase {
            Phase::Done => any = true,
            Phase::Idle => {}
            _ => return false,
        }
    }
    any
}

/// A boundary label when `after` starts a new subroutine as its fast agent.
pub fn boundary_label<Q: Sequencer>(q: &Q, before: &Mobile<Q::Ctl>, after: &Mobile<Q::Ctl>) -> Option<String> {
    if after.phase == Phase::Done && before.phase != Phase::Done {
        return (after.id == 2).then(|| "done".to_string());
    }
    if before.same_instance(after) || after.phase == Phase::Idle || after.phase == Phase::Launch {
        return None;
    }
    let spec = q.spec(&after.ctl);
    (after.id == spec.fast).then(|| spec.op.name())
}

/// All states mobile agent `id` can take.
pub fn mobile_states<Q: Sequencer>(q: &Q, crew: Crew, id: u8) -> Vec<Mobile<Q::Ctl>> {
    let mut out = Vec::new();
    for ctl in q.controls() {
        let spec = q.spec(&ctl);
        let phases = match Role::of(&spec, id, crew.orch()) {
            Some(r) => frag::phases_of(spec.op, r, crew.mode),
            None => vec![Phase::Idle, Phase::Done],
        };
        for epoch in [false, true] {
            for &phase in &phases {
                out.push(Mobile { id, ctl, epoch, phase });
            }
        }
    }
    out
}

fn to_move(d: Dir) -> Option<Move> {
    match d {
        Dir::Stay => Some(Move::Stay),
        Dir::North => Some(Move::Oriented(OrientedMove::NORTH)),
        Dir::South => Some(Move::Oriented(OrientedMove::SOUTH)),
        Dir::Shift(m) => Some(Move::from(m)),
        Dir::Port(_) => None,
    }
}

impl<Q: Sequencer> Protocol for StackProtocol<Q> {
    type State = Agent<Q::Ctl>;

    fn kind(&self) -> WorldKind {
        WorldKind::Oriented
    }

    fn agent_count(&self) -> usize {
        self.crew.agents as usize
    }

    fn initial_states(&self, _lab: Option<&dyn Labeling>) -> Vec<Self::State> {
        let first = self.seq.first();
        std::iter::once(Agent::Base)
            .chain(
            self.crew
                .mobile_ids()
                .map(|id| Agent::Mobile(enter(&self.seq, self.crew, &OrientedFragments(self.crew.mode), id, first, false))),
        )
            .collect()
    }

    fn delta(&self, s: &Self::State, obs: &Observation<Self::State>) -> Result<(Self::State, Move), UndefinedTransition> {
        let undefined = || UndefinedTransition::new(s, obs);
        let base_here = obs.contains(&Agent::Base);
        let me_id = s.mobile().map(|m| m.id).unwrap_or(BASE);
        let others: Vec<Mobile<Q::Ctl>> =
            obs.states().iter().filter_map(|a| a.mobile()).filter(|m| m.id != me_id).copied().collect();
        match s {
            Agent::Base => {
                let mv = base_shift(&self.seq, &others).map(Move::from).unwrap_or(Move::Stay);
                Ok((Agent::Base, mv))
            }
            Agent::Mobile(me) => {
                let mut ids: Vec<u8> = others.iter().map(|o| o.id).collect();
                ids.push(me.id);
                if base_here {
                    ids.push(BASE);
                }
                let v = SeqView { base_here, others: &others, frag: FragView::plain(base_here, &ids) };
                let fr = OrientedFragments(self.crew.mode);
                let (m, d) = mobile_step(&self.seq, self.crew, &fr, me, &v).ok_or_else(undefined)?;
                Ok((Agent::Mobile(m), to_move(d).ok_or_else(undefined)?))
            }
        }
    }

    fn is_terminal(&self, states: &[Self::State]) -> bool {
        all_done(states.iter().filter_map(|a| a.mobile()))
    }

    fn boundary(&self, before: &Self::State, after: &Self::State) -> Option<String> {
        match (before, after) {
            (Agent::Mobile(b), Agent::Mobile(a)) => boundary_label(&self.seq, b, a),
            _ => None,
        }
    }

    fn enumerate_states(&self) -> Option<Vec<Self::State>> {
        let mut out = vec![Agent::Base];
        for id in self.crew.mobile_ids() {
            out.extend(mobile_states(&self.seq, self.crew, id).into_iter().map(Agent::Mobile));
        }
        Some(out)
    }
}
