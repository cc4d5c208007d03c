//! Stack operations by a non-constant power of two `h`, hypercube
//! exploration in lexicographic order, and the doubling treasure search.
//!
//! Two stacks share the base `a1`: `a2` and `a3` sit at distance `h`
//! (the h-stack) and `a4` at distance `Y` (the Y-stack). `a3` doubles as
//! the shuttle that carries the control flow to `a4`. Under SSYNC `a5`
//! synchronizes and escorts.
//!
//! Routines are compiled into a flat program of constant-size subroutines
//! with two successors each (by verdict); a control value is an index into
//! it.
//!
//! Cube counters are kept with a leading digit: at the start of every cell
//! the Y-stack holds `h^n + code(t)`, so it never empties.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use crate::automaton::Protocol;
use crate::grid::{Cell, OrientedMove};
use crate::scheduler::{run_from, RunConfig, Schedule, ScheduleKind, SimError, StopReason, Trace, World};
use crate::stack::{Agent, Mode, Op, Phase, Sequencer, StackProtocol, SubSpec};

/// What a program node marks, for observers.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Tag {
    /// Head of the first loop of a by-`h` routine.
    LoopHead,
    /// `a1` stands on a freshly reached cube cell; the h-stack holds `h`.
    Visit,
    /// Exit of a divisibility test.
    Verdict(bool),
}

/// Outgoing edges not yet linked: node and verdict (`None` for both).
type Edges = Vec<(usize, Option<bool>)>;

#[derive(Clone, Debug)]
struct Node {
    spec: SubSpec,
    /// Successor after verdict `false` and `true`.
    next: [Option<usize>; 2],
    tag: Option<Tag>,
}

/// A compiled program.
#[derive(Clone, Debug, Default)]
pub struct Program {
    nodes: Vec<Node>,
    /// Edges waiting for the next emitted node.
    open: Edges,
}

/// Control value: a program index.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Pc(pub u32);

impl fmt::Display for Pc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}", self.0)
    }
}

const A2: u8 = 2;
const A3: u8 = 3;
const A4: u8 = 4;

fn hs(op: Op) -> SubSpec {
    SubSpec::new(op, A2, A3)
}

fn ys(op: Op) -> SubSpec {
    SubSpec::new(op, A3, A4)
}

fn seek(target: u8, north: bool) -> SubSpec {
    SubSpec::new(Op::Seek { target, north }, A3, A3)
}

impl Program {
    fn link(&mut self, from: usize, verdict: Option<bool>, to: usize) {
        match verdict {
            Some(v) => self.nodes[from].next[v as usize] = Some(to),
            None => self.nodes[from].next = [Some(to); 2],
        }
    }

    fn emit(&mut self, spec: SubSpec) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node { spec, next: [None; 2], tag: None });
        for (from, v) in std::mem::take(&mut self.open) {
            self.link(from, v, id);
        }
        self.open = vec![(id, None)];
        id
    }

    fn tagged(&mut self, spec: SubSpec, tag: Tag) -> usize {
        let id = self.emit(spec);
        self.nodes[id].tag = Some(tag);
        id
    }

    fn jump(&mut self, to: usize) {
        for (from, v) in std::mem::take(&mut self.open) {
            self.link(from, v, to);
        }
    }

    /// Emits a test and leaves its `true` edge open; returns the `false`
    /// edge.
    fn test(&mut self, spec: SubSpec) -> (usize, Edges) {
        let id = self.emit(spec);
        self.open = vec![(id, Some(true))];
        (id, vec![(id, Some(false))])
    }

    /// `a3` walks from wherever it is to agent `t`, by way of the base.
    fn fetch(&mut self, t: u8) {
        self.emit(seek(1, false));
        self.emit(seek(t, true));
    }

    fn on_y(&mut self, op: Op) {
        self.fetch(A4);
        self.emit(ys(op));
        self.fetch(A2);
    }

    /// `Y <- Y * h`.
    pub fn mult_h(&mut self) {
        self.by_h(Op::Mult(2));
    }

    /// `Y <- Y / h`; stalls when `h` does not divide `Y`.
    pub fn div_h(&mut self) {
        self.by_h(Op::Div(2));
    }

    fn by_h(&mut self, y_op: Op) {
        let (head, exit) = self.test(hs(Op::IsDiv(2)));
        self.nodes[head].tag = Some(Tag::LoopHead);
        self.emit(hs(Op::Div(2)));
        self.emit(hs(Op::Mult(3)));
        self.on_y(y_op);
        self.jump(head);
        self.open = exit;
        self.restore_h(None);
    }

    /// Second loop: turns the h-stack from `3^j 2^(i-j)` back into `2^i`,
    /// applying `y_op` to the Y-stack once per round when given.
    fn restore_h(&mut self, y_op: Option<Op>) {
        let (head, exit) = self.test(hs(Op::IsDiv(3)));
        self.emit(hs(Op::Div(3)));
        self.emit(hs(Op::Mult(2)));
        if let Some(op) = y_op {
            self.on_y(op);
        }
        self.jump(head);
        self.open = exit;
    }

    /// Divisibility of `Y` by `h`; returns the open edges of the `true` and
    /// `false` exits, with both stacks restored.
    pub fn is_div_h(&mut self) -> (Edges, Edges) {
        let (head, done) = self.test(hs(Op::IsDiv(2)));
        self.nodes[head].tag = Some(Tag::LoopHead);
        self.fetch(A4);
        let (_, odd) = self.test(ys(Op::IsDiv(2)));
        self.emit(ys(Op::Div(2)));
        self.fetch(A2);
        self.emit(hs(Op::Div(2)));
        self.emit(hs(Op::Mult(3)));
        self.jump(head);
        self.open = odd;
        self.fetch(A2);
        self.restore_h(Some(Op::Mult(2)));
        let no = std::mem::take(&mut self.open);
        self.open = done;
        self.restore_h(Some(Op::Mult(2)));
        let yes = std::mem::take(&mut self.open);
        (yes, no)
    }

    /// Shifts all four agents one cell.
    fn move_all(&mut self, m: OrientedMove) {
        self.fetch(A4);
        self.emit(SubSpec::new(Op::Push(m), A3, A4));
        self.fetch(A2);
        self.emit(hs(Op::Move(m)));
    }

    /// Visits the side-`h` cube in lexicographic order, starting at its
    /// anchor with `Y = h^n`; ends at the anchor with `Y = 1`.
    fn cube(&mut self, n: usize) {
        let visit = self.tagged(seek(A2, true), Tag::Visit);
        let mut carry_to: Option<Edges> = None;
        for j in (1..=n).rev() {
            if let Some(open) = carry_to.take() {
                self.open = open;
            }
            let dim = j as u8;
            self.on_y(Op::Inc(1));
            let (yes, no) = self.is_div_h();
            // no carry: step forward and rescale
            self.open = no;
            self.move_all(OrientedMove::new(1, dim));
            for _ in j..n {
                self.mult_h();
            }
            self.jump(visit);
            // carry: walk back over the digit
            self.open = yes;
            self.on_y(Op::Dec(1));
            let back = self.nodes.len();
            let (yes, no) = self.is_div_h();
            self.open = no;
            self.move_all(OrientedMove::new(-1, dim));
            self.on_y(Op::Dec(1));
            self.jump(back);
            self.open = yes;
            self.div_h();
            carry_to = Some(std::mem::take(&mut self.open));
        }
        self.open = carry_to.expect("n >= 1");
    }

    /// The agents start at the base: puts `a4` at 1 and the h-stack at `h`.
    fn setup(&mut self, h: u8) {
        self.emit(SubSpec::new(Op::Init(1), A4, A3));
        self.emit(SubSpec::new(Op::Seek { target: A2, north: false }, A3, A3));
        self.emit(hs(Op::Inc(h)));
    }

    fn scale_up(&mut self, n: usize) {
        for _ in 0..n {
            self.mult_h();
        }
    }

    pub fn compile_mult_h() -> Self {
        let mut p = Program::default();
        p.mult_h();
        p
    }

    pub fn compile_div_h() -> Self {
        let mut p = Program::default();
        p.div_h();
        p
    }

    pub fn compile_is_div_h() -> Self {
        let mut p = Program::default();
        let (yes, no) = p.is_div_h();
        p.open = yes;
        p.tagged(seek(A2, true), Tag::Verdict(true));
        let end = std::mem::take(&mut p.open);
        p.open = no;
        p.tagged(seek(A2, true), Tag::Verdict(false));
        p.open.extend(end);
        p
    }

    /// One cube of side `h` whose anchor is the start cell.
    pub fn compile_hypercube(h: u8, n: usize) -> Self {
        let mut p = Program::default();
        p.setup(h);
        p.scale_up(n);
        p.cube(n);
        p
    }

    /// Cubes of side 2, 4, 8, ... centred at the origin, forever.
    pub fn compile_search(n: usize) -> Self {
        let mut p = Program::default();
        p.setup(2);
        p.scale_up(n);
        let start = p.nodes.len();
        p.cube(n);
        // re-anchor: h/2 diagonal steps back, counted on the Y-stack
        p.mult_h();
        p.on_y(Op::Div(2));
        let lp = p.nodes.len();
        p.on_y(Op::Inc(1));
        for dim in 1..=n as u8 {
            p.move_all(OrientedMove::new(-1, dim));
        }
        let (yes, no) = p.is_div_h();
        p.open = no;
        p.jump(lp);
        p.open = yes;
        p.div_h();
        p.emit(hs(Op::Mult(2)));
        p.scale_up(n);
        p.jump(start);
        p
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn tag(&self, pc: Pc) -> Option<Tag> {
        self.nodes[pc.0 as usize].tag
    }
}

impl Sequencer for Program {
    type Ctl = Pc;

    fn first(&self) -> Pc {
        Pc(0)
    }

    fn spec(&self, c: &Pc) -> SubSpec {
        self.nodes[c.0 as usize].spec
    }

    fn next(&self, c: &Pc, verdict: bool) -> Option<Pc> {
        self.nodes[c.0 as usize].next[verdict as usize].map(|i| Pc(i as u32))
    }

    fn controls(&self) -> Vec<Pc> {
        (0..self.nodes.len() as u32).map(Pc).collect()
    }
}

/// Number of agents: 4, plus the synchronizer under SSYNC.
pub fn agents_for(schedule: &Schedule) -> u8 {
    match schedule.kind() {
        ScheduleKind::Fsync => 4,
        ScheduleKind::Ssync => 5,
    }
}

fn mode_of(schedule: &Schedule) -> Mode {
    crate::explore::mode_of(schedule)
}

type Monitor<'a> = dyn FnMut(u64, &[(Cell, Agent<Pc>)]) -> bool + 'a;

/// Calls `f` each time `a3` enters a new program node, with the positions
/// from just before the entering step.
fn on_entry<'a>(
    start: Vec<(Cell, Agent<Pc>)>,
    mut f: impl FnMut(Pc, &[(Cell, Agent<Pc>)]) -> bool + 'a,
) -> Box<Monitor<'a>> {
    let mut last: Option<(Pc, bool)> = None;
    let mut prev = start;
    Box::new(move |_t, agents| {
        let mut stop = false;
        if let Some(m) = agents[2].1.mobile() {
            let key = (m.ctl, m.epoch);
            if !matches!(m.phase, Phase::Idle | Phase::Launch | Phase::Done) && last != Some(key) {
                last = Some(key);
                stop = f(m.ctl, &prev);
            }
        }
        prev.clear();
        prev.extend_from_slice(agents);
        stop
    })
}

fn height(agents: &[(Cell, Agent<Pc>)], i: usize) -> i64 {
    agents[i].0.coord(1) - agents[0].0.coord(1)
}

/// Result of a by-`h` routine on the two stacks.
#[derive(Clone, Debug)]
pub struct DualRun {
    /// Final distances of `a2`, `a3`, `a4` from `a1`.
    pub h2: i64,
    pub h3: i64,
    pub y: i64,
    pub verdict: Option<bool>,
    /// `(h-stack, Y-stack)` at every head of the first loop.
    pub loop_states: Vec<(i64, i64)>,
    pub steps: u64,
    pub trace: Trace,
}

/// Which by-`h` routine.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DualOp {
    Mult,
    Div,
    IsDiv,
}

pub fn dual_budget(h: u64, y: u64, schedule: &Schedule) -> u64 {
    let base = 400 * (h + 1) * (y + h + 1) + 10_000;
    match schedule.kind() {
        ScheduleKind::Fsync => base,
        ScheduleKind::Ssync => base * schedule.fairness() * (y + h + 4),
    }
}

/// Runs a by-`h` routine with `a2`, `a3` at `h` and `a4` at `y` on the
/// 1-dimensional grid.
pub fn run_dual(op: DualOp, h: u64, y: u64, schedule: &Schedule, watchdog: Option<u64>) -> Result<DualRun, SimError> {
    assert!(h.is_power_of_two(), "h must be a power of two");
    let prog = match op {
        DualOp::Mult => Program::compile_mult_h(),
        DualOp::Div => Program::compile_div_h(),
        DualOp::IsDiv => Program::compile_is_div_h(),
    };
    let agents = agents_for(schedule);
    let proto = StackProtocol::new(prog.clone(), mode_of(schedule), agents);
    let world = World::oriented(1);
    let heights = [0, h, h, y, h];
    let placement: Vec<(Cell, Agent<Pc>)> = proto
        .initial_states(None)
        .into_iter()
        .enumerate()
        .map(|(i, s)| (Cell::new(&[heights[i] as i64]), s))
        .collect();
    let budget = watchdog.unwrap_or_else(|| dual_budget(h, y * h.max(1), schedule));
    let cfg = RunConfig::new(schedule.clone(), budget);
    let mut loop_states = Vec::new();
    let mut verdict = None;
    let mut monitor = on_entry(placement.clone(), |pc, agents| {
        match prog.tag(pc) {
            Some(Tag::LoopHead) => loop_states.push((height(agents, 1), height(agents, 3))),
            Some(Tag::Verdict(v)) => verdict = Some(v),
            _ => {}
        }
        false
    });
    let out = run_from(&proto, &world, placement, &cfg, &mut *monitor)?;
    drop(monitor);
    Ok(DualRun {
        h2: height(&out.agents, 1),
        h3: height(&out.agents, 2),
        y: height(&out.agents, 3),
        verdict,
        loop_states,
        steps: out.trace.steps,
        trace: out.trace,
    })
}

/// The offset of the anchor of the side-`h` cube centred at the origin:
/// coordinates run over `-h/2+1 ..= h/2`.
pub fn anchor(h: u64, n: usize) -> Cell {
    let a = -(h as i64 / 2 - 1);
    Cell::new(&vec![a; n])
}

/// The tuple of a cell relative to `anchor`.
pub fn tuple_of(c: &Cell, anchor: &Cell) -> Vec<u64> {
    c.coords().iter().zip(anchor.coords()).map(|(x, a)| (x - a) as u64).collect()
}

/// `(((t1 h + t2) h + t3) ...) h + tn`.
pub fn encode_tuple(t: &[u64], h: u64) -> u64 {
    t.iter().fold(0, |acc, &d| acc * h + d)
}

#[derive(Clone, Debug)]
pub struct CubeRun {
    /// Cells `a1` stood on at each visit, in order.
    pub visits: Vec<Cell>,
    pub stop: StopReason,
    pub trace: Trace,
}

/// Explores the side-`h` cube anchored at `anchor(h, n)`.
pub fn hypercube_explore(
    h: u8,
    n: usize,
    schedule: &Schedule,
    treasure: Option<Cell>,
    watchdog: u64,
) -> Result<CubeRun, SimError> {
    assert!(h >= 2 && h.is_power_of_two(), "h must be a power of two >= 2");
    let prog = Program::compile_hypercube(h, n);
    let agents = agents_for(schedule);
    let proto = StackProtocol::new(prog.clone(), mode_of(schedule), agents);
    let world = World::oriented(n);
    let a = anchor(h as u64, n);
    let placement: Vec<(Cell, Agent<Pc>)> = proto.initial_states(None).into_iter().map(|s| (a, s)).collect();
    let mut cfg = RunConfig::new(schedule.clone(), watchdog);
    cfg.treasure = treasure;
    let mut visits = Vec::new();
    let mut monitor = on_entry(placement.clone(), |pc, agents| {
        if prog.tag(pc) == Some(Tag::Visit) {
            visits.push(agents[0].0);
        }
        false
    });
    let out = run_from(&proto, &world, placement, &cfg, &mut *monitor)?;
    drop(monitor);
    Ok(CubeRun { visits, stop: out.stop, trace: out.trace })
}

#[derive(Clone, Debug)]
pub struct SearchRun {
    /// Side of the cube being explored when the treasure was found.
    pub h_final: u64,
    /// Steps (FSYNC) or total distance (SSYNC) until the treasure.
    pub cost: u64,
    pub wallclock_ms: u128,
    pub trace: Trace,
}

/// The doubling search for `treasure`.
pub fn treasure_search(n: usize, schedule: &Schedule, treasure: &Cell, watchdog: u64) -> Result<SearchRun, SimError> {
    assert!(!treasure.is_origin(), "the treasure must not be at the origin");
    let t0 = Instant::now();
    let prog = Arc::new(Program::compile_search(n));
    let agents = agents_for(schedule);
    let proto = StackProtocol::new(prog.as_ref().clone(), mode_of(schedule), agents);
    let world = World::oriented(n);
    let origin = Cell::origin(n);
    let placement: Vec<(Cell, Agent<Pc>)> = proto.initial_states(None).into_iter().map(|s| (origin, s)).collect();
    let mut cfg = RunConfig::new(schedule.clone(), watchdog);
    cfg.treasure = Some(*treasure);
    let mut h_final = 2;
    let mut monitor = on_entry(placement.clone(), |pc, agents| {
        if prog.tag(pc) == Some(Tag::Visit) {
            h_final = height(agents, 1) as u64;
        }
        false
    });
    let out = run_from(&proto, &world, placement, &cfg, &mut *monitor)?;
    drop(monitor);
    let cost = out.trace.cost().expect("treasure run ends at the treasure");
    Ok(SearchRun { h_final, cost, wallclock_ms: t0.elapsed().as_millis(), trace: out.trace })
}

/// How often each tag was reached, for diagnostics.
pub fn tag_counts(prog: &Program) -> HashMap<Tag, usize> {
    let mut m = HashMap::new();
    for n in &prog.nodes {
        if let Some(t) = n.tag {
            *m.entry(t).or_insert(0) += 1;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mult_h_examples() {
        let r = run_dual(DualOp::Mult, 4, 3, &Schedule::Fsync, None).unwrap();
        assert_eq!((r.h2, r.h3, r.y), (4, 4, 12));
        let r = run_dual(DualOp::Mult, 8, 5, &Schedule::Fsync, None).unwrap();
        assert_eq!(r.y, 40);
        let hs: Vec<i64> = r.loop_states.iter().map(|s| s.0).collect();
        assert_eq!(hs, vec![8, 12, 18, 27]);
        let r = run_dual(DualOp::Mult, 1, 7, &Schedule::Fsync, None).unwrap();
        assert_eq!((r.h2, r.y), (1, 7));
    }

    #[test]
    fn div_h_examples() {
        assert_eq!(run_dual(DualOp::Div, 4, 12, &Schedule::Fsync, None).unwrap().y, 3);
        assert_eq!(run_dual(DualOp::Div, 2, 2, &Schedule::Fsync, None).unwrap().y, 1);
        assert!(run_dual(DualOp::Div, 4, 10, &Schedule::Fsync, Some(20_000)).unwrap_err().is_watchdog());
    }

    #[test]
    fn is_div_h_examples() {
        let r = run_dual(DualOp::IsDiv, 4, 12, &Schedule::Fsync, None).unwrap();
        assert_eq!((r.verdict, r.h2, r.h3, r.y), (Some(true), 4, 4, 12));
        let r = run_dual(DualOp::IsDiv, 4, 10, &Schedule::Fsync, None).unwrap();
        assert_eq!((r.verdict, r.h2, r.h3, r.y), (Some(false), 4, 4, 10));
    }

    #[test]
    fn loop_heads_keep_the_product_invariant() {
        for h in [2u64, 4, 8] {
            let i = h.trailing_zeros();
            for x in 1..=6u64 {
                let r = run_dual(DualOp::Mult, h, x, &Schedule::Fsync, None).unwrap();
                assert_eq!(r.loop_states.len() as u32, i + 1);
                for (j, &(hh, y)) in r.loop_states.iter().enumerate() {
                    let j = j as u32;
                    assert_eq!(hh as u64, 3u64.pow(j) << (i - j));
                    assert_eq!(y as u64, x << j);
                }
            }
        }
    }

    #[test]
    fn tuple_encoding() {
        assert_eq!(encode_tuple(&[2, 3], 4), 11);
        assert_eq!(anchor(4, 2), Cell::new(&[-1, -1]));
        assert_eq!(anchor(2, 3), Cell::origin(3));
    }

    #[test]
    fn small_cube_in_order() {
        let r = hypercube_explore(2, 2, &Schedule::Fsync, None, 10_000_000).unwrap();
        let got: Vec<Vec<u64>> = r.visits.iter().map(|c| tuple_of(c, &anchor(2, 2))).collect();
        assert_eq!(got, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn programs_have_one_visit_point() {
        assert_eq!(tag_counts(&Program::compile_search(2)).get(&Tag::Visit), Some(&1));
    }
}
