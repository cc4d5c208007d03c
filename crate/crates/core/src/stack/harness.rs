//! Running fixed sequences of subroutines and reading off the stack.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::{Agent, Mode, Op, Phase, Sequencer, StackProtocol, SubSpec};
use crate::automaton::Protocol;
use crate::grid::Cell;
use crate::scheduler::{run_from, RunConfig, Schedule, ScheduleKind, SimError, Trace, World};

/// A fixed list of subroutines, run once each.
#[derive(Clone, Debug)]
pub struct Script(pub Vec<SubSpec>);

/// Position in a [`Script`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Pos(pub usize);

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl Sequencer for Script {
    type Ctl = Pos;

    fn first(&self) -> Pos {
        Pos(0)
    }

    fn spec(&self, c: &Pos) -> SubSpec {
        self.0[c.0]
    }

    fn next(&self, c: &Pos, _verdict: bool) -> Option<Pos> {
        (c.0 + 1 < self.0.len()).then_some(Pos(c.0 + 1))
    }

    fn controls(&self) -> Vec<Pos> {
        (0..self.0.len()).map(Pos).collect()
    }
}

/// Where the stack is: the base cell, the cell of the fast agent `a2`, and
/// the distance between them.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct StackConfig {
    pub base: Cell,
    pub end: Cell,
    pub size: u64,
}

#[derive(Clone, Debug)]
pub struct SubRun {
    pub config: StackConfig,
    /// Distance north of the base of every mobile agent, `a2` first.
    pub heights: Vec<i64>,
    /// The fast agent's verdict at the end of each subroutine.
    pub verdicts: Vec<Option<bool>>,
    pub steps: u64,
    pub trace: Trace,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("agents left the base column: {0}")]
    OffColumn(String),
    #[error("{op} on {x}: expected {expected}, got {got}")]
    Postcondition { op: String, x: u64, expected: u64, got: u64 },
}

impl HarnessError {
    pub fn is_watchdog(&self) -> bool {
        matches!(self, HarnessError::Sim(e) if e.is_watchdog())
    }
}

/// The stack size after `op`, or `None` when the operation cannot finish
/// (division by a non-divisor, decrement below zero).
pub fn expected_size(x: u64, op: Op) -> Option<u64> {
    match op {
        Op::Init(k) => Some(k as u64),
        Op::Inc(k) => Some(x + k as u64),
        Op::Dec(k) => x.checked_sub(k as u64),
        Op::Mult(k) => Some(x * k as u64),
        Op::Div(k) => (x % k as u64 == 0).then(|| x / k as u64),
        Op::IsDiv(_) | Op::Move(_) | Op::Notify(_) | Op::Shift(_) | Op::Push(_) | Op::Seek { .. } => Some(x),
    }
}

/// Step budget for one subroutine on a stack of size `x`: four times the
/// slowest subroutine's running time, plus slack.
pub fn subroutine_budget(op: Op, x: u64) -> u64 {
    let k = match op {
        Op::Init(k) | Op::Inc(k) | Op::Dec(k) | Op::Mult(k) | Op::Div(k) | Op::IsDiv(k) => k.max(2) as u64,
        _ => 2,
    };
    4 * (k * k - 1) * x.max(1) + 64
}

/// Budget for a whole script, scaled by the fairness window under SSYNC.
pub fn script_budget(specs: &[SubSpec], x: u64, schedule: &Schedule) -> u64 {
    let mut size = x;
    let mut total = 0;
    for s in specs {
        total += subroutine_budget(s.op, size);
        size = expected_size(size, s.op).unwrap_or(size).max(size);
    }
    total * schedule.fairness()
}

/// Runs `specs` on an `n`-dimensional oriented grid with `a1` at the origin
/// and mobile agent `a(i+2)` at distance `heights[i]` north of it. Under
/// SSYNC the last agent is the synchronizer.
pub fn run_script(
    n: usize,
    specs: &[SubSpec],
    heights: &[u64],
    schedule: &Schedule,
    watchdog: Option<u64>,
) -> Result<SubRun, HarnessError> {
    let mode = match schedule.kind() {
        ScheduleKind::Fsync => Mode::Sync,
        ScheduleKind::Ssync => Mode::Ssync,
    };
    let agents = 1 + heights.len() as u8;
    let proto = StackProtocol::new(Script(specs.to_vec()), mode, agents);
    let world = World::oriented(n);
    let origin = Cell::origin(n);
    let placement: Vec<(Cell, Agent<Pos>)> = proto
        .initial_states(None)
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let h = if i == 0 { 0 } else { heights[i - 1] as i64 };
            let mut d = vec![0i64; n];
            d[0] = h;
            (origin.offset(&d).expect("placement fits the grid"), s)
        })
        .collect();
    let x = heights.first().copied().unwrap_or(0);
    let budget = watchdog.unwrap_or_else(|| script_budget(specs, x, schedule));
    let cfg = RunConfig::new(schedule.clone(), budget);
    let mut verdicts: HashMap<usize, bool> = HashMap::new();
    let mut monitor = |_t: u64, agents: &[(Cell, Agent<Pos>)]| {
        for (_, a) in agents {
            if let Agent::Mobile(m) = a {
                if let Phase::Fin(v) = m.phase {
                    if m.id == specs[m.ctl.0].fast {
                        verdicts.entry(m.ctl.0).or_insert(v);
                    }
                }
            }
        }
        false
    };
    let out = run_from(&proto, &world, placement, &cfg, &mut monitor)?;
    let base = out.agents[0].0;
    let mut heights = Vec::new();
    for (c, _) in &out.agents[1..] {
        if c.coords()[1..] != base.coords()[1..] {
            return Err(HarnessError::OffColumn(format!("{c} vs base {base}")));
        }
        heights.push(c.coord(1) - base.coord(1));
    }
    let end = out.agents[1].0;
    let size = heights[0].max(0) as u64;
    Ok(SubRun {
        config: StackConfig { base, end, size },
        heights,
        verdicts: (0..specs.len()).map(|i| verdicts.get(&i).copied()).collect(),
        steps: out.trace.steps,
        trace: out.trace,
    })
}

/// Runs one subroutine on a stack of size `x` with the standard crew (three
/// agents, plus the synchronizer under SSYNC) and checks the arithmetic.
pub fn run_subroutine(op: Op, x: u64, schedule: &Schedule) -> Result<SubRun, HarnessError> {
    run_sequence(&[op], x, schedule)
}

/// Runs several subroutines back to back, checking the final size.
pub fn run_sequence(ops: &[Op], x: u64, schedule: &Schedule) -> Result<SubRun, HarnessError> {
    let specs: Vec<SubSpec> = ops.iter().map(|&op| SubSpec::std(op)).collect();
    let heights: Vec<u64> = match schedule.kind() {
        ScheduleKind::Fsync => vec![x; 2],
        ScheduleKind::Ssync => vec![x; 3],
    };
    let r = run_script(1.max(max_dim(ops)), &specs, &heights, schedule, None)?;
    let mut expected = x;
    for &op in ops {
        expected = expected_size(expected, op).unwrap_or(expected);
    }
    if r.config.size != expected || r.heights.iter().any(|&h| h != r.heights[0]) {
        return Err(HarnessError::Postcondition {
            op: ops.iter().map(|o| o.name()).collect::<Vec<_>>().join(";"),
            x,
            expected,
            got: r.config.size,
        });
    }
    Ok(r)
}

fn max_dim(ops: &[Op]) -> usize {
    ops.iter()
        .map(|op| match op {
            Op::Move(m) | Op::Notify(m) | Op::Shift(m) | Op::Push(m) => m.dim as usize,
            _ => 1,
        })
        .max()
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::OrientedMove;
    use crate::scheduler::Adversary;

    fn fsync() -> Schedule {
        Schedule::Fsync
    }

    #[test]
    fn mult_and_div_examples() {
        assert_eq!(run_subroutine(Op::Mult(2), 5, &fsync()).unwrap().config.size, 10);
        assert_eq!(run_subroutine(Op::Mult(3), 1, &fsync()).unwrap().config.size, 3);
        assert_eq!(run_subroutine(Op::Div(2), 10, &fsync()).unwrap().config.size, 5);
        assert_eq!(run_subroutine(Op::Div(3), 9, &fsync()).unwrap().config.size, 3);
        assert!(run_subroutine(Op::Div(3), 10, &fsync()).unwrap_err().is_watchdog());
    }

    #[test]
    fn isdiv_verdicts() {
        let r = run_subroutine(Op::IsDiv(3), 9, &fsync()).unwrap();
        assert_eq!(r.verdicts, vec![Some(true)]);
        assert_eq!(r.config.size, 9);
        let r = run_subroutine(Op::IsDiv(3), 10, &fsync()).unwrap();
        assert_eq!(r.verdicts, vec![Some(false)]);
    }

    #[test]
    fn init_inc_dec() {
        assert_eq!(run_subroutine(Op::Init(3), 0, &fsync()).unwrap().config.size, 3);
        assert_eq!(run_subroutine(Op::Inc(2), 3, &fsync()).unwrap().config.size, 5);
        assert_eq!(run_subroutine(Op::Dec(1), 3, &fsync()).unwrap().config.size, 2);
    }

    #[test]
    fn move_shifts_the_whole_stack() {
        let m = OrientedMove::new(1, 2);
        let r = run_subroutine(Op::Move(m), 4, &fsync()).unwrap();
        assert_eq!(r.config.base, Cell::new(&[0, 1]));
        assert_eq!(r.config.size, 4);
        let back = run_sequence(&[Op::Move(OrientedMove::new(-1, 1)), Op::Move(OrientedMove::new(1, 1))], 4, &fsync())
            .unwrap();
        assert_eq!(back.config.base, Cell::origin(1));
    }

    #[test]
    fn composite_sequence() {
        let r = run_sequence(&[Op::Div(3), Op::Mult(2)], 45, &fsync()).unwrap();
        assert_eq!(r.config.size, 30);
    }

    #[test]
    fn ssync_mult_under_rotation_and_random_batches() {
        let rot = Schedule::ssync(Adversary::SingletonRotate, 32);
        assert_eq!(run_subroutine(Op::Mult(2), 5, &rot).unwrap().config.size, 10);
        for seed in 0..20 {
            let s = Schedule::ssync(Adversary::SeededRandom { seed, p: 0.5 }, 32);
            let r = run_subroutine(Op::Mult(3), 4, &s).unwrap();
            assert_eq!(r.config.size, 12);
        }
    }

    #[test]
    fn ssync_other_ops() {
        let s = Schedule::ssync(Adversary::SeededRandom { seed: 3, p: 0.5 }, 32);
        assert_eq!(run_subroutine(Op::Div(3), 9, &s).unwrap().config.size, 3);
        assert_eq!(run_subroutine(Op::IsDiv(3), 9, &s).unwrap().verdicts, vec![Some(true)]);
        assert_eq!(run_subroutine(Op::IsDiv(2), 9, &s).unwrap().verdicts, vec![Some(false)]);
        assert_eq!(run_subroutine(Op::Inc(2), 3, &s).unwrap().config.size, 5);
        let r = run_subroutine(Op::Move(OrientedMove::new(-1, 2)), 3, &s).unwrap();
        assert_eq!(r.config.base, Cell::new(&[0, -1]));
        assert!(run_subroutine(Op::Div(3), 10, &s).unwrap_err().is_watchdog());
    }
}
