//! Exploration of oriented grids with a counter stack.
//!
//! The stack size `X` is read as the vector of `p_i`-adic valuations of `X`
//! for the first `n` odd primes. For every sign pattern `g`, the base agent
//! walks to the cell `(g_1 v_1, ..., g_n v_n)` by trading each factor `p_i`
//! for a factor 2 and stepping once per trade, restores `X`, and walks back
//! the same way with the signs flipped. Then `X` grows by 2.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::grid::{Cell, OrientedMove, MAX_DIM};
use crate::scheduler::{run, RunConfig, Schedule, ScheduleKind, SimError, StopReason, Trace, Verbosity, World};
use crate::stack::{Agent, Mode, Op, Phase, Sequencer, StackProtocol, SubSpec};

const ODD_PRIMES: [u64; MAX_DIM] = [3, 5, 7, 11, 13, 17, 19, 23];

/// The first `n` odd primes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeTable {
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn new(n: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&n), "dimension out of range");
        PrimeTable { primes: ODD_PRIMES[..n].to_vec() }
    }

    pub fn n(&self) -> usize {
        self.primes.len()
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Prime for dimension `i` (1-based).
    pub fn p(&self, i: usize) -> u64 {
        self.primes[i - 1]
    }
}

/// The valuation vector the counter `x` stands for.
pub fn encode_counter(x: u64, table: &PrimeTable) -> Vec<u32> {
    assert!(x >= 1, "counter must be positive");
    table
        .primes()
        .iter()
        .map(|&p| {
            let (mut y, mut v) = (x, 0);
            while y % p == 0 {
                y /= p;
                v += 1;
            }
            v
        })
        .collect()
}

/// The counter value during which `c` is visited: the product of
/// `p_i^|c_i|`.
pub fn counter_for_cell(c: &Cell, table: &PrimeTable) -> u64 {
    assert_eq!(c.dim(), table.n(), "cell dimension does not match the prime table");
    c.coords().iter().zip(table.primes()).map(|(x, p)| p.pow(x.unsigned_abs() as u32)).product()
}

/// Where in the loop structure the protocol is.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
pub enum Step {
    Init,
    /// First loop: test, divide by `p_i`, multiply by 2, step.
    IsDivP,
    DivP,
    Mult2,
    Move,
    /// Second loop: test, divide by 2, multiply by `p_i`.
    IsDiv2,
    Div2,
    MultP,
    Inc,
}

/// The control tuple carried by the mobile agents.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct ExploreCtl {
    pub step: Step,
    /// Sign pattern: bit `i-1` clear means `+1` along dimension `i`.
    pub g: u16,
    /// Dimension, 1-based.
    pub i: u8,
    /// On the way back (signs flipped).
    pub back: bool,
}

impl fmt::Display for ExploreCtl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}:g{}:i{}:{}", self.step, self.g, self.i, if self.back { "bwd" } else { "fwd" })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid control transition from {ctl}: {why}")]
pub struct InvalidControl {
    pub ctl: String,
    pub why: &'static str,
}

/// The explore control flow for dimension `n`.
#[derive(Clone, Debug)]
pub struct ExploreSeq {
    pub table: PrimeTable,
}

impl ExploreSeq {
    pub fn new(n: usize) -> Self {
        ExploreSeq { table: PrimeTable::new(n) }
    }

    fn n(&self) -> usize {
        self.table.n()
    }

    fn top(g: u16, i: u8, back: bool) -> ExploreCtl {
        ExploreCtl { step: Step::IsDivP, g, i, back }
    }

    /// The sign of the step along dimension `c.i`.
    pub fn sign(c: &ExploreCtl) -> i8 {
        let plus = c.g >> (c.i - 1) & 1 == 0;
        if plus != c.back {
            1
        } else {
            -1
        }
    }

    /// The control after `c`. `verdict` must be given exactly after a
    /// divisibility test.
    pub fn next_control(&self, c: &ExploreCtl, verdict: Option<bool>) -> Result<Option<ExploreCtl>, InvalidControl> {
        let bad = |why| InvalidControl { ctl: c.to_string(), why };
        let is_test = matches!(c.step, Step::IsDivP | Step::IsDiv2);
        if is_test != verdict.is_some() {
            return Err(bad(if is_test { "divisibility test without verdict" } else { "verdict after a non-test step" }));
        }
        let with = |step| ExploreCtl { step, ..*c };
        let n = self.n() as u8;
        let next = match (c.step, verdict) {
            (Step::Init, _) | (Step::Inc, _) => Self::top(0, 1, false),
            (Step::IsDivP, Some(true)) => with(Step::DivP),
            (Step::IsDivP, Some(false)) => with(Step::IsDiv2),
            (Step::DivP, _) => with(Step::Mult2),
            (Step::Mult2, _) => with(Step::Move),
            (Step::Move, _) => with(Step::IsDivP),
            (Step::IsDiv2, Some(true)) => with(Step::Div2),
            (Step::Div2, _) => with(Step::MultP),
            (Step::MultP, _) => with(Step::IsDiv2),
            (Step::IsDiv2, Some(false)) => {
                if c.i < n {
                    Self::top(c.g, c.i + 1, c.back)
                } else if !c.back {
                    Self::top(c.g, 1, true)
                } else if (c.g as u32 + 1) < (1u32 << n) {
                    Self::top(c.g + 1, 1, false)
                } else {
                    ExploreCtl { step: Step::Inc, g: 0, i: 1, back: false }
                }
            }
            (Step::IsDivP | Step::IsDiv2, None) => unreachable!(),
        };
        Ok(Some(next))
    }
}

impl Sequencer for ExploreSeq {
    type Ctl = ExploreCtl;

    fn first(&self) -> ExploreCtl {
        ExploreCtl { step: Step::Init, g: 0, i: 1, back: false }
    }

    fn spec(&self, c: &ExploreCtl) -> SubSpec {
        let p = self.table.p(c.i as usize) as u8;
        let op = match c.step {
            Step::Init => Op::Init(3),
            Step::IsDivP => Op::IsDiv(p),
            Step::DivP => Op::Div(p),
            Step::Mult2 => Op::Mult(2),
            Step::Move => Op::Move(OrientedMove::new(Self::sign(c), c.i)),
            Step::IsDiv2 => Op::IsDiv(2),
            Step::Div2 => Op::Div(2),
            Step::MultP => Op::Mult(p),
            Step::Inc => Op::Inc(2),
        };
        SubSpec::std(op)
    }

    fn next(&self, c: &ExploreCtl, verdict: bool) -> Option<ExploreCtl> {
        let v = matches!(c.step, Step::IsDivP | Step::IsDiv2).then_some(verdict);
        self.next_control(c, v).expect("sequencer supplies verdicts exactly after tests")
    }

    fn controls(&self) -> Vec<ExploreCtl> {
        let n = self.n() as u8;
        let mut out = vec![self.first(), ExploreCtl { step: Step::Inc, g: 0, i: 1, back: false }];
        let steps = [Step::IsDivP, Step::DivP, Step::Mult2, Step::Move, Step::IsDiv2, Step::Div2, Step::MultP];
        for g in 0..(1u16 << n) {
            for i in 1..=n {
                for back in [false, true] {
                    for step in steps {
                        out.push(ExploreCtl { step, g, i, back });
                    }
                }
            }
        }
        out
    }
}

/// Number of control values for dimension `n`.
pub fn control_count(n: usize) -> usize {
    2 + 7 * 2 * n * (1 << n)
}

/// When to stop an exploration run.
#[derive(Clone, Debug, PartialEq)]
pub enum Stop {
    /// After the iteration for this counter value (the increment that
    /// follows it starts).
    Counter(u64),
    /// When any agent reaches the cell.
    Treasure(Cell),
    /// When the base agent has visited every listed cell.
    Visited(Vec<Cell>),
}

#[derive(Clone, Debug)]
pub struct ExploreOptions {
    pub watchdog: u64,
    pub verbosity: Verbosity,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions { watchdog: 4_000_000_000, verbosity: Verbosity::None }
    }
}

#[derive(Clone, Debug)]
pub struct ExploreRun {
    pub trace: Trace,
    /// The last counter value whose iteration completed.
    pub counter: u64,
    pub stop: StopReason,
}

impl ExploreRun {
    /// Cells visited by the base agent.
    pub fn base_visited(&self) -> HashSet<Cell> {
        self.trace.visited[0].keys().copied().collect()
    }
}

pub fn mode_of(schedule: &Schedule) -> Mode {
    match schedule.kind() {
        ScheduleKind::Fsync => Mode::Sync,
        ScheduleKind::Ssync => Mode::Ssync,
    }
}

/// The explore protocol: three agents, plus a synchronizer under SSYNC.
pub fn explore_protocol(n: usize, mode: Mode) -> StackProtocol<ExploreSeq> {
    let agents = if mode == Mode::Sync { 3 } else { 4 };
    StackProtocol::new(ExploreSeq::new(n), mode, agents)
}

/// Runs the protocol from the origin until `stop`.
pub fn run_explore(n: usize, schedule: &Schedule, stop: &Stop, opts: &ExploreOptions) -> Result<ExploreRun, SimError> {
    let proto = explore_protocol(n, mode_of(schedule));
    let world = World::oriented(n);
    let mut cfg = RunConfig::new(schedule.clone(), opts.watchdog);
    cfg.verbosity = opts.verbosity;
    if let Stop::Treasure(t) = stop {
        cfg.treasure = Some(*t);
    }
    let mut counter = 0;
    let mut pending: HashSet<Cell> = match stop {
        Stop::Visited(v) => v.iter().copied().filter(|c| !c.is_origin()).collect(),
        _ => HashSet::new(),
    };
    let mut monitor = |_t: u64, agents: &[(Cell, Agent<ExploreCtl>)]| {
        if let Agent::Mobile(m) = &agents[1].1 {
            if m.ctl.step == Step::Inc && m.phase == Phase::Walk(0) {
                counter = (agents[1].0.coord(1) - agents[0].0.coord(1)) as u64;
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
    let out = run(&proto, &world, &cfg, &mut monitor)?;
    Ok(ExploreRun { trace: out.trace, counter, stop: out.stop })
}
