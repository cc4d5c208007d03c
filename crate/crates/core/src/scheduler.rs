//! Look-compute-move execution under FSYNC and SSYNC schedules.
//!
//! One step activates a nonempty set of agents. All activated agents observe
//! the same pre-step snapshot, then all of their moves are applied. A
//! singleton activation set therefore gives the fully serialized reading of
//! SSYNC, a larger set the batch-simultaneous one.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automaton::{observe, step_agent, Move, Protocol, UndefinedTransition, WorldKind};
use crate::grid::{apply_move, traverse_port, Cell, GridError, Labeling, LabelingSpec};

/// Who the SSYNC adversary activates.
#[derive(Clone, Debug, PartialEq)]
pub enum Adversary {
    /// Singleton activations in fixed cyclic order a1, a2, ...
    RoundRobin,
    /// Singleton activations; each round of `m` steps uses the cyclic order
    /// rotated by the round number.
    SingletonRotate,
    /// Every agent independently with probability `p`; batches are
    /// simultaneous.
    SeededRandom { seed: u64, p: f64 },
    /// One uniformly random agent per step.
    SeededSingleton { seed: u64 },
    /// Explicit activation sets, one per step, repeated cyclically.
    Scripted(Vec<Vec<usize>>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Schedule {
    Fsync,
    Ssync { adversary: Adversary, fairness: u64 },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum ScheduleKind {
    Fsync,
    Ssync,
}

impl Schedule {
    pub fn kind(&self) -> ScheduleKind {
        match self {
            Schedule::Fsync => ScheduleKind::Fsync,
            Schedule::Ssync { .. } => ScheduleKind::Ssync,
        }
    }

    /// The default fairness window for `agents` agents.
    pub fn default_fairness(agents: usize) -> u64 {
        8 * agents as u64
    }

    pub fn ssync(adversary: Adversary, fairness: u64) -> Self {
        Schedule::Ssync { adversary, fairness }
    }

    /// The fairness window, or 1 for FSYNC.
    pub fn fairness(&self) -> u64 {
        match self {
            Schedule::Fsync => 1,
            Schedule::Ssync { fairness, .. } => *fairness,
        }
    }

    /// Parses `fsync`, `ssync:round-robin`, `ssync:rotate`,
    /// `ssync:random:SEED:P`, `ssync:singleton:SEED` or `ssync:script:PATH`,
    /// each optionally followed by `@B` for the fairness window.
    pub fn parse(s: &str, agents: usize) -> Result<Self, ScheduleError> {
        let (body, fairness) = match s.rsplit_once('@') {
            Some((b, f)) => (b, Some(f.parse::<u64>().map_err(|_| ScheduleError::Parse(s.into()))?)),
            None => (s, None),
        };
        let bad = || ScheduleError::Parse(s.to_string());
        let parts: Vec<&str> = body.split(':').collect();
        let adversary = match parts.as_slice() {
            ["fsync"] => return Ok(Schedule::Fsync),
            ["ssync"] | ["ssync", "round-robin"] => Adversary::RoundRobin,
            ["ssync", "rotate"] => Adversary::SingletonRotate,
            ["ssync", "random", seed, p] => Adversary::SeededRandom {
                seed: seed.parse().map_err(|_| bad())?,
                p: p.parse().map_err(|_| bad())?,
            },
            ["ssync", "singleton", seed] => Adversary::SeededSingleton { seed: seed.parse().map_err(|_| bad())? },
            ["ssync", "script", path] => Adversary::Scripted(load_script(path)?),
            _ => return Err(bad()),
        };
        if let Adversary::SeededRandom { p, .. } = adversary {
            if !(p > 0.0 && p <= 1.0) {
                return Err(bad());
            }
        }
        let fairness = fairness.unwrap_or_else(|| Schedule::default_fairness(agents));
        if fairness < agents as u64 {
            return Err(ScheduleError::Parse(format!("{s}: fairness window below agent count")));
        }
        Ok(Schedule::Ssync { adversary, fairness })
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Fsync => f.write_str("fsync"),
            Schedule::Ssync { adversary, fairness } => {
                match adversary {
                    Adversary::RoundRobin => f.write_str("ssync:round-robin")?,
                    Adversary::SingletonRotate => f.write_str("ssync:rotate")?,
                    Adversary::SeededRandom { seed, p } => write!(f, "ssync:random:{seed}:{p}")?,
                    Adversary::SeededSingleton { seed } => write!(f, "ssync:singleton:{seed}")?,
                    Adversary::Scripted(v) => write!(f, "ssync:script[{}]", v.len())?,
                }
                write!(f, "@{fairness}")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("cannot parse schedule `{0}`")]
    Parse(String),
    #[error("cannot read schedule script: {0}")]
    Io(#[from] std::io::Error),
}

/// A script file holds one activation set per line, agent indices
/// (0-based) separated by commas. Blank lines and `#` comments are skipped.
pub fn load_script(path: &str) -> Result<Vec<Vec<usize>>, ScheduleError> {
    let text = std::fs::read_to_string(path)?;
    parse_script(&text).ok_or_else(|| ScheduleError::Parse(path.to_string()))
}

pub fn parse_script(text: &str) -> Option<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let set: Option<Vec<usize>> = line.split(',').map(|t| t.trim().parse().ok()).collect();
        out.push(set?);
    }
    if out.is_empty() { None } else { Some(out) }
}

/// Produces activation sets step by step, enforcing the fairness window.
struct Activations {
    schedule: Schedule,
    m: usize,
    rng: ChaCha8Rng,
    /// Steps since each agent was last active.
    idle: Vec<u64>,
}

impl Activations {
    fn new(schedule: &Schedule, m: usize) -> Self {
        let seed = match schedule {
            Schedule::Ssync { adversary: Adversary::SeededRandom { seed, .. }, .. }
            | Schedule::Ssync { adversary: Adversary::SeededSingleton { seed }, .. } => *seed,
            _ => 0,
        };
        Activations { schedule: schedule.clone(), m, rng: ChaCha8Rng::seed_from_u64(seed), idle: vec![0; m] }
    }

    fn next(&mut self, step: u64) -> Result<Vec<usize>, SimError> {
        let m = self.m;
        let set = match &self.schedule {
            Schedule::Fsync => (0..m).collect(),
            Schedule::Ssync { adversary, fairness } => {
                let b = *fairness;
                let t = (step - 1) as usize;
                match adversary {
                    Adversary::RoundRobin => vec![t % m],
                    Adversary::SingletonRotate => {
                        let round = t / m;
                        vec![(t % m + round) % m]
                    }
                    Adversary::SeededRandom { p, .. } => {
                        let p = *p;
                        let mut set: Vec<usize> =
                            (0..m).filter(|&i| self.idle[i] + 1 >= b || self.rng.gen_bool(p)).collect();
                        if set.is_empty() {
                            set.push(self.rng.gen_range(0..m));
                        }
                        set
                    }
                    Adversary::SeededSingleton { .. } => {
                        // with at most one activation per step, an agent must be
                        // served once its slack drops below the number of agents
                        let urgent = (0..m).filter(|&i| self.idle[i] + m as u64 >= b).max_by_key(|&i| (self.idle[i], i));
                        vec![urgent.unwrap_or_else(|| self.rng.gen_range(0..m))]
                    }
                    Adversary::Scripted(script) => script[t % script.len()].clone(),
                }
            }
        };
        for &i in &set {
            if i >= m {
                return Err(SimError::BadActivation { step, agent: i });
            }
        }
        for i in 0..m {
            if set.contains(&i) {
                self.idle[i] = 0;
            } else {
                self.idle[i] += 1;
                if self.idle[i] >= self.schedule.fairness() {
                    return Err(SimError::FairnessViolation { step, agent: i });
                }
            }
        }
        Ok(set)
    }
}

/// The environment a run takes place in.
#[derive(Clone)]
pub struct World {
    pub n: usize,
    pub labeling: Option<Arc<dyn Labeling>>,
    pub labeling_spec: Option<LabelingSpec>,
}

impl World {
    pub fn oriented(n: usize) -> Self {
        World { n, labeling: None, labeling_spec: None }
    }

    pub fn unoriented(lab: Arc<dyn Labeling>) -> Self {
        World { n: lab.dim(), labeling: Some(lab), labeling_spec: None }
    }

    pub fn from_spec(spec: LabelingSpec) -> Self {
        let lab = Arc::new(crate::grid::PortLabeling::new(spec));
        World { n: spec.n, labeling: Some(lab), labeling_spec: Some(spec) }
    }

    pub fn kind(&self) -> WorldKind {
        if self.labeling.is_some() {
            WorldKind::Unoriented
        } else {
            WorldKind::Oriented
        }
    }

    pub fn describe(&self) -> String {
        match (&self.labeling, &self.labeling_spec) {
            (None, _) => format!("oriented:{}", self.n),
            (Some(_), Some(s)) => s.to_string(),
            (Some(_), None) => format!("unoriented:custom:{}", self.n),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize, Default)]
pub enum Verbosity {
    None,
    #[default]
    Boundaries,
    Full,
}

impl FromStr for Verbosity {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Verbosity::None),
            "boundaries" => Ok(Verbosity::Boundaries),
            "full" => Ok(Verbosity::Full),
            _ => Err(format!("unknown verbosity `{s}` (none|boundaries|full)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub schedule: Schedule,
    pub watchdog: u64,
    pub treasure: Option<Cell>,
    pub verbosity: Verbosity,
    /// Stop when the protocol reports that it has nothing left to do.
    pub stop_on_terminal: bool,
    /// Keep the activation set of every step in the trace.
    pub record_activations: bool,
}

impl RunConfig {
    pub fn new(schedule: Schedule, watchdog: u64) -> Self {
        RunConfig {
            schedule,
            watchdog,
            treasure: None,
            verbosity: Verbosity::None,
            stop_on_terminal: true,
            record_activations: false,
        }
    }
}

/// One agent's cycle within one step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub step: u64,
    pub agent: usize,
    pub cell_before: Cell,
    pub state_before: String,
    #[serde(rename = "move")]
    pub mv: String,
    pub cell_after: Cell,
    pub state_after: String,
}

/// A subroutine boundary crossed by some agent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Boundary {
    pub step: u64,
    pub agent: usize,
    pub cell: Cell,
    pub label: String,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub kind: ScheduleKind,
    pub steps: u64,
    pub events: Vec<Event>,
    pub boundaries: Vec<Boundary>,
    /// Per agent: visited cells with the step of the first visit.
    pub visited: Vec<HashMap<Cell, u64>>,
    pub distance: Vec<u64>,
    pub first_treasure_step: Option<u64>,
    pub activations: Vec<Vec<usize>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("treasure was not found in this trace")]
pub struct TreasureNotFound;

impl Trace {
    fn new(kind: ScheduleKind, start: &[Cell]) -> Self {
        Trace {
            kind,
            steps: 0,
            events: Vec::new(),
            boundaries: Vec::new(),
            visited: start.iter().map(|c| HashMap::from([(*c, 0)])).collect(),
            distance: vec![0; start.len()],
            first_treasure_step: None,
            activations: Vec::new(),
        }
    }

    pub fn total_distance(&self) -> u64 {
        self.distance.iter().sum()
    }

    /// All cells visited by any agent, with the earliest visit step.
    pub fn visited_union(&self) -> HashMap<Cell, u64> {
        let mut out: HashMap<Cell, u64> = HashMap::new();
        for v in &self.visited {
            for (c, t) in v {
                out.entry(*c).and_modify(|x| *x = (*x).min(*t)).or_insert(*t);
            }
        }
        out
    }

    /// FSYNC: the first step at which an agent stands on the treasure.
    /// SSYNC: the total distance travelled by all agents.
    pub fn cost(&self) -> Result<u64, TreasureNotFound> {
        let t = self.first_treasure_step.ok_or(TreasureNotFound)?;
        Ok(match self.kind {
            ScheduleKind::Fsync => t,
            ScheduleKind::Ssync => self.total_distance(),
        })
    }

    /// Writes a JSON-lines trace: the header, then boundaries and events in
    /// step order.
    pub fn write_jsonl<W: Write>(&self, mut w: W, header: &TraceHeader) -> std::io::Result<()> {
        serde_json::to_writer(&mut w, header)?;
        writeln!(w)?;
        let (mut bi, mut ei) = (0, 0);
        while bi < self.boundaries.len() || ei < self.events.len() {
            let take_boundary = match (self.boundaries.get(bi), self.events.get(ei)) {
                (Some(b), Some(e)) => b.step <= e.step,
                (Some(_), None) => true,
                _ => false,
            };
            if take_boundary {
                serde_json::to_writer(&mut w, &BoundaryLine { boundary: &self.boundaries[bi] })?;
                bi += 1;
            } else {
                serde_json::to_writer(&mut w, &self.events[ei])?;
                ei += 1;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct BoundaryLine<'a> {
    boundary: &'a Boundary,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TraceHeader {
    pub world: String,
    pub protocol: String,
    pub schedule: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

/// One CSV metrics row.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MetricsRow {
    pub protocol: String,
    pub n: usize,
    #[serde(rename = "D")]
    pub d: u64,
    pub schedule: String,
    pub cost: Option<u64>,
    pub steps: u64,
    pub visited_count: usize,
}

#[derive(Debug, Error, Clone)]
pub enum SimError {
    #[error("watchdog exceeded after {steps} steps")]
    Watchdog { steps: u64, trace: Box<Trace> },
    #[error(transparent)]
    Undefined(#[from] UndefinedTransition),
    #[error("agent {agent} starved beyond the fairness window at step {step}")]
    FairnessViolation { step: u64, agent: usize },
    #[error("activation of nonexistent agent {agent} at step {step}")]
    BadActivation { step: u64, agent: usize },
    #[error("agent {agent} attempted a handrail move without a co-located helper at step {step}")]
    HelperAbsent { step: u64, agent: usize },
    #[error("agent {agent} issued {mv} which does not fit the world kind (step {step})")]
    KindMismatch { step: u64, agent: usize, mv: String },
    #[error(transparent)]
    Grid(#[from] GridError),
}

impl SimError {
    pub fn is_watchdog(&self) -> bool {
        matches!(self, SimError::Watchdog { .. })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StopReason {
    Treasure,
    Terminal,
    Monitor,
}

#[derive(Clone, Debug)]
pub struct RunOutcome<S> {
    pub trace: Trace,
    pub agents: Vec<(Cell, S)>,
    pub stop: StopReason,
}

/// Runs `proto` from its initial states with every agent at the origin.
pub fn run<P: Protocol>(
    proto: &P,
    world: &World,
    cfg: &RunConfig,
    monitor: &mut dyn FnMut(u64, &[(Cell, P::State)]) -> bool,
) -> Result<RunOutcome<P::State>, SimError> {
    let states = proto.initial_states(world.labeling.as_deref());
    let origin = Cell::origin(world.n);
    let agents = states.into_iter().map(|s| (origin, s)).collect();
    run_from(proto, world, agents, cfg, monitor)
}

/// Runs `proto` from an explicit placement.
pub fn run_from<P: Protocol>(
    proto: &P,
    world: &World,
    mut agents: Vec<(Cell, P::State)>,
    cfg: &RunConfig,
    monitor: &mut dyn FnMut(u64, &[(Cell, P::State)]) -> bool,
) -> Result<RunOutcome<P::State>, SimError> {
    let m = agents.len();
    let lab = world.labeling.as_deref();
    let cells: Vec<Cell> = agents.iter().map(|a| a.0).collect();
    let mut trace = Trace::new(cfg.schedule.kind(), &cells);
    let mut act = Activations::new(&cfg.schedule, m);
    if let Some(t) = cfg.treasure {
        if cells.contains(&t) {
            trace.first_treasure_step = Some(0);
            return Ok(RunOutcome { trace, agents, stop: StopReason::Treasure });
        }
    }
    let mut step = 0u64;
    loop {
        if step >= cfg.watchdog {
            trace.steps = step;
            return Err(SimError::Watchdog { steps: step, trace: Box::new(trace) });
        }
        step += 1;
        let active = act.next(step)?;
        let mut decisions = Vec::with_capacity(active.len());
        for &i in &active {
            let obs = observe(&agents, i, lab);
            let (s2, mv) = step_agent(proto, &agents[i].1, &obs)?;
            decisions.push((i, s2, mv));
        }
        // helpers are judged against the pre-step snapshot
        for (i, _, mv) in &decisions {
            if let Move::Handrail(_) = mv {
                let here = agents[*i].0;
                let ok = agents
                    .iter()
                    .enumerate()
                    .any(|(j, (c, s))| j != *i && *c == here && proto.is_handrail_helper(s));
                if !ok {
                    return Err(SimError::HelperAbsent { step, agent: *i });
                }
            }
        }
        for (i, s2, mv) in decisions {
            let from = agents[i].0;
            let (to, s2) = match (mv, lab) {
                (Move::Stay, _) => (from, s2),
                (Move::Oriented(m), None) => (apply_move(&from, m)?, s2),
                (Move::Port(p), Some(l)) => (traverse_port(l, &from, p)?, s2),
                (Move::Handrail(p), Some(l)) => {
                    let to = traverse_port(l, &from, p)?;
                    let s2 = proto.after_handrail(s2, l, &from, &to);
                    (to, s2)
                }
                (mv, _) => return Err(SimError::KindMismatch { step, agent: i, mv: mv.to_string() }),
            };
            if to != from {
                trace.distance[i] += 1;
                trace.visited[i].entry(to).or_insert(step);
            }
            if cfg.verbosity != Verbosity::None {
                if let Some(label) = proto.boundary(&agents[i].1, &s2) {
                    trace.boundaries.push(Boundary { step, agent: i, cell: to, label });
                }
            }
            if cfg.verbosity == Verbosity::Full {
                trace.events.push(Event {
                    step,
                    agent: i,
                    cell_before: from,
                    state_before: agents[i].1.to_string(),
                    mv: mv.to_string(),
                    cell_after: to,
                    state_after: s2.to_string(),
                });
            }
            agents[i] = (to, s2);
        }
        if cfg.record_activations {
            trace.activations.push(active);
        }
        trace.steps = step;
        if let Some(t) = cfg.treasure {
            if agents.iter().any(|a| a.0 == t) {
                trace.first_treasure_step = Some(step);
                return Ok(RunOutcome { trace, agents, stop: StopReason::Treasure });
            }
        }
        if cfg.stop_on_terminal {
            let states: Vec<P::State> = agents.iter().map(|a| a.1.clone()).collect();
            if proto.is_terminal(&states) {
                return Ok(RunOutcome { trace, agents, stop: StopReason::Terminal });
            }
        }
        if monitor(step, &agents) {
            return Ok(RunOutcome { trace, agents, stop: StopReason::Monitor });
        }
    }
}

/// True iff every window of `b` consecutive recorded steps activates every
/// one of `m` agents.
pub fn check_fairness(activations: &[Vec<usize>], m: usize, b: usize) -> bool {
    let mut last = vec![0usize; m];
    for (t, set) in activations.iter().enumerate() {
        for &i in set {
            last[i] = t + 1;
        }
        for &l in &last {
            if t + 1 - l >= b {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{Observation, UndefinedTransition};
    use crate::grid::OrientedMove;

    /// Agents that walk north a fixed number of times.
    struct Walker {
        agents: usize,
        len: u32,
    }

    impl Protocol for Walker {
        type State = u32;
        fn kind(&self) -> WorldKind {
            WorldKind::Oriented
        }
        fn agent_count(&self) -> usize {
            self.agents
        }
        fn initial_states(&self, _: Option<&dyn Labeling>) -> Vec<u32> {
            vec![0; self.agents]
        }
        fn delta(&self, s: &u32, _: &Observation<u32>) -> Result<(u32, Move), UndefinedTransition> {
            if *s < self.len {
                Ok((s + 1, Move::Oriented(OrientedMove::NORTH)))
            } else {
                Ok((*s, Move::Stay))
            }
        }
    }

    fn never(_: u64, _: &[(Cell, u32)]) -> bool {
        false
    }

    #[test]
    fn fsync_activates_everyone() {
        let p = Walker { agents: 3, len: 100 };
        let mut cfg = RunConfig::new(Schedule::Fsync, 5);
        cfg.verbosity = Verbosity::Full;
        let err = run(&p, &World::oriented(2), &cfg, &mut never).unwrap_err();
        let SimError::Watchdog { trace, .. } = err else { panic!() };
        for s in 1..=5 {
            assert_eq!(trace.events.iter().filter(|e| e.step == s).count(), 3);
        }
    }

    #[test]
    fn round_robin_pattern() {
        let p = Walker { agents: 3, len: 100 };
        let mut cfg = RunConfig::new(Schedule::ssync(Adversary::RoundRobin, 3), 7);
        cfg.record_activations = true;
        let SimError::Watchdog { trace, .. } = run(&p, &World::oriented(1), &cfg, &mut never).unwrap_err() else {
            panic!()
        };
        assert_eq!(trace.activations, vec![vec![0], vec![1], vec![2], vec![0], vec![1], vec![2], vec![0]]);
    }

    #[test]
    fn rotate_shifts_each_round() {
        let mut a = Activations::new(&Schedule::ssync(Adversary::SingletonRotate, 8), 3);
        let got: Vec<usize> = (1..=6).map(|t| a.next(t).unwrap()[0]).collect();
        assert_eq!(got, vec![0, 1, 2, 1, 2, 0]);
    }

    #[test]
    fn seeded_random_respects_fairness() {
        let p = Walker { agents: 4, len: u32::MAX };
        let mut cfg = RunConfig::new(Schedule::ssync(Adversary::SeededRandom { seed: 42, p: 0.5 }, 20), 1000);
        cfg.record_activations = true;
        let SimError::Watchdog { trace, .. } = run(&p, &World::oriented(1), &cfg, &mut never).unwrap_err() else {
            panic!()
        };
        assert!(check_fairness(&trace.activations, 4, 20));
    }

    #[test]
    fn seeded_singleton_respects_tight_fairness() {
        for seed in 0..20 {
            let mut a = Activations::new(&Schedule::ssync(Adversary::SeededSingleton { seed }, 5), 5);
            let acts: Vec<Vec<usize>> = (1..=2000).map(|t| a.next(t).unwrap()).collect();
            assert!(check_fairness(&acts, 5, 5));
        }
    }

    #[test]
    fn starving_script_is_a_fairness_violation() {
        let p = Walker { agents: 2, len: 100 };
        let cfg = RunConfig::new(Schedule::ssync(Adversary::Scripted(vec![vec![0]]), 4), 100);
        let err = run(&p, &World::oriented(1), &cfg, &mut never).unwrap_err();
        assert!(matches!(err, SimError::FairnessViolation { agent: 1, step: 4 }));
    }

    #[test]
    fn cost_definitions() {
        let p = Walker { agents: 1, len: 100 };
        let mut cfg = RunConfig::new(Schedule::Fsync, 100);
        cfg.treasure = Some(Cell::new(&[5, 0]));
        let out = run(&p, &World::oriented(2), &cfg, &mut |_, _| false).unwrap();
        assert_eq!(out.trace.cost(), Ok(5));
        let mut cfg = RunConfig::new(Schedule::ssync(Adversary::RoundRobin, 1), 100);
        cfg.treasure = Some(Cell::new(&[5, 0]));
        let out = run(&p, &World::oriented(2), &cfg, &mut |_, _| false).unwrap();
        assert_eq!(out.trace.cost(), Ok(5));
        let cfg = RunConfig::new(Schedule::Fsync, 3);
        let out = run(&p, &World::oriented(2), &cfg, &mut |s, _| s == 2).unwrap();
        assert_eq!(out.trace.cost(), Err(TreasureNotFound));
    }

    #[test]
    fn schedule_specs_parse() {
        assert_eq!(Schedule::parse("fsync", 3).unwrap(), Schedule::Fsync);
        assert_eq!(
            Schedule::parse("ssync:random:42:0.5@20", 4).unwrap(),
            Schedule::ssync(Adversary::SeededRandom { seed: 42, p: 0.5 }, 20)
        );
        assert_eq!(Schedule::parse("ssync:rotate", 4).unwrap(), Schedule::ssync(Adversary::SingletonRotate, 32));
        assert!(Schedule::parse("ssync:random:1:0", 4).is_err());
        assert!(Schedule::parse("ssync:rotate@2", 4).is_err());
        assert_eq!(parse_script("0,1\n# c\n2\n"), Some(vec![vec![0, 1], vec![2]]));
    }

    #[test]
    fn trace_jsonl_has_header_and_events() {
        let p = Walker { agents: 2, len: 2 };
        let mut cfg = RunConfig::new(Schedule::Fsync, 3);
        cfg.verbosity = Verbosity::Full;
        let out = run(&p, &World::oriented(1), &cfg, &mut |s, _| s == 2).unwrap();
        let mut buf = Vec::new();
        let header = TraceHeader {
            world: "oriented:1".into(),
            protocol: "walker".into(),
            schedule: "fsync".into(),
            seed: 0,
            timestamp: None,
        };
        out.trace.write_jsonl(&mut buf, &header).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        let e: Event = serde_json::from_str(text.lines().nth(1).unwrap()).unwrap();
        assert_eq!(e.cell_after, Cell::new(&[1]));
    }
}
