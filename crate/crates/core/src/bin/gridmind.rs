use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use gridmind::explore::{run_explore, ExploreOptions, ExploreRun, Stop};
use gridmind::grid::{Cell, LabelingSpec, PortLabeling};
use gridmind::oracles;
use gridmind::poly::{self, DualOp};
use gridmind::scheduler::{Schedule, Trace, TraceHeader, Verbosity};
use gridmind::stack::harness::run_subroutine;
use gridmind::stack::Op;
use gridmind::unoriented::{run_explore_unoriented, virt_oracle};

const LONG_ABOUT: &str = "\
Runs the grid exploration protocols.

Settings come from command-line flags, then from the file given with
--config (one `key=value` per line, keys are long flag names without the
dashes, `#` starts a comment), then from built-in defaults.

Schedules: fsync, ssync (seeded random batches, p = 0.5), ssync:rotate,
ssync:round-robin, ssync:singleton:SEED, ssync:random:SEED:P,
ssync:script:PATH, each optionally followed by @B for the fairness window.

Exit status: 0 on success, 1 when a run fails (watchdog, postcondition),
2 on a usage error.";

#[derive(Parser)]
#[command(name = "gridmind", version, about = "Finite-automaton agents on infinite grids", long_about = LONG_ABOUT)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Seed for every random choice (falls back to GRIDMIND_SEED, then 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// key=value settings file.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Leave the timestamp out of trace headers.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Trace detail: none, boundaries or full.
    #[arg(long, global = true)]
    verbosity: Option<String>,
    /// Step budget.
    #[arg(long, global = true)]
    watchdog: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Explore the oriented grid.
    Explore {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        schedule: Option<String>,
        /// counter:X, treasure:C1,C2,..., or radius:R.
        #[arg(long)]
        stop: Option<String>,
        #[arg(long)]
        trace: Option<String>,
        #[arg(long)]
        metrics: Option<String>,
    },
    /// Explore a grid with port labels only.
    Unoriented {
        /// consistent:SEED:N, potsplit:SEED:N or perturbed:SEED:N.
        #[arg(long)]
        labeling: Option<String>,
        #[arg(long)]
        schedule: Option<String>,
        #[arg(long)]
        stop: Option<String>,
        #[arg(long)]
        trace: Option<String>,
        #[arg(long)]
        metrics: Option<String>,
    },
    /// Search for a treasure and print one CSV row.
    Treasure {
        #[arg(long)]
        n: Option<usize>,
        /// Coordinates, e.g. 3,2.
        #[arg(long)]
        treasure: Option<String>,
        /// explore or poly.
        #[arg(long)]
        protocol: Option<String>,
        #[arg(long)]
        schedule: Option<String>,
    },
    /// Run one stack subroutine and print one CSV row.
    Stackop {
        /// init, inc, dec, mult, div, isdiv, move, mult-h, div-h, isdiv-h.
        #[arg(long)]
        op: Option<String>,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        x: Option<u64>,
        #[arg(long)]
        schedule: Option<String>,
    },
    /// Evaluate a reference oracle.
    Oracle {
        /// factorize, ball, virt or lex.
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        x: Option<u64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        d: Option<u64>,
        #[arg(long)]
        h: Option<u64>,
        #[arg(long)]
        labeling: Option<String>,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Treasure-search sweep over distances, one CSV row per run.
    Bench {
        #[arg(long)]
        n: Option<usize>,
        /// Comma-separated distances.
        #[arg(long)]
        distances: Option<String>,
        #[arg(long)]
        protocol: Option<String>,
        #[arg(long)]
        schedule: Option<String>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

enum Fail {
    Usage(String),
    Run(String),
}

type Res<T> = Result<T, Fail>;

fn usage(e: impl ToString) -> Fail {
    Fail::Usage(e.to_string())
}

fn run_err(e: impl ToString) -> Fail {
    Fail::Run(e.to_string())
}

/// Flag value, else config-file value, else default.
struct Settings {
    file: HashMap<String, String>,
}

impl Settings {
    fn load(path: Option<&str>) -> Res<Self> {
        let mut file = HashMap::new();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p).map_err(|e| usage(format!("{p}: {e}")))?;
            for (i, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| usage(format!("{p}:{}: expected key=value", i + 1)))?;
                file.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(Settings { file })
    }

    fn opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Res<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self
                .file
                .get(key)
                .map(|s| s.parse::<T>().map_err(|e| usage(format!("config {key}={s}: {e}"))))
                .transpose(),
        }
    }

    fn get<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Res<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.opt(flag, key)?.unwrap_or(default))
    }

    fn need<T: FromStr>(&self, flag: Option<T>, key: &str) -> Res<T>
    where
        T::Err: std::fmt::Display,
    {
        self.opt(flag, key)?.ok_or_else(|| usage(format!("missing --{key}")))
    }
}

struct Ctx {
    seed: u64,
    deterministic: bool,
    verbosity: Verbosity,
    watchdog: Option<u64>,
}

fn schedule(spec: &str, agents: usize, seed: u64) -> Res<Schedule> {
    let (body, window) = match spec.split_once('@') {
        Some((b, w)) => (b, format!("@{w}")),
        None => (spec, String::new()),
    };
    let full = if body == "ssync" { format!("ssync:random:{seed}:0.5{window}") } else { spec.to_string() };
    Schedule::parse(&full, agents).map_err(usage)
}

fn parse_stop(s: &str, n: usize) -> Res<Stop> {
    let (kind, arg) = s.split_once(':').ok_or_else(|| usage(format!("bad stop `{s}`")))?;
    match kind {
        "counter" => Ok(Stop::Counter(arg.parse().map_err(usage)?)),
        "treasure" => Ok(Stop::Treasure(arg.parse().map_err(usage)?)),
        "radius" => {
            let r: u64 = arg.parse().map_err(usage)?;
            Ok(Stop::Visited(oracles::bfs_ball(n, r).into_iter().collect()))
        }
        _ => Err(usage(format!("bad stop `{s}`"))),
    }
}

fn header(ctx: &Ctx, world: String, protocol: &str, sched: &Schedule) -> TraceHeader {
    let timestamp = (!ctx.deterministic).then(|| {
        let t = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        format!("{t}")
    });
    TraceHeader { world, protocol: protocol.into(), schedule: sched.to_string(), seed: ctx.seed, timestamp }
}

fn write_trace(path: &str, trace: &Trace, h: &TraceHeader) -> Res<()> {
    let f = File::create(path).map_err(|e| usage(format!("{path}: {e}")))?;
    let mut w = BufWriter::new(f);
    trace.write_jsonl(&mut w, h).and_then(|_| w.flush()).map_err(run_err)
}

fn csv_out<R: Serialize>(path: Option<&str>, rows: &[R]) -> Res<()> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(File::create(p).map_err(|e| usage(format!("{p}: {e}")))?),
        None => Box::new(io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for r in rows {
        w.serialize(r).map_err(run_err)?;
    }
    w.flush().map_err(run_err)
}

#[derive(Serialize)]
struct ExploreRow {
    protocol: String,
    n: usize,
    schedule: String,
    counter: u64,
    steps: u64,
    base_visited: usize,
    cost: Option<u64>,
}

fn explore_row(protocol: &str, n: usize, sched: &Schedule, r: &ExploreRun) -> ExploreRow {
    ExploreRow {
        protocol: protocol.into(),
        n,
        schedule: sched.to_string(),
        counter: r.counter,
        steps: r.trace.steps,
        base_visited: r.base_visited().len(),
        cost: r.trace.cost().ok(),
    }
}

#[derive(Serialize)]
struct TreasureRow {
    protocol: String,
    n: usize,
    #[serde(rename = "D")]
    d: u64,
    h_final: Option<u64>,
    cost: u64,
    wallclock: f64,
}

fn treasure_row(protocol: &str, n: usize, t: &Cell, sched: &Schedule, ctx: &Ctx) -> Res<TreasureRow> {
    let start = Instant::now();
    let (h_final, cost) = match protocol {
        "poly" => {
            let r = poly::treasure_search(n, sched, t, ctx.watchdog.unwrap_or(100_000_000_000)).map_err(run_err)?;
            (Some(r.h_final), r.cost)
        }
        "explore" => {
            let opts = ExploreOptions { watchdog: ctx.watchdog.unwrap_or(4_000_000_000), verbosity: Verbosity::None };
            let r = run_explore(n, sched, &Stop::Treasure(*t), &opts).map_err(run_err)?;
            (None, r.trace.cost().map_err(run_err)?)
        }
        _ => return Err(usage(format!("unknown protocol `{protocol}` (explore|poly)"))),
    };
    Ok(TreasureRow {
        protocol: protocol.into(),
        n,
        d: t.l1_norm(),
        h_final,
        cost,
        wallclock: start.elapsed().as_secs_f64(),
    })
}

#[derive(Serialize)]
struct StackRow {
    op: String,
    k: u64,
    x: u64,
    schedule: String,
    post_size: i64,
    verdict: Option<bool>,
    steps: u64,
}

fn stack_op(name: &str, k: u64) -> Res<Op> {
    let k8 = u8::try_from(k).map_err(|_| usage("k must fit in a byte"))?;
    Ok(match name {
        "init" => Op::Init(k8),
        "inc" => Op::Inc(k8),
        "dec" => Op::Dec(k8),
        "mult" => Op::Mult(k8),
        "div" => Op::Div(k8),
        "isdiv" => Op::IsDiv(k8),
        "move" => Op::Move(gridmind::grid::OrientedMove::NORTH),
        _ => return Err(usage(format!("unknown op `{name}`"))),
    })
}

fn run(cli: Cli) -> Res<()> {
    let s = Settings::load(cli.common.config.as_deref())?;
    let env_seed = std::env::var("GRIDMIND_SEED").ok().map(|v| v.parse::<u64>()).transpose().map_err(usage)?;
    let ctx = Ctx {
        seed: s.get(cli.common.seed.or(env_seed), "seed", 0)?,
        deterministic: cli.common.deterministic || s.get(None, "deterministic", false)?,
        verbosity: s.get(cli.common.verbosity, "verbosity", "boundaries".to_string())?.parse().map_err(usage)?,
        watchdog: s.opt(cli.common.watchdog, "watchdog")?,
    };
    match cli.cmd {
        Cmd::Explore { n, schedule: sch, stop, trace, metrics } => {
            let n = s.get(n, "n", 2)?;
            let sched = schedule(&s.get(sch, "schedule", "fsync".into())?, 4, ctx.seed)?;
            let stop = parse_stop(&s.get(stop, "stop", "counter:15".into())?, n)?;
            let opts = ExploreOptions { watchdog: ctx.watchdog.unwrap_or(4_000_000_000), verbosity: ctx.verbosity };
            let r = run_explore(n, &sched, &stop, &opts).map_err(run_err)?;
            if let Some(p) = s.opt(trace, "trace")? {
                write_trace(&p, &r.trace, &header(&ctx, format!("oriented:{n}"), "explore", &sched))?;
            }
            csv_out(s.opt::<String>(metrics, "metrics")?.as_deref(), &[explore_row("explore", n, &sched, &r)])
        }
        Cmd::Unoriented { labeling, schedule: sch, stop, trace, metrics } => {
            let spec: LabelingSpec = s.get(labeling, "labeling", "potsplit:7:2".into())?.parse().map_err(usage)?;
            let n = spec.n;
            let sched = schedule(&s.get(sch, "schedule", "fsync".into())?, 4, ctx.seed)?;
            let stop = parse_stop(&s.get(stop, "stop", "counter:15".into())?, n)?;
            let opts = ExploreOptions { watchdog: ctx.watchdog.unwrap_or(4_000_000_000), verbosity: ctx.verbosity };
            let r = run_explore_unoriented(Arc::new(PortLabeling::new(spec)), &sched, &stop, &opts).map_err(run_err)?;
            if let Some(p) = s.opt(trace, "trace")? {
                write_trace(&p, &r.trace, &header(&ctx, spec.to_string(), "unoriented", &sched))?;
            }
            csv_out(s.opt::<String>(metrics, "metrics")?.as_deref(), &[explore_row("unoriented", n, &sched, &r)])
        }
        Cmd::Treasure { n, treasure, protocol, schedule: sch } => {
            let n = s.get(n, "n", 2)?;
            let t: Cell = s.need(treasure, "treasure")?.parse().map_err(usage)?;
            if t.dim() != n || t.is_origin() {
                return Err(usage("the treasure must be a non-origin cell of dimension n"));
            }
            let protocol = s.get(protocol, "protocol", "poly".into())?;
            let sched = schedule(&s.get(sch, "schedule", "fsync".into())?, 5, ctx.seed)?;
            csv_out(None, &[treasure_row(&protocol, n, &t, &sched, &ctx)?])
        }
        Cmd::Stackop { op, k, x, schedule: sch } => {
            let name = s.need(op, "op")?;
            let k = s.get(k, "k", 2)?;
            let x = s.get(x, "x", 1)?;
            let sched = schedule(&s.get(sch, "schedule", "fsync".into())?, 5, ctx.seed)?;
            let (post_size, verdict, steps) = match name.as_str() {
                "mult-h" | "div-h" | "isdiv-h" => {
                    if !k.is_power_of_two() {
                        return Err(usage("k must be a power of two for by-h operations"));
                    }
                    let op = match name.as_str() {
                        "mult-h" => DualOp::Mult,
                        "div-h" => DualOp::Div,
                        _ => DualOp::IsDiv,
                    };
                    let r = poly::run_dual(op, k, x, &sched, ctx.watchdog).map_err(run_err)?;
                    (r.y, r.verdict, r.steps)
                }
                _ => {
                    let r = run_subroutine(stack_op(&name, k)?, x, &sched).map_err(run_err)?;
                    (r.heights[0], r.verdicts.last().copied().flatten(), r.steps)
                }
            };
            let row = StackRow { op: name, k, x, schedule: sched.to_string(), post_size, verdict, steps };
            csv_out(None, &[row])
        }
        Cmd::Oracle { kind, x, n, d, h, labeling, horizon } => {
            let kind = s.need(kind, "kind")?;
            let n = s.get(n, "n", 2)?;
            let mut out = io::stdout().lock();
            let res = match kind.as_str() {
                "factorize" => {
                    let x = s.need(x, "x")?;
                    if x == 0 {
                        return Err(usage("x must be positive"));
                    }
                    let ps = oracles::odd_primes(n);
                    let (v, rest) = oracles::factorize_valuations(x, &ps);
                    writeln!(out, "primes {ps:?} valuations {v:?} rest {rest}")
                }
                "ball" => {
                    let d = s.need(d, "d")?;
                    writeln!(out, "V({d}) = {}", oracles::ball_volume(n, d))
                }
                "lex" => {
                    let h = s.need(h, "h")?;
                    oracles::lex_tuples(n, h).iter().try_for_each(|t| writeln!(out, "{t:?}"))
                }
                "virt" => {
                    let spec: LabelingSpec = s.get(labeling, "labeling", "potsplit:7:2".into())?.parse().map_err(usage)?;
                    let lab = PortLabeling::new(spec);
                    let horizon = s.get(horizon, "horizon", 20)?;
                    let dfs = oracles::dfs_virt(&lab, &Cell::origin(spec.n), horizon);
                    let step = virt_oracle(&lab, &Cell::origin(spec.n), horizon + 1);
                    if dfs != step {
                        return Err(run_err("the two virtual-stack oracles disagree"));
                    }
                    dfs.iter().enumerate().try_for_each(|(j, p)| writeln!(out, "{j} {p}"))
                }
                _ => return Err(usage(format!("unknown oracle `{kind}` (factorize|ball|virt|lex)"))),
            };
            res.map_err(run_err)
        }
        Cmd::Bench { n, distances, protocol, schedule: sch, threads } => {
            let n = s.get(n, "n", 2)?;
            let ds: Vec<i64> = s
                .get(distances, "distances", "2,4,8".into())?
                .split(',')
                .map(|d| d.trim().parse::<i64>().map_err(usage))
                .collect::<Res<_>>()?;
            if ds.iter().any(|&d| d < 1) {
                return Err(usage("distances must be positive"));
            }
            let protocol = s.get(protocol, "protocol", "poly".into())?;
            let sched = schedule(&s.get(sch, "schedule", "fsync".into())?, 5, ctx.seed)?;
            let threads = s.get(threads, "threads", 4)?.max(1);
            let mut targets = Vec::new();
            for &d in &ds {
                let mut axis = vec![0; n];
                axis[0] = d;
                targets.push(Cell::new(&axis));
                let mut diag = vec![d / n as i64; n];
                diag[0] += d % n as i64;
                targets.push(Cell::new(&diag));
            }
            let rows = bench(&protocol, n, &targets, &sched, &ctx, threads)?;
            csv_out(None, &rows)
        }
    }
}

fn bench(protocol: &str, n: usize, targets: &[Cell], sched: &Schedule, ctx: &Ctx, threads: usize) -> Res<Vec<TreasureRow>> {
    let chunk = targets.len().div_ceil(threads).max(1);
    std::thread::scope(|sc| {
        let handles: Vec<_> = targets
            .chunks(chunk)
            .map(|part| sc.spawn(move || part.iter().map(|t| treasure_row(protocol, n, t, sched, ctx)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("bench worker panicked")).collect()
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Usage(m)) => {
            eprintln!("usage error: {m}\nsee `gridmind --help`");
            ExitCode::from(2)
        }
        Err(Fail::Run(m)) => {
            eprintln!("run failed: {m}");
            ExitCode::from(1)
        }
    }
}
