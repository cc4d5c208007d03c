//! The exit criteria, one line each. Lines go straight to the stderr handle
//! so they show without `--nocapture`.

use std::collections::HashSet;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gridmind::automaton::Protocol;
use gridmind::explore::{explore_protocol, run_explore, ExploreOptions, Stop};
use gridmind::grid::{Cell, OrientedMove, PortLabeling};
use gridmind::oracles::{bfs_ball, lex_tuples, stack_post};
use gridmind::poly::{anchor, hypercube_explore, run_dual, treasure_search, tuple_of, DualOp};
use gridmind::scheduler::{run_from, Adversary, RunConfig, Schedule, World};
use gridmind::stack::harness::run_subroutine;
use gridmind::stack::{Mode, Op};
use gridmind::unoriented::{run_explore_unoriented, virt_oracle, VirtPos, VirtualWalker, WalkState};

const SLOPE_FSYNC: f64 = 4.6;
const SLOPE_SSYNC: f64 = 6.6;

fn report(id: usize, what: &str, f: impl FnOnce() -> Result<String, String>) -> bool {
    let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panic: {}", msg.unwrap_or_default()))
    });
    let (ok, detail) = match out {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    let _ = writeln!(std::io::stderr(), "criterion {id:>2}: {} {what} [{detail}]", if ok { "PASS" } else { "FAIL" });
    ok
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn opts() -> ExploreOptions {
    ExploreOptions::default()
}

fn agent_counts() -> Result<String, String> {
    let ss = Schedule::ssync(Adversary::SingletonRotate, 32);
    check(explore_protocol(2, Mode::Sync).agent_count() == 3, || "explore fsync".into())?;
    check(explore_protocol(2, Mode::Ssync).agent_count() == 4, || "explore ssync".into())?;
    let t = Cell::new(&[1, 1]);
    let f = treasure_search(2, &Schedule::Fsync, &t, 1_000_000).map_err(|e| e.to_string())?;
    let s = treasure_search(2, &ss, &t, 10_000_000).map_err(|e| e.to_string())?;
    let e = run_explore(2, &ss, &Stop::Counter(3), &opts()).map_err(|e| e.to_string())?;
    check(f.trace.visited.len() == 4 && s.trace.visited.len() == 5 && e.trace.visited.len() == 4, || {
        format!("poly {} / {}", f.trace.visited.len(), s.trace.visited.len())
    })?;
    Ok("explore 3/4, poly 4/5 agents; exact".into())
}

fn box_cells(n: usize, r: i64) -> Vec<Cell> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|v: Vec<i64>| (-r..=r).map(move |x| [v.clone(), vec![x]].concat())).collect();
    }
    out.iter().map(|v| Cell::new(v)).collect()
}

fn box_coverage(n: usize, counter: u64, r: i64) -> Result<String, String> {
    let run = run_explore(n, &Schedule::Fsync, &Stop::Counter(counter), &opts()).map_err(|e| e.to_string())?;
    let seen = run.base_visited();
    let cells = box_cells(n, r);
    let missing: Vec<_> = cells.iter().filter(|c| !seen.contains(c)).collect();
    check(missing.is_empty(), || format!("missing {missing:?}"))?;
    Ok(format!("{} of {} cells, {} steps; exact", cells.len(), cells.len(), run.trace.steps))
}

fn stack_arithmetic() -> Result<String, String> {
    for k in [2u8, 3, 5, 7] {
        for x in 1..=100u64 {
            for op in [Op::Init(k), Op::Inc(k), Op::Mult(k), Op::Div(k), Op::IsDiv(k), Op::Move(OrientedMove::NORTH)] {
                // Init starts from an empty stack
                let x = if matches!(op, Op::Init(_)) { 0 } else { x };
                let Some((post, verdict)) = stack_post(op, x) else { continue };
                let r = run_subroutine(op, x, &Schedule::Fsync).map_err(|e| format!("{op:?} x={x}: {e}"))?;
                check(r.heights[0] as u64 == post, || format!("{op:?} x={x}: size {}", r.heights[0]))?;
                if let Op::IsDiv(_) = op {
                    check(r.verdicts[0] == Some(verdict), || format!("{op:?} x={x}: verdict"))?;
                    check(r.steps == 2 * x + 2, || format!("IsDiv({k}) x={x}: {} steps", r.steps))?;
                }
                if let Op::Mult(_) = op {
                    let want = (k as u64 * k as u64 - 1) * x + 2;
                    check(r.steps == want, || format!("Mult({k}) x={x}: {} steps, want {want}", r.steps))?;
                }
            }
        }
    }
    Ok("k in {2,3,5,7}, X in 1..100; Mult (k^2-1)X+2, IsDiv 2X+2; exact".into())
}

fn ssync_equivalence() -> Result<String, String> {
    let ops = [Op::Init(3), Op::Inc(2), Op::Dec(1), Op::Mult(3), Op::Div(2), Op::IsDiv(3), Op::Move(OrientedMove::NORTH)];
    let stop = Stop::Counter(15);
    let reference = run_explore(2, &Schedule::Fsync, &stop, &opts()).map_err(|e| e.to_string())?.base_visited();
    for seed in 0..100u64 {
        let x = 2 + 2 * (seed % 12);
        let advs = [Adversary::SeededRandom { seed, p: 0.5 }, Adversary::SeededSingleton { seed }];
        for adv in advs {
            let s = Schedule::ssync(adv, 32);
            for op in ops {
                let x = if matches!(op, Op::Init(_)) { 0 } else { x };
                let f = run_subroutine(op, x, &Schedule::Fsync).map_err(|e| e.to_string())?;
                let r = run_subroutine(op, x, &s).map_err(|e| format!("{s} {op:?} x={x}: {e}"))?;
                check(r.heights[..2] == f.heights[..2] && r.verdicts == f.verdicts, || format!("{s} {op:?} x={x}"))?;
            }
            let e = run_explore(2, &s, &stop, &opts()).map_err(|e| format!("{s}: {e}"))?;
            check(e.base_visited() == reference, || format!("{s}: explore visited set differs"))?;
        }
    }
    Ok("100 seeds x {batch, singleton}, B=32; exact".into())
}

fn walk(lab: &PortLabeling, from: VirtPos, forward: bool, moves: u64) -> Vec<(u64, VirtPos, bool)> {
    let world = World::unoriented(Arc::new(lab.clone()));
    let start = WalkState { forward, level: from.level, settle: None };
    let cfg = RunConfig::new(Schedule::Fsync, 2 * moves - 1);
    let mut seen = Vec::new();
    let mut mon = |t: u64, a: &[(Cell, WalkState)]| {
        seen.push((t, VirtPos { cell: a[0].0, level: a[0].1.level }, a[0].1.settle.is_none()));
        false
    };
    let _ = run_from(&VirtualWalker { start }, &world, vec![(from.cell, start)], &cfg, &mut mon);
    seen
}

fn virtual_line() -> Result<String, String> {
    for seed in 0..50u64 {
        let lab = PortLabeling::potential_split(seed, 2);
        let c = Cell::origin(2);
        let path = virt_oracle(&lab, &c, 10_001);
        let distinct: HashSet<_> = path.iter().collect();
        check(distinct.len() == path.len(), || format!("seed {seed}: repeated position"))?;
        for forward in [true, false] {
            let from = if forward { path[0] } else { path[1000] };
            let seen = walk(&lab, from, forward, 1000);
            check(seen.len() as u64 >= 1999, || format!("seed {seed}: walk stopped at {}", seen.len()))?;
            for &(t, p, settled) in &seen {
                check(settled == (t % 2 == 0), || format!("seed {seed}: step {t} out of phase"))?;
                if t % 2 == 0 {
                    let j = (t / 2) as usize;
                    let want = if forward { path[j] } else { path[1000 - j] };
                    check(p == want, || format!("seed {seed} forward={forward}: move {j} at {p}, want {want}"))?;
                }
            }
        }
    }
    Ok("50 labelings, 10^4 distinct positions, 10^3 moves each way at 2 steps; exact".into())
}

fn consistent_unoriented() -> Result<String, String> {
    let stop = Stop::Counter(15);
    let o = run_explore(2, &Schedule::Fsync, &stop, &opts()).map_err(|e| e.to_string())?;
    let u = run_explore_unoriented(Arc::new(PortLabeling::consistent(2)), &Schedule::Fsync, &stop, &opts())
        .map_err(|e| e.to_string())?;
    check(o.base_visited() == u.base_visited(), || "visited sets differ".into())?;
    Ok(format!("{} cells, equal; exact", o.base_visited().len()))
}

fn potsplit_unoriented() -> Result<String, String> {
    let want: Vec<Cell> = [[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1], [2, 0], [-2, 0]].iter().map(|v| Cell::new(v)).collect();
    for seed in 0..10 {
        let lab = Arc::new(PortLabeling::potential_split(seed, 2));
        let r = run_explore_unoriented(lab, &Schedule::Fsync, &Stop::Counter(15), &opts())
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let seen = r.base_visited();
        let missing: Vec<_> = want.iter().filter(|c| !seen.contains(c)).collect();
        check(missing.is_empty(), || format!("seed {seed}: missing {missing:?}"))?;
    }
    Ok("10 labelings, counter 15, no missing helper; exact".into())
}

fn by_h_ops() -> Result<String, String> {
    for h in [1u64, 2, 4, 8] {
        let i = h.trailing_zeros();
        for x in 1..=20u64 {
            let r = run_dual(DualOp::Mult, h, x, &Schedule::Fsync, None).map_err(|e| e.to_string())?;
            check(r.y as u64 == h * x && r.h2 as u64 == h && r.h3 as u64 == h, || format!("mult_h h={h} x={x}: {}", r.y))?;
            check(r.loop_states.len() as u32 == i + 1, || format!("h={h} x={x}: {} loop heads", r.loop_states.len()))?;
            for (j, &(hs, y)) in r.loop_states.iter().enumerate() {
                let j = j as u32;
                check(hs as u64 == 3u64.pow(j) << (i - j) && y as u64 == x << j, || {
                    format!("h={h} x={x} round {j}: ({hs}, {y})")
                })?;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let h = 1u64 << rng.gen_range(0..4);
        let x = rng.gen_range(1..=64u64);
        let t = run_dual(DualOp::IsDiv, h, x, &Schedule::Fsync, None).map_err(|e| e.to_string())?;
        check(t.verdict == Some(x % h == 0) && (t.h2, t.h3, t.y) == (h as i64, h as i64, x as i64), || {
            format!("is_div_h h={h} x={x}: {:?} {} {} {}", t.verdict, t.h2, t.h3, t.y)
        })?;
        let q = x.div_ceil(h);
        let d = run_dual(DualOp::Div, h, q * h, &Schedule::Fsync, None).map_err(|e| e.to_string())?;
        check((d.h2, d.h3, d.y) == (h as i64, h as i64, q as i64), || format!("div_h h={h} x={}", q * h))?;
    }
    Ok("h in {1,2,4,8}, X in 1..20, 100 random pairs; exact".into())
}

fn hypercubes() -> Result<String, String> {
    for h in [2u8, 4, 8] {
        let r = hypercube_explore(h, 2, &Schedule::Fsync, None, 100_000_000).map_err(|e| e.to_string())?;
        let a = anchor(h as u64, 2);
        let got: Vec<Vec<u64>> = r.visits.iter().map(|c| tuple_of(c, &a)).collect();
        check(got == lex_tuples(2, h as u64), || format!("h={h}: order differs"))?;
    }
    Ok("h in {2,4,8}, h^2 offsets in lexicographic order; exact".into())
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

fn poly_costs() -> Result<String, String> {
    let runs = [
        (Schedule::Fsync, SLOPE_FSYNC, 1_000_000_000u64),
        (Schedule::ssync(Adversary::SingletonRotate, 32), SLOPE_SSYNC, 100_000_000_000),
    ];
    let mut notes = Vec::new();
    for (s, bound, budget) in runs {
        let mut worst: f64 = 0.0;
        for diagonal in [false, true] {
            let mut pts = Vec::new();
            for d in [2i64, 4, 8, 16] {
                let t = if diagonal { Cell::new(&[d / 2, d / 2]) } else { Cell::new(&[d, 0]) };
                let r = treasure_search(2, &s, &t, budget).map_err(|e| format!("{s} {t}: {e}"))?;
                check(r.h_final <= 4 * d as u64, || format!("{s} {t}: h_final {}", r.h_final))?;
                pts.push((d as f64, r.cost as f64));
            }
            worst = worst.max(slope(&pts));
        }
        check(worst <= bound, || format!("{s}: slope {worst:.2} > {bound}"))?;
        notes.push(format!("{s} slope {worst:.2} <= {bound}"));
    }
    Ok(format!("h_final <= 4D; {}", notes.join(", ")))
}

fn stalls() -> Result<String, String> {
    let e = run_subroutine(Op::Div(3), 10, &Schedule::Fsync).err().ok_or("Div(3) on 10 finished")?;
    check(e.is_watchdog(), || format!("Div(3): {e}"))?;
    let e = run_dual(DualOp::Div, 4, 10, &Schedule::Fsync, Some(100_000)).err().ok_or("div_h(4,10) finished")?;
    check(e.is_watchdog(), || format!("div_h: {e}"))?;
    Ok("both hit the watchdog".into())
}

#[test]
fn acceptance() {
    assert_eq!(bfs_ball(2, 2).len(), 13);
    let results = [
        report(1, "agent counts", agent_counts),
        report(2, "n=2 counter 225 covers |ci|<=2", || box_coverage(2, 225, 2)),
        report(3, "n=3 counter 105 covers |ci|<=1", || box_coverage(3, 105, 1)),
        report(4, "stack arithmetic and durations", stack_arithmetic),
        report(5, "ssync results equal fsync", ssync_equivalence),
        report(6, "virtual stack line and lone walker", virtual_line),
        report(7, "consistent labeling matches oriented", consistent_unoriented),
        report(8, "potential-split exploration", potsplit_unoriented),
        report(9, "by-h operations", by_h_ops),
        report(10, "hypercube order", hypercubes),
        report(11, "poly search cost trend", poly_costs),
        report(12, "non-divisible division stalls", stalls),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, ok)| !**ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
