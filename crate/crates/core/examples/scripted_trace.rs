//! A hand-written activation script for the adversary, checked for
//! fairness, and the run exported as a JSON-lines trace.

use gridmind::explore::{run_explore, ExploreOptions, Stop};
use gridmind::scheduler::{check_fairness, Adversary, Schedule, TraceHeader, Verbosity};

fn main() {
    let script = vec![vec![0], vec![1, 2], vec![3], vec![2], vec![1], vec![0, 3]];
    println!("script fair within 8 steps: {}", check_fairness(&script, 4, 8));
    let s = Schedule::ssync(Adversary::Scripted(script), 16);
    let opts = ExploreOptions { verbosity: Verbosity::Full, ..ExploreOptions::default() };
    let r = run_explore(2, &s, &Stop::Counter(3), &opts).unwrap();
    println!("counter 3 after {} steps, distance {}", r.trace.steps, r.trace.total_distance());
    let header = TraceHeader { world: "oriented:2".into(), protocol: "explore".into(), schedule: s.to_string(), seed: 0, timestamp: None };
    let mut out = Vec::new();
    r.trace.write_jsonl(&mut out, &header).unwrap();
    let text = String::from_utf8(out).unwrap();
    for line in text.lines().take(4) {
        println!("{line}");
    }
    println!("... {} lines", text.lines().count());
}
