//! Exploring with port labels only. The base agent's moves are read back
//! in true coordinates.

use std::sync::Arc;

use gridmind::explore::{run_explore, ExploreOptions, Stop};
use gridmind::grid::PortLabeling;
use gridmind::scheduler::Schedule;
use gridmind::unoriented::run_explore_unoriented;

fn main() {
    let stop = Stop::Counter(15);
    let opts = ExploreOptions::default();
    let oriented = run_explore(2, &Schedule::Fsync, &stop, &opts).unwrap();
    let consistent = run_explore_unoriented(Arc::new(PortLabeling::consistent(2)), &Schedule::Fsync, &stop, &opts).unwrap();
    println!("consistent labels reproduce the oriented run: {}", consistent.base_visited() == oriented.base_visited());
    for seed in 0..5 {
        let lab = Arc::new(PortLabeling::potential_split(seed, 2));
        let r = run_explore_unoriented(lab, &Schedule::Fsync, &stop, &opts).unwrap();
        let mut cells: Vec<_> = r.base_visited().into_iter().map(|c| c.to_string()).collect();
        cells.sort();
        println!("potsplit seed {seed}: {} steps, visited {}", r.trace.steps, cells.join(" "));
    }
}
