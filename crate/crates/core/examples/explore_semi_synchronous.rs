//! The same explorer under semi-synchronous schedules: a fourth agent keeps
//! the others in step, and the visited set does not depend on the adversary.

use gridmind::explore::{run_explore, ExploreOptions, Stop};
use gridmind::scheduler::{Adversary, Schedule};

fn main() {
    let stop = Stop::Counter(15);
    let opts = ExploreOptions::default();
    let reference = run_explore(2, &Schedule::Fsync, &stop, &opts).unwrap();
    let schedules = [
        Schedule::ssync(Adversary::RoundRobin, 32),
        Schedule::ssync(Adversary::SingletonRotate, 32),
        Schedule::ssync(Adversary::SeededRandom { seed: 3, p: 0.5 }, 32),
        Schedule::ssync(Adversary::SeededSingleton { seed: 4 }, 32),
    ];
    for s in schedules {
        let r = run_explore(2, &s, &stop, &opts).unwrap();
        let same = r.base_visited() == reference.base_visited();
        println!("{s:<28} steps {:>8}  distance {:>8}  same cells as fsync: {same}", r.trace.steps, r.trace.total_distance());
    }
}
