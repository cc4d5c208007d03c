//! The three-agent explorer on the oriented plane: run until counter 225
//! and check that the base agent has covered the 5x5 box.

use gridmind::explore::{run_explore, ExploreOptions, Stop};
use gridmind::grid::Cell;
use gridmind::scheduler::Schedule;

fn main() {
    let run = run_explore(2, &Schedule::Fsync, &Stop::Counter(225), &ExploreOptions::default()).expect("explore");
    let seen = run.base_visited();
    let mut missing = 0;
    for y in (-2..=2).rev() {
        let row: String = (-2..=2)
            .map(|x| {
                let hit = seen.contains(&Cell::new(&[x, y]));
                missing += !hit as usize;
                if hit { '#' } else { '.' }
            })
            .collect();
        println!("{row}");
    }
    println!("{} steps, {} cells visited, {missing} of the box missing", run.trace.steps, seen.len());
}
