//! The doubling search: cubes of side 2, 4, 8, ... around the start until
//! some agent steps on the treasure.

use gridmind::grid::Cell;
use gridmind::poly::treasure_search;
use gridmind::scheduler::{Adversary, Schedule};

fn main() {
    let schedules = [Schedule::Fsync, Schedule::ssync(Adversary::SingletonRotate, 32)];
    println!("{:<14} {:>8} {:>3} {:>7} {:>10}", "schedule", "treasure", "D", "h_final", "cost");
    for s in &schedules {
        for d in [2i64, 4, 8] {
            let t = Cell::new(&[d / 2, d / 2]);
            let r = treasure_search(2, s, &t, 10_000_000_000).unwrap();
            println!("{:<14} {:>8} {d:>3} {:>7} {:>10}", s.to_string(), t.to_string(), r.h_final, r.cost);
        }
    }
}
