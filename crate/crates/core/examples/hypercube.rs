//! Visiting a side-h square cell by cell in lexicographic order.

use gridmind::poly::{anchor, hypercube_explore, tuple_of};
use gridmind::scheduler::Schedule;

fn main() {
    let h = 4;
    let r = hypercube_explore(h, 2, &Schedule::Fsync, None, 100_000_000).unwrap();
    let a = anchor(h as u64, 2);
    let order: Vec<String> = r.visits.iter().map(|c| format!("{:?}", tuple_of(c, &a))).collect();
    println!("{}", order.join(" "));
    println!("{} cells in {} steps", r.visits.len(), r.trace.steps);
}
