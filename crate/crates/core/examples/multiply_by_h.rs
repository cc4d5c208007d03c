//! Multiplying by a power of two h that no automaton can store: the
//! h-stack walks through 3^j 2^(i-j) while the value stack doubles.

use gridmind::poly::{run_dual, DualOp};
use gridmind::scheduler::Schedule;

fn main() {
    let (h, x) = (8, 5);
    let r = run_dual(DualOp::Mult, h, x, &Schedule::Fsync, None).unwrap();
    for (j, (hs, y)) in r.loop_states.iter().enumerate() {
        println!("round {j}: h-stack {hs:>3}  value {y:>3}");
    }
    println!("{h} * {x} = {} in {} steps", r.y, r.steps);
    for y in [24, 20] {
        let d = run_dual(DualOp::IsDiv, h, y, &Schedule::Fsync, None).unwrap();
        println!("{h} divides {y}: {:?} (value restored to {})", d.verdict.unwrap(), d.y);
    }
    let q = run_dual(DualOp::Div, h, 24, &Schedule::Fsync, None).unwrap();
    println!("24 / {h} = {}", q.y);
}
