//! Constant-factor stack subroutines: post-size and running time.

use gridmind::scheduler::Schedule;
use gridmind::stack::harness::run_subroutine;
use gridmind::stack::Op;

fn main() {
    println!("{:<10} {:>4} {:>6} {:>8} {:>8}", "op", "x", "post", "verdict", "steps");
    for k in [2u8, 3, 5] {
        for op in [Op::Inc(k), Op::Mult(k), Op::Div(k), Op::IsDiv(k)] {
            for x in [k as u64 * 4, 7] {
                match run_subroutine(op, x, &Schedule::Fsync) {
                    Ok(r) => println!(
                        "{:<10} {x:>4} {:>6} {:>8} {:>8}",
                        format!("{op:?}"),
                        r.heights[0],
                        r.verdicts[0].map_or("-".into(), |v| v.to_string()),
                        r.steps
                    ),
                    Err(e) => println!("{:<10} {x:>4} stalls ({e})", format!("{op:?}")),
                }
            }
        }
    }
}
