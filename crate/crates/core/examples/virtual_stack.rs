//! Without a compass, the stack lives on a virtual line threaded through
//! the port-1 forest. Prints its first positions and checks them against a
//! depth-first traversal of the forest.

use gridmind::grid::{Cell, PortLabeling};
use gridmind::oracles::dfs_virt;
use gridmind::unoriented::virt_oracle;

fn main() {
    let lab = PortLabeling::potential_split(7, 2);
    let c = Cell::origin(2);
    let line = virt_oracle(&lab, &c, 25);
    for (j, p) in line.iter().enumerate() {
        println!("Virt[{j:>2}] = {p}");
    }
    let dfs = dfs_virt(&lab, &c, 10_000);
    let long = virt_oracle(&lab, &c, 10_001);
    let distinct: std::collections::HashSet<_> = long.iter().collect();
    println!("agrees with DFS over 10^4 positions: {}", dfs == long);
    println!("no position repeats: {}", distinct.len() == long.len());
}
