//! Brute-force reference computations. Nothing here touches the agent
//! automata; tests compare the automata against these.

use std::collections::{BTreeSet, VecDeque};

use crate::grid::{traverse_port, Cell, Labeling, Port};
use crate::stack::Op;
use crate::unoriented::VirtPos;

/// p-adic valuations of `x` for each of `primes`, and the cofactor.
pub fn factorize_valuations(x: u64, primes: &[u64]) -> (Vec<u32>, u64) {
    assert!(x >= 1, "x must be positive");
    let mut rest = x;
    let v = primes
        .iter()
        .map(|&p| {
            let mut e = 0;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            e
        })
        .collect();
    (v, rest)
}

/// The first `n` odd primes, by trial division.
pub fn odd_primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut c = 3;
    while out.len() < n {
        if (3..c).step_by(2).take_while(|d| d * d <= c).all(|d| c % d != 0) {
            out.push(c);
        }
        c += 2;
    }
    out
}

/// All cells within l1-distance `d` of the origin, by breadth-first search.
pub fn bfs_ball(n: usize, d: u64) -> BTreeSet<Cell> {
    let origin = Cell::origin(n);
    let mut seen = BTreeSet::from([origin]);
    let mut queue = VecDeque::from([(origin, 0)]);
    while let Some((c, k)) = queue.pop_front() {
        if k == d {
            continue;
        }
        for i in 0..n {
            for s in [-1, 1] {
                let mut x = c.coords().to_vec();
                x[i] += s;
                let nb = Cell::new(&x);
                if seen.insert(nb) {
                    queue.push_back((nb, k + 1));
                }
            }
        }
    }
    seen
}

/// Number of cells of the l1-ball of radius `d`.
pub fn ball_volume(n: usize, d: u64) -> usize {
    bfs_ball(n, d).len()
}

fn children(lab: &dyn Labeling, x: &Cell) -> Vec<Cell> {
    (1..=2 * lab.dim() as Port)
        .filter_map(|p| traverse_port(lab, x, p).ok())
        .filter(|nb| traverse_port(lab, nb, 1).ok().as_ref() == Some(x))
        .collect()
}

fn parent(lab: &dyn Labeling, x: &Cell) -> Cell {
    traverse_port(lab, x, 1).expect("parent inside the grid")
}

enum Task {
    Emit(Cell, u8),
    Sub(Cell),
    Up(Cell),
}

/// `Virt_c[0..=horizon]` by depth-first traversal of the forest of port-1
/// edges: a subtree is entered at level 1, level `l` precedes the visit of
/// the `l`-th child, and the top level closes the cell.
pub fn dfs_virt(lab: &dyn Labeling, c: &Cell, horizon: usize) -> Vec<VirtPos> {
    let mut out = Vec::with_capacity(horizon + 1);
    let top = |x: &Cell| children(lab, x).len() as u8 + 1;
    let mut stack = vec![Task::Up(*c), Task::Emit(*c, top(c))];
    while out.len() <= horizon {
        match stack.pop().expect("the upward chain never ends") {
            Task::Emit(cell, level) => out.push(VirtPos { cell, level }),
            Task::Sub(y) => {
                let ch = children(lab, &y);
                stack.push(Task::Emit(y, ch.len() as u8 + 1));
                for (l, z) in ch.iter().enumerate().rev() {
                    stack.push(Task::Sub(*z));
                    stack.push(Task::Emit(y, l as u8 + 1));
                }
            }
            Task::Up(x) => {
                let p = parent(lab, &x);
                let ch = children(lab, &p);
                let at = ch.iter().position(|z| *z == x).expect("x is a child of its parent");
                stack.push(Task::Up(p));
                stack.push(Task::Emit(p, ch.len() as u8 + 1));
                for (l, z) in ch.iter().enumerate().skip(at + 1).rev() {
                    stack.push(Task::Sub(*z));
                    stack.push(Task::Emit(p, l as u8 + 1));
                }
            }
        }
    }
    out
}

/// All `h^n` tuples over `0..h` in lexicographic order.
pub fn lex_tuples(n: usize, h: u64) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t: Vec<u64>| {
                (0..h).map(move |d| {
                    let mut t = t.clone();
                    t.push(d);
                    t
                })
            })
            .collect();
    }
    out
}

/// Base-`h` digits of `x`, most significant first, `n` of them.
pub fn decode_tuple(mut x: u64, n: usize, h: u64) -> Vec<u64> {
    let mut t = vec![0; n];
    for d in t.iter_mut().rev() {
        *d = x % h;
        x /= h;
    }
    t
}

/// Stack size after `op` on a stack of size `x`, with the verdict of a
/// test; `None` when the operation cannot finish (non-divisible Div,
/// Dec below zero).
pub fn stack_post(op: Op, x: u64) -> Option<(u64, bool)> {
    match op {
        Op::Init(k) => Some((k as u64, false)),
        Op::Inc(k) => Some((x + k as u64, false)),
        Op::Dec(k) => x.checked_sub(k as u64).map(|y| (y, false)),
        Op::Mult(k) => Some((x * k as u64, false)),
        Op::Div(k) => (x % k as u64 == 0).then(|| (x / k as u64, false)),
        Op::IsDiv(k) => Some((x, x % k as u64 == 0)),
        _ => Some((x, false)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PortLabeling;
    use crate::unoriented::{indeg, virt_oracle};
    use proptest::prelude::*;

    #[test]
    fn valuations() {
        assert_eq!(factorize_valuations(45, &[3, 5]), (vec![2, 1], 1));
        assert_eq!(factorize_valuations(1, &[3, 5]), (vec![0, 0], 1));
        assert_eq!(odd_primes(4), vec![3, 5, 7, 11]);
    }

    #[test]
    fn valuations_round_trip() {
        let ps = odd_primes(3);
        for x in 1..=1_000_000u64 {
            let (v, rest) = factorize_valuations(x, &ps);
            let back: u64 = ps.iter().zip(&v).map(|(p, &e)| p.pow(e)).product::<u64>() * rest;
            assert_eq!(back, x);
            assert!(ps.iter().all(|p| rest % p != 0));
        }
    }

    #[test]
    fn ball_sizes() {
        assert_eq!(ball_volume(2, 1), 5);
        assert_eq!(ball_volume(2, 2), 13);
        let v: Vec<usize> = (0..6).map(|d| ball_volume(3, d)).collect();
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn tuples() {
        assert_eq!(lex_tuples(2, 2), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(lex_tuples(3, 4).len(), 64);
        for (i, t) in lex_tuples(3, 4).iter().enumerate() {
            assert_eq!(&decode_tuple(i as u64, 3, 4), t);
            assert_eq!(crate::poly::encode_tuple(t, 4), i as u64);
        }
    }

    #[test]
    fn dfs_starts_at_the_base() {
        let lab = PortLabeling::potential_split(7, 2);
        let c = Cell::origin(2);
        assert_eq!(dfs_virt(&lab, &c, 0), vec![VirtPos { cell: c, level: indeg(&lab, &c) + 1 }]);
    }

    #[test]
    fn dfs_agrees_with_stepping() {
        for seed in 0..50 {
            let lab = PortLabeling::potential_split(seed, 2);
            let c = Cell::new(&[seed as i64 % 5 - 2, 1]);
            assert_eq!(dfs_virt(&lab, &c, 1000), virt_oracle(&lab, &c, 1001), "seed {seed}");
        }
    }

    #[test]
    fn arithmetic() {
        assert_eq!(stack_post(Op::Mult(3), 4), Some((12, false)));
        assert_eq!(stack_post(Op::Div(3), 10), None);
        assert_eq!(stack_post(Op::IsDiv(5), 10), Some((10, true)));
        assert_eq!(stack_post(Op::Dec(2), 1), None);
    }

    proptest! {
        #[test]
        fn decode_inverts_encode(t in proptest::collection::vec(0u64..8, 1..5)) {
            let x = crate::poly::encode_tuple(&t, 8);
            prop_assert_eq!(decode_tuple(x, t.len(), 8), t);
        }

        #[test]
        fn ball_matches_norm(d in 0u64..6, n in 1usize..4) {
            let b = bfs_ball(n, d);
            prop_assert!(b.iter().all(|c| c.l1_norm() <= d));
            if d > 0 {
                let inner = bfs_ball(n, d - 1);
                prop_assert!(inner.is_subset(&b));
            }
        }
    }
}
