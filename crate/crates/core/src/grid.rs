//! The infinite n-dimensional grid: cells, oriented moves and port labelings.
//!
//! Nothing is stored per cell. Labelings are pure functions of `(family, seed,
//! n, coordinates)`, so the same labeling can be queried from any number of
//! simulations at once.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported grid dimension.
pub const MAX_DIM: usize = 8;

/// A port label in `1..=2n`.
pub type Port = u8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("coordinate overflow in dimension {dim}")]
    Overflow { dim: usize },
    #[error("dimension {dim} out of range for a {n}-dimensional grid")]
    BadDimension { dim: usize, n: usize },
    #[error("port {port} out of range for a {n}-dimensional grid")]
    BadPort { port: Port, n: usize },
    #[error("invalid labeling token `{0}` (expected family:seed:n)")]
    BadToken(String),
}

/// A vertex of the grid.
///
/// Coordinates live inline so that a `Cell` is `Copy`; the unused tail is
/// always zero, which keeps the derived `Eq`/`Hash` correct.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    n: u8,
    coords: [i64; MAX_DIM],
}

impl Cell {
    pub fn origin(n: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&n), "grid dimension must be in 1..={MAX_DIM}");
        Cell { n: n as u8, coords: [0; MAX_DIM] }
    }

    pub fn new(coords: &[i64]) -> Self {
        let mut c = Cell::origin(coords.len());
        c.coords[..coords.len()].copy_from_slice(coords);
        c
    }

    pub fn dim(&self) -> usize {
        self.n as usize
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.n as usize]
    }

    /// Coordinate `i` using the 1-based dimension numbering of moves.
    pub fn coord(&self, i: usize) -> i64 {
        self.coords[i - 1]
    }

    pub fn is_origin(&self) -> bool {
        self.coords().iter().all(|&x| x == 0)
    }

    pub fn l1_norm(&self) -> u64 {
        self.coords().iter().map(|x| x.unsigned_abs()).sum()
    }

    pub fn l1_distance(&self, other: &Cell) -> u64 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| a.abs_diff(*b))
            .sum()
    }

    /// Component-wise `self + delta`, with checked arithmetic.
    pub fn offset(&self, delta: &[i64]) -> Result<Cell, GridError> {
        let mut out = *self;
        for (d, (x, dx)) in out.coords.iter_mut().zip(delta).enumerate() {
            *x = x.checked_add(*dx).ok_or(GridError::Overflow { dim: d + 1 })?;
        }
        Ok(out)
    }
}

impl fmt::Debug for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, x) in self.coords().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

impl Serialize for Cell {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<i64>::deserialize(d)?;
        if v.is_empty() || v.len() > MAX_DIM {
            return Err(serde::de::Error::custom("bad cell dimension"));
        }
        Ok(Cell::new(&v))
    }
}

impl FromStr for Cell {
    type Err = GridError;

    /// Parses `3,2` or `(3,2)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let coords: Result<Vec<i64>, _> = t.split(',').map(|p| p.trim().parse::<i64>()).collect();
        match coords {
            Ok(v) if !v.is_empty() && v.len() <= MAX_DIM => Ok(Cell::new(&v)),
            _ => Err(GridError::BadToken(s.to_string())),
        }
    }
}

/// A move on an oriented grid: `sign` along `dim` (1-based); `dim == 0` stays.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct OrientedMove {
    pub sign: i8,
    pub dim: u8,
}

impl OrientedMove {
    pub const STAY: OrientedMove = OrientedMove { sign: 1, dim: 0 };
    pub const NORTH: OrientedMove = OrientedMove { sign: 1, dim: 1 };
    pub const SOUTH: OrientedMove = OrientedMove { sign: -1, dim: 1 };

    pub fn new(sign: i8, dim: u8) -> Self {
        assert!(sign == 1 || sign == -1, "sign must be -1 or +1");
        OrientedMove { sign, dim }
    }

    pub fn is_stay(&self) -> bool {
        self.dim == 0
    }

    pub fn reverse(&self) -> Self {
        OrientedMove { sign: -self.sign, dim: self.dim }
    }
}

impl fmt::Display for OrientedMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim == 0 {
            f.write_str("stay")
        } else {
            write!(f, "{}{}", if self.sign > 0 { '+' } else { '-' }, self.dim)
        }
    }
}

/// Shifts coordinate `m.dim` of `c` by `m.sign`.
pub fn apply_move(c: &Cell, m: OrientedMove) -> Result<Cell, GridError> {
    if m.dim == 0 {
        return Ok(*c);
    }
    let i = m.dim as usize;
    if i > c.dim() {
        return Err(GridError::BadDimension { dim: i, n: c.dim() });
    }
    let mut out = *c;
    out.coords[i - 1] = out.coords[i - 1]
        .checked_add(m.sign as i64)
        .ok_or(GridError::Overflow { dim: i })?;
    Ok(out)
}

/// Port labels of an unoriented grid.
///
/// Implementations must assign, at every cell, the `2n` ports bijectively to
/// the `2n` global unit directions.
pub trait Labeling: Send + Sync {
    fn dim(&self) -> usize;

    /// Global direction taken when leaving `cell` via `port`.
    fn direction(&self, cell: &Cell, port: Port) -> OrientedMove;

    /// The port of `cell` that leads in global direction `dir`.
    fn port_toward(&self, cell: &Cell, dir: OrientedMove) -> Port {
        (1..=2 * self.dim() as Port)
            .find(|&p| self.direction(cell, p) == dir)
            .expect("labeling is not a bijection")
    }
}

/// One incident edge as seen from a cell: both endpoint labels and the far cell.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct EdgeView {
    pub near_port: Port,
    pub far_port: Port,
    pub neighbor: Cell,
}

fn check_port(lab: &dyn Labeling, port: Port) -> Result<(), GridError> {
    let n = lab.dim();
    if port == 0 || port as usize > 2 * n {
        return Err(GridError::BadPort { port, n });
    }
    Ok(())
}

/// The neighbor reached from `c` via `port`.
pub fn traverse_port(lab: &dyn Labeling, c: &Cell, port: Port) -> Result<Cell, GridError> {
    check_port(lab, port)?;
    apply_move(c, lab.direction(c, port))
}

/// The label of the edge `(c, c + dir)` on the far side.
pub fn far_port(lab: &dyn Labeling, c: &Cell, port: Port) -> Result<(Cell, Port), GridError> {
    let dir = lab.direction(c, port);
    let nb = apply_move(c, dir)?;
    Ok((nb, lab.port_toward(&nb, dir.reverse())))
}

/// All `2n` incident edges of `c`, ordered by near port.
pub fn edge_views(lab: &dyn Labeling, c: &Cell) -> Result<Vec<EdgeView>, GridError> {
    (1..=2 * lab.dim() as Port)
        .map(|p| {
            let (neighbor, far) = far_port(lab, c, p)?;
            Ok(EdgeView { near_port: p, far_port: far, neighbor })
        })
        .collect()
}

/// Walks `steps` times along `port` from `start`; true iff no cell repeats.
pub fn check_acyclic_window(lab: &dyn Labeling, port: Port, start: &Cell, steps: u64) -> bool {
    assert!(steps >= 1, "window must be positive");
    let mut seen = HashSet::new();
    let mut c = *start;
    seen.insert(c);
    for _ in 0..steps {
        c = match traverse_port(lab, &c, port) {
            Ok(c) => c,
            Err(_) => return true,
        };
        if !seen.insert(c) {
            return false;
        }
    }
    true
}

/// The labeling families shipped with the crate.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Family {
    /// Port `2i-1` leads to `(+1, i)` and port `2i` to `(-1, i)` everywhere.
    Consistent,
    /// Seeded per-cell port permutations that keep every single-port walk
    /// strictly monotone in a fixed linear potential.
    PotentialSplit,
    /// The consistent labeling with seeded local swaps of two same-sign ports.
    PerturbedConsistent,
}

impl Family {
    pub fn token(&self) -> &'static str {
        match self {
            Family::Consistent => "consistent",
            Family::PotentialSplit => "potsplit",
            Family::PerturbedConsistent => "perturbed",
        }
    }
}

/// Serializable identity of a labeling: `family:seed:n`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct LabelingSpec {
    pub family: Family,
    pub seed: u64,
    pub n: usize,
}

impl fmt::Display for LabelingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.family.token(), self.seed, self.n)
    }
}

impl FromStr for LabelingSpec {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GridError::BadToken(s.to_string());
        let mut parts = s.split(':');
        let family = match parts.next().ok_or_else(bad)? {
            "consistent" => Family::Consistent,
            "potsplit" => Family::PotentialSplit,
            "perturbed" => Family::PerturbedConsistent,
            _ => return Err(bad()),
        };
        let seed = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let n: usize = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if parts.next().is_some() || n == 0 || n > MAX_DIM {
            return Err(bad());
        }
        Ok(LabelingSpec { family, seed, n })
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn cell_hash(seed: u64, salt: u64, c: &Cell) -> u64 {
    let mut h = splitmix64(seed ^ salt.rotate_left(17));
    for &x in c.coords() {
        h = splitmix64(h ^ x as u64);
    }
    h
}

/// Direction table for one cell: entry `p - 1` is the direction of port `p`.
type PortTable = [OrientedMove; 2 * MAX_DIM];

const STAY_TABLE: PortTable = [OrientedMove::STAY; 2 * MAX_DIM];

fn consistent_table(n: usize) -> PortTable {
    let mut t = STAY_TABLE;
    for i in 1..=n {
        t[2 * i - 2] = OrientedMove::new(1, i as u8);
        t[2 * i - 1] = OrientedMove::new(-1, i as u8);
    }
    t
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn det(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut d = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        if a[piv][col].abs() < 1e-12 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            d = -d;
        }
        d *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for k in col..n {
                a[r][k] -= f * a[col][k];
            }
        }
    }
    d
}

/// A labeling from one of the shipped [`Family`] generators.
#[derive(Clone, Debug)]
pub struct PortLabeling {
    spec: LabelingSpec,
    /// Potential coefficient vectors (potential-split only).
    weights: Vec<Vec<i64>>,
    /// Admissible per-cell tables (potential-split only).
    tables: Vec<PortTable>,
}

impl PortLabeling {
    pub fn new(spec: LabelingSpec) -> Self {
        assert!((1..=MAX_DIM).contains(&spec.n));
        let mut lab = PortLabeling { spec, weights: Vec::new(), tables: Vec::new() };
        if spec.family == Family::PotentialSplit {
            lab.init_potentials();
        }
        lab
    }

    pub fn consistent(n: usize) -> Self {
        Self::new(LabelingSpec { family: Family::Consistent, seed: 0, n })
    }

    pub fn potential_split(seed: u64, n: usize) -> Self {
        Self::new(LabelingSpec { family: Family::PotentialSplit, seed, n })
    }

    pub fn perturbed(seed: u64, n: usize) -> Self {
        Self::new(LabelingSpec { family: Family::PerturbedConsistent, seed, n })
    }

    pub fn spec(&self) -> LabelingSpec {
        self.spec
    }

    /// Coefficients of the potentials `phi_1..phi_n` (empty for other families).
    pub fn potentials(&self) -> &[Vec<i64>] {
        &self.weights
    }

    /// `phi_i(c)` for `i` in `1..=n`.
    pub fn potential(&self, i: usize, c: &Cell) -> i64 {
        self.weights[i - 1].iter().zip(c.coords()).map(|(w, x)| w * x).sum()
    }

    fn init_potentials(&mut self) {
        let n = self.spec.n;
        let perms = permutations(n);
        for attempt in 0u64.. {
            let mut h = splitmix64(self.spec.seed ^ 0x5107_0000 ^ attempt);
            let mut next = || {
                h = splitmix64(h);
                h
            };
            let w: Vec<Vec<i64>> = (0..n)
                .map(|_| {
                    (0..n)
                        .map(|_| {
                            let r = next();
                            let mag = (r % 4) as i64 + 1;
                            if (r >> 8) & 1 == 0 { mag } else { -mag }
                        })
                        .collect()
                })
                .collect();
            let wf: Vec<Vec<f64>> = w.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
            if det(&wf).abs() < 0.5 {
                continue;
            }
            let sign = |i: usize, d: usize| if w[i][d] > 0 { 1i8 } else { -1i8 };
            let mut tables = Vec::new();
            for up in &perms {
                // ports 1..n: port i+1 -> neighbor increasing phi_i along dim up[i]
                let ups: Vec<OrientedMove> =
                    (0..n).map(|i| OrientedMove::new(sign(i, up[i]), up[i] as u8 + 1)).collect();
                let rest: Vec<OrientedMove> = ups.iter().map(|m| m.reverse()).collect();
                for down in &perms {
                    // port n+j+1 -> rest[down[j]], must decrease phi_j
                    let ok = (0..n).all(|j| {
                        let m = rest[down[j]];
                        (m.sign as i64) * w[j][m.dim as usize - 1] < 0
                    });
                    if ok {
                        let mut t = STAY_TABLE;
                        for i in 0..n {
                            t[i] = ups[i];
                            t[n + i] = rest[down[i]];
                        }
                        tables.push(t);
                    }
                }
            }
            if tables.len() >= 2 || n == 1 || attempt > 64 {
                self.weights = w;
                self.tables = tables;
                return;
            }
        }
    }

    fn table(&self, c: &Cell) -> PortTable {
        let n = self.spec.n;
        match self.spec.family {
            Family::Consistent => consistent_table(n),
            Family::PotentialSplit => {
                let h = cell_hash(self.spec.seed, 0xA5, c);
                self.tables[(h % self.tables.len() as u64) as usize]
            }
            Family::PerturbedConsistent => self.perturbed_table(c),
        }
    }

    /// Consistent table with, at a seeded quarter of the cells, two
    /// same-sign ports swapped. Every single-port walk then still moves
    /// monotonically in the coordinate sum, so no walk closes a cycle.
    fn perturbed_table(&self, c: &Cell) -> PortTable {
        let n = self.spec.n;
        let mut t = consistent_table(n);
        let h = cell_hash(self.spec.seed, 0x3C, c);
        if n >= 2 && h % 4 == 0 {
            let a = ((h >> 8) % n as u64) as usize;
            let mut b = ((h >> 24) % (n as u64 - 1)) as usize;
            if b >= a {
                b += 1;
            }
            let parity = ((h >> 40) & 1) as usize;
            t.swap(2 * a + parity, 2 * b + parity);
        }
        t
    }
}

impl Labeling for PortLabeling {
    fn dim(&self) -> usize {
        self.spec.n
    }

    fn direction(&self, cell: &Cell, port: Port) -> OrientedMove {
        debug_assert!(port >= 1 && port as usize <= 2 * self.spec.n);
        self.table(cell)[port as usize - 1]
    }

    fn port_toward(&self, cell: &Cell, dir: OrientedMove) -> Port {
        let t = self.table(cell);
        t[..2 * self.spec.n].iter().position(|m| *m == dir).expect("labeling is not a bijection") as Port + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn apply_move_examples() {
        let c = |v: &[i64]| Cell::new(v);
        assert_eq!(apply_move(&c(&[0, 0]), OrientedMove::new(1, 1)).unwrap(), c(&[1, 0]));
        assert_eq!(apply_move(&c(&[2, -1]), OrientedMove::new(-1, 2)).unwrap(), c(&[2, -2]));
        assert_eq!(apply_move(&c(&[5, 5]), OrientedMove::new(1, 0)).unwrap(), c(&[5, 5]));
    }

    #[test]
    fn overflow_is_an_error() {
        let c = Cell::new(&[i64::MAX, 0]);
        assert_eq!(apply_move(&c, OrientedMove::NORTH), Err(GridError::Overflow { dim: 1 }));
        assert!(apply_move(&c, OrientedMove::new(1, 3)).is_err());
    }

    #[test]
    fn consistent_port_convention() {
        let lab = PortLabeling::consistent(2);
        let o = Cell::origin(2);
        assert_eq!(traverse_port(&lab, &o, 1).unwrap(), Cell::new(&[1, 0]));
        assert_eq!(traverse_port(&lab, &o, 4).unwrap(), Cell::new(&[0, -1]));
        let views = edge_views(&lab, &o).unwrap();
        // north edge seen from the north neighbor is its port 2
        assert_eq!(views[0].far_port, 2);
    }

    #[test]
    fn labeling_tokens_round_trip() {
        for t in ["potsplit:7:2", "consistent:0:3", "perturbed:12:4"] {
            let spec: LabelingSpec = t.parse().unwrap();
            assert_eq!(spec.to_string(), t);
        }
        assert!("potsplit:7".parse::<LabelingSpec>().is_err());
        assert!("spiral:1:2".parse::<LabelingSpec>().is_err());
        assert!("potsplit:1:0".parse::<LabelingSpec>().is_err());
    }

    #[test]
    fn potsplit_seed7_origin_view_is_symmetric() {
        let lab = PortLabeling::potential_split(7, 2);
        let o = Cell::origin(2);
        let views = edge_views(&lab, &o).unwrap();
        let mut near: Vec<Port> = views.iter().map(|v| v.near_port).collect();
        near.sort();
        assert_eq!(near, vec![1, 2, 3, 4]);
        let mut neighbors: Vec<Cell> = views.iter().map(|v| v.neighbor).collect();
        neighbors.sort();
        neighbors.dedup();
        assert_eq!(neighbors.len(), 4);
        for v in &views {
            let back = edge_views(&lab, &v.neighbor).unwrap();
            let rev = back.iter().find(|b| b.near_port == v.far_port).unwrap();
            assert_eq!(rev.far_port, v.near_port);
            assert_eq!(rev.neighbor, o);
        }
        // port 1 increases phi_1
        let nb = traverse_port(&lab, &o, 1).unwrap();
        assert!(lab.potential(1, &nb) > lab.potential(1, &o));
    }

    #[test]
    fn potsplit_is_not_consistent() {
        let lab = PortLabeling::potential_split(7, 2);
        let tables: HashSet<Vec<OrientedMove>> = (-5..5)
            .flat_map(|x| (-5..5).map(move |y| Cell::new(&[x, y])))
            .map(|c| (1..=4).map(|p| lab.direction(&c, p)).collect())
            .collect();
        assert!(tables.len() >= 2);
    }

    struct FourCycle;

    impl Labeling for FourCycle {
        fn dim(&self) -> usize {
            2
        }
        fn direction(&self, c: &Cell, port: Port) -> OrientedMove {
            let first = match (c.coord(1), c.coord(2)) {
                (0, 0) => OrientedMove::new(1, 1),
                (1, 0) => OrientedMove::new(1, 2),
                (1, 1) => OrientedMove::new(-1, 1),
                (0, 1) => OrientedMove::new(-1, 2),
                _ => OrientedMove::new(1, 1),
            };
            let all = consistent_table(2);
            let rest: Vec<OrientedMove> = all[..4].iter().copied().filter(|m| *m != first).collect();
            if port == 1 { first } else { rest[port as usize - 2] }
        }
    }

    #[test]
    fn hand_built_cycle_is_detected() {
        assert!(!check_acyclic_window(&FourCycle, 1, &Cell::origin(2), 4));
        assert!(check_acyclic_window(&FourCycle, 1, &Cell::origin(2), 3));
    }

    #[test]
    fn potsplit_windows_are_acyclic() {
        let lab = PortLabeling::potential_split(3, 3);
        for port in 1..=6 {
            assert!(check_acyclic_window(&lab, port, &Cell::new(&[2, -4, 1]), 10_000));
        }
    }

    #[test]
    fn perturbed_family_passes_window_checks() {
        for seed in 0..50 {
            let lab = PortLabeling::perturbed(seed, 2);
            for port in 1..=4 {
                assert!(check_acyclic_window(&lab, port, &Cell::origin(2), 1_000), "seed {seed} port {port}");
            }
        }
    }

    fn arb_cell(n: usize) -> impl Strategy<Value = Cell> {
        proptest::collection::vec(-1000i64..1000, n).prop_map(|v| Cell::new(&v))
    }

    proptest! {
        #[test]
        fn move_then_reverse_is_identity(c in arb_cell(3), sign in prop_oneof![Just(1i8), Just(-1i8)], dim in 1u8..=3) {
            let m = OrientedMove::new(sign, dim);
            let back = apply_move(&apply_move(&c, m).unwrap(), m.reverse()).unwrap();
            prop_assert_eq!(back, c);
        }

        #[test]
        fn ports_biject_onto_neighbors(seed in 0u64..1000, c in arb_cell(3), fam in 0usize..3) {
            let family = [Family::Consistent, Family::PotentialSplit, Family::PerturbedConsistent][fam];
            let lab = PortLabeling::new(LabelingSpec { family, seed, n: 3 });
            let views = edge_views(&lab, &c).unwrap();
            let nbs: HashSet<Cell> = views.iter().map(|v| v.neighbor).collect();
            prop_assert_eq!(nbs.len(), 6);
            for v in &views {
                prop_assert_eq!(v.neighbor.l1_distance(&c), 1);
                let (back, p) = far_port(&lab, &v.neighbor, v.far_port).unwrap();
                prop_assert_eq!(back, c);
                prop_assert_eq!(p, v.near_port);
            }
        }

        #[test]
        fn potsplit_single_port_walks_are_monotone(seed in 0u64..200, c in arb_cell(2), port in 1u8..=4) {
            let lab = PortLabeling::potential_split(seed, 2);
            let i = if port <= 2 { port as usize } else { port as usize - 2 };
            let nb = traverse_port(&lab, &c, port).unwrap();
            if port <= 2 {
                prop_assert!(lab.potential(i, &nb) > lab.potential(i, &c));
            } else {
                prop_assert!(lab.potential(i, &nb) < lab.potential(i, &c));
            }
        }

        #[test]
        fn labelings_are_deterministic(seed in 0u64..1000, c in arb_cell(2)) {
            let a = PortLabeling::potential_split(seed, 2);
            let b = PortLabeling::potential_split(seed, 2);
            for p in 1..=4 {
                prop_assert_eq!(a.direction(&c, p), b.direction(&c, p));
            }
        }
    }
}
