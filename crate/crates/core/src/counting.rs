//! Exact Eulerian circuit counts.
//!
//! Circuits are closed directed edge sequences taken up to rotation; a circuit
//! and its reversal are counted as two circuits. Every circuit induces an
//! Eulerian orientation, so the total is the sum over Eulerian orientations
//! `D` of `t_r(D) * prod_j (d_j/2 - 1)!`, where `t_r(D)` counts arborescences
//! rooted at `r` (independent of `r`).

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::exact::{arborescence_count, spanning_tree_count, BigCount};
use crate::graph::Graph;

/// Largest edge count accepted by the orientation enumerator.
pub const MAX_ORIENTATION_EDGES: usize = 40;
/// Largest edge count accepted by the trail-search oracle.
pub const MAX_BACKTRACK_EDGES: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountError {
    #[error("vertex {vertex} has odd degree {degree}")]
    OddDegree { vertex: usize, degree: usize },
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph has no edges")]
    NoEdges,
    #[error("{edges} edges exceeds the {method} guard of {limit}")]
    TooLarge {
        edges: usize,
        limit: usize,
        method: &'static str,
    },
    #[error("orientation is not Eulerian at vertex {vertex} (out {out_degree}, in {in_degree})")]
    NotEulerian {
        vertex: usize,
        out_degree: usize,
        in_degree: usize,
    },
    #[error("invalid orientation: {0}")]
    InvalidOrientation(String),
    #[error("trail count {raw} not divisible by {divisor}")]
    InconsistentDivision { raw: u64, divisor: u64 },
    #[error("root {root} out of range for {n} vertices")]
    BadRoot { root: usize, n: usize },
}

impl CountError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            CountError::OddDegree { .. } => "ODD_DEGREE",
            CountError::Disconnected => "DISCONNECTED",
            CountError::NoEdges => "NO_EDGES",
            CountError::TooLarge { .. } => "SIZE_GUARD",
            CountError::NotEulerian { .. } => "NOT_EULERIAN",
            CountError::InvalidOrientation(_) => "INVALID_ORIENTATION",
            CountError::InconsistentDivision { .. } => "INTERNAL_INCONSISTENCY",
            CountError::BadRoot { .. } => "BAD_ROOT",
        }
    }
}

/// A direction for every edge of a base graph. Edge `i` of the base is
/// `(u, v)` with `u < v`; `reversed[i] == false` means `u -> v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Orientation<'g> {
    base: &'g Graph,
    reversed: Vec<bool>,
}

impl<'g> Orientation<'g> {
    pub fn new(base: &'g Graph, reversed: Vec<bool>) -> Result<Self, CountError> {
        if reversed.len() != base.edge_count() {
            return Err(CountError::InvalidOrientation(format!(
                "{} directions for {} edges",
                reversed.len(),
                base.edge_count()
            )));
        }
        Ok(Orientation { base, reversed })
    }

    /// Builds an orientation from `(tail, head)` arcs, one per base edge.
    pub fn from_arcs(base: &'g Graph, arcs: &[(usize, usize)]) -> Result<Self, CountError> {
        let mut reversed = vec![None; base.edge_count()];
        for &(tail, head) in arcs {
            let idx = base
                .edge_index(tail, head)
                .ok_or_else(|| CountError::InvalidOrientation(format!("({tail}, {head}) is not an edge")))?;
            if reversed[idx].replace(tail > head).is_some() {
                return Err(CountError::InvalidOrientation(format!(
                    "edge ({tail}, {head}) oriented twice"
                )));
            }
        }
        let reversed = reversed
            .into_iter()
            .collect::<Option<Vec<bool>>>()
            .ok_or_else(|| CountError::InvalidOrientation("some edge has no direction".into()))?;
        Ok(Orientation { base, reversed })
    }

    pub fn base(&self) -> &'g Graph {
        self.base
    }

    pub fn directions(&self) -> &[bool] {
        &self.reversed
    }

    /// `(tail, head)` pairs in base edge order.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.base
            .edges()
            .iter()
            .zip(&self.reversed)
            .map(|(&(u, v), &r)| if r { (v, u) } else { (u, v) })
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        let mut out = vec![0; self.base.n()];
        for (t, _) in self.arcs() {
            out[t] += 1;
        }
        out
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut inn = vec![0; self.base.n()];
        for (_, h) in self.arcs() {
            inn[h] += 1;
        }
        inn
    }

    pub fn is_eulerian(&self) -> bool {
        self.eulerian_violation().is_none()
    }

    fn eulerian_violation(&self) -> Option<CountError> {
        let (out, inn) = (self.out_degrees(), self.in_degrees());
        (0..self.base.n())
            .find(|&v| out[v] != inn[v])
            .map(|vertex| CountError::NotEulerian {
                vertex,
                out_degree: out[vertex],
                in_degree: inn[vertex],
            })
    }

    /// Every arc flipped.
    pub fn reversal(&self) -> Orientation<'g> {
        Orientation {
            base: self.base,
            reversed: self.reversed.iter().map(|r| !r).collect(),
        }
    }
}

fn check_even_connected(g: &Graph) -> Result<(), CountError> {
    if let Some(vertex) = (0..g.n()).find(|&v| g.degree(v) % 2 == 1) {
        return Err(CountError::OddDegree {
            vertex,
            degree: g.degree(vertex),
        });
    }
    if g.edge_count() == 0 {
        return Err(CountError::NoEdges);
    }
    if !g.is_connected() {
        return Err(CountError::Disconnected);
    }
    Ok(())
}

/// Depth-first enumeration of Eulerian orientations.
///
/// Edges are decided in sorted order, trying `u -> v` (as listed) before
/// `v -> u`. A direction is only taken while the tail still owes out-arcs and
/// the head still owes in-arcs.
pub struct EulerianOrientations<'g> {
    g: &'g Graph,
    out_owed: Vec<usize>,
    in_owed: Vec<usize>,
    choices: Vec<bool>,
    base_depth: usize,
    started: bool,
    exhausted: bool,
}

/// Streams every Eulerian orientation of `g` exactly once.
pub fn eulerian_orientations(g: &Graph) -> Result<EulerianOrientations<'_>, CountError> {
    EulerianOrientations::with_prefix(g, &[])
}

impl<'g> EulerianOrientations<'g> {
    /// Enumerates only the orientations whose first edges follow `prefix`.
    pub fn with_prefix(g: &'g Graph, prefix: &[bool]) -> Result<Self, CountError> {
        if let Some(vertex) = (0..g.n()).find(|&v| g.degree(v) % 2 == 1) {
            return Err(CountError::OddDegree {
                vertex,
                degree: g.degree(vertex),
            });
        }
        if g.edge_count() > MAX_ORIENTATION_EDGES {
            return Err(CountError::TooLarge {
                edges: g.edge_count(),
                limit: MAX_ORIENTATION_EDGES,
                method: "orientation enumeration",
            });
        }
        let half: Vec<usize> = g.degrees().iter().map(|d| d / 2).collect();
        let mut it = EulerianOrientations {
            g,
            out_owed: half.clone(),
            in_owed: half,
            choices: Vec::with_capacity(g.edge_count()),
            base_depth: 0,
            started: false,
            exhausted: prefix.len() > g.edge_count(),
        };
        for &reversed in prefix {
            if it.exhausted || !it.apply(reversed) {
                it.exhausted = true;
                break;
            }
        }
        it.base_depth = it.choices.len();
        Ok(it)
    }

    fn endpoints(&self, depth: usize, reversed: bool) -> (usize, usize) {
        let (u, v) = self.g.edges()[depth];
        if reversed {
            (v, u)
        } else {
            (u, v)
        }
    }

    fn apply(&mut self, reversed: bool) -> bool {
        let (tail, head) = self.endpoints(self.choices.len(), reversed);
        if self.out_owed[tail] == 0 || self.in_owed[head] == 0 {
            return false;
        }
        self.out_owed[tail] -= 1;
        self.in_owed[head] -= 1;
        self.choices.push(reversed);
        true
    }

    fn undo(&mut self) -> Option<bool> {
        if self.choices.len() <= self.base_depth {
            return None;
        }
        let reversed = self.choices.pop()?;
        let (tail, head) = self.endpoints(self.choices.len(), reversed);
        self.out_owed[tail] += 1;
        self.in_owed[head] += 1;
        Some(reversed)
    }

    /// Pops decisions until one can be switched to its second branch.
    fn backtrack(&mut self) -> bool {
        while let Some(reversed) = self.undo() {
            if !reversed && self.apply(true) {
                return true;
            }
        }
        false
    }

    /// Advances to the next complete orientation; the current choice vector
    /// is then available in `self.choices`.
    fn advance(&mut self) -> bool {
        if self.exhausted {
            return false;
        }
        if self.started && !self.backtrack() {
            self.exhausted = true;
            return false;
        }
        self.started = true;
        loop {
            if self.choices.len() == self.g.edge_count() {
                return true;
            }
            if !(self.apply(false) || self.apply(true)) && !self.backtrack() {
                self.exhausted = true;
                return false;
            }
        }
    }
}

impl<'g> Iterator for EulerianOrientations<'g> {
    type Item = Orientation<'g>;

    fn next(&mut self) -> Option<Orientation<'g>> {
        self.advance().then(|| Orientation {
            base: self.g,
            reversed: self.choices.clone(),
        })
    }
}

/// `prod_j (d_j/2 - 1)!` over undirected degrees.
pub fn factorial_product(g: &Graph) -> BigCount {
    g.degrees()
        .iter()
        .map(|&d| (1..d / 2).fold(BigUint::one(), |acc, k| acc * k))
        .product()
}

/// Eulerian circuits of a connected Eulerian orientation:
/// `t_r(D) * prod_j (d_j - 1)!` with `d_j` the common in/out-degree.
pub fn best_count(d: &Orientation<'_>) -> Result<BigCount, CountError> {
    best_count_rooted(d, 0)
}

pub fn best_count_rooted(d: &Orientation<'_>, root: usize) -> Result<BigCount, CountError> {
    let g = d.base();
    if root >= g.n() {
        return Err(CountError::BadRoot { root, n: g.n() });
    }
    if let Some(err) = d.eulerian_violation() {
        return Err(err);
    }
    check_even_connected(g)?;
    Ok(arborescence_count(d, root) * factorial_product(g))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMethod {
    BestSum,
    Backtrack,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EulCountResult {
    pub eul: BigCount,
    pub orientation_count: BigCount,
    pub tree_count: BigCount,
    pub method: CountMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountOptions {
    /// Arborescence root used for every orientation.
    pub root: usize,
    /// Worker threads; 1 runs the enumeration on the calling thread.
    pub threads: usize,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions { root: 0, threads: 1 }
    }
}

/// Exact `Eul(G)` as a sum of BEST counts over all Eulerian orientations.
pub fn eul_exact(g: &Graph) -> Result<EulCountResult, CountError> {
    eul_exact_with(g, CountOptions::default())
}

pub fn eul_exact_with(g: &Graph, opts: CountOptions) -> Result<EulCountResult, CountError> {
    check_even_connected(g)?;
    if opts.root >= g.n() {
        return Err(CountError::BadRoot {
            root: opts.root,
            n: g.n(),
        });
    }
    // Validates size before any work happens.
    eulerian_orientations(g)?;

    let (tree_sum, orientation_count) = if opts.threads <= 1 {
        sum_arborescences(g, &[], opts.root)?
    } else {
        let depth = g.edge_count().min(12);
        let prefixes = feasible_prefixes(g, depth);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.threads)
            .build()
            .map_err(|e| CountError::InvalidOrientation(format!("thread pool: {e}")))?;
        let partials: Result<Vec<_>, _> = pool.install(|| {
            prefixes
                .par_iter()
                .map(|p| sum_arborescences(g, p, opts.root))
                .collect()
        });
        partials?
            .into_iter()
            .fold((BigUint::zero(), BigUint::zero()), |(a, b), (x, y)| (a + x, b + y))
    };

    Ok(EulCountResult {
        eul: tree_sum * factorial_product(g),
        orientation_count,
        tree_count: spanning_tree_count(g),
        method: CountMethod::BestSum,
    })
}

fn sum_arborescences(g: &Graph, prefix: &[bool], root: usize) -> Result<(BigCount, BigCount), CountError> {
    let mut total = BigUint::zero();
    let mut count = 0u64;
    for d in EulerianOrientations::with_prefix(g, prefix)? {
        total += arborescence_count(&d, root);
        count += 1;
    }
    Ok((total, BigUint::from(count)))
}

fn feasible_prefixes(g: &Graph, depth: usize) -> Vec<Vec<bool>> {
    let mut out = Vec::new();
    let mut stack = vec![Vec::new()];
    while let Some(prefix) = stack.pop() {
        if prefix.len() == depth {
            out.push(prefix);
            continue;
        }
        for dir in [true, false] {
            let mut next = prefix.clone();
            next.push(dir);
            let ok = EulerianOrientations::with_prefix(g, &next).is_ok_and(|it| !it.exhausted);
            if ok {
                stack.push(next);
            }
        }
    }
    out.sort();
    out
}

/// Independent count of `Eul(G)` by exhaustive trail search.
///
/// Counts closed trails that start and end at the lowest-index vertex `v0`
/// and use every edge once, then divides by `d(v0)/2`: a circuit passes
/// through `v0` exactly that many times, giving that many rotations that
/// start there.
pub fn eul_backtrack(g: &Graph) -> Result<BigCount, CountError> {
    check_even_connected(g)?;
    let e = g.edge_count();
    if e > MAX_BACKTRACK_EDGES {
        return Err(CountError::TooLarge {
            edges: e,
            limit: MAX_BACKTRACK_EDGES,
            method: "trail search",
        });
    }
    let start = (0..g.n()).find(|&v| g.degree(v) > 0).ok_or(CountError::NoEdges)?;
    let incident: Vec<Vec<(usize, usize)>> = (0..g.n())
        .map(|v| {
            g.neighbors(v)
                .iter()
                .map(|&w| (w, g.edge_index(v, w).expect("adjacent")))
                .collect()
        })
        .collect();
    let mut used = vec![false; e];
    let raw = trails(&incident, &mut used, start, start, e);
    let divisor = (g.degree(start) / 2) as u64;
    if !raw.is_multiple_of(divisor) {
        return Err(CountError::InconsistentDivision { raw, divisor });
    }
    Ok(BigUint::from(raw / divisor))
}

fn trails(incident: &[Vec<(usize, usize)>], used: &mut [bool], at: usize, home: usize, left: usize) -> u64 {
    if left == 0 {
        return u64::from(at == home);
    }
    let mut total = 0;
    for &(next, idx) in &incident[at] {
        if !used[idx] {
            used[idx] = true;
            total += trails(incident, used, next, home, left - 1);
            used[idx] = false;
        }
    }
    total
}

/// Back-solves the circle-contour integral `S` from an exact count:
/// `S = Eul(G) pi^n / (2^(E - n + 1) prod_j (d_j/2 - 1)!)`.
pub fn integral_s_from_count(g: &Graph, eul: &BigCount) -> f64 {
    let n = g.n() as f64;
    let e = g.edge_count() as f64;
    let log2_s =
        crate::log2_big(eul) + n * std::f64::consts::PI.log2() - (e - n + 1.0) - crate::log2_big(&factorial_product(g));
    log2_s.exp2()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(g: &Graph) -> u64 {
        eul_exact(g).unwrap().eul.try_into().unwrap()
    }

    #[test]
    fn orientation_counts() {
        for n in 3..8 {
            assert_eq!(eulerian_orientations(&Graph::cycle(n)).unwrap().count(), 2);
        }
        assert_eq!(eulerian_orientations(&Graph::complete(3)).unwrap().count(), 2);
        assert_eq!(eulerian_orientations(&Graph::bowtie()).unwrap().count(), 4);
        assert_eq!(eulerian_orientations(&Graph::complete(5)).unwrap().count(), 24);
    }

    #[test]
    fn bowtie_orientations_match_exhaustive_search() {
        let g = Graph::bowtie();
        let mut brute = Vec::new();
        for mask in 0u32..(1 << g.edge_count()) {
            let dirs = (0..g.edge_count()).map(|i| mask >> i & 1 == 1).collect();
            let d = Orientation::new(&g, dirs).unwrap();
            if d.is_eulerian() {
                brute.push(d);
            }
        }
        let mut listed: Vec<_> = eulerian_orientations(&g).unwrap().collect();
        assert_eq!(listed.len(), 4);
        brute.sort_by(|a, b| a.directions().cmp(b.directions()));
        listed.sort_by(|a, b| a.directions().cmp(b.directions()));
        assert_eq!(brute, listed);
    }

    #[test]
    fn orientation_order_is_as_listed_first() {
        let g = Graph::complete(3);
        let first = eulerian_orientations(&g).unwrap().next().unwrap();
        assert!(!first.directions()[0]);
    }

    #[test]
    fn odd_degree_is_rejected() {
        assert!(matches!(
            eulerian_orientations(&Graph::complete(4)),
            Err(CountError::OddDegree { vertex: 0, degree: 3 })
        ));
        assert_eq!(eul_exact(&Graph::complete(4)).unwrap_err().code(), "ODD_DEGREE");
        assert_eq!(eul_backtrack(&Graph::path(3)).unwrap_err().code(), "ODD_DEGREE");
    }

    #[test]
    fn best_count_examples() {
        let k3 = Graph::complete(3);
        let cyc = Orientation::from_arcs(&k3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(best_count(&cyc).unwrap(), BigUint::one());

        let bow = Graph::bowtie();
        let d = Orientation::from_arcs(&bow, &[(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)]).unwrap();
        assert_eq!(best_count(&d).unwrap(), BigUint::one());

        let k5 = Graph::complete(5);
        for d in eulerian_orientations(&k5).unwrap() {
            assert_eq!(best_count(&d).unwrap(), arborescence_count(&d, 0));
        }
    }

    #[test]
    fn best_count_rejects_unbalanced() {
        let k3 = Graph::complete(3);
        let d = Orientation::from_arcs(&k3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(best_count(&d).unwrap_err().code(), "NOT_EULERIAN");
    }

    #[test]
    fn small_exact_counts() {
        assert_eq!(count(&Graph::cycle(5)), 2);
        assert_eq!(count(&Graph::complete(3)), 2);
        assert_eq!(count(&Graph::bowtie()), 4);
        assert_eq!(count(&Graph::complete(5)), 264);
    }

    #[test]
    fn backtrack_examples() {
        assert_eq!(eul_backtrack(&Graph::cycle(4)).unwrap(), BigUint::from(2u32));
        assert_eq!(eul_backtrack(&Graph::complete(3)).unwrap(), BigUint::from(2u32));
        assert_eq!(
            eul_backtrack(&Graph::complete(5)).unwrap(),
            eul_exact(&Graph::complete(5)).unwrap().eul
        );
    }

    #[test]
    fn guards_fail_fast() {
        let k9 = Graph::complete(9);
        assert_eq!(eul_backtrack(&k9).unwrap_err().code(), "SIZE_GUARD");
        let k11 = Graph::complete(11);
        assert_eq!(eul_exact(&k11).unwrap_err().code(), "SIZE_GUARD");
    }

    #[test]
    fn root_choice_does_not_matter() {
        let g = Graph::complete(5);
        let a = eul_exact_with(&g, CountOptions { root: 0, threads: 1 }).unwrap();
        let b = eul_exact_with(&g, CountOptions { root: 4, threads: 1 }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn parallel_matches_serial() {
        let g = Graph::complete(7);
        let serial = eul_exact(&g).unwrap();
        let parallel = eul_exact_with(&g, CountOptions { root: 0, threads: 4 }).unwrap();
        assert_eq!(serial, parallel);
        assert_eq!(serial.orientation_count, BigUint::from(2640u32));
        assert_eq!(serial.eul, BigUint::from(129_976_320u64));
    }

    #[test]
    fn reversal_preserves_best_count() {
        let g = Graph::complete(5);
        for d in eulerian_orientations(&g).unwrap() {
            let r = d.reversal();
            assert!(r.is_eulerian());
            assert_eq!(best_count(&d).unwrap(), best_count(&r).unwrap());
        }
    }

    #[test]
    fn s_back_solve_is_positive() {
        let g = Graph::complete(5);
        let s = integral_s_from_count(&g, &BigUint::from(264u32));
        let expected = 264.0 * std::f64::consts::PI.powi(5) / 64.0;
        assert!((s / expected - 1.0).abs() < 1e-12);
    }
}
