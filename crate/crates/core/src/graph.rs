//! Simple undirected graphs: validation, edge-list I/O, derived graphs and
//! reproducible random even graphs.
//!
//! Vertices are 0-indexed internally and 1-indexed in edge-list files.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Retry budget for [`gen_even_graph`].
pub const GEN_MAX_RETRIES: u64 = 100;

/// Guard for the dense matrix routines.
pub const MAX_VERTICES: usize = 2000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    NoVertices,
    #[error("graph has {0} vertices, above the dense limit of {MAX_VERTICES}")]
    TooLarge(usize),
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("cannot delete every vertex of the graph")]
    EmptyResult,
    #[error("edge set is not a spanning tree: {0}")]
    NotSpanningTree(String),
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
    #[error("no connected even graph after {attempts} attempts (n={n}, p={p})")]
    GenerationFailed { n: usize, p: f64, attempts: u64 },
}

/// Edge-list parse failures. Line numbers are 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}: malformed input: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: vertex {vertex} out of range [1, {n}]")]
    VertexOutOfRange { line: usize, vertex: usize, n: usize },
    #[error("line {line}: self-loop at vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("line {line}: duplicate edge {u} {v}")]
    DuplicateEdge { line: usize, u: usize, v: usize },
    #[error("header announces {expected} edges but {found} were listed")]
    EdgeCountMismatch { expected: usize, found: usize },
    #[error("line 1: {0}")]
    InvalidGraph(GraphError),
}

impl GraphError {
    pub fn code(&self) -> &'static str {
        match self {
            GraphError::NoVertices => "NO_VERTICES",
            GraphError::TooLarge(_) => "SIZE_GUARD",
            GraphError::VertexOutOfRange { .. } => "VERTEX_OUT_OF_RANGE",
            GraphError::SelfLoop(_) => "SELF_LOOP",
            GraphError::DuplicateEdge(..) => "DUPLICATE_EDGE",
            GraphError::EmptyResult => "EMPTY_RESULT",
            GraphError::NotSpanningTree(_) => "NOT_SPANNING_TREE",
            GraphError::InvalidParameters(_) => "INVALID_PARAMETER",
            GraphError::GenerationFailed { .. } => "GENERATION_FAILED",
        }
    }
}

impl ParseError {
    pub fn code(&self) -> &'static str {
        match self {
            ParseError::Malformed { .. } => "PARSE_ERROR",
            ParseError::VertexOutOfRange { .. } => "VERTEX_OUT_OF_RANGE",
            ParseError::SelfLoop { .. } => "SELF_LOOP",
            ParseError::DuplicateEdge { .. } => "DUPLICATE_EDGE",
            ParseError::EdgeCountMismatch { .. } => "EDGE_COUNT_MISMATCH",
            ParseError::InvalidGraph(e) => e.code(),
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Malformed { line, .. }
            | ParseError::VertexOutOfRange { line, .. }
            | ParseError::SelfLoop { line, .. }
            | ParseError::DuplicateEdge { line, .. } => Some(*line),
            ParseError::EdgeCountMismatch { .. } => None,
            ParseError::InvalidGraph(_) => Some(1),
        }
    }
}

/// A simple undirected graph with cached degrees and adjacency lists.
///
/// Edges are stored as `(u, v)` with `u < v`, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    degrees: Vec<usize>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from 0-indexed edges, rejecting loops and duplicates.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::NoVertices);
        }
        if n > MAX_VERTICES {
            return Err(GraphError::TooLarge(n));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            for v in [a, b] {
                if v >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: v, n });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let e = (a.min(b), a.max(b));
            if !set.insert(e) {
                return Err(GraphError::DuplicateEdge(e.0, e.1));
            }
        }
        Ok(Self::from_sorted_unchecked(n, set.into_iter().collect()))
    }

    fn from_sorted_unchecked(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut degrees = vec![0; n];
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            degrees[u] += 1;
            degrees[v] += 1;
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Graph {
            n,
            edges,
            degrees,
            adjacency,
        }
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Self::new(n, edges).expect("complete graph is simple")
    }

    /// The cycle `0 - 1 - ... - (n-1) - 0`, `n >= 3`.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a simple cycle needs at least 3 vertices");
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle is simple")
    }

    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i))).expect("path is simple")
    }

    /// Star with centre 0 and `leaves` leaves.
    pub fn star(leaves: usize) -> Self {
        Self::new(leaves + 1, (1..=leaves).map(|i| (0, i))).expect("star is simple")
    }

    /// Two triangles sharing vertex 0.
    pub fn bowtie() -> Self {
        Self::new(5, [(0, 1), (1, 2), (0, 2), (0, 3), (3, 4), (0, 4)]).expect("bowtie is simple")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degrees[v]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Position of `{u, v}` in [`Graph::edges`].
    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.edges.binary_search(&(u.min(v), u.max(v))).ok()
    }

    pub fn min_degree(&self) -> usize {
        self.degrees.iter().copied().min().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.n
    }

    pub fn all_even(&self) -> bool {
        self.degrees.iter().all(|d| d % 2 == 0)
    }

    /// Serializes to the 1-indexed edge-list format with sorted edges.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n, self.edges.len());
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{} {}", u + 1, v + 1);
        }
        out
    }
}

/// Flags for conditions the counting and estimation code relies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphClassReport {
    pub is_simple: bool,
    pub is_connected: bool,
    pub all_even: bool,
}

pub fn classify(g: &Graph) -> GraphClassReport {
    let mut seen = BTreeSet::new();
    let is_simple = g
        .edges
        .iter()
        .all(|&(u, v)| u != v && seen.insert((u.min(v), u.max(v))));
    GraphClassReport {
        is_simple,
        is_connected: g.is_connected(),
        all_even: g.all_even(),
    }
}

/// Parses the edge-list format: a header `n m` followed by `m` lines `u v`
/// with 1-indexed vertices. Blank lines and `#` comments are skipped.
pub fn parse_graph(text: &str) -> Result<Graph, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (header_line, header) = lines.next().ok_or(ParseError::Malformed {
        line: 1,
        reason: "empty input, expected header \"n m\"".into(),
    })?;
    let (n, m) = parse_pair(header_line, header)?;
    if n == 0 || n > MAX_VERTICES {
        let err = if n == 0 {
            GraphError::NoVertices
        } else {
            GraphError::TooLarge(n)
        };
        return Err(ParseError::InvalidGraph(err));
    }

    let mut seen = BTreeSet::new();
    let mut edges = Vec::with_capacity(m);
    for (line, body) in lines {
        let (u, v) = parse_pair(line, body)?;
        for vertex in [u, v] {
            if vertex == 0 || vertex > n {
                return Err(ParseError::VertexOutOfRange { line, vertex, n });
            }
        }
        if u == v {
            return Err(ParseError::SelfLoop { line, vertex: u });
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(ParseError::DuplicateEdge { line, u, v });
        }
        edges.push((u - 1, v - 1));
    }
    if edges.len() != m {
        return Err(ParseError::EdgeCountMismatch {
            expected: m,
            found: edges.len(),
        });
    }
    Graph::new(n, edges).map_err(ParseError::InvalidGraph)
}

fn parse_pair(line: usize, body: &str) -> Result<(usize, usize), ParseError> {
    let fields: Vec<&str> = body.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(ParseError::Malformed {
            line,
            reason: format!("expected two integers, found {} fields", fields.len()),
        });
    }
    let parse = |s: &str| {
        s.parse::<usize>().map_err(|_| ParseError::Malformed {
            line,
            reason: format!("not a nonnegative integer: {s:?}"),
        })
    };
    Ok((parse(fields[0])?, parse(fields[1])?))
}

/// Induced subgraph on the vertices outside `removed`, re-indexed densely in
/// the original order.
pub fn delete_vertices(g: &Graph, removed: &[usize]) -> Result<Graph, GraphError> {
    let mut drop = vec![false; g.n];
    for &v in removed {
        if v >= g.n {
            return Err(GraphError::VertexOutOfRange { vertex: v, n: g.n });
        }
        drop[v] = true;
    }
    let mut new_index = vec![usize::MAX; g.n];
    let mut next = 0;
    for v in 0..g.n {
        if !drop[v] {
            new_index[v] = next;
            next += 1;
        }
    }
    if next == 0 {
        return Err(GraphError::EmptyResult);
    }
    let edges = g
        .edges
        .iter()
        .filter(|&&(u, v)| !drop[u] && !drop[v])
        .map(|&(u, v)| (new_index[u], new_index[v]))
        .collect();
    Ok(Graph::from_sorted_unchecked(next, edges))
}

/// Checks that `tree` is a spanning tree of `g`; returns its edges normalized
/// to `(min, max)` order.
pub fn check_spanning_tree(g: &Graph, tree: &[(usize, usize)]) -> Result<Vec<(usize, usize)>, GraphError> {
    if tree.len() + 1 != g.n {
        return Err(GraphError::NotSpanningTree(format!(
            "{} edges given, {} needed",
            tree.len(),
            g.n - 1
        )));
    }
    let mut dsu = DisjointSets::new(g.n);
    let mut normalized = Vec::with_capacity(tree.len());
    for &(a, b) in tree {
        if !g.has_edge(a, b) {
            return Err(GraphError::NotSpanningTree(format!(
                "{{{a}, {b}}} is not an edge of the graph"
            )));
        }
        if !dsu.union(a, b) {
            return Err(GraphError::NotSpanningTree(format!("{{{a}, {b}}} closes a cycle")));
        }
        normalized.push((a.min(b), a.max(b)));
    }
    Ok(normalized)
}

/// The graph on the same vertex set with the edges of a spanning tree removed.
/// Vertices left without edges are kept.
pub fn delete_tree_edges(g: &Graph, tree: &[(usize, usize)]) -> Result<Graph, GraphError> {
    let tree: BTreeSet<_> = check_spanning_tree(g, tree)?.into_iter().collect();
    let edges = g.edges.iter().copied().filter(|e| !tree.contains(e)).collect();
    Ok(Graph::from_sorted_unchecked(g.n, edges))
}

/// Reproducible random connected graph with all degrees even.
///
/// Each attempt draws G(n, p), then fixes parity by pairing the odd-degree
/// vertices in a random order and toggling the edge between each pair (a
/// path of length one in K_n). Disconnected results are retried on a fresh
/// ChaCha stream, up to [`GEN_MAX_RETRIES`] attempts.
pub fn gen_even_graph(n: usize, p: f64, seed: u64) -> Result<Graph, GraphError> {
    if n < 3 {
        return Err(GraphError::InvalidParameters(format!("n = {n}, need n >= 3")));
    }
    if n > MAX_VERTICES {
        return Err(GraphError::TooLarge(n));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(GraphError::InvalidParameters(format!("p = {p}, need 0 < p <= 1")));
    }
    for attempt in 0..GEN_MAX_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        let mut present = vec![vec![false; n]; n];
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen::<f64>() < p {
                    present[u][v] = true;
                    present[v][u] = true;
                }
            }
        }
        let mut odd: Vec<usize> = (0..n)
            .filter(|&v| present[v].iter().filter(|&&b| b).count() % 2 == 1)
            .collect();
        odd.shuffle(&mut rng);
        for pair in odd.chunks_exact(2) {
            let (a, b) = (pair[0], pair[1]);
            present[a][b] = !present[a][b];
            present[b][a] = !present[b][a];
        }
        let edges: Vec<_> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&(u, v)| present[u][v])
            .collect();
        let g = Graph::from_sorted_unchecked(n, edges);
        debug_assert!(g.all_even());
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(GraphError::GenerationFailed {
        n,
        p,
        attempts: GEN_MAX_RETRIES,
    })
}

/// Uniform random spanning tree of a connected graph (Aldous-Broder walk).
pub fn random_spanning_tree<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> Option<Vec<(usize, usize)>> {
    if !g.is_connected() {
        return None;
    }
    let mut visited = vec![false; g.n];
    let mut current = rng.gen_range(0..g.n);
    visited[current] = true;
    let mut remaining = g.n - 1;
    let mut tree = Vec::with_capacity(g.n - 1);
    while remaining > 0 {
        let next = *g.adjacency[current].choose(rng)?;
        if !visited[next] {
            visited[next] = true;
            remaining -= 1;
            tree.push((current.min(next), current.max(next)));
        }
        current = next;
    }
    tree.sort_unstable();
    Some(tree)
}

/// Calls `visit` with the sorted edge list of every spanning tree of `g`.
pub fn for_each_spanning_tree(g: &Graph, mut visit: impl FnMut(&[(usize, usize)])) {
    if !g.is_connected() {
        return;
    }
    if g.n == 1 {
        visit(&[]);
        return;
    }
    let mut chosen = Vec::with_capacity(g.n - 1);
    let mut components: Vec<usize> = (0..g.n).collect();
    tree_search(g, 0, &mut components, &mut chosen, &mut visit);
}

fn tree_search(
    g: &Graph,
    next_edge: usize,
    components: &mut Vec<usize>,
    chosen: &mut Vec<(usize, usize)>,
    visit: &mut impl FnMut(&[(usize, usize)]),
) {
    let needed = g.n - 1 - chosen.len();
    if needed == 0 {
        visit(chosen);
        return;
    }
    if g.edges.len() - next_edge < needed {
        return;
    }
    let (u, v) = g.edges[next_edge];
    let (cu, cv) = (components[u], components[v]);
    if cu != cv {
        let saved = components.clone();
        for c in components.iter_mut() {
            if *c == cv {
                *c = cu;
            }
        }
        chosen.push((u, v));
        tree_search(g, next_edge + 1, components, chosen, visit);
        chosen.pop();
        *components = saved;
    }
    tree_search(g, next_edge + 1, components, chosen, visit);
}

pub(crate) struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[rb] = ra;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_triangle() {
        let g = parse_graph("3 3\n1 2\n2 3\n1 3").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.degrees(), &[2, 2, 2]);
    }

    #[test]
    fn parses_k4() {
        let g = parse_graph("4 6\n1 2\n1 3\n1 4\n2 3\n2 4\n3 4").unwrap();
        assert_eq!(g, Graph::complete(4));
        assert_eq!(g.degrees(), &[3, 3, 3, 3]);
    }

    #[test]
    fn parse_errors_name_their_line() {
        assert_eq!(
            parse_graph("2 1\n1 1"),
            Err(ParseError::SelfLoop { line: 2, vertex: 1 })
        );
        assert_eq!(
            parse_graph("3 2\n1 2\n2 1"),
            Err(ParseError::DuplicateEdge { line: 3, u: 2, v: 1 })
        );
        assert_eq!(
            parse_graph("3 1\n1 4"),
            Err(ParseError::VertexOutOfRange {
                line: 2,
                vertex: 4,
                n: 3
            })
        );
        assert!(matches!(
            parse_graph("3 1\n1 x"),
            Err(ParseError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            parse_graph("3 1\n1 2 3"),
            Err(ParseError::Malformed { line: 2, .. })
        ));
        assert_eq!(
            parse_graph("3 2\n1 2"),
            Err(ParseError::EdgeCountMismatch { expected: 2, found: 1 })
        );
        assert!(matches!(parse_graph(""), Err(ParseError::Malformed { line: 1, .. })));
        assert!(matches!(parse_graph("0 0"), Err(ParseError::InvalidGraph(_))));
    }

    #[test]
    fn vertex_zero_is_out_of_range() {
        assert_eq!(
            parse_graph("2 1\n0 1"),
            Err(ParseError::VertexOutOfRange {
                line: 2,
                vertex: 0,
                n: 2
            })
        );
    }

    #[test]
    fn classify_examples() {
        let k5 = classify(&Graph::complete(5));
        assert!(k5.is_simple && k5.is_connected && k5.all_even);
        let k4 = classify(&Graph::complete(4));
        assert!(k4.is_simple && k4.is_connected && !k4.all_even);
        let two = Graph::new(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let r = classify(&two);
        assert!(r.is_simple && !r.is_connected && r.all_even);
    }

    #[test]
    fn delete_vertices_examples() {
        assert_eq!(delete_vertices(&Graph::complete(5), &[0]).unwrap(), Graph::complete(4));
        let single = delete_vertices(&Graph::complete(3), &[0, 1]).unwrap();
        assert_eq!(single.n(), 1);
        assert_eq!(single.edge_count(), 0);
        let split = delete_vertices(&Graph::bowtie(), &[0]).unwrap();
        assert_eq!(split.n(), 4);
        assert_eq!(split.edges(), &[(0, 1), (2, 3)]);
        assert_eq!(
            delete_vertices(&Graph::complete(3), &[0, 1, 2]),
            Err(GraphError::EmptyResult)
        );
        assert!(delete_vertices(&Graph::complete(3), &[5]).is_err());
    }

    #[test]
    fn delete_tree_edges_examples() {
        let k4 = Graph::complete(4);
        let gt = delete_tree_edges(&k4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(gt.degrees(), &[0, 2, 2, 2]);
        assert_eq!(gt.edges(), &[(1, 2), (1, 3), (2, 3)]);

        let gt = delete_tree_edges(&Graph::complete(3), &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(gt.edges(), &[(0, 2)]);

        let c4 = Graph::cycle(4);
        let gt = delete_tree_edges(&c4, &[(1, 2), (2, 3), (0, 3)]).unwrap();
        assert_eq!(gt.edge_count(), 1);
        assert_eq!(gt.n(), 4);
    }

    #[test]
    fn delete_tree_edges_rejects_non_trees() {
        let k4 = Graph::complete(4);
        assert!(delete_tree_edges(&k4, &[(0, 1), (1, 2)]).is_err());
        assert!(delete_tree_edges(&k4, &[(0, 1), (1, 2), (0, 2)]).is_err());
        let c4 = Graph::cycle(4);
        assert!(delete_tree_edges(&c4, &[(0, 2), (1, 2), (2, 3)]).is_err());
    }

    #[test]
    fn generator_examples() {
        for seed in [0, 1, 99] {
            assert_eq!(gen_even_graph(5, 1.0, seed).unwrap(), Graph::complete(5));
            let k4 = gen_even_graph(4, 1.0, seed).unwrap();
            assert!(k4.all_even() && k4.is_connected());
            assert_eq!(k4.edge_count(), 4);
        }
        let g = gen_even_graph(6, 0.9, 1).unwrap();
        let r = classify(&g);
        assert!(r.is_simple && r.is_connected && r.all_even);
        assert_eq!(g, gen_even_graph(6, 0.9, 1).unwrap());
    }

    #[test]
    fn generator_rejects_bad_parameters() {
        assert!(matches!(
            gen_even_graph(2, 0.5, 0),
            Err(GraphError::InvalidParameters(_))
        ));
        assert!(matches!(
            gen_even_graph(5, 0.0, 0),
            Err(GraphError::InvalidParameters(_))
        ));
        assert!(matches!(
            gen_even_graph(5, 1.5, 0),
            Err(GraphError::InvalidParameters(_))
        ));
    }

    #[test]
    fn generator_reports_exhausted_budget() {
        // At this density on 40 vertices nearly every draw is disconnected.
        let r = gen_even_graph(40, 0.001, 3);
        assert!(matches!(r, Err(GraphError::GenerationFailed { .. })), "{r:?}");
    }

    #[test]
    fn spanning_tree_enumeration_counts() {
        let mut count = 0;
        for_each_spanning_tree(&Graph::complete(5), |t| {
            assert_eq!(t.len(), 4);
            count += 1;
        });
        assert_eq!(count, 125);
        let mut count = 0;
        for_each_spanning_tree(&Graph::cycle(6), |_| count += 1);
        assert_eq!(count, 6);
    }

    #[test]
    fn random_spanning_tree_is_a_tree() {
        let g = Graph::complete(7);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let t = random_spanning_tree(&g, &mut rng).unwrap();
            assert!(check_spanning_tree(&g, &t).is_ok());
        }
    }
}
