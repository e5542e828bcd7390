#![allow(dead_code)]

use eulerian_core::Graph;

/// One representative per isomorphism class of connected simple graphs on
/// `n` vertices with every degree even and at least one edge.
pub fn even_connected_classes(n: usize) -> Vec<Graph> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let perms = permutations(n);
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for mask in 1u32..(1 << pairs.len()) {
        let edges: Vec<(usize, usize)> = (0..pairs.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| pairs[i])
            .collect();
        let mut deg = vec![0; n];
        for &(u, v) in &edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        if deg.iter().any(|d| d % 2 == 1 || *d == 0) {
            continue;
        }
        let g = Graph::new(n, edges.iter().copied()).unwrap();
        if !g.is_connected() {
            continue;
        }
        let canon = perms
            .iter()
            .map(|p| {
                let mut e: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| (p[u].min(p[v]), p[u].max(p[v]))).collect();
                e.sort_unstable();
                e
            })
            .min()
            .unwrap();
        if seen.insert(canon) {
            out.push(g);
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}
