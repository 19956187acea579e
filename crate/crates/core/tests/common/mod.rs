#![allow(dead_code)]

use curvlab::MetricSpace;
use proptest::prelude::*;

/// Connected graph on `n` points: a random spanning tree plus extra edges,
/// with integer weights in `1..=max_weight`.
#[derive(Debug, Clone)]
pub struct SmallGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize, i64)>,
}

impl SmallGraph {
    pub fn space(&self) -> MetricSpace {
        let text: String = self.edges.iter().map(|(u, v, w)| format!("{u} {v} {w}\n")).collect();
        curvlab::metric::parse_space(&text, curvlab::InputFormat::EdgeList).unwrap()
    }

    /// Floyd–Warshall distances.
    pub fn distances(&self) -> Vec<Vec<i64>> {
        let inf = i64::MAX / 4;
        let mut d = vec![vec![inf; self.n]; self.n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0;
        }
        for &(u, v, w) in &self.edges {
            d[u][v] = d[u][v].min(w);
            d[v][u] = d[v][u].min(w);
        }
        for k in 0..self.n {
            for i in 0..self.n {
                for j in 0..self.n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        d
    }

    pub fn adjacency(&self) -> Vec<Vec<(usize, i64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v, w) in &self.edges {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        adj
    }
}

pub fn small_graph(max_n: usize, max_weight: i64) -> impl Strategy<Value = SmallGraph> {
    (3..=max_n)
        .prop_flat_map(move |n| {
            let parents: Vec<_> = (1..n).map(|i| 0..i).collect();
            let extra = proptest::collection::vec((0..n, 0..n), 0..=n);
            let weights = proptest::collection::vec(1..=max_weight, 2 * n);
            (Just(n), parents, extra, weights)
        })
        .prop_map(|(n, parents, extra, weights)| {
            let mut edges = Vec::new();
            let mut w = weights.into_iter().cycle();
            for (i, p) in parents.into_iter().enumerate() {
                edges.push((p, i + 1, w.next().unwrap()));
            }
            for (a, b) in extra {
                if a != b && !edges.iter().any(|&(u, v, _)| (u, v) == (a, b) || (u, v) == (b, a)) {
                    edges.push((a, b, w.next().unwrap()));
                }
            }
            SmallGraph { n, edges }
        })
}

/// All geodesics from `a` to `b` as vertex sequences, by brute-force search.
pub fn all_geodesics(g: &SmallGraph, d: &[Vec<i64>], a: usize, b: usize) -> Vec<Vec<usize>> {
    let adj = g.adjacency();
    let mut out = Vec::new();
    let mut stack = vec![vec![a]];
    while let Some(path) = stack.pop() {
        let last = *path.last().unwrap();
        if last == b {
            out.push(path);
            continue;
        }
        for &(w, wt) in &adj[last] {
            if d[a][last] + wt == d[a][w] && d[a][w] + d[w][b] == d[a][b] && !path.contains(&w) {
                let mut next = path.clone();
                next.push(w);
                stack.push(next);
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

pub fn cycle(n: u64) -> MetricSpace {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    MetricSpace::from_unit_edges(&edges).unwrap()
}

pub fn path(n: u64) -> MetricSpace {
    let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
    MetricSpace::from_unit_edges(&edges).unwrap()
}
