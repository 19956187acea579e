//! Finite metric spaces, shortest paths and geodesic enumeration.
//!
//! A [`MetricSpace`] stores every pairwise distance as an integer multiple of
//! a common unit `1/unit`, so all comparisons downstream are exact integer
//! comparisons. Points are addressed by dense indices `0..len()`; index order
//! coincides with the order of the point labels, which makes "smallest
//! identifier" tie-breaks a plain index comparison.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::rational::{parse_rational, ParseRationalError, Rational};

/// Default cap on the number of geodesics enumerated between two points.
pub const DEFAULT_GEODESIC_CAP: usize = 1_000_000;

/// Identifier of a point.
///
/// Input points carry nonnegative integer ids. Subdivision creates points
/// named `(u,v,i)`: the `i`-th interior point of the edge `u`–`v`, `u < v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointLabel {
    Id(u64),
    Sub(Box<PointLabel>, Box<PointLabel>, u32),
}

impl PointLabel {
    pub fn is_original(&self) -> bool {
        matches!(self, PointLabel::Id(_))
    }
}

impl fmt::Display for PointLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointLabel::Id(id) => write!(f, "{id}"),
            PointLabel::Sub(u, v, i) => write!(f, "({u},{v},{i})"),
        }
    }
}

impl Serialize for PointLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            PointLabel::Id(id) => s.serialize_u64(*id),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl FromStr for PointLabel {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MetricError::UnknownPoint(s.to_string());
        let (label, rest) = parse_label(s.trim()).ok_or_else(bad)?;
        if rest.trim().is_empty() {
            Ok(label)
        } else {
            Err(bad())
        }
    }
}

fn parse_label(s: &str) -> Option<(PointLabel, &str)> {
    let s = s.trim_start();
    if let Some(rest) = s.strip_prefix('(') {
        let (u, rest) = parse_label(rest)?;
        let rest = rest.trim_start().strip_prefix(',')?;
        let (v, rest) = parse_label(rest)?;
        let rest = rest.trim_start().strip_prefix(',')?.trim_start();
        let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        let i: u32 = rest[..end].parse().ok()?;
        let rest = rest[end..].trim_start().strip_prefix(')')?;
        Some((PointLabel::Sub(Box::new(u), Box::new(v), i), rest))
    } else {
        let end = s.find(|c: char| !c.is_ascii_digit()).unwrap_or(s.len());
        let id: u64 = s[..end].parse().ok()?;
        Some((PointLabel::Id(id), &s[end..]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Graph,
    Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    EdgeList,
    Matrix,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "edgelist" => Ok(InputFormat::EdgeList),
            "matrix" => Ok(InputFormat::Matrix),
            other => Err(format!("unknown format `{other}` (expected edgelist|matrix)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("cannot read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("space has no points")]
    Empty,
    #[error("graph is disconnected: no path between {0} and {1}")]
    Disconnected(PointLabel, PointLabel),
    #[error("matrix is not symmetric at ({0}, {1})")]
    Asymmetric(PointLabel, PointLabel),
    #[error("matrix diagonal entry for {0} is not zero")]
    NonzeroDiagonal(PointLabel),
    #[error("distinct points {0} and {1} are at distance zero")]
    ZeroDistance(PointLabel, PointLabel),
    #[error("triangle violation ({0},{1},{2}): d({0},{2}) > d({0},{1}) + d({1},{2})")]
    TriangleViolation(PointLabel, PointLabel, PointLabel),
    #[error("distances overflow the 64-bit exact representation")]
    Overflow,
    #[error("operation needs a graph-derived space (this one comes from a distance matrix)")]
    NotAGraph,
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
}

/// An undirected edge of a graph-derived space, weight in raw units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: i64,
}

/// Per-center orderings used by ball scans.
#[derive(Debug)]
struct SortedRows {
    /// `order[c]`: all points sorted by `(dist(c, p), p)`.
    order: Vec<Vec<usize>>,
    /// `realized[c]`: distinct distances from `c`, ascending (always starts at 0).
    realized: Vec<Vec<i64>>,
}

/// A finite metric space with exact distances.
#[derive(Debug)]
pub struct MetricSpace {
    labels: Vec<PointLabel>,
    lookup: HashMap<PointLabel, usize>,
    unit: i64,
    dist: Vec<i64>,
    adj: Vec<Vec<(usize, i64)>>,
    edges: Vec<Edge>,
    origin: Origin,
    slack: i64,
    rows: OnceLock<SortedRows>,
}

impl Clone for MetricSpace {
    fn clone(&self) -> Self {
        MetricSpace {
            labels: self.labels.clone(),
            lookup: self.lookup.clone(),
            unit: self.unit,
            dist: self.dist.clone(),
            adj: self.adj.clone(),
            edges: self.edges.clone(),
            origin: self.origin,
            slack: self.slack,
            rows: OnceLock::new(),
        }
    }
}

impl MetricSpace {
    /// Builds the shortest-path metric of an undirected weighted graph.
    ///
    /// Duplicate edges keep the minimum weight. Weights must be positive and
    /// the graph connected.
    pub fn from_weighted_edges(edges: &[(PointLabel, PointLabel, Rational)]) -> Result<Self, MetricError> {
        if edges.is_empty() {
            return Err(MetricError::Empty);
        }
        let mut unit: i64 = 1;
        for (_, _, w) in edges {
            unit = unit.lcm(w.denom());
            if unit > i64::MAX / 1024 {
                return Err(MetricError::Overflow);
            }
        }
        let mut labels: Vec<PointLabel> = edges.iter().flat_map(|(u, v, _)| [u.clone(), v.clone()]).collect();
        labels.sort();
        labels.dedup();
        let lookup: HashMap<PointLabel, usize> = labels.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
        let mut raw_edges = Vec::with_capacity(edges.len());
        for (u, v, w) in edges {
            let raw = w.numer().checked_mul(unit / w.denom()).ok_or(MetricError::Overflow)?;
            raw_edges.push((lookup[u], lookup[v], raw));
        }
        Self::from_raw_graph(labels, unit, raw_edges)
    }

    /// Unit-weight graph on integer point ids.
    pub fn from_unit_edges(edges: &[(u64, u64)]) -> Result<Self, MetricError> {
        let weighted: Vec<_> = edges
            .iter()
            .map(|&(u, v)| (PointLabel::Id(u), PointLabel::Id(v), Rational::from_integer(1)))
            .collect();
        Self::from_weighted_edges(&weighted)
    }

    /// Core constructor: labels in any order, edges by position in `labels`,
    /// weights as integer multiples of `1/unit`.
    fn from_raw_graph(
        labels: Vec<PointLabel>,
        unit: i64,
        raw_edges: Vec<(usize, usize, i64)>,
    ) -> Result<Self, MetricError> {
        let n = labels.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        // Re-index so that index order is label order.
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by(|&a, &b| labels[a].cmp(&labels[b]));
        let mut new_index = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            new_index[old] = new;
        }
        let mut labels_sorted: Vec<PointLabel> = Vec::with_capacity(n);
        let mut labels = labels.into_iter().map(Some).collect::<Vec<_>>();
        for &old in &perm {
            labels_sorted.push(labels[old].take().expect("each label moved once"));
        }

        let mut best: HashMap<(usize, usize), i64> = HashMap::new();
        let mut total: i64 = 0;
        for (u, v, w) in raw_edges {
            if w <= 0 {
                return Err(MetricError::Parse {
                    line: 0,
                    message: "edge weights must be positive".into(),
                });
            }
            let (a, b) = {
                let (a, b) = (new_index[u], new_index[v]);
                if a < b {
                    (a, b)
                } else {
                    (b, a)
                }
            };
            if a == b {
                continue;
            }
            let entry = best.entry((a, b)).or_insert(w);
            *entry = (*entry).min(w);
        }
        let mut edge_list: Vec<Edge> = best.into_iter().map(|((u, v), weight)| Edge { u, v, weight }).collect();
        edge_list.sort_by_key(|e| (e.u, e.v));

        // Shrink the unit when all weights share a factor with it.
        let mut g = unit;
        for e in &edge_list {
            g = g.gcd(&e.weight);
        }
        let unit = unit / g;
        for e in &mut edge_list {
            e.weight /= g;
            total = total.checked_add(e.weight).ok_or(MetricError::Overflow)?;
        }
        if total > i64::MAX / 8 {
            return Err(MetricError::Overflow);
        }

        let mut adj = vec![Vec::new(); n];
        for e in &edge_list {
            adj[e.u].push((e.v, e.weight));
            adj[e.v].push((e.u, e.weight));
        }
        for row in &mut adj {
            row.sort_unstable();
        }

        let rows: Vec<Vec<i64>> = (0..n).into_par_iter().map(|s| dijkstra(&adj, s, |_| true)).collect();
        let mut dist = Vec::with_capacity(n * n);
        for (s, row) in rows.into_iter().enumerate() {
            if let Some(t) = row.iter().position(|&d| d == i64::MAX) {
                return Err(MetricError::Disconnected(
                    labels_sorted[s].clone(),
                    labels_sorted[t].clone(),
                ));
            }
            dist.extend(row);
        }

        let lookup = labels_sorted.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
        let slack = tight_edge_max(&adj, &dist, n);
        Ok(MetricSpace {
            labels: labels_sorted,
            lookup,
            unit,
            dist,
            adj,
            edges: edge_list,
            origin: Origin::Graph,
            slack,
            rows: OnceLock::new(),
        })
    }

    /// Builds a space from an explicit distance matrix.
    ///
    /// Geodesics in such a space run along the "betweenness-free" pairs: `p`
    /// and `q` are adjacent when no third point lies exactly between them.
    pub fn from_matrix(labels: Vec<PointLabel>, entries: Vec<Vec<Rational>>) -> Result<Self, MetricError> {
        let n = labels.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        let mut unit: i64 = 1;
        for row in &entries {
            for w in row {
                unit = unit.lcm(w.denom());
                if unit > i64::MAX / 1024 {
                    return Err(MetricError::Overflow);
                }
            }
        }
        // Sort points by label; keep the matrix aligned.
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by(|&a, &b| labels[a].cmp(&labels[b]));
        let labels: Vec<PointLabel> = perm.iter().map(|&i| labels[i].clone()).collect();
        for w in labels.windows(2) {
            if w[0] == w[1] {
                return Err(MetricError::Parse {
                    line: 1,
                    message: format!("duplicate point id {}", w[0]),
                });
            }
        }
        let mut dist = vec![0i64; n * n];
        for (i, &pi) in perm.iter().enumerate() {
            for (j, &pj) in perm.iter().enumerate() {
                let w = entries[pi][pj];
                dist[i * n + j] = w.numer().checked_mul(unit / w.denom()).ok_or(MetricError::Overflow)?;
            }
        }
        for i in 0..n {
            if dist[i * n + i] != 0 {
                return Err(MetricError::NonzeroDiagonal(labels[i].clone()));
            }
            for j in (i + 1)..n {
                if dist[i * n + j] != dist[j * n + i] {
                    return Err(MetricError::Asymmetric(labels[i].clone(), labels[j].clone()));
                }
                if dist[i * n + j] <= 0 {
                    return Err(MetricError::ZeroDistance(labels[i].clone(), labels[j].clone()));
                }
            }
        }
        let max = dist.iter().copied().max().unwrap_or(0);
        if max > i64::MAX / 8 {
            return Err(MetricError::Overflow);
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if dist[i * n + j] > dist[i * n + k] + dist[k * n + j] {
                        return Err(MetricError::TriangleViolation(
                            labels[i].clone(),
                            labels[k].clone(),
                            labels[j].clone(),
                        ));
                    }
                }
            }
        }
        let mut g = unit;
        for &d in &dist {
            g = g.gcd(&d);
        }
        let unit = unit / g.max(1);
        for d in &mut dist {
            *d /= g.max(1);
        }

        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = dist[i * n + j];
                let between = (0..n).any(|k| k != i && k != j && dist[i * n + k] + dist[k * n + j] == d);
                if !between {
                    adj[i].push((j, d));
                    adj[j].push((i, d));
                }
            }
        }
        for row in &mut adj {
            row.sort_unstable();
        }
        let lookup = labels.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
        let slack = tight_edge_max(&adj, &dist, n);
        Ok(MetricSpace {
            labels,
            lookup,
            unit,
            dist,
            adj,
            edges: Vec::new(),
            origin: Origin::Matrix,
            slack,
            rows: OnceLock::new(),
        })
    }

    /// Replaces every edge of weight `w` by `k+1` edges of weight `w/(k+1)`.
    ///
    /// Original points keep their labels; the `i`-th new point on edge `u`–`v`
    /// is labelled `(u,v,i)` counting from `u`.
    pub fn subdivide(&self, k: u32) -> Result<MetricSpace, MetricError> {
        if self.origin != Origin::Graph {
            return Err(MetricError::NotAGraph);
        }
        if k == 0 {
            return Ok(self.clone());
        }
        let parts = i64::from(k) + 1;
        let unit = self.unit.checked_mul(parts).ok_or(MetricError::Overflow)?;
        let mut labels = self.labels.clone();
        let mut raw_edges = Vec::with_capacity(self.edges.len() * (k as usize + 1));
        for e in &self.edges {
            let (lu, lv) = (&self.labels[e.u], &self.labels[e.v]);
            let mut prev = e.u;
            for i in 1..=k {
                let idx = labels.len();
                labels.push(PointLabel::Sub(Box::new(lu.clone()), Box::new(lv.clone()), i));
                raw_edges.push((prev, idx, e.weight));
                prev = idx;
            }
            raw_edges.push((prev, e.v, e.weight));
        }
        Self::from_raw_graph(labels, unit, raw_edges)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    /// Distances are stored as integer multiples of `1 / unit()`.
    pub fn unit(&self) -> i64 {
        self.unit
    }

    pub fn labels(&self) -> &[PointLabel] {
        &self.labels
    }

    pub fn label(&self, p: usize) -> &PointLabel {
        &self.labels[p]
    }

    pub fn index_of(&self, label: &PointLabel) -> Option<usize> {
        self.lookup.get(label).copied()
    }

    /// Resolves a textual point id such as `3` or `(0,1,1)`.
    pub fn resolve(&self, text: &str) -> Result<usize, MetricError> {
        let label: PointLabel = text.parse()?;
        self.index_of(&label)
            .ok_or_else(|| MetricError::UnknownPoint(text.to_string()))
    }

    /// Input edges (graph-derived spaces only), deduplicated.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbours along which geodesics may travel, sorted by index.
    pub fn neighbors(&self, p: usize) -> &[(usize, i64)] {
        &self.adj[p]
    }

    #[inline]
    pub fn raw(&self, p: usize, q: usize) -> i64 {
        self.dist[p * self.labels.len() + q]
    }

    pub fn dist(&self, p: usize, q: usize) -> Rational {
        self.to_rational(self.raw(p, q))
    }

    pub fn to_rational(&self, raw: i64) -> Rational {
        Rational::new(raw, self.unit)
    }

    /// Largest weight among edges that are themselves shortest paths; this
    /// bounds how far a point of the geodesic realization can be from a
    /// point of the space.
    pub fn slack(&self) -> Rational {
        self.to_rational(self.slack)
    }

    pub fn slack_raw(&self) -> i64 {
        self.slack
    }

    pub fn diameter_raw(&self) -> i64 {
        self.dist.iter().copied().max().unwrap_or(0)
    }

    pub fn diameter(&self) -> Rational {
        self.to_rational(self.diameter_raw())
    }

    /// Points sorted by distance from `c` (ties by index).
    pub fn order_from(&self, c: usize) -> &[usize] {
        &self.sorted_rows().order[c]
    }

    /// Distinct distances realized from `c`, ascending.
    pub fn realized_from(&self, c: usize) -> &[i64] {
        &self.sorted_rows().realized[c]
    }

    fn sorted_rows(&self) -> &SortedRows {
        self.rows.get_or_init(|| {
            let n = self.len();
            let (order, realized) = (0..n)
                .into_par_iter()
                .map(|c| {
                    let mut order: Vec<usize> = (0..n).collect();
                    order.sort_by_key(|&p| (self.raw(c, p), p));
                    let mut realized: Vec<i64> = order.iter().map(|&p| self.raw(c, p)).collect();
                    realized.dedup();
                    (order, realized)
                })
                .unzip();
            SortedRows { order, realized }
        })
    }

    /// Whether `p` lies on some geodesic from `x` to `y`.
    #[inline]
    pub fn between(&self, x: usize, p: usize, y: usize) -> bool {
        self.raw(x, p) + self.raw(p, y) == self.raw(x, y)
    }

    /// All points lying on some geodesic from `x` to `y`, ascending.
    pub fn interval(&self, x: usize, y: usize) -> Vec<usize> {
        (0..self.len()).filter(|&p| self.between(x, p, y)).collect()
    }

    /// Next waypoints after `v` on geodesics from `x` to `y`.
    pub fn geodesic_successors(&self, x: usize, y: usize, v: usize) -> impl Iterator<Item = (usize, i64)> + '_ {
        let dxv = self.raw(x, v);
        let dxy = self.raw(x, y);
        self.adj[v]
            .iter()
            .copied()
            .filter(move |&(w, wt)| dxv + wt + self.raw(w, y) == dxy)
    }

    /// Neighbours `w` of `v` with `d(x,w) = d(x,v) + wt(v,w)`.
    pub fn forward_successors(&self, x: usize, v: usize) -> impl Iterator<Item = (usize, i64)> + '_ {
        let dxv = self.raw(x, v);
        self.adj[v]
            .iter()
            .copied()
            .filter(move |&(w, wt)| dxv + wt == self.raw(x, w))
    }

    /// All shortest paths from `x` to `y` in lexicographic waypoint order.
    ///
    /// At most `cap` paths are returned; `truncated` records whether more exist.
    pub fn enumerate_geodesics(&self, x: usize, y: usize, cap: usize) -> GeodesicSet {
        let mut out = GeodesicSet::default();
        let mut path = vec![x];
        let mut arc = vec![0i64];
        self.dfs_geodesics(x, y, &mut path, &mut arc, cap, &mut out);
        out
    }

    fn dfs_geodesics(
        &self,
        x: usize,
        y: usize,
        path: &mut Vec<usize>,
        arc: &mut Vec<i64>,
        cap: usize,
        out: &mut GeodesicSet,
    ) {
        if out.truncated {
            return;
        }
        let v = *path.last().expect("path starts at x");
        if v == y {
            if out.paths.len() == cap {
                out.truncated = true;
            } else {
                out.paths.push(GeodesicPath {
                    waypoints: path.clone(),
                    arc: arc.clone(),
                    unit: self.unit,
                });
            }
            return;
        }
        let here = *arc.last().expect("arc starts at 0");
        let next: Vec<(usize, i64)> = self.geodesic_successors(x, y, v).collect();
        for (w, wt) in next {
            path.push(w);
            arc.push(here + wt);
            self.dfs_geodesics(x, y, path, arc, cap, out);
            path.pop();
            arc.pop();
        }
    }

    /// The lexicographically least geodesic from `x` to `y`.
    pub fn first_geodesic(&self, x: usize, y: usize) -> GeodesicPath {
        let mut waypoints = vec![x];
        let mut arc = vec![0i64];
        let mut v = x;
        while v != y {
            let (w, wt) = self
                .geodesic_successors(x, y, v)
                .next()
                .expect("connected space has a next waypoint");
            waypoints.push(w);
            arc.push(arc.last().copied().unwrap_or(0) + wt);
            v = w;
        }
        GeodesicPath {
            waypoints,
            arc,
            unit: self.unit,
        }
    }

    /// Geodesics from `e` that cannot be prolonged as geodesics from `e`.
    ///
    /// Every geodesic starting at `e` is a prefix of one of these.
    pub fn maximal_geodesics_from(&self, e: usize, cap: usize) -> GeodesicSet {
        let mut out = GeodesicSet::default();
        let mut path = vec![e];
        let mut arc = vec![0i64];
        self.dfs_maximal(e, &mut path, &mut arc, cap, &mut out);
        out
    }

    fn dfs_maximal(&self, e: usize, path: &mut Vec<usize>, arc: &mut Vec<i64>, cap: usize, out: &mut GeodesicSet) {
        if out.truncated {
            return;
        }
        let v = *path.last().expect("nonempty");
        let next: Vec<(usize, i64)> = self.forward_successors(e, v).collect();
        if next.is_empty() {
            if out.paths.len() == cap {
                out.truncated = true;
            } else {
                out.paths.push(GeodesicPath {
                    waypoints: path.clone(),
                    arc: arc.clone(),
                    unit: self.unit,
                });
            }
            return;
        }
        let here = *arc.last().expect("nonempty");
        for (w, wt) in next {
            path.push(w);
            arc.push(here + wt);
            self.dfs_maximal(e, path, arc, cap, out);
            path.pop();
            arc.pop();
        }
    }

    /// When every geodesic edge has the same weight `1/m`, returns
    /// `(raw edge weight, m)`; integer times along geodesics then always land
    /// on waypoints.
    pub fn unit_step(&self) -> Option<(i64, i64)> {
        let mut weight = None;
        for row in &self.adj {
            for &(_, w) in row {
                match weight {
                    None => weight = Some(w),
                    Some(prev) if prev != w => return None,
                    _ => {}
                }
            }
        }
        let w = weight?;
        if self.unit % w == 0 {
            Some((w, self.unit / w))
        } else {
            None
        }
    }

    /// Shortest-path distances from `source` through points accepted by
    /// `keep` only (`i64::MAX` when unreachable).
    pub fn restricted_distances(&self, source: usize, keep: impl Fn(usize) -> bool) -> Vec<i64> {
        dijkstra(&self.adj, source, keep)
    }
}

fn tight_edge_max(adj: &[Vec<(usize, i64)>], dist: &[i64], n: usize) -> i64 {
    let mut best = 0;
    for (u, row) in adj.iter().enumerate() {
        for &(v, w) in row {
            if dist[u * n + v] == w {
                best = best.max(w);
            }
        }
    }
    best
}

fn dijkstra(adj: &[Vec<(usize, i64)>], source: usize, keep: impl Fn(usize) -> bool) -> Vec<i64> {
    let n = adj.len();
    let mut dist = vec![i64::MAX; n];
    if !keep(source) {
        return dist;
    }
    dist[source] = 0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0i64, source)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            if !keep(v) {
                continue;
            }
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((nd, v)));
            }
        }
    }
    dist
}

/// A shortest path with its arc-length parameterization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeodesicPath {
    waypoints: Vec<usize>,
    arc: Vec<i64>,
    unit: i64,
}

impl GeodesicPath {
    /// Assembles a path from waypoints, computing cumulative lengths from
    /// consecutive distances. Does not check that the result is geodesic.
    pub fn from_waypoints(space: &MetricSpace, waypoints: Vec<usize>) -> Self {
        let mut arc = Vec::with_capacity(waypoints.len());
        let mut acc = 0i64;
        for (i, &p) in waypoints.iter().enumerate() {
            if i > 0 {
                acc += space.raw(waypoints[i - 1], p);
            }
            arc.push(acc);
        }
        GeodesicPath {
            waypoints,
            arc,
            unit: space.unit(),
        }
    }

    pub fn waypoints(&self) -> &[usize] {
        &self.waypoints
    }

    /// Denominator of the raw arc lengths.
    pub fn unit(&self) -> i64 {
        self.unit
    }

    /// Cumulative lengths in raw units of the owning space.
    pub fn arc_raw(&self) -> &[i64] {
        &self.arc
    }

    pub fn arc_length(&self, i: usize) -> Rational {
        Rational::new(self.arc[i], self.unit)
    }

    pub fn start(&self) -> usize {
        self.waypoints[0]
    }

    pub fn end(&self) -> usize {
        *self.waypoints.last().expect("paths are nonempty")
    }

    pub fn length_raw(&self) -> i64 {
        *self.arc.last().expect("paths are nonempty")
    }

    pub fn length(&self) -> Rational {
        Rational::new(self.length_raw(), self.unit)
    }

    /// Waypoint at exactly arc length `t` (raw units), if any.
    pub fn at(&self, t: i64) -> Option<usize> {
        self.arc.binary_search(&t).ok().map(|i| self.waypoints[i])
    }

    /// Whether `dist(p_i, p_j) = |l_j - l_i|` for all waypoint pairs.
    pub fn is_geodesic_in(&self, space: &MetricSpace) -> bool {
        let n = self.waypoints.len();
        (0..n).all(|i| (i..n).all(|j| space.raw(self.waypoints[i], self.waypoints[j]) == self.arc[j] - self.arc[i]))
    }
}

#[derive(Debug, Clone, Default)]
pub struct GeodesicSet {
    pub paths: Vec<GeodesicPath>,
    pub truncated: bool,
}

/// Parsed edge list: `(u, v, weight)` with 1-based source line numbers
/// already validated.
pub fn parse_edge_list(text: &str) -> Result<Vec<(PointLabel, PointLabel, Rational)>, MetricError> {
    let mut edges = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| MetricError::Parse { line: lineno, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(err(format!("expected `u v w`, found {} fields", fields.len())));
        }
        let u: u64 = fields[0]
            .parse()
            .map_err(|_| err(format!("bad point id `{}`", fields[0])))?;
        let v: u64 = fields[1]
            .parse()
            .map_err(|_| err(format!("bad point id `{}`", fields[1])))?;
        let w = parse_rational(fields[2]).map_err(|e: ParseRationalError| err(e.to_string()))?;
        if *w.numer() <= 0 {
            return Err(err(format!("weight must be positive, got {}", fields[2])));
        }
        if u == v {
            return Err(err(format!("self-loop on point {u}")));
        }
        edges.push((PointLabel::Id(u), PointLabel::Id(v), w));
    }
    if edges.is_empty() {
        return Err(MetricError::Empty);
    }
    Ok(edges)
}

/// Parses a CSV distance matrix: a header row of point ids (optionally with
/// a leading label cell), then one `id,d0,d1,...` row per point.
pub fn parse_matrix(text: &str) -> Result<(Vec<PointLabel>, Vec<Vec<Rational>>), MetricError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(MetricError::Empty)?;
    let mut cells: Vec<&str> = header.split(',').map(str::trim).collect();
    if cells.first().is_some_and(|c| c.parse::<u64>().is_err()) {
        cells.remove(0);
    }
    let ids: Vec<u64> = cells
        .iter()
        .map(|c| {
            c.parse::<u64>().map_err(|_| MetricError::Parse {
                line: hline,
                message: format!("bad point id `{c}` in header"),
            })
        })
        .collect::<Result<_, _>>()?;
    let n = ids.len();
    let mut rows = Vec::with_capacity(n);
    for (k, (lineno, line)) in lines.enumerate() {
        let err = |message: String| MetricError::Parse { line: lineno, message };
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != n + 1 {
            return Err(err(format!("expected {} cells, found {}", n + 1, cells.len())));
        }
        let id: u64 = cells[0]
            .parse()
            .map_err(|_| err(format!("bad point id `{}`", cells[0])))?;
        if k >= n || id != ids[k] {
            return Err(err(format!("row id {id} does not match the header order")));
        }
        let row = cells[1..]
            .iter()
            .map(|c| parse_rational(c).map_err(|e| err(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        if row.iter().any(|r| *r.numer() < 0) {
            return Err(err("distances must be nonnegative".into()));
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(MetricError::Parse {
            line: hline,
            message: format!("header lists {n} points but {} rows follow", rows.len()),
        });
    }
    Ok((ids.into_iter().map(PointLabel::Id).collect(), rows))
}

/// Reads a space from disk.
pub fn load_space(path: &Path, format: InputFormat) -> Result<MetricSpace, MetricError> {
    let text = fs::read_to_string(path).map_err(|source| MetricError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_space(&text, format)
}

pub fn parse_space(text: &str, format: InputFormat) -> Result<MetricSpace, MetricError> {
    match format {
        InputFormat::EdgeList => MetricSpace::from_weighted_edges(&parse_edge_list(text)?),
        InputFormat::Matrix => {
            let (labels, rows) = parse_matrix(text)?;
            MetricSpace::from_matrix(labels, rows)
        }
    }
}
