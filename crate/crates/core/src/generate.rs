//! Seeded generators for unit-weight test spaces.
//!
//! Every generator is deterministic in its [`GenSpec`]: equal specs give
//! identical edge lists, in identical order.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::metric::{MetricError, MetricSpace};

/// Largest number of points a generator will produce.
pub const MAX_POINTS: usize = 10_000;

/// Degree of every interior vertex of the order-7 triangular tessellation.
const TESSELLATION_DEGREE: usize = 7;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("unknown space kind `{0}`")]
    UnknownKind(String),
    #[error("missing parameter `{0}` for this kind")]
    Missing(&'static str),
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("space would have {0} points, more than the limit of {MAX_POINTS}")]
    TooLarge(usize),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    Tree,
    BinaryTree,
    Cycle,
    Grid,
    Torus,
    HyperbolicTessellation,
    RandomGraph,
}

impl GenKind {
    pub fn name(&self) -> &'static str {
        match self {
            GenKind::Tree => "tree",
            GenKind::BinaryTree => "binary-tree",
            GenKind::Cycle => "cycle",
            GenKind::Grid => "grid",
            GenKind::Torus => "torus",
            GenKind::HyperbolicTessellation => "hyperbolic-tessellation",
            GenKind::RandomGraph => "random-graph",
        }
    }
}

impl fmt::Display for GenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GenKind {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "tree" => GenKind::Tree,
            "binary-tree" => GenKind::BinaryTree,
            "cycle" => GenKind::Cycle,
            "grid" => GenKind::Grid,
            "torus" => GenKind::Torus,
            "hyperbolic-tessellation" | "tessellation" => GenKind::HyperbolicTessellation,
            "random-graph" => GenKind::RandomGraph,
            other => return Err(GenError::UnknownKind(other.to_string())),
        })
    }
}

/// What to generate.
///
/// * `tree`: `n` points, each attached to a uniformly chosen earlier one.
/// * `binary-tree`: complete binary tree of the given `depth`.
/// * `cycle`: `C_n`.
/// * `grid`: `n × m` lattice (`m` defaults to `n`).
/// * `torus`: `C_n × C_m` (`m` defaults to `n`).
/// * `hyperbolic-tessellation`: ball of the given `radius` around a vertex.
/// * `random-graph`: `n` points, `m` edges (default `2n`), connected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub depth: Option<u32>,
    pub radius: Option<u32>,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(kind: GenKind) -> Self {
        GenSpec {
            kind,
            n: None,
            m: None,
            depth: None,
            radius: None,
            seed: 0,
        }
    }

    pub fn n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn m(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }

    pub fn depth(mut self, depth: u32) -> Self {
        self.depth = Some(depth);
        self
    }

    pub fn radius(mut self, radius: u32) -> Self {
        self.radius = Some(radius);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

fn check_size(points: usize) -> Result<(), GenError> {
    if points > MAX_POINTS {
        Err(GenError::TooLarge(points))
    } else {
        Ok(())
    }
}

fn need<T>(v: Option<T>, name: &'static str) -> Result<T, GenError> {
    v.ok_or(GenError::Missing(name))
}

/// The edge list of `spec`, with points numbered from 0.
pub fn generate_edges(spec: &GenSpec) -> Result<Vec<(u64, u64)>, GenError> {
    match spec.kind {
        GenKind::Tree => {
            let n = need(spec.n, "n")?;
            if n < 2 {
                return Err(GenError::Invalid(format!("tree needs n >= 2, got {n}")));
            }
            check_size(n)?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            Ok((1..n as u64).map(|i| (rng.gen_range(0..i), i)).collect())
        }
        GenKind::BinaryTree => {
            let depth = need(spec.depth, "depth")?;
            if depth == 0 || depth > 20 {
                return Err(GenError::Invalid(format!(
                    "binary tree needs 1 <= depth <= 20, got {depth}"
                )));
            }
            let n = (1usize << (depth + 1)) - 1;
            check_size(n)?;
            Ok((1..n as u64).map(|i| ((i - 1) / 2, i)).collect())
        }
        GenKind::Cycle => {
            let n = need(spec.n, "n")?;
            if n < 3 {
                return Err(GenError::Invalid(format!("cycle needs n >= 3, got {n}")));
            }
            check_size(n)?;
            Ok((0..n as u64).map(|i| (i, (i + 1) % n as u64)).collect())
        }
        GenKind::Grid | GenKind::Torus => {
            let rows = need(spec.n, "n")?;
            let cols = spec.m.unwrap_or(rows);
            let torus = spec.kind == GenKind::Torus;
            let min = if torus { 3 } else { 1 };
            if rows < min || cols < min || rows * cols < 2 {
                return Err(GenError::Invalid(format!("{} of size {rows}x{cols}", spec.kind)));
            }
            check_size(rows.saturating_mul(cols))?;
            let id = |r: usize, c: usize| (r * cols + c) as u64;
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    if c + 1 < cols || torus {
                        edges.push((id(r, c), id(r, (c + 1) % cols)));
                    }
                    if r + 1 < rows || torus {
                        edges.push((id(r, c), id((r + 1) % rows, c)));
                    }
                }
            }
            Ok(edges)
        }
        GenKind::HyperbolicTessellation => tessellation(need(spec.radius, "radius")?),
        GenKind::RandomGraph => {
            let n = need(spec.n, "n")?;
            if n < 2 {
                return Err(GenError::Invalid(format!("random graph needs n >= 2, got {n}")));
            }
            check_size(n)?;
            let max_edges = n * (n - 1) / 2;
            let m = spec.m.unwrap_or(2 * n).min(max_edges);
            if m < n - 1 {
                return Err(GenError::Invalid(format!(
                    "a connected graph on {n} points needs at least {} edges, got {m}",
                    n - 1
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let mut seen = BTreeSet::new();
            let mut edges = Vec::with_capacity(m);
            for i in 1..n as u64 {
                let j = rng.gen_range(0..i);
                seen.insert((j, i));
                edges.push((j, i));
            }
            while edges.len() < m {
                let a = rng.gen_range(0..n as u64);
                let b = rng.gen_range(0..n as u64);
                let e = (a.min(b), a.max(b));
                if a != b && seen.insert(e) {
                    edges.push(e);
                }
            }
            Ok(edges)
        }
    }
}

/// Ball of radius `radius` in the order-7 triangular tessellation.
///
/// Layer `k` is a cycle. Each vertex of layer `k >= 1` with `p` neighbors in
/// layer `k - 1` has `7 - 2 - p` neighbors in layer `k + 1`, consecutive in
/// cyclic order; the first is shared with the previous vertex of layer `k`
/// and the last with the next one. Layer sizes run 1, 7, 21, 56, 147, ...
fn tessellation(radius: u32) -> Result<Vec<(u64, u64)>, GenError> {
    // (id, parents) in cyclic order
    let mut layer: Vec<(u64, usize)> = vec![(0, 0)];
    let mut next_id = 1u64;
    let mut edges = Vec::new();
    for k in 0..radius {
        let mut next: Vec<(u64, usize)> = Vec::new();
        if k == 0 {
            for _ in 0..TESSELLATION_DEGREE {
                edges.push((0, next_id));
                next.push((next_id, 1));
                next_id += 1;
            }
        } else {
            let size: usize = layer.iter().map(|&(_, p)| TESSELLATION_DEGREE - 3 - p).sum();
            check_size(next_id as usize + size)?;
            let len = layer.len();
            let first_shared = next_id;
            for i in 0..len {
                let (a, p) = layer[i];
                let prev = layer[(i + len - 1) % len].0;
                let shared = next_id;
                next_id += 1;
                edges.push((prev, shared));
                edges.push((a, shared));
                next.push((shared, 2));
                for _ in 0..TESSELLATION_DEGREE - 4 - p {
                    edges.push((a, next_id));
                    next.push((next_id, 1));
                    next_id += 1;
                }
                let following = if i + 1 == len { first_shared } else { next_id };
                edges.push((a, following));
            }
        }
        let len = next.len();
        for i in 0..len {
            edges.push((next[i].0, next[(i + 1) % len].0));
        }
        layer = next;
    }
    if edges.is_empty() {
        return Err(GenError::Invalid("tessellation needs radius >= 1".to_string()));
    }
    Ok(edges)
}

/// Builds the space of `spec`.
pub fn generate(spec: &GenSpec) -> Result<MetricSpace, GenError> {
    Ok(MetricSpace::from_unit_edges(&generate_edges(spec)?)?)
}

/// Writes `edges` as a unit-weight edge list, one `u v 1` line per edge,
/// after a comment line describing `spec`.
pub fn write_edge_list<W: Write>(spec: &GenSpec, edges: &[(u64, u64)], mut out: W) -> io::Result<()> {
    let mut header = format!("# curvlab gen kind={} seed={}", spec.kind, spec.seed);
    for (name, value) in [
        ("n", spec.n.map(|v| v as u64)),
        ("m", spec.m.map(|v| v as u64)),
        ("depth", spec.depth.map(u64::from)),
        ("radius", spec.radius.map(u64::from)),
    ] {
        if let Some(v) = value {
            header.push_str(&format!(" {name}={v}"));
        }
    }
    writeln!(out, "{header}")?;
    for (u, v) in edges {
        writeln!(out, "{u} {v} 1")?;
    }
    out.flush()
}
