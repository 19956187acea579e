//! Pairs of geodesics from a common basepoint, advanced in lockstep.
//!
//! In a space whose geodesic edges all have weight `1/m`, every geodesic
//! from a basepoint `x` visits the distance layers `0, 1/m, 2/m, ...` in
//! order, one edge per layer. A pair of geodesics observed at the same time
//! is then a state `(a, b)` inside one layer, and the set of all such states
//! reachable from a given set is obtained by stepping both coordinates along
//! forward edges. Integer times are the layers divisible by `m`.

use fixedbitset::FixedBitSet;

use crate::metric::MetricSpace;

/// Marker for "no run reaches this state".
pub(crate) const NONE: i64 = i64::MIN;

pub(crate) struct PairDag<'a> {
    pub space: &'a MetricSpace,
    pub x: usize,
    /// Edges per unit of time.
    pub per_unit: usize,
    layers: Vec<Vec<usize>>,
    /// Forward successors of each point, as positions in the next layer.
    succ: Vec<Vec<usize>>,
}

impl<'a> PairDag<'a> {
    /// `None` when the geodesic edges do not share a weight `1/m`.
    pub fn new(space: &'a MetricSpace, x: usize) -> Option<Self> {
        let (step, per_unit) = space.unit_step()?;
        let n = space.len();
        let depth = (0..n).map(|p| space.raw(x, p) / step).max().unwrap_or(0) as usize;
        let mut layers = vec![Vec::new(); depth + 1];
        let mut pos = vec![0usize; n];
        for p in 0..n {
            let k = (space.raw(x, p) / step) as usize;
            pos[p] = layers[k].len();
            layers[k].push(p);
        }
        let succ = (0..n)
            .map(|p| space.forward_successors(x, p).map(|(w, _)| pos[w]).collect::<Vec<_>>())
            .collect();
        Some(PairDag {
            space,
            x,
            per_unit: per_unit as usize,
            layers,
            succ,
        })
    }

    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn width(&self, k: usize) -> usize {
        self.layers[k].len()
    }

    /// Index of the unordered pair `{i, j}` of positions in layer `k`.
    #[inline]
    pub fn index(&self, k: usize, i: usize, j: usize) -> usize {
        let w = self.width(k);
        if i <= j {
            i * w + j
        } else {
            j * w + i
        }
    }

    pub fn empty_set(&self, k: usize) -> FixedBitSet {
        let w = self.width(k);
        FixedBitSet::with_capacity(w * w)
    }

    /// Canonical states `(i, j)`, `i <= j`, of layer `k`.
    pub fn states(&self, k: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width(k);
        (0..w).flat_map(move |i| (i..w).map(move |j| (i, j)))
    }

    pub fn points(&self, k: usize, i: usize, j: usize) -> (usize, usize) {
        (self.layers[k][i], self.layers[k][j])
    }

    /// Raw distance between the two points of a state.
    pub fn gap(&self, k: usize, i: usize, j: usize) -> i64 {
        let (a, b) = self.points(k, i, j);
        self.space.raw(a, b)
    }

    fn successors(&self, k: usize, i: usize) -> &[usize] {
        &self.succ[self.layers[k][i]]
    }

    /// States of layer `k + 1` reachable in one step from `set`.
    pub fn step(&self, k: usize, set: &FixedBitSet) -> FixedBitSet {
        let mut next = self.empty_set(k + 1);
        let w = self.width(k);
        for idx in set.ones() {
            let (i, j) = (idx / w, idx % w);
            for &a in self.successors(k, i) {
                for &b in self.successors(k, j) {
                    next.insert(self.index(k + 1, a, b));
                }
            }
        }
        next
    }

    /// States of layer `k` with a successor in `set` (a set on layer `k + 1`).
    pub fn step_back(&self, k: usize, set: &FixedBitSet) -> FixedBitSet {
        let mut prev = self.empty_set(k);
        for (i, j) in self.states(k) {
            let hit = self.successors(k, i).iter().any(|&a| {
                self.successors(k, j)
                    .iter()
                    .any(|&b| set.contains(self.index(k + 1, a, b)))
            });
            if hit {
                prev.insert(self.index(k, i, j));
            }
        }
        prev
    }

    /// One step of max-propagation: each state of layer `k + 1` receives the
    /// largest value among its predecessors (`NONE` when none carries one).
    pub fn step_max(&self, k: usize, vals: &[i64]) -> Vec<i64> {
        let w1 = self.width(k + 1);
        let mut next = vec![NONE; w1 * w1];
        for (i, j) in self.states(k) {
            let v = vals[self.index(k, i, j)];
            if v == NONE {
                continue;
            }
            for &a in self.successors(k, i) {
                for &b in self.successors(k, j) {
                    let slot = &mut next[self.index(k + 1, a, b)];
                    *slot = (*slot).max(v);
                }
            }
        }
        next
    }
}
