//! Hyperbolicity constants, quasi-geodesic paths, bigons and fellow travelling.
//!
//! Two hyperbolicity constants are computed and never conflated: the
//! four-point constant and the slim-triangle constant. The slim-triangle
//! constant ranges over *every* choice of geodesic sides. Rather than
//! enumerating side triples, it uses the table
//!
//! `F(p; a, b) = max over geodesics g from a to b of dist(p, g)`,
//!
//! which a bottleneck recursion over the geodesic DAG computes exactly. For a
//! side point `p` on a geodesic from `x` to `y`, the worst choice of the two
//! other sides is `min(F(p; y, z), F(p; z, x))` because those sides are
//! chosen independently.

use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::balls::{hausdorff, PointSet};
use crate::metric::{GeodesicPath, MetricSpace};
use crate::rational::{ceil_scaled, floor_scaled, to_pq, Rational};
use crate::sync::{PairDag, NONE};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HyperbolicityError {
    #[error("the two sides of a bigon must share both endpoints")]
    EndpointMismatch,
    #[error("geodesics must start at the same point")]
    BasepointMismatch,
    #[error("no synchronous pair of waypoints is at distance at least K")]
    Vacuous,
    #[error("distance band needs 0 <= K0 <= K1")]
    InvalidBand,
    #[error("lockstep scans need all geodesic edges to have one weight 1/m; subdivide first")]
    NonUniformWeights,
}

/// Four-point constant with the lexicographically least quadruple attaining it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FourPoint {
    pub value: Rational,
    pub witness: Option<[usize; 4]>,
}

/// Largest `(S1 - S2) / 2` over quadruples, where `S1 >= S2 >= S3` are the
/// three pairing sums.
pub fn delta_four_point(space: &MetricSpace) -> FourPoint {
    let n = space.len();
    let best = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut best: (i64, Option<[usize; 4]>) = (0, None);
            for b in a + 1..n {
                for c in b + 1..n {
                    for d in c + 1..n {
                        let mut sums = [
                            space.raw(a, b) + space.raw(c, d),
                            space.raw(a, c) + space.raw(b, d),
                            space.raw(a, d) + space.raw(b, c),
                        ];
                        sums.sort_unstable();
                        let gap = sums[2] - sums[1];
                        if gap > best.0 {
                            best = (gap, Some([a, b, c, d]));
                        }
                    }
                }
            }
            best
        })
        .reduce(
            || (0, None),
            |l, r| {
                if r.0 > l.0 || (r.0 == l.0 && r.1 < l.1 && r.1.is_some()) {
                    r
                } else {
                    l
                }
            },
        );
    FourPoint {
        value: Rational::new(best.0, 2 * space.unit()),
        witness: best.1,
    }
}

/// `F(p; a, b)` for all `a, b, p`, in raw units.
pub(crate) struct FarTable {
    n: usize,
    far: Vec<i64>,
}

impl FarTable {
    pub fn new(space: &MetricSpace) -> Self {
        let n = space.len();
        let rows: Vec<Vec<i64>> = (0..n)
            .into_par_iter()
            .map(|a| {
                let mut out = vec![0i64; n * n];
                for b in 0..n {
                    let col = farthest_from_geodesics(space, a, b);
                    out[b * n..(b + 1) * n].copy_from_slice(&col);
                }
                out
            })
            .collect();
        let mut far = Vec::with_capacity(n * n * n);
        for row in rows {
            far.extend(row);
        }
        FarTable { n, far }
    }

    /// Largest distance from `p` to a geodesic from `a` to `b`.
    #[inline]
    pub fn get(&self, p: usize, a: usize, b: usize) -> i64 {
        self.far[(a * self.n + b) * self.n + p]
    }
}

/// For every `p`: the maximum over geodesics `g` from `a` to `b` of
/// `min over v in g of dist(p, v)`.
fn farthest_from_geodesics(space: &MetricSpace, a: usize, b: usize) -> Vec<i64> {
    let n = space.len();
    let mut interval = space.interval(a, b);
    interval.sort_by_key(|&v| std::cmp::Reverse(space.raw(a, v)));
    let mut best: Vec<Option<Vec<i64>>> = vec![None; n];
    for &v in &interval {
        let mut acc: Option<Vec<i64>> = None;
        for (w, _) in space.geodesic_successors(a, b, v) {
            let bw = best[w].as_ref().expect("successors are processed first");
            match &mut acc {
                None => acc = Some(bw.clone()),
                Some(acc) => acc.iter_mut().zip(bw).for_each(|(x, y)| *x = (*x).max(*y)),
            }
        }
        let row = match acc {
            None => (0..n).map(|p| space.raw(p, v)).collect(),
            Some(mut acc) => {
                for (p, x) in acc.iter_mut().enumerate() {
                    *x = (*x).min(space.raw(p, v));
                }
                acc
            }
        };
        best[v] = Some(row);
    }
    best[a].take().expect("a lies in its own interval")
}

/// Triple and side point realizing the slim-triangle constant: `point` lies
/// on a geodesic from `x` to `y` and is that far from some choice of the
/// sides `y`–`z` and `z`–`x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SlimWitness {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub point: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaEstimate {
    pub value: Rational,
    /// All geodesics were accounted for.
    pub exact: bool,
    pub witness: Option<SlimWitness>,
}

impl DeltaEstimate {
    pub fn to_json(&self, space: &MetricSpace) -> Value {
        json!({
            "value": to_pq(&self.value),
            "exact": self.exact,
            "witness": self.witness.map(|w| json!({
                "triple": [space.label(w.x), space.label(w.y), space.label(w.z)],
                "point": space.label(w.point),
            })),
        })
    }
}

/// Slim-triangle constant over all triples (degenerate ones included) and
/// all choices of geodesic sides, measured on waypoints.
pub fn delta_slim(space: &MetricSpace) -> DeltaEstimate {
    let table = FarTable::new(space);
    delta_slim_with(space, &table)
}

pub(crate) fn delta_slim_with(space: &MetricSpace, table: &FarTable) -> DeltaEstimate {
    let n = space.len();
    let best = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut best: (i64, Option<SlimWitness>) = (0, None);
            for y in x + 1..n {
                let side = space.interval(x, y);
                for z in 0..n {
                    for &p in &side {
                        let v = table.get(p, y, z).min(table.get(p, z, x));
                        if v > best.0 {
                            best = (v, Some(SlimWitness { x, y, z, point: p }));
                        }
                    }
                }
            }
            best
        })
        .reduce(
            || (0, None),
            |l, r| {
                if r.0 > l.0 || (r.0 == l.0 && r.1.is_some() && r.1 < l.1) {
                    r
                } else {
                    l
                }
            },
        );
    DeltaEstimate {
        value: space.to_rational(best.0),
        exact: true,
        witness: best.1,
    }
}

/// A broken geodesic, viewed as a `(1, q)`-quasi-geodesic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QPath {
    waypoints: Vec<usize>,
    arc: Vec<i64>,
    q: i64,
    unit: i64,
}

impl QPath {
    pub fn from_geodesic(path: &GeodesicPath) -> Self {
        QPath {
            waypoints: path.waypoints().to_vec(),
            arc: path.arc_raw().to_vec(),
            q: 0,
            unit: path.unit(),
        }
    }

    pub fn waypoints(&self) -> &[usize] {
        &self.waypoints
    }

    pub fn arc_length(&self, i: usize) -> Rational {
        Rational::new(self.arc[i], self.unit)
    }

    pub fn length(&self) -> Rational {
        Rational::new(*self.arc.last().expect("nonempty"), self.unit)
    }

    /// The defect this path was built with.
    pub fn q(&self) -> Rational {
        Rational::new(self.q, self.unit)
    }

    pub fn start(&self) -> usize {
        self.waypoints[0]
    }

    pub fn end(&self) -> usize {
        *self.waypoints.last().expect("nonempty")
    }

    /// Smallest `q` for which `| |l_j - l_i| - dist(p_i, p_j) | <= q` on all
    /// waypoint pairs.
    pub fn measured_defect(&self, space: &MetricSpace) -> Rational {
        let n = self.waypoints.len();
        let mut worst = 0i64;
        for i in 0..n {
            for j in i + 1..n {
                let along = self.arc[j] - self.arc[i];
                let d = space.raw(self.waypoints[i], self.waypoints[j]);
                worst = worst.max((along - d).abs());
            }
        }
        space.to_rational(worst)
    }
}

/// The lexicographically least geodesic `x → p` followed by the
/// lexicographically least geodesic `p → y`. Its defect is
/// `dist(x,p) + dist(p,y) - dist(x,y)`.
pub fn qpath_from_waypoint(space: &MetricSpace, x: usize, p: usize, y: usize) -> QPath {
    let first = space.first_geodesic(x, p);
    let second = space.first_geodesic(p, y);
    let mut waypoints = first.waypoints().to_vec();
    let mut arc = first.arc_raw().to_vec();
    let offset = first.length_raw();
    waypoints.extend_from_slice(&second.waypoints()[1..]);
    arc.extend(second.arc_raw()[1..].iter().map(|l| l + offset));
    QPath {
        waypoints,
        arc,
        q: space.raw(x, p) + space.raw(p, y) - space.raw(x, y),
        unit: space.unit(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bigon {
    side1: QPath,
    side2: QPath,
}

impl Bigon {
    pub fn new(side1: QPath, side2: QPath) -> Result<Self, HyperbolicityError> {
        if side1.start() != side2.start() || side1.end() != side2.end() {
            return Err(HyperbolicityError::EndpointMismatch);
        }
        Ok(Bigon { side1, side2 })
    }

    pub fn sides(&self) -> (&QPath, &QPath) {
        (&self.side1, &self.side2)
    }
}

/// Hausdorff distance between the waypoint images of the two sides.
pub fn bigon_fatness(space: &MetricSpace, bigon: &Bigon) -> Rational {
    let n = space.len();
    let a = PointSet::from_points(n, bigon.side1.waypoints().iter().copied());
    let b = PointSet::from_points(n, bigon.side2.waypoints().iter().copied());
    hausdorff(space, &a, &b).expect("sides are nonempty").value
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncViolation {
    /// Common time at which the two geodesics are at least `K` apart.
    pub t: Rational,
    /// Time on the second geodesic that comes closer than `K/2`.
    pub s: Rational,
    pub distance: Rational,
}

/// Checks that whenever `dist(γ(t), γ'(t)) >= K` at a common waypoint time
/// `t`, every waypoint of `γ'` stays at least `K/2` from `γ(t)`.
pub fn synchronous_check(
    space: &MetricSpace,
    gamma: &GeodesicPath,
    gamma2: &GeodesicPath,
    k: Rational,
) -> Result<Vec<SyncViolation>, HyperbolicityError> {
    if gamma.start() != gamma2.start() {
        return Err(HyperbolicityError::BasepointMismatch);
    }
    let unit = space.unit();
    let k_raw = ceil_scaled(&k, unit);
    let mut any = false;
    let mut out = Vec::new();
    for (i, &t) in gamma.arc_raw().iter().enumerate() {
        let Some(other) = gamma2.at(t) else { continue };
        let here = gamma.waypoints()[i];
        if space.raw(here, other) < k_raw || k <= Rational::from_integer(0) {
            continue;
        }
        any = true;
        for (j, &s) in gamma2.arc_raw().iter().enumerate() {
            let d = space.raw(here, gamma2.waypoints()[j]);
            if Rational::new(2 * d, unit) < k {
                out.push(SyncViolation {
                    t: space.to_rational(t),
                    s: space.to_rational(s),
                    distance: space.to_rational(d),
                });
            }
        }
    }
    if any {
        Ok(out)
    } else {
        Err(HyperbolicityError::Vacuous)
    }
}

/// Totals of an exhaustive synchronous-distance scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncScan {
    pub pairs: u64,
    pub violations: u64,
    pub first_violation: Option<(usize, usize, usize, SyncViolation)>,
    pub truncated: bool,
}

/// Runs [`synchronous_check`] with the strongest `K` at every common time,
/// over all pairs of maximal geodesics from every basepoint. Every geodesic
/// from a basepoint is a prefix of a maximal one, so no pair is missed.
pub fn synchronous_scan(space: &MetricSpace, cap: usize) -> SyncScan {
    let n = space.len();
    let results: Vec<SyncScan> = (0..n)
        .into_par_iter()
        .map(|e| {
            let set = space.maximal_geodesics_from(e, cap);
            let mut scan = SyncScan {
                pairs: 0,
                violations: 0,
                first_violation: None,
                truncated: set.truncated,
            };
            for (i, g) in set.paths.iter().enumerate() {
                for (j, h) in set.paths.iter().enumerate() {
                    scan.pairs += 1;
                    for (ti, &t) in g.arc_raw().iter().enumerate() {
                        let Some(other) = h.at(t) else { continue };
                        let here = g.waypoints()[ti];
                        let k = space.raw(here, other);
                        if k == 0 {
                            continue;
                        }
                        for (sj, &s) in h.arc_raw().iter().enumerate() {
                            let d = space.raw(here, h.waypoints()[sj]);
                            if 2 * d < k {
                                scan.violations += 1;
                                if scan.first_violation.is_none() {
                                    scan.first_violation = Some((
                                        e,
                                        i,
                                        j,
                                        SyncViolation {
                                            t: space.to_rational(t),
                                            s: space.to_rational(s),
                                            distance: space.to_rational(d),
                                        },
                                    ));
                                }
                            }
                        }
                    }
                }
            }
            scan
        })
        .collect();
    let mut total = SyncScan {
        pairs: 0,
        violations: 0,
        first_violation: None,
        truncated: false,
    };
    for r in results {
        total.pairs += r.pairs;
        total.violations += r.violations;
        total.truncated |= r.truncated;
        if total.first_violation.is_none() {
            total.first_violation = r.first_violation;
        }
    }
    total
}

/// Outcome of checking that every waypoint of every broken geodesic `x p y`
/// stays within `2K + c·ε + 2·slack` of every geodesic from `x` to `y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KPathCheck {
    pub paths: u64,
    pub violations: u64,
    /// `(x, p, y, waypoint)` of the first violation.
    pub first_violation: Option<(usize, usize, usize, usize)>,
}

pub fn kpath_travel_check(space: &MetricSpace, eps: Rational, eps_factor: i64) -> KPathCheck {
    let table = FarTable::new(space);
    kpath_travel_check_with(space, &table, eps, eps_factor)
}

pub(crate) fn kpath_travel_check_with(
    space: &MetricSpace,
    table: &FarTable,
    eps: Rational,
    eps_factor: i64,
) -> KPathCheck {
    let n = space.len();
    let unit = space.unit();
    let extra = floor_scaled(&(eps * eps_factor), unit) + 2 * space.slack_raw();
    let results: Vec<KPathCheck> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut out = KPathCheck {
                paths: 0,
                violations: 0,
                first_violation: None,
            };
            for y in 0..n {
                for p in 0..n {
                    let path = qpath_from_waypoint(space, x, p, y);
                    out.paths += 1;
                    let bound = 2 * path.q + extra;
                    for &w in path.waypoints() {
                        if table.get(w, x, y) > bound {
                            out.violations += 1;
                            out.first_violation.get_or_insert((x, p, y, w));
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut total = KPathCheck {
        paths: 0,
        violations: 0,
        first_violation: None,
    };
    for r in results {
        total.paths += r.paths;
        total.violations += r.violations;
        if total.first_violation.is_none() {
            total.first_violation = r.first_violation;
        }
    }
    total
}

/// Where the longest fellow-travelling corridor was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorridorWitness {
    pub basepoint: usize,
    /// Integer time at which the corridor ends.
    pub end: u64,
    /// The two geodesics' positions at `end`.
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FellowTravel {
    /// `last - first` over the longest run of consecutive integer times at
    /// which some pair of geodesics from a common basepoint stays at
    /// synchronous distance within `[K0, K1]`.
    pub length: u64,
    pub capped: bool,
    pub witness: Option<CorridorWitness>,
}

impl FellowTravel {
    pub fn to_json(&self, space: &MetricSpace) -> Value {
        json!({
            "length": self.length,
            "capped": self.capped,
            "witness": self.witness.map(|w| json!({
                "basepoint": space.label(w.basepoint),
                "end": w.end,
                "points": [space.label(w.a), space.label(w.b)],
            })),
        })
    }
}

/// Longest corridor over all pairs of geodesics from every basepoint,
/// computed by lockstep dynamic programming (no enumeration, no sampling).
pub fn fellow_travel_scan(
    space: &MetricSpace,
    k0: Rational,
    k1: Rational,
    scan_cap: u64,
) -> Result<FellowTravel, HyperbolicityError> {
    let zero = Rational::from_integer(0);
    if k0 < zero || k1 < k0 {
        return Err(HyperbolicityError::InvalidBand);
    }
    if space.unit_step().is_none() && space.len() > 1 {
        return Err(HyperbolicityError::NonUniformWeights);
    }
    let unit = space.unit();
    let lo = ceil_scaled(&k0, unit);
    let hi = floor_scaled(&k1, unit);
    let n = space.len();
    let per_base: Vec<(i64, Option<CorridorWitness>)> = (0..n)
        .into_par_iter()
        .map(|x| match PairDag::new(space, x) {
            Some(dag) => corridor_from(&dag, lo, hi, scan_cap),
            None => {
                // Single point: the constant pair, length 0 when 0 is in band.
                if lo <= 0 {
                    (
                        0,
                        Some(CorridorWitness {
                            basepoint: x,
                            end: 0,
                            a: x,
                            b: x,
                        }),
                    )
                } else {
                    (NONE, None)
                }
            }
        })
        .collect();
    let mut best: (i64, Option<CorridorWitness>) = (NONE, None);
    for (len, w) in per_base {
        if len > best.0 {
            best = (len, w);
        }
    }
    let length = best.0.max(0) as u64;
    Ok(FellowTravel {
        length: length.min(scan_cap),
        capped: length >= scan_cap,
        witness: best.1,
    })
}

fn corridor_from(dag: &PairDag<'_>, lo: i64, hi: i64, cap: u64) -> (i64, Option<CorridorWitness>) {
    let m = dag.per_unit;
    let mut best: (i64, Option<CorridorWitness>) = (NONE, None);
    let mut vals = vec![NONE; 1];
    for k in 0..=dag.depth() {
        if k > 0 {
            vals = dag.step_max(k - 1, &vals);
        }
        if k % m != 0 {
            continue;
        }
        for (i, j) in dag.states(k) {
            let idx = dag.index(k, i, j);
            let g = dag.gap(k, i, j);
            if g < lo || g > hi {
                vals[idx] = NONE;
                continue;
            }
            let len = if vals[idx] == NONE { 0 } else { vals[idx] + 1 };
            vals[idx] = len;
            if len > best.0 {
                let (a, b) = dag.points(k, i, j);
                best = (
                    len,
                    Some(CorridorWitness {
                        basepoint: dag.x,
                        end: (k / m) as u64,
                        a,
                        b,
                    }),
                );
            }
        }
        if best.0 >= cap as i64 {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: u64) -> MetricSpace {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        MetricSpace::from_unit_edges(&edges).unwrap()
    }

    fn q(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn four_point_c4() {
        let fp = delta_four_point(&cycle(4));
        assert_eq!(fp.value, q(1));
        assert_eq!(fp.witness, Some([0, 1, 2, 3]));
        let single = MetricSpace::from_unit_edges(&[(0, 1)]).unwrap();
        assert_eq!(delta_four_point(&single).value, q(0));
    }

    #[test]
    fn slim_c4() {
        let est = delta_slim(&cycle(4));
        assert_eq!(est.value, q(1));
        assert!(est.exact);
    }

    #[test]
    fn qpath_defect() {
        let p5 = MetricSpace::from_unit_edges(&[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let path = qpath_from_waypoint(&p5, 0, 2, 4);
        assert_eq!(path.q(), q(0));
        assert_eq!(path.waypoints(), &[0, 1, 2, 3, 4]);
        let trivial = qpath_from_waypoint(&p5, 0, 0, 4);
        assert_eq!(trivial.q(), q(0));
    }

    #[test]
    fn c8_bigon() {
        let c8 = cycle(8);
        let set = c8.enumerate_geodesics(0, 4, 10);
        let bigon = Bigon::new(QPath::from_geodesic(&set.paths[0]), QPath::from_geodesic(&set.paths[1])).unwrap();
        assert_eq!(bigon_fatness(&c8, &bigon), q(2));
        let same = Bigon::new(QPath::from_geodesic(&set.paths[0]), QPath::from_geodesic(&set.paths[0])).unwrap();
        assert_eq!(bigon_fatness(&c8, &same), q(0));
    }

    #[test]
    fn synchronous_same_path_is_vacuous() {
        let c8 = cycle(8);
        let g = c8.first_geodesic(0, 4);
        assert_eq!(synchronous_check(&c8, &g, &g, q(1)), Err(HyperbolicityError::Vacuous));
    }

    #[test]
    fn corridor_band_validation() {
        let c4 = cycle(4);
        assert_eq!(
            fellow_travel_scan(&c4, q(2), q(1), 10),
            Err(HyperbolicityError::InvalidBand)
        );
    }
}
