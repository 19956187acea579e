//! Balls, ball intersections, eccentricity and Hausdorff distances.
//!
//! Sets of points are bitsets over the point indices of a [`MetricSpace`].
//! The eccentricity of a finite set `S` is `max(0, circumradius - inradius)`,
//! where the inradius is the largest realized radius of a closed ball
//! contained in `S` and the circumradius the smallest radius of a closed
//! ball containing it; the two centers are chosen independently.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::metric::MetricSpace;
use crate::rational::{ceil_scaled, floor_scaled, to_pq, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BallsError {
    #[error("Hausdorff distance is undefined for an empty set")]
    EmptySet,
    #[error("radius must be nonnegative")]
    NegativeRadius,
}

/// A subset of the points of a space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    bits: FixedBitSet,
}

impl PointSet {
    pub fn empty(n: usize) -> Self {
        PointSet {
            bits: FixedBitSet::with_capacity(n),
        }
    }

    pub fn from_points(n: usize, points: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::empty(n);
        for p in points {
            set.bits.insert(p);
        }
        set
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.bits
    }

    pub fn contains(&self, p: usize) -> bool {
        self.bits.contains(p)
    }

    pub fn insert(&mut self, p: usize) {
        self.bits.insert(p);
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    /// Members in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        PointSet { bits }
    }
}

/// A closed ball `{p : dist(center, p) <= radius}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Ball {
    pub center: usize,
    pub radius: Rational,
}

impl Ball {
    pub fn to_json(&self, space: &MetricSpace) -> Value {
        json!({ "center": space.label(self.center), "radius": to_pq(&self.radius) })
    }
}

/// Closed ball around `c`.
pub fn ball(space: &MetricSpace, c: usize, radius: Rational) -> PointSet {
    ball_raw(space, c, floor_scaled(&radius, space.unit()))
}

/// Closed ball with a radius given in raw units (fractions rounded down).
pub fn ball_raw(space: &MetricSpace, c: usize, radius: i64) -> PointSet {
    let mut set = PointSet::empty(space.len());
    for &p in space.order_from(c) {
        if space.raw(c, p) > radius {
            break;
        }
        set.insert(p);
    }
    set
}

pub fn ball_intersection(space: &MetricSpace, x: usize, s: Rational, y: usize, t: Rational) -> PointSet {
    ball(space, x, s).intersection(&ball(space, y, t))
}

/// Inradius, circumradius and eccentricity of a set, with witness centers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EccentricityReport {
    pub inradius: Rational,
    pub incenter: Option<usize>,
    pub circumradius: Rational,
    pub circumcenter: Option<usize>,
    pub eccentricity: Rational,
    pub slack: Rational,
}

impl EccentricityReport {
    pub fn to_json(&self, space: &MetricSpace) -> Value {
        json!({
            "inradius": to_pq(&self.inradius),
            "incenter": self.incenter.map(|c| space.label(c).clone()),
            "circumradius": to_pq(&self.circumradius),
            "circumcenter": self.circumcenter.map(|c| space.label(c).clone()),
            "eccentricity": to_pq(&self.eccentricity),
            "slack": to_pq(&self.slack),
        })
    }
}

/// Largest realized radius `r` with `ball(c, r) ⊆ S`, or `None` when `c ∉ S`.
fn inradius_at(space: &MetricSpace, c: usize, set: &PointSet) -> Option<i64> {
    if !set.contains(c) {
        return None;
    }
    let mut best = 0;
    let order = space.order_from(c);
    let mut i = 0;
    while i < order.len() {
        let level = space.raw(c, order[i]);
        let mut j = i;
        let mut all_in = true;
        while j < order.len() && space.raw(c, order[j]) == level {
            all_in &= set.contains(order[j]);
            j += 1;
        }
        if !all_in {
            break;
        }
        best = level;
        i = j;
    }
    Some(best)
}

/// Raw inradius and its center (smallest index on ties).
fn inradius_raw(space: &MetricSpace, set: &PointSet) -> Option<(i64, usize)> {
    let mut best: Option<(i64, usize)> = None;
    for c in set.iter() {
        if let Some(r) = inradius_at(space, c, set) {
            if best.is_none_or(|(b, _)| r > b) {
                best = Some((r, c));
            }
        }
    }
    best
}

/// Raw circumradius and its center (smallest index on ties).
fn circumradius_raw(space: &MetricSpace, set: &PointSet) -> Option<(i64, usize)> {
    let members = set.to_vec();
    if members.is_empty() {
        return None;
    }
    let mut best = (i64::MAX, 0usize);
    for c in 0..space.len() {
        let mut far = 0;
        for &a in &members {
            far = far.max(space.raw(c, a));
            if far >= best.0 {
                break;
            }
        }
        if far < best.0 {
            best = (far, c);
        }
    }
    Some(best)
}

pub fn ecc_report(space: &MetricSpace, set: &PointSet) -> EccentricityReport {
    let zero = Rational::from_integer(0);
    let slack = space.slack();
    let Some((inr, inc)) = inradius_raw(space, set) else {
        return EccentricityReport {
            inradius: zero,
            incenter: None,
            circumradius: zero,
            circumcenter: None,
            eccentricity: zero,
            slack,
        };
    };
    let (circ, circc) = circumradius_raw(space, set).expect("nonempty set");
    EccentricityReport {
        inradius: space.to_rational(inr),
        incenter: Some(inc),
        circumradius: space.to_rational(circ),
        circumcenter: Some(circc),
        eccentricity: space.to_rational((circ - inr).max(0)),
        slack,
    }
}

pub(crate) fn eccentricity_raw(space: &MetricSpace, set: &PointSet) -> i64 {
    match (inradius_raw(space, set), circumradius_raw(space, set)) {
        (Some((inr, _)), Some((circ, _))) => (circ - inr).max(0),
        _ => 0,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HausdorffResult {
    pub value: Rational,
    pub witness: usize,
}

/// `dist(p, S)` for every point `p`.
fn distance_to_set(space: &MetricSpace, set: &[usize]) -> Vec<i64> {
    (0..space.len())
        .map(|p| set.iter().map(|&a| space.raw(p, a)).min().unwrap_or(i64::MAX))
        .collect()
}

/// Hausdorff distance between two nonempty sets; the witness is the point
/// farthest from the other set (members of `a` first, then `b`, smallest
/// index on ties).
pub fn hausdorff(space: &MetricSpace, a: &PointSet, b: &PointSet) -> Result<HausdorffResult, BallsError> {
    if a.is_empty() || b.is_empty() {
        return Err(BallsError::EmptySet);
    }
    let av = a.to_vec();
    let bv = b.to_vec();
    let mut best: (i64, usize) = (-1, 0);
    for &p in &av {
        let d = bv.iter().map(|&q| space.raw(p, q)).min().expect("nonempty");
        if d > best.0 {
            best = (d, p);
        }
    }
    for &q in &bv {
        let d = av.iter().map(|&p| space.raw(p, q)).min().expect("nonempty");
        if d > best.0 {
            best = (d, q);
        }
    }
    Ok(HausdorffResult {
        value: space.to_rational(best.0),
        witness: best.1,
    })
}

/// Ball `(c, R)` at minimal Hausdorff distance from `S`, over all centers and
/// realized radii, smallest `(c, R)` on ties.
pub fn nearest_ball_hausdorff(space: &MetricSpace, set: &PointSet) -> Result<(Ball, Rational), BallsError> {
    let (c, r, value) = nearest_ball_raw(space, set).ok_or(BallsError::EmptySet)?;
    Ok((
        Ball {
            center: c,
            radius: space.to_rational(r),
        },
        space.to_rational(value),
    ))
}

fn exact_ball_of(space: &MetricSpace, set: &PointSet) -> Option<(usize, i64)> {
    let members = set.to_vec();
    let size = members.len();
    for c in 0..space.len() {
        let r = members.iter().map(|&a| space.raw(c, a)).max()?;
        let order = space.order_from(c);
        if order.len() == size || space.raw(c, order[size]) > r {
            // The `size` closest points all lie within r; they are S exactly
            // when S sits inside ball(c, r) and nothing else does.
            if order[..size].iter().all(|&p| set.contains(p)) {
                return Some((c, r));
            }
        }
    }
    None
}

fn nearest_ball_raw(space: &MetricSpace, set: &PointSet) -> Option<(usize, i64, i64)> {
    if set.is_empty() {
        return None;
    }
    if let Some((c, r)) = exact_ball_of(space, set) {
        return Some((c, r, 0));
    }
    let members = set.to_vec();
    let to_set = distance_to_set(space, &members);
    let mut best = (0usize, 0i64, i64::MAX);
    let mut curmin = vec![i64::MAX; members.len()];
    for c in 0..space.len() {
        curmin.iter_mut().for_each(|m| *m = i64::MAX);
        let order = space.order_from(c);
        let mut term2 = 0i64;
        let mut i = 0;
        while i < order.len() {
            let level = space.raw(c, order[i]);
            while i < order.len() && space.raw(c, order[i]) == level {
                let b = order[i];
                term2 = term2.max(to_set[b]);
                for (k, &a) in members.iter().enumerate() {
                    curmin[k] = curmin[k].min(space.raw(a, b));
                }
                i += 1;
            }
            if term2 >= best.2 {
                break;
            }
            let term1 = curmin.iter().copied().max().unwrap_or(0);
            let value = term1.max(term2);
            if value < best.2 {
                best = (c, level, value);
            }
        }
    }
    Some(best)
}

/// Which ball pairs a scan visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RadiusPolicy {
    /// Every pair of centers; `s` ranges over distances realized from `x`
    /// and `t` over distances realized from `y`.
    AllRealized,
    /// Centers at original (unsubdivided) points, radii in `½ℤ` with `s - t`
    /// an integer. With one subdivision of a unit-weight graph every such
    /// intersection has its prescribed inscribed center at a point.
    HalfIntegral,
    /// Uniformly sampled tuples from the all-realized range; results are
    /// lower bounds.
    Sampled { samples: usize, seed: u64 },
}

impl RadiusPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            RadiusPolicy::AllRealized => "all-realized",
            RadiusPolicy::HalfIntegral => "half-integral",
            RadiusPolicy::Sampled { .. } => "sampled",
        }
    }
}

/// `(x, s, y, t)` naming `ball(x, s) ∩ ball(y, t)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BallPair {
    pub x: usize,
    pub s: Rational,
    pub y: usize,
    pub t: Rational,
}

impl BallPair {
    pub fn to_json(&self, space: &MetricSpace) -> Value {
        json!([space.label(self.x), to_pq(&self.s), space.label(self.y), to_pq(&self.t)])
    }
}

/// Maxima over the ball pairs of a scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallPairScan {
    pub policy: RadiusPolicy,
    pub max_ecc: Rational,
    /// Lexicographically least pair attaining `max_ecc` (`None` when it is 0).
    pub ecc_witness: Option<BallPair>,
    pub max_hausdorff: Rational,
    pub hausdorff_witness: Option<BallPair>,
    /// Number of `(x, s, y, t)` tuples visited.
    pub pairs: u64,
    /// Distinct intersections that are not one of the two balls.
    pub distinct_sets: usize,
    pub lower_bound: bool,
}

impl BallPairScan {
    pub fn to_json(&self, space: &MetricSpace) -> Value {
        json!({
            "policy": self.policy.name(),
            "max_ecc": to_pq(&self.max_ecc),
            "ecc_witness": self.ecc_witness.as_ref().map(|w| w.to_json(space)),
            "max_hausdorff": to_pq(&self.max_hausdorff),
            "hausdorff_witness": self.hausdorff_witness.as_ref().map(|w| w.to_json(space)),
            "pairs": self.pairs,
            "distinct_sets": self.distinct_sets,
            "lower_bound": self.lower_bound,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanTargets {
    pub eccentricity: bool,
    pub hausdorff: bool,
}

impl ScanTargets {
    pub const BOTH: ScanTargets = ScanTargets {
        eccentricity: true,
        hausdorff: true,
    };
    pub const ECC: ScanTargets = ScanTargets {
        eccentricity: true,
        hausdorff: false,
    };
}

/// Radii (raw units, possibly fractional when halves are not representable,
/// hence kept as rationals) scanned around a center.
pub(crate) fn radii_for(space: &MetricSpace, c: usize, policy: RadiusPolicy) -> Vec<Rational> {
    let unit = space.unit();
    match policy {
        RadiusPolicy::HalfIntegral => {
            let far = *space.realized_from(c).last().expect("nonempty");
            let top = ceil_scaled(&Rational::new(far, unit), 2);
            (0..=top).map(|k| Rational::new(k, 2)).collect()
        }
        _ => space.realized_from(c).iter().map(|&r| Rational::new(r, unit)).collect(),
    }
}

/// Centers visited by `policy`, in index order.
pub(crate) fn policy_centers(space: &MetricSpace, policy: RadiusPolicy) -> Vec<usize> {
    let n = space.len();
    match policy {
        RadiusPolicy::HalfIntegral => (0..n).filter(|&p| space.label(p).is_original()).collect(),
        _ => (0..n).collect(),
    }
}

/// Maximum eccentricity and nearest-ball Hausdorff distance over ball
/// intersections selected by `policy`.
///
/// Intersections that are empty or equal one of the two balls contribute 0
/// to both maxima. Every other distinct intersection is evaluated once, under
/// the lexicographically least tuple producing it.
pub fn scan_ball_pairs(space: &MetricSpace, policy: RadiusPolicy, targets: ScanTargets) -> BallPairScan {
    let n = space.len();
    let centers = policy_centers(space, policy);
    let radii: Vec<Vec<Rational>> = (0..n)
        .into_par_iter()
        .map(|c| {
            if centers.binary_search(&c).is_ok() {
                radii_for(space, c, policy)
            } else {
                Vec::new()
            }
        })
        .collect();
    let balls: Vec<Vec<PointSet>> = (0..n)
        .into_par_iter()
        .map(|c| radii[c].iter().map(|r| ball(space, c, *r)).collect())
        .collect();

    let keep = |a: &PointSet, b: &PointSet| -> Option<PointSet> {
        let i = a.intersection(b);
        if i.is_empty() || &i == a || &i == b {
            None
        } else {
            Some(i)
        }
    };

    let (sets, pairs): (HashMap<PointSet, BallPair>, u64) = match policy {
        RadiusPolicy::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut sets: HashMap<PointSet, BallPair> = HashMap::new();
            for _ in 0..samples {
                let x = rng.gen_range(0..n);
                let y = rng.gen_range(0..n);
                let si = rng.gen_range(0..radii[x].len());
                let ti = rng.gen_range(0..radii[y].len());
                let (x, si, y, ti) = if (x, radii[x][si]) <= (y, radii[y][ti]) {
                    (x, si, y, ti)
                } else {
                    (y, ti, x, si)
                };
                if let Some(set) = keep(&balls[x][si], &balls[y][ti]) {
                    let tuple = BallPair {
                        x,
                        s: radii[x][si],
                        y,
                        t: radii[y][ti],
                    };
                    merge_min(&mut sets, set, tuple);
                }
            }
            (sets, samples as u64)
        }
        _ => {
            let half = policy == RadiusPolicy::HalfIntegral;
            let locals: Vec<(HashMap<PointSet, BallPair>, u64)> = centers
                .par_iter()
                .map(|&x| {
                    let mut sets: HashMap<PointSet, BallPair> = HashMap::new();
                    let mut pairs = 0u64;
                    for &y in centers.iter().filter(|&&y| y > x) {
                        for (si, s) in radii[x].iter().enumerate() {
                            for (ti, t) in radii[y].iter().enumerate() {
                                if half && !(s - t).is_integer() {
                                    continue;
                                }
                                pairs += 1;
                                if let Some(set) = keep(&balls[x][si], &balls[y][ti]) {
                                    let tuple = BallPair { x, s: *s, y, t: *t };
                                    merge_min(&mut sets, set, tuple);
                                }
                            }
                        }
                    }
                    (sets, pairs)
                })
                .collect();
            let mut sets = HashMap::new();
            let mut pairs = 0;
            for (local, count) in locals {
                pairs += count;
                for (set, tuple) in local {
                    merge_min(&mut sets, set, tuple);
                }
            }
            // Pairs with x == y intersect to a ball.
            pairs += centers
                .iter()
                .map(|&x| {
                    let k = radii[x].len() as u64;
                    if half {
                        // s - t integral: same parity of 2s and 2t.
                        let even = k.div_ceil(2);
                        let odd = k / 2;
                        even * even + odd * odd
                    } else {
                        k * k
                    }
                })
                .sum::<u64>();
            (sets, pairs)
        }
    };

    let distinct_sets = sets.len();
    let evaluated: Vec<(i64, i64, BallPair)> = sets
        .into_par_iter()
        .map(|(set, tuple)| {
            let ecc = if targets.eccentricity {
                eccentricity_raw(space, &set)
            } else {
                0
            };
            let haus = if targets.hausdorff {
                nearest_ball_raw(space, &set).map_or(0, |(_, _, v)| v)
            } else {
                0
            };
            (ecc, haus, tuple)
        })
        .collect();

    let pick = |key: fn(&(i64, i64, BallPair)) -> i64| -> (i64, Option<BallPair>) {
        let best = evaluated.iter().map(key).max().unwrap_or(0).max(0);
        if best == 0 {
            return (0, None);
        }
        let witness = evaluated.iter().filter(|e| key(e) == best).map(|e| e.2.clone()).min();
        (best, witness)
    };
    let (max_ecc, ecc_witness) = pick(|e| e.0);
    let (max_haus, hausdorff_witness) = pick(|e| e.1);
    BallPairScan {
        policy,
        max_ecc: space.to_rational(max_ecc),
        ecc_witness,
        max_hausdorff: space.to_rational(max_haus),
        hausdorff_witness,
        pairs,
        distinct_sets,
        lower_bound: matches!(policy, RadiusPolicy::Sampled { .. }),
    }
}

fn merge_min(sets: &mut HashMap<PointSet, BallPair>, set: PointSet, tuple: BallPair) {
    sets.entry(set)
        .and_modify(|t| {
            if tuple < *t {
                *t = tuple.clone();
            }
        })
        .or_insert(tuple);
}

/// Maximum eccentricity of ball intersections under `policy`.
pub fn max_ball_pair_ecc(space: &MetricSpace, policy: RadiusPolicy) -> BallPairScan {
    scan_ball_pairs(space, policy, ScanTargets::ECC)
}

/// Outcome of checking the inscribed-ball statements for one ball pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InscribedCheck {
    /// Balls disjoint or nested: nothing to check.
    pub vacuous: bool,
    /// `(s + t - d) / 2`.
    pub prescribed_radius: Rational,
    /// `(s - t + d) / 2`, measured from `x`.
    pub prescribed_position: Rational,
    /// Geodesic point closest to the prescribed position (within slack/2).
    pub center: Option<usize>,
    /// `|dist(x, center) - prescribed_position|`.
    pub offset: Rational,
    /// No geodesic point lies within slack/2 of the prescribed position.
    pub gap: bool,
    /// Every candidate center `c` has `ball(c, r - offset(c))` inside the
    /// intersection.
    pub containment_ok: bool,
    /// Largest realized radius of a ball inside the intersection.
    pub max_inscribed: Rational,
    /// Whether `s, t < d`, so contained radii must be at most `s + t - d`.
    pub radius_bound_applies: bool,
    pub radius_bound_ok: bool,
    /// With geodesic extension and `s, t <= d`: the largest inscribed radius
    /// is within slack of the prescribed radius.
    pub extension_ok: Option<bool>,
}

impl InscribedCheck {
    pub fn passed(&self) -> bool {
        self.vacuous
            || (self.containment_ok
                && (!self.radius_bound_applies || self.radius_bound_ok)
                && self.extension_ok.unwrap_or(true))
    }
}

/// Checks the inscribed-ball position and radius statements for
/// `ball(x, s) ∩ ball(y, t)`.
pub fn inscribed_formula_check(
    space: &MetricSpace,
    x: usize,
    s: Rational,
    y: usize,
    t: Rational,
    extension: bool,
) -> InscribedCheck {
    let zero = Rational::from_integer(0);
    let d = space.dist(x, y);
    let r = (s + t - d) / 2;
    let m = (s - t + d) / 2;
    let bx = ball(space, x, s);
    let by = ball(space, y, t);
    let inter = bx.intersection(&by);
    let mut out = InscribedCheck {
        vacuous: false,
        prescribed_radius: r,
        prescribed_position: m,
        center: None,
        offset: zero,
        gap: false,
        containment_ok: true,
        max_inscribed: zero,
        radius_bound_applies: s < d && t < d,
        radius_bound_ok: true,
        extension_ok: None,
    };
    if x == y || inter.is_empty() || bx.is_subset(&by) || by.is_subset(&bx) {
        out.vacuous = true;
        return out;
    }

    let half_slack = space.slack() / 2;
    let mut best: Option<(Rational, usize)> = None;
    for c in space.interval(x, y) {
        let off = (space.dist(x, c) - m).abs();
        if off > half_slack {
            continue;
        }
        if r - off >= zero && !ball(space, c, r - off).is_subset(&inter) {
            out.containment_ok = false;
        }
        if best.is_none_or(|(b, _)| off < b) {
            best = Some((off, c));
        }
    }
    match best {
        Some((off, c)) => {
            out.center = Some(c);
            out.offset = off;
        }
        None => out.gap = true,
    }

    let inr = inradius_raw(space, &inter).map_or(0, |(r, _)| r);
    out.max_inscribed = space.to_rational(inr);
    if out.radius_bound_applies {
        out.radius_bound_ok = out.max_inscribed <= s + t - d;
    }
    if extension && s <= d && t <= d {
        out.extension_ok = Some((out.max_inscribed - r).abs() <= space.slack());
    }
    out
}

/// Scans every pair `x != y` and every realized `s` from `x`, `t` from `y`.
/// Returns the failing checks (the radius bound and containment statements).
pub fn inscribed_scan(space: &MetricSpace, extension: bool) -> Vec<(BallPair, InscribedCheck)> {
    let n = space.len();
    let mut failures: Vec<(BallPair, InscribedCheck)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|x| {
            let mut local = Vec::new();
            for y in (0..n).filter(|&y| y != x) {
                for &sr in space.realized_from(x) {
                    for &tr in space.realized_from(y) {
                        let (s, t) = (space.to_rational(sr), space.to_rational(tr));
                        let check = inscribed_formula_check(space, x, s, y, t, extension);
                        if !check.passed() {
                            local.push((BallPair { x, s, y, t }, check));
                        }
                    }
                }
            }
            local
        })
        .collect();
    failures.sort_by(|a, b| a.0.cmp(&b.0));
    failures
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: u64) -> MetricSpace {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        MetricSpace::from_unit_edges(&edges).unwrap()
    }

    fn cycle(n: u64) -> MetricSpace {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        MetricSpace::from_unit_edges(&edges).unwrap()
    }

    fn q(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn balls_on_paths_and_cycles() {
        let p5 = path(5);
        assert_eq!(ball(&p5, 0, q(0)).to_vec(), vec![0]);
        assert_eq!(ball(&p5, 0, q(2)).to_vec(), vec![0, 1, 2]);
        assert_eq!(ball(&cycle(4), 0, q(1)).to_vec(), vec![0, 1, 3]);
        assert_eq!(ball_intersection(&p5, 0, q(2), 4, q(3)).to_vec(), vec![1, 2]);
        assert_eq!(ball_intersection(&p5, 2, q(0), 2, q(0)).to_vec(), vec![2]);
        assert!(ball_intersection(&p5, 0, q(1), 4, q(1)).is_empty());
    }

    #[test]
    fn ecc_of_balls_and_pairs() {
        let p5 = path(5);
        let report = ecc_report(&p5, &ball(&p5, 0, q(2)));
        assert_eq!(report.eccentricity, q(0));
        let report = ecc_report(&p5, &PointSet::from_points(5, [1, 2]));
        assert_eq!(report.inradius, q(0));
        assert_eq!(report.circumradius, q(1));
        assert_eq!(report.eccentricity, q(1));
        assert_eq!(report.incenter, Some(1));
        assert_eq!(report.circumcenter, Some(1));
        let empty = ecc_report(&p5, &PointSet::empty(5));
        assert_eq!(empty.eccentricity, q(0));
        assert_eq!(empty.incenter, None);
    }

    #[test]
    fn subdivided_tree_intersection_is_a_ball() {
        let space = path(5).subdivide(1).unwrap();
        let set = ball_intersection(&space, 0, q(2), space.resolve("4").unwrap(), q(3));
        let labels: Vec<String> = set.iter().map(|p| space.label(p).to_string()).collect();
        assert_eq!(labels, vec!["1", "2", "(1,2,1)"]);
        let report = ecc_report(&space, &set);
        assert_eq!(report.eccentricity, q(0));
        assert_eq!(report.inradius, Rational::new(1, 2));
        assert_eq!(space.label(report.incenter.unwrap()).to_string(), "(1,2,1)");
    }

    #[test]
    fn hausdorff_examples() {
        let p5 = path(5);
        let a = PointSet::from_points(5, [0, 1]);
        let b = PointSet::from_points(5, [3, 4]);
        assert_eq!(hausdorff(&p5, &a, &a).unwrap().value, q(0));
        assert_eq!(hausdorff(&p5, &a, &b).unwrap().value, q(3));
        let s = PointSet::from_points(5, [1, 2]);
        assert_eq!(hausdorff(&p5, &s, &ball(&p5, 1, q(1))).unwrap().value, q(1));
        assert_eq!(hausdorff(&p5, &s, &PointSet::empty(5)), Err(BallsError::EmptySet));
    }

    #[test]
    fn nearest_ball_examples() {
        let p5 = path(5);
        let set = ball(&p5, 1, q(1));
        let (b, v) = nearest_ball_hausdorff(&p5, &set).unwrap();
        // {0,1,2} is also ball(0, 2); the smaller center wins.
        assert_eq!((b.center, b.radius, v), (0, q(2), q(0)));
        assert_eq!(ball(&p5, b.center, b.radius), set);
        let (b, v) = nearest_ball_hausdorff(&p5, &PointSet::from_points(5, [1, 2])).unwrap();
        assert_eq!(v, q(1));
        assert_eq!((b.center, b.radius), (0, q(1)));
        // Star with three unit legs, two leaves.
        let star = MetricSpace::from_unit_edges(&[(0, 1), (0, 2), (0, 3)]).unwrap();
        let (_, v) = nearest_ball_hausdorff(&star, &PointSet::from_points(4, [1, 2])).unwrap();
        assert_eq!(v, q(1));
    }

    #[test]
    fn ball_pair_scans() {
        assert_eq!(max_ball_pair_ecc(&path(5), RadiusPolicy::AllRealized).max_ecc, q(1));
        let tree = MetricSpace::from_unit_edges(&[(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        let sub = tree.subdivide(1).unwrap();
        let scan = scan_ball_pairs(&sub, RadiusPolicy::HalfIntegral, ScanTargets::BOTH);
        assert_eq!(scan.max_ecc, q(0));
        assert_eq!(scan.max_hausdorff, q(0));
        assert!(scan.ecc_witness.is_none());
    }

    #[test]
    fn inscribed_examples() {
        let space = path(5).subdivide(1).unwrap();
        let x = space.resolve("0").unwrap();
        let y = space.resolve("4").unwrap();
        let check = inscribed_formula_check(&space, x, q(2), y, q(3), false);
        assert!(!check.vacuous);
        assert_eq!(check.prescribed_radius, Rational::new(1, 2));
        assert_eq!(space.label(check.center.unwrap()).to_string(), "(1,2,1)");
        assert!(check.passed());

        let c8 = cycle(8);
        let check = inscribed_formula_check(&c8, 0, q(3), 4, q(3), true);
        assert!(check.radius_bound_applies);
        assert!(check.max_inscribed <= q(2));
        assert!(check.passed());
    }
}
