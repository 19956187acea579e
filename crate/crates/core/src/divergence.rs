//! Divergence profiles of geodesics from a common basepoint.
//!
//! `f_D(r)` is the smallest synchronous distance `r` time units after a pair
//! of geodesics from a common basepoint was at least `D` apart; `e(r)` is the
//! shortest detour between the same two points that avoids the open ball
//! around the basepoint. Both are taken over every basepoint, every pair of
//! geodesics and every integer start time, by lockstep dynamic programming
//! over synchronous pairs rather than by sampling geodesics.
//!
//! Empirical infima over a finite space are upper bounds on the infima over
//! a space containing it, and suprema read off a finite window are lower
//! bounds; every output carries the flags saying so.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::metric::MetricSpace;
use crate::rational::{ceil_scaled, is_scaled_integral, to_pq, Rational};
use crate::sync::PairDag;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DivergenceError {
    #[error("D must be positive")]
    NonPositiveD,
    #[error("lockstep scans need all geodesic edges to have one weight 1/m; subdivide first")]
    NonUniformWeights,
    #[error("no pair of geodesics from a common basepoint is ever D apart at an integer time")]
    NoQualifyingPair,
    #[error("profile is empty")]
    EmptyProfile,
    #[error("divergence constants are defined from an f_D profile, not an e profile")]
    WrongMode,
    #[error("precondition violated: {0}")]
    Precondition(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileMode {
    F,
    E,
}

impl ProfileMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProfileMode::F => "f",
            ProfileMode::E => "e",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ProfileValue {
    Finite(Rational),
    Infinite,
}

impl ProfileValue {
    pub fn finite(&self) -> Option<Rational> {
        match self {
            ProfileValue::Finite(v) => Some(*v),
            ProfileValue::Infinite => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            ProfileValue::Finite(v) => json!(to_pq(v)),
            ProfileValue::Infinite => json!("inf"),
        }
    }
}

/// Basepoint, start time `R` and the two points at time `R + r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct DivergenceWitness {
    pub basepoint: usize,
    pub start: u64,
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileSample {
    pub r: u64,
    pub value: ProfileValue,
    pub witness: Option<DivergenceWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivergenceProfile {
    pub d: Rational,
    pub mode: ProfileMode,
    /// Strictly increasing in `r`; only times at which some qualifying pair
    /// of geodesics is still defined appear.
    pub samples: Vec<ProfileSample>,
    pub flags: Vec<String>,
}

impl DivergenceProfile {
    pub fn value_at(&self, r: u64) -> Option<ProfileValue> {
        self.samples
            .binary_search_by_key(&r, |s| s.r)
            .ok()
            .map(|i| self.samples[i].value)
    }

    pub fn to_json(&self, space: &MetricSpace) -> Value {
        json!({
            "D": to_pq(&self.d),
            "mode": self.mode.as_str(),
            "samples": self.samples.iter().map(|s| json!({
                "r": s.r,
                "value": s.value.to_json(),
                "witness": s.witness.map(|w| json!({
                    "basepoint": space.label(w.basepoint),
                    "R": w.start,
                    "points": [space.label(w.a), space.label(w.b)],
                })),
            })).collect::<Vec<_>>(),
            "flags": self.flags,
        })
    }
}

/// `f_D(r)` for integer `0 <= r <= r_max`.
pub fn estimate_f_d(space: &MetricSpace, d: Rational, r_max: u64) -> Result<DivergenceProfile, DivergenceError> {
    profile(space, d, r_max, ProfileMode::F)
}

/// `e(r)` for integer `0 <= r <= r_max`.
pub fn estimate_e(space: &MetricSpace, d: Rational, r_max: u64) -> Result<DivergenceProfile, DivergenceError> {
    profile(space, d, r_max, ProfileMode::E)
}

type Best = Option<(i64, DivergenceWitness)>;

fn better(candidate: (i64, DivergenceWitness), current: &Best) -> bool {
    match current {
        None => true,
        Some(cur) => candidate < *cur,
    }
}

fn profile(
    space: &MetricSpace,
    d: Rational,
    r_max: u64,
    mode: ProfileMode,
) -> Result<DivergenceProfile, DivergenceError> {
    if d <= Rational::from_integer(0) {
        return Err(DivergenceError::NonPositiveD);
    }
    if space.unit_step().is_none() {
        return Err(DivergenceError::NonUniformWeights);
    }
    let d_raw = ceil_scaled(&d, space.unit());
    let per_base: Vec<Vec<Best>> = (0..space.len())
        .into_par_iter()
        .map(|x| {
            let dag = PairDag::new(space, x).expect("uniform weights checked");
            profile_from(&dag, d_raw, r_max, mode)
        })
        .collect();

    let mut merged: Vec<Best> = vec![None; r_max as usize + 1];
    for rows in per_base {
        for (r, best) in rows.into_iter().enumerate() {
            if let Some(c) = best {
                if better(c, &merged[r]) {
                    merged[r] = Some(c);
                }
            }
        }
    }
    let mut samples = Vec::new();
    for (r, best) in merged.into_iter().enumerate() {
        let Some((v, w)) = best else { continue };
        let value = if r == 0 {
            ProfileValue::Finite(d)
        } else if v == i64::MAX {
            ProfileValue::Infinite
        } else {
            ProfileValue::Finite(space.to_rational(v))
        };
        samples.push(ProfileSample {
            r: r as u64,
            value,
            witness: Some(w),
        });
    }
    if samples.is_empty() {
        return Err(DivergenceError::NoQualifyingPair);
    }
    Ok(DivergenceProfile {
        d,
        mode,
        samples,
        flags: vec![
            "exhaustive-pairs".into(),
            "finite-space-infimum-is-upper-bound".into(),
            "value-at-0-is-D-by-definition".into(),
        ],
    })
}

fn profile_from(dag: &PairDag<'_>, d_raw: i64, r_max: u64, mode: ProfileMode) -> Vec<Best> {
    let m = dag.per_unit;
    let times = dag.depth() / m;
    let space = dag.space;
    let x = dag.x;
    let mut out: Vec<Best> = vec![None; r_max as usize + 1];

    let mut current: Vec<FixedBitSet> = (0..=times)
        .map(|tau| {
            let k = tau * m;
            let mut set = dag.empty_set(k);
            for (i, j) in dag.states(k) {
                if dag.gap(k, i, j) >= d_raw {
                    set.insert(dag.index(k, i, j));
                }
            }
            set
        })
        .collect();

    let mut detours: HashMap<usize, Vec<i64>> = HashMap::new();
    for r in 0..=r_max as usize {
        if r > 0 {
            let mut next: Vec<FixedBitSet> = (0..=times).map(|tau| dag.empty_set(tau * m)).collect();
            for tau in r..=times {
                let mut set = current[tau - 1].clone();
                for k in (tau - 1) * m..tau * m {
                    set = dag.step(k, &set);
                }
                next[tau] = set;
            }
            current = next;
        }
        let mut best: Best = None;
        let mut any = false;
        for tau in r..=times {
            let k = tau * m;
            let w = dag.width(k);
            for idx in current[tau].ones() {
                any = true;
                let (a, b) = dag.points(k, idx / w, idx % w);
                let value = match mode {
                    ProfileMode::F => space.raw(a, b),
                    ProfileMode::E if a == b => 0,
                    ProfileMode::E => {
                        let row = detours.entry(a).or_insert_with(|| {
                            let floor = space.raw(x, a);
                            space.restricted_distances(a, |v| space.raw(x, v) >= floor)
                        });
                        row[b]
                    }
                };
                let witness = DivergenceWitness {
                    basepoint: x,
                    start: (tau - r) as u64,
                    a: a.min(b),
                    b: a.max(b),
                };
                if better((value, witness), &best) {
                    best = Some((value, witness));
                }
            }
        }
        if !any {
            break;
        }
        out[r] = best;
    }
    out
}

/// `N = 1 + 3D + sup{r : f_D(r) < 9D}` and `u = sup{t : f_D(t) < 4N + 2}`
/// read off a finite profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivergenceConstants {
    pub n: Rational,
    pub u: Rational,
    pub d: Rational,
    /// The supremum defining `N` sits at the last sample of the window.
    pub n_window_limited: bool,
    pub u_window_limited: bool,
}

impl DivergenceConstants {
    pub fn to_json(&self) -> Value {
        json!({
            "D": to_pq(&self.d),
            "N": to_pq(&self.n),
            "u": to_pq(&self.u),
            "N_window_limited": self.n_window_limited,
            "u_window_limited": self.u_window_limited,
            "flags": ["empirical", "finite-window-supremum-is-lower-bound"],
        })
    }
}

pub fn divergence_constants(profile: &DivergenceProfile) -> Result<DivergenceConstants, DivergenceError> {
    if profile.mode != ProfileMode::F {
        return Err(DivergenceError::WrongMode);
    }
    let last = profile.samples.last().ok_or(DivergenceError::EmptyProfile)?.r;
    let sup_below = |bound: Rational| -> u64 {
        profile
            .samples
            .iter()
            .filter(|s| s.value.finite().is_some_and(|v| v < bound))
            .map(|s| s.r)
            .max()
            .unwrap_or(0)
    };
    let d = profile.d;
    let sup_n = sup_below(d * 9);
    let n = Rational::from_integer(1) + d * 3 + Rational::from_integer(sup_n as i64);
    let sup_u = sup_below(n * 4 + 2);
    Ok(DivergenceConstants {
        n,
        u: Rational::from_integer(sup_u as i64),
        d,
        n_window_limited: sup_n == last,
        u_window_limited: sup_u == last,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorridorViolation {
    pub basepoint: usize,
    pub time: u64,
    pub a: usize,
    pub b: usize,
    pub distance: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorridorCheck {
    pub lower: Rational,
    pub upper: Rational,
    /// Number of (basepoint, time, pair) states lying between a start and an
    /// end of some qualifying pair of geodesics.
    pub states_checked: u64,
    pub violations: Vec<CorridorViolation>,
}

impl CorridorCheck {
    pub fn vacuous(&self) -> bool {
        self.states_checked == 0
    }
}

/// Checks that the synchronous distance stays within
/// `[D/K - 2ε, KT + 2Kε]` between a time where it is at least `D` and a
/// later time where it equals `T`, for every pair of geodesics from every
/// basepoint. `K` and `ε` are the measured bigon-thinness parameters.
pub fn corridor_bounds_check(
    space: &MetricSpace,
    k: Rational,
    eps: Rational,
    d: Rational,
    t: Rational,
) -> Result<CorridorCheck, DivergenceError> {
    let zero = Rational::from_integer(0);
    if k < Rational::from_integer(1) {
        return Err(DivergenceError::Precondition("K >= 1".into()));
    }
    if eps < zero {
        return Err(DivergenceError::Precondition("eps >= 0".into()));
    }
    if d < k * eps * 2 {
        return Err(DivergenceError::Precondition("D >= 2K eps".into()));
    }
    let lower = d / k - eps * 2;
    let upper = k * t + k * eps * 2;
    if t < lower {
        return Err(DivergenceError::Precondition("T >= D/K - 2 eps".into()));
    }
    if d <= zero {
        return Err(DivergenceError::NonPositiveD);
    }
    if space.unit_step().is_none() {
        return Err(DivergenceError::NonUniformWeights);
    }
    let unit = space.unit();
    let d_raw = ceil_scaled(&d, unit);
    let t_raw = if is_scaled_integral(&t, unit) {
        Some((t * unit).to_integer())
    } else {
        None
    };
    let per_base: Vec<(u64, Vec<CorridorViolation>)> = (0..space.len())
        .into_par_iter()
        .map(|x| {
            let dag = PairDag::new(space, x).expect("uniform weights checked");
            corridor_from(&dag, d_raw, t_raw, lower, upper)
        })
        .collect();
    let mut check = CorridorCheck {
        lower,
        upper,
        states_checked: 0,
        violations: Vec::new(),
    };
    for (count, v) in per_base {
        check.states_checked += count;
        check.violations.extend(v);
    }
    Ok(check)
}

fn corridor_from(
    dag: &PairDag<'_>,
    d_raw: i64,
    t_raw: Option<i64>,
    lower: Rational,
    upper: Rational,
) -> (u64, Vec<CorridorViolation>) {
    let Some(t_raw) = t_raw else {
        return (0, Vec::new());
    };
    let m = dag.per_unit;
    let times = dag.depth() / m;
    let space = dag.space;
    let marked = |pred: &dyn Fn(i64) -> bool| -> Vec<FixedBitSet> {
        (0..=times)
            .map(|tau| {
                let k = tau * m;
                let mut set = dag.empty_set(k);
                for (i, j) in dag.states(k) {
                    if pred(dag.gap(k, i, j)) {
                        set.insert(dag.index(k, i, j));
                    }
                }
                set
            })
            .collect()
    };
    let seeds = marked(&|g| g >= d_raw);
    let ends = marked(&|g| g == t_raw);

    let forward = |set: &FixedBitSet, tau: usize| -> FixedBitSet {
        let mut s = set.clone();
        for k in tau * m..(tau + 1) * m {
            s = dag.step(k, &s);
        }
        s
    };
    let backward = |set: &FixedBitSet, tau: usize| -> FixedBitSet {
        // From layer (tau + 1) m back to tau m.
        let mut s = set.clone();
        for k in (tau * m..(tau + 1) * m).rev() {
            s = dag.step_back(k, &s);
        }
        s
    };

    let mut fw0 = seeds.clone();
    let mut fw1: Vec<FixedBitSet> = (0..=times).map(|tau| dag.empty_set(tau * m)).collect();
    for tau in 1..=times {
        let moved = forward(&fw0[tau - 1], tau - 1);
        fw1[tau] = moved.clone();
        fw0[tau].union_with(&moved);
    }
    let mut bw0 = ends.clone();
    let mut bw1: Vec<FixedBitSet> = (0..=times).map(|tau| dag.empty_set(tau * m)).collect();
    for tau in (0..times).rev() {
        let moved = backward(&bw0[tau + 1], tau);
        bw1[tau] = moved.clone();
        bw0[tau].union_with(&moved);
    }

    let unit = space.unit();
    let mut count = 0u64;
    let mut violations = Vec::new();
    for tau in 0..=times {
        let k = tau * m;
        let w = dag.width(k);
        let mut a = fw0[tau].clone();
        a.intersect_with(&bw1[tau]);
        let mut b = fw1[tau].clone();
        b.intersect_with(&bw0[tau]);
        a.union_with(&b);
        for idx in a.ones() {
            count += 1;
            let (p, q) = dag.points(k, idx / w, idx % w);
            let dist = Rational::new(space.raw(p, q), unit);
            if dist < lower || dist > upper {
                violations.push(CorridorViolation {
                    basepoint: dag.x,
                    time: tau as u64,
                    a: p.min(q),
                    b: p.max(q),
                    distance: dist,
                });
            }
        }
    }
    (count, violations)
}

/// Outcome of checking `f_D(N) >= 3D - slack`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripledSeparationCheck {
    /// `N` is integral and bracketed by the profile window.
    pub applicable: bool,
    pub value: Option<ProfileValue>,
    pub passed: bool,
}

pub fn tripled_separation_check(
    profile: &DivergenceProfile,
    constants: &DivergenceConstants,
    slack: Rational,
) -> TripledSeparationCheck {
    if constants.n_window_limited || !constants.n.is_integer() {
        return TripledSeparationCheck {
            applicable: false,
            value: None,
            passed: true,
        };
    }
    let value = profile.value_at(constants.n.to_integer() as u64);
    let passed = match value {
        None | Some(ProfileValue::Infinite) => true,
        Some(ProfileValue::Finite(v)) => v >= constants.d * 3 - slack,
    };
    TripledSeparationCheck {
        applicable: true,
        value,
        passed,
    }
}

/// One exponential-growth comparison `e(u + kN + 1) > (3/2)^k (4N + 2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthCheck {
    pub k: u64,
    pub r: u64,
    pub value: ProfileValue,
    pub bound: BigRational,
    pub passed: bool,
}

/// Every `k >= 1` whose time `u + kN + 1` falls inside the `e` profile.
pub fn exponential_growth_check(e_profile: &DivergenceProfile, constants: &DivergenceConstants) -> Vec<GrowthCheck> {
    let mut out = Vec::new();
    if !constants.n.is_integer() || !constants.u.is_integer() {
        return out;
    }
    let n = constants.n.to_integer() as u64;
    let u = constants.u.to_integer() as u64;
    let Some(last) = e_profile.samples.last().map(|s| s.r) else {
        return out;
    };
    let base = BigRational::from_integer(BigInt::from(4 * n + 2));
    let ratio = BigRational::new(BigInt::from(3), BigInt::from(2));
    let mut bound = base;
    for k in 1.. {
        let r = u + k * n + 1;
        if r > last {
            break;
        }
        bound = &bound * &ratio;
        let Some(value) = e_profile.value_at(r) else { continue };
        let passed = match value {
            ProfileValue::Infinite => true,
            ProfileValue::Finite(v) => BigRational::new(BigInt::from(*v.numer()), BigInt::from(*v.denom())) > bound,
        };
        out.push(GrowthCheck {
            k,
            r,
            value,
            bound: bound.clone(),
            passed,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn synthetic(values: impl Iterator<Item = (u64, i64)>) -> DivergenceProfile {
        DivergenceProfile {
            d: q(2),
            mode: ProfileMode::F,
            samples: values
                .map(|(r, v)| ProfileSample {
                    r,
                    value: ProfileValue::Finite(q(v)),
                    witness: None,
                })
                .collect(),
            flags: Vec::new(),
        }
    }

    #[test]
    fn constants_from_linear_profile() {
        let profile = synthetic((0..=40).map(|r| (r, 2 + 2 * r as i64)));
        let c = divergence_constants(&profile).unwrap();
        assert_eq!(c.n, q(14));
        assert_eq!(c.u, q(27));
        assert!(!c.n_window_limited && !c.u_window_limited);
    }

    #[test]
    fn constant_profile_is_window_limited() {
        let profile = synthetic((0..=10).map(|r| (r, 2)));
        let c = divergence_constants(&profile).unwrap();
        assert!(c.n_window_limited);
        assert!(c.u_window_limited);
    }

    #[test]
    fn empty_and_wrong_mode() {
        let empty = synthetic(std::iter::empty());
        assert_eq!(divergence_constants(&empty), Err(DivergenceError::EmptyProfile));
        let mut e = synthetic((0..3).map(|r| (r, 2)));
        e.mode = ProfileMode::E;
        assert_eq!(divergence_constants(&e), Err(DivergenceError::WrongMode));
    }

    #[test]
    fn c6_profile() {
        let edges: Vec<_> = (0..6u64).map(|i| (i, (i + 1) % 6)).collect();
        let c6 = MetricSpace::from_unit_edges(&edges).unwrap();
        let f = estimate_f_d(&c6, q(2), 5).unwrap();
        // The pair through 2 and 4 (2 apart at time 2) meets at the antipode 3.
        assert_eq!(f.value_at(0), Some(ProfileValue::Finite(q(2))));
        assert_eq!(f.value_at(1), Some(ProfileValue::Finite(q(0))));
        assert_eq!(f.value_at(2), Some(ProfileValue::Finite(q(0))));
        assert_eq!(f.value_at(3), None);
    }

    #[test]
    fn corridor_preconditions() {
        let p3 = MetricSpace::from_unit_edges(&[(0, 1), (1, 2)]).unwrap();
        let err = corridor_bounds_check(&p3, q(4), q(1), q(4), q(2)).unwrap_err();
        assert!(matches!(err, DivergenceError::Precondition(_)));
        let ok = corridor_bounds_check(&p3, q(4), q(0), q(100), q(100)).unwrap();
        assert!(ok.vacuous());
    }
}
