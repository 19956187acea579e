//! Comparison triangles in the model planes of curvature `κ <= 0`.
//!
//! A triangle with sides `s = d(x,z)`, `t = d(y,z)`, `d = d(x,y)` is drawn in
//! the Euclidean plane (`κ = 0`) or the hyperbolic plane of curvature `κ`.
//! `Ecc_κ(s,t,d)` is the distance from the apex `z̄` to the point `c̄` of the
//! base at distance `(d+s-t)/2` from `x̄`, minus `(s+t-d)/2`.
//!
//! This is the only floating-point module of the crate.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::balls::{ball, eccentricity_raw, policy_centers, radii_for, BallPair, PointSet, RadiusPolicy};
use crate::metric::MetricSpace;
use crate::rational::{to_pq, Rational};

/// Margin below which a comparison counts as satisfied.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Domain violations up to this size are rounding and get clamped.
const CLAMP: f64 = 1e-12;
/// Violations kept in a report (all are counted).
const MAX_REPORTED: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatError {
    #[error("curvature must be <= 0, got {0}")]
    PositiveCurvature(f64),
    #[error("side lengths must be finite and nonnegative: s = {s}, t = {t}, d = {d}")]
    BadSide { s: f64, t: f64, d: f64 },
    #[error("sides s = {s}, t = {t}, d = {d} violate the triangle inequality")]
    Triangle { s: f64, t: f64, d: f64 },
    #[error("position {r} lies outside the base [0, {d}]")]
    Position { r: f64, d: f64 },
    #[error("the space does not pass the geodesic extension check")]
    ExtensionRequired,
}

fn validate(kappa: f64, s: f64, t: f64, d: f64) -> Result<(), CatError> {
    if kappa.is_nan() || kappa > 0.0 {
        return Err(CatError::PositiveCurvature(kappa));
    }
    if [s, t, d].iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(CatError::BadSide { s, t, d });
    }
    let tol = CLAMP * (1.0 + s + t + d);
    if s > t + d + tol || t > s + d + tol || d > s + t + tol {
        return Err(CatError::Triangle { s, t, d });
    }
    Ok(())
}

/// `ln sinh(x)` for `x >= 0` (`-inf` at 0), without overflow.
fn ln_sinh(x: f64) -> f64 {
    if x <= 0.0 {
        f64::NEG_INFINITY
    } else if x < 20.0 {
        x.sinh().ln()
    } else {
        x + (-(-2.0 * x).exp()).ln_1p() - std::f64::consts::LN_2
    }
}

/// `ln(e^a + e^b)`.
fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Distance in the model plane from the apex `z̄` to the point of the base
/// at distance `r` from `x̄`.
pub fn comparison_distance_at(kappa: f64, s: f64, t: f64, d: f64, r: f64) -> Result<f64, CatError> {
    validate(kappa, s, t, d)?;
    if !(r >= -CLAMP * (1.0 + d) && r <= d + CLAMP * (1.0 + d)) {
        return Err(CatError::Position { r, d });
    }
    let r = r.clamp(0.0, d);
    if d == 0.0 || r == 0.0 {
        return Ok(s);
    }
    if s == 0.0 {
        return Ok(r);
    }
    if kappa == 0.0 {
        let zx = (s * s + d * d - t * t) / (2.0 * d);
        let zy = (s * s - zx * zx).max(0.0).sqrt();
        return Ok(((zx - r) * (zx - r) + zy * zy).sqrt());
    }

    // Half-angle form of the hyperbolic law of cosines:
    // sinh²(w/2) = sinh²((S-R)/2) + sinh S sinh R sin²(A/2), with
    // sin²(A/2) = sinh((T+S-D)/2) sinh((T-S+D)/2) / (sinh S sinh D).
    let k = (-kappa).sqrt();
    let (ss, tt, dd, rr) = (k * s, k * t, k * d, k * r);
    let ln_sin2 =
        ln_sinh(((tt + ss - dd) / 2.0).max(0.0)) + ln_sinh(((tt - ss + dd) / 2.0).max(0.0)) - ln_sinh(ss) - ln_sinh(dd);
    let ln_sin2 = ln_sin2.min(0.0);
    let first = 2.0 * ln_sinh((ss - rr).abs() / 2.0);
    let second = ln_sinh(ss) + ln_sinh(rr) + ln_sin2;
    let half_ln = ln_add(first, second) / 2.0;
    let half_w = if half_ln == f64::NEG_INFINITY {
        0.0
    } else if half_ln > 30.0 {
        half_ln + std::f64::consts::LN_2
    } else {
        half_ln.exp().asinh()
    };
    Ok(2.0 * half_w / k)
}

/// `d(z̄, c̄)` with `c̄` at distance `(d+s-t)/2` from `x̄`.
pub fn comparison_distance(kappa: f64, s: f64, t: f64, d: f64) -> Result<f64, CatError> {
    validate(kappa, s, t, d)?;
    let m = ((d + s - t) / 2.0).clamp(0.0, d);
    comparison_distance_at(kappa, s, t, d, m)
}

/// `Ecc_κ(s,t,d) = d(z̄, c̄) - (s+t-d)/2`.
pub fn ecc_kappa(kappa: f64, s: f64, t: f64, d: f64) -> Result<f64, CatError> {
    let v = comparison_distance(kappa, s, t, d)? - (s + t - d) / 2.0;
    if v < 0.0 && v > -CLAMP * (1.0 + s + t + d) {
        return Ok(0.0);
    }
    Ok(v)
}

fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// One point `p` of the side `xy` that is farther from `z` than its
/// comparison point.
#[derive(Debug, Clone, PartialEq)]
pub struct CatViolation {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub p: usize,
    pub distance: Rational,
    pub comparison: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatReport {
    pub kappa: f64,
    pub exhaustive: bool,
    pub triangles: u64,
    pub points_checked: u64,
    pub violation_count: u64,
    /// The largest violations, most severe first.
    pub violations: Vec<CatViolation>,
    pub max_margin: f64,
    pub slack: Rational,
    pub tolerance: f64,
}

impl CatReport {
    pub fn to_json(&self, space: &MetricSpace) -> Value {
        json!({
            "kappa": self.kappa,
            "exhaustive": self.exhaustive,
            "triangles": self.triangles,
            "points_checked": self.points_checked,
            "violation_count": self.violation_count,
            "max_margin": self.max_margin,
            "slack": to_pq(&self.slack),
            "tolerance": self.tolerance,
            "violations": self.violations.iter().map(|v| json!({
                "x": space.label(v.x),
                "y": space.label(v.y),
                "z": space.label(v.z),
                "p": space.label(v.p),
                "distance": to_pq(&v.distance),
                "comparison": v.comparison,
                "margin": v.margin,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Triangle sampling for [`cat_test`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CatSampling {
    /// `None` scans every triangle.
    pub samples: Option<usize>,
    pub seed: u64,
}

/// Checks `d(p, z) <= d(p̄, z̄)` for every point `p` on a geodesic from `x`
/// to `y`, over the triangles `(x, y, z)` selected by `sampling`.
///
/// Every point of the interval `[x, y]` lies on some geodesic, at arc
/// position `d(x, p)`, so scanning the interval covers every geodesic side.
pub fn cat_test(space: &MetricSpace, kappa: f64, sampling: CatSampling, tolerance: f64) -> Result<CatReport, CatError> {
    validate(kappa, 0.0, 0.0, 0.0)?;
    let n = space.len();
    let triangles: Vec<(usize, usize, usize)> = match sampling.samples {
        None => (0..n)
            .flat_map(|x| {
                (x + 1..n).flat_map(move |y| (0..n).filter(move |&z| z != x && z != y).map(move |z| (x, y, z)))
            })
            .collect(),
        Some(count) => {
            let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
            if n < 3 {
                Vec::new()
            } else {
                (0..count)
                    .map(|_| loop {
                        let x = rng.gen_range(0..n);
                        let y = rng.gen_range(0..n);
                        let z = rng.gen_range(0..n);
                        if x != y && y != z && x != z {
                            break (x.min(y), x.max(y), z);
                        }
                    })
                    .collect()
            }
        }
    };

    let results: Vec<(u64, Vec<CatViolation>)> = triangles
        .par_iter()
        .map(|&(x, y, z)| {
            let (s, t, d) = (
                to_f64(space.dist(x, z)),
                to_f64(space.dist(y, z)),
                to_f64(space.dist(x, y)),
            );
            let mut found = Vec::new();
            let interval = space.interval(x, y);
            for &p in &interval {
                let r = to_f64(space.dist(x, p));
                let comparison = comparison_distance_at(kappa, s, t, d, r).expect("metric triangle");
                let actual = space.dist(p, z);
                let margin = to_f64(actual) - comparison;
                if margin > tolerance {
                    found.push(CatViolation {
                        x,
                        y,
                        z,
                        p,
                        distance: actual,
                        comparison,
                        margin,
                    });
                }
            }
            (interval.len() as u64, found)
        })
        .collect();

    let points_checked = results.iter().map(|r| r.0).sum();
    let mut violations: Vec<CatViolation> = results.into_iter().flat_map(|r| r.1).collect();
    let violation_count = violations.len() as u64;
    violations.sort_by(|a, b| {
        b.margin
            .total_cmp(&a.margin)
            .then((a.x, a.y, a.z, a.p).cmp(&(b.x, b.y, b.z, b.p)))
    });
    violations.dedup();
    violations.truncate(MAX_REPORTED);
    Ok(CatReport {
        kappa,
        exhaustive: sampling.samples.is_none(),
        triangles: triangles.len() as u64,
        points_checked,
        violation_count,
        max_margin: violations.first().map_or(0.0, |v| v.margin),
        violations,
        slack: space.slack(),
        tolerance,
    })
}

/// A ball intersection whose eccentricity exceeds `Ecc_κ + slack`.
#[derive(Debug, Clone, PartialEq)]
pub struct CatEccViolation {
    pub pair: BallPair,
    pub eccentricity: Rational,
    pub bound: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatEccReport {
    pub kappa: f64,
    pub policy: RadiusPolicy,
    pub extension: bool,
    pub pairs_checked: u64,
    pub violation_count: u64,
    pub violations: Vec<CatEccViolation>,
    pub max_margin: f64,
    pub slack: Rational,
    pub tolerance: f64,
}

impl CatEccReport {
    pub fn to_json(&self, space: &MetricSpace) -> Value {
        json!({
            "kappa": self.kappa,
            "policy": self.policy.name(),
            "extension": self.extension,
            "pairs_checked": self.pairs_checked,
            "violation_count": self.violation_count,
            "max_margin": self.max_margin,
            "slack": to_pq(&self.slack),
            "tolerance": self.tolerance,
            "violations": self.violations.iter().map(|v| json!({
                "pair": v.pair.to_json(space),
                "eccentricity": to_pq(&v.eccentricity),
                "bound": v.bound,
                "margin": v.margin,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Checks `ecc(ball(x,s) ∩ ball(y,t)) <= Ecc_κ(s, t, d(x,y)) + slack` over
/// the ball pairs of `policy`. Requires [`extension_check`] to pass unless
/// `override_extension` is set.
pub fn cat_ecc_test(
    space: &MetricSpace,
    kappa: f64,
    policy: RadiusPolicy,
    override_extension: bool,
    tolerance: f64,
) -> Result<CatEccReport, CatError> {
    validate(kappa, 0.0, 0.0, 0.0)?;
    let extension = extension_check(space);
    if !extension && !override_extension {
        return Err(CatError::ExtensionRequired);
    }
    let slack = to_f64(space.slack());
    let centers = policy_centers(space, policy);
    let radii: Vec<Vec<Rational>> = (0..space.len())
        .map(|c| {
            if centers.binary_search(&c).is_ok() {
                radii_for(space, c, policy)
            } else {
                Vec::new()
            }
        })
        .collect();

    let tuples: Vec<(usize, usize)> = match policy {
        RadiusPolicy::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = centers.len();
            (0..samples)
                .map(|_| (centers[rng.gen_range(0..n)], centers[rng.gen_range(0..n)]))
                .filter(|(x, y)| x != y)
                .map(|(x, y)| (x.min(y), x.max(y)))
                .collect()
        }
        _ => centers
            .iter()
            .flat_map(|&x| centers.iter().filter(move |&&y| y > x).map(move |&y| (x, y)))
            .collect(),
    };
    let half = policy == RadiusPolicy::HalfIntegral;

    let check =
        |x: usize, y: usize, s: Rational, t: Rational, cache: &mut HashMap<PointSet, i64>| -> Option<CatEccViolation> {
            let d = space.dist(x, y);
            if s + t < d || s > t + d || t > s + d {
                return None;
            }
            let set = ball(space, x, s).intersection(&ball(space, y, t));
            if set.is_empty() {
                return None;
            }
            let raw = *cache.entry(set).or_insert_with_key(|set| eccentricity_raw(space, set));
            let eccentricity = space.to_rational(raw);
            let bound = ecc_kappa(kappa, to_f64(s), to_f64(t), to_f64(d)).expect("radii form a triangle");
            let margin = to_f64(eccentricity) - bound - slack;
            (margin > tolerance).then_some(CatEccViolation {
                pair: BallPair { x, s, y, t },
                eccentricity,
                bound,
                margin,
            })
        };

    let results: Vec<(u64, Vec<CatEccViolation>)> = match policy {
        RadiusPolicy::Sampled { seed, .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
            let mut cache = HashMap::new();
            let mut found = Vec::new();
            for &(x, y) in &tuples {
                let s = radii[x][rng.gen_range(0..radii[x].len())];
                let t = radii[y][rng.gen_range(0..radii[y].len())];
                found.extend(check(x, y, s, t, &mut cache));
            }
            vec![(tuples.len() as u64, found)]
        }
        _ => tuples
            .par_iter()
            .map(|&(x, y)| {
                let mut cache = HashMap::new();
                let mut found = Vec::new();
                let mut count = 0;
                for &s in &radii[x] {
                    for &t in &radii[y] {
                        if half && !(s - t).is_integer() {
                            continue;
                        }
                        count += 1;
                        found.extend(check(x, y, s, t, &mut cache));
                    }
                }
                (count, found)
            })
            .collect(),
    };

    let pairs_checked = results.iter().map(|r| r.0).sum();
    let mut violations: Vec<CatEccViolation> = results.into_iter().flat_map(|r| r.1).collect();
    let violation_count = violations.len() as u64;
    violations.sort_by(|a, b| b.margin.total_cmp(&a.margin).then(a.pair.cmp(&b.pair)));
    violations.truncate(MAX_REPORTED);
    Ok(CatEccReport {
        kappa,
        policy,
        extension,
        pairs_checked,
        violation_count,
        max_margin: violations.first().map_or(0.0, |v| v.margin),
        violations,
        slack: space.slack(),
        tolerance,
    })
}

/// One-step geodesic extensibility: every geodesic edge `u → y` continues
/// to some `w` with `u, y, w` geodesic. Finite spaces cannot extend
/// geodesics forever, so this is a local heuristic. A single point fails.
pub fn extension_check(space: &MetricSpace) -> bool {
    if space.len() < 2 {
        return false;
    }
    (0..space.len()).all(|y| {
        let tight: Vec<usize> = space
            .neighbors(y)
            .iter()
            .filter(|&&(u, w)| space.raw(u, y) == w)
            .map(|&(u, _)| u)
            .collect();
        tight.iter().all(|&u| {
            tight
                .iter()
                .any(|&w| w != u && space.raw(u, w) == space.raw(u, y) + space.raw(y, w))
        })
    })
}
