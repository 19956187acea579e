//! Comparison-triangle distances against closed forms in the model planes.

use curvlab::cat::{comparison_distance, comparison_distance_at, ecc_kappa};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sides `(s, t, d)` satisfying the triangle inequality.
fn triangle(max: f64) -> impl Strategy<Value = (f64, f64, f64)> {
    (0.01..max, 0.01..max, 0.01..max).prop_filter("triangle", |&(s, t, d)| s <= t + d && t <= s + d && d <= s + t)
}

/// Cevian length from Stewart's theorem.
fn stewart(s: f64, t: f64, d: f64, r: f64) -> f64 {
    ((s * s * (d - r) + t * t * r) / d - r * (d - r)).max(0.0).sqrt()
}

/// Same distance computed with explicit points on the hyperboloid
/// `-x0^2 + x1^2 + x2^2 = -1`, scaled to curvature `kappa`.
fn hyperboloid(kappa: f64, s: f64, t: f64, d: f64, r: f64) -> f64 {
    let k = (-kappa).sqrt();
    let (s, t, d, r) = (k * s, k * t, k * d, k * r);
    let cos_a = ((s.cosh() * d.cosh() - t.cosh()) / (s.sinh() * d.sinh())).clamp(-1.0, 1.0);
    let sin_a = (1.0 - cos_a * cos_a).sqrt();
    let z = [s.cosh(), s.sinh() * cos_a, s.sinh() * sin_a];
    let p = [r.cosh(), r.sinh(), 0.0];
    let inner = z[0] * p[0] - z[1] * p[1] - z[2] * p[2];
    inner.max(1.0).acosh() / k
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn flat_plane_matches_stewart((s, t, d) in triangle(20.0), frac in 0.0..=1.0f64) {
        let r = frac * d;
        let got = comparison_distance_at(0.0, s, t, d, r).unwrap();
        prop_assert!(close(got, stewart(s, t, d, r), 1e-9), "{} vs {}", got, stewart(s, t, d, r));
    }

    #[test]
    fn hyperbolic_plane_matches_hyperboloid((s, t, d) in triangle(4.0), frac in 0.0..=1.0f64, kappa in -3.0..-0.05f64) {
        let r = frac * d;
        let got = comparison_distance_at(kappa, s, t, d, r).unwrap();
        let want = hyperboloid(kappa, s, t, d, r);
        prop_assert!(close(got, want, 1e-6), "{} vs {}", got, want);
    }

    #[test]
    fn thinner_with_more_negative_curvature((s, t, d) in triangle(10.0), k1 in -4.0..0.0f64, k2 in -4.0..0.0f64) {
        let (lo, hi) = if k1 <= k2 { (k1, k2) } else { (k2, k1) };
        let a = ecc_kappa(lo, s, t, d).unwrap();
        let b = ecc_kappa(hi, s, t, d).unwrap();
        prop_assert!(a <= b + 1e-9 * (1.0 + b), "ecc({}) = {} > ecc({}) = {}", lo, a, hi, b);
    }

    #[test]
    fn continuous_as_curvature_vanishes((s, t, d) in triangle(10.0)) {
        let flat = ecc_kappa(0.0, s, t, d).unwrap();
        let near = ecc_kappa(-1e-10, s, t, d).unwrap();
        prop_assert!((flat - near).abs() <= 1e-6 * (1.0 + flat), "{} vs {}", flat, near);
    }
}

#[test]
fn eccentricity_is_nonnegative_on_random_triangles() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 10_000 {
        let (s, t, d): (f64, f64, f64) = (
            rng.gen_range(0.0..50.0),
            rng.gen_range(0.0..50.0),
            rng.gen_range(0.0..50.0),
        );
        if s > t + d || t > s + d || d > s + t {
            continue;
        }
        let kappa = -rng.gen_range(0.0..5.0f64);
        let e = ecc_kappa(kappa, s, t, d).unwrap();
        assert!(e >= 0.0 && e.is_finite(), "ecc_kappa({kappa}, {s}, {t}, {d}) = {e}");
        checked += 1;
    }
}

#[test]
fn degenerate_triangles_have_zero_eccentricity() {
    for kappa in [0.0, -1.0, -10.0] {
        assert_eq!(ecc_kappa(kappa, 3.0, 4.0, 7.0).unwrap(), 0.0);
        assert_eq!(ecc_kappa(kappa, 0.0, 5.0, 5.0).unwrap(), 0.0);
        assert!(comparison_distance(kappa, 2.0, 2.0, 4.0).unwrap().abs() < 1e-9);
    }
}

#[test]
fn equilateral_flat_triangle() {
    // the comparison point is the base midpoint: the altitude
    let h = comparison_distance(0.0, 2.0, 2.0, 2.0).unwrap();
    assert!((h - 3f64.sqrt()).abs() < 1e-12);
    assert!((ecc_kappa(0.0, 2.0, 2.0, 2.0).unwrap() - (3f64.sqrt() - 1.0)).abs() < 1e-12);
}
