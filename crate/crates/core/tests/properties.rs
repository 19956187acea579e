//! Invariants of metric spaces, ball intersections and hyperbolicity scans.

mod common;

use common::small_graph;
use curvlab::balls::{ball, ecc_report, inscribed_scan, scan_ball_pairs, RadiusPolicy, ScanTargets};
use curvlab::generate::{generate, generate_edges, write_edge_list, GenKind, GenSpec};
use curvlab::hyperbolicity::{delta_four_point, delta_slim, kpath_travel_check, synchronous_scan};
use curvlab::rational::{parse_rational, to_pq};
use curvlab::{PointLabel, Rational};
use proptest::prelude::*;

fn label() -> impl Strategy<Value = PointLabel> {
    let leaf = any::<u32>().prop_map(|v| PointLabel::Id(v as u64));
    leaf.prop_recursive(3, 8, 2, |inner| {
        (inner.clone(), inner, 1u32..9).prop_map(|(a, b, i)| PointLabel::Sub(Box::new(a), Box::new(b), i))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rationals_round_trip(p in -10_000i64..10_000, q in 1i64..500) {
        let r = Rational::new(p, q);
        prop_assert_eq!(parse_rational(&to_pq(&r)).unwrap(), r);
    }

    #[test]
    fn labels_round_trip(l in label()) {
        let text = l.to_string();
        prop_assert_eq!(text.parse::<PointLabel>().unwrap(), l);
    }

    #[test]
    fn metric_axioms(g in small_graph(9, 5)) {
        let s = g.space();
        let n = s.len();
        for i in 0..n {
            prop_assert_eq!(s.raw(i, i), 0);
            for j in 0..n {
                prop_assert_eq!(s.raw(i, j), s.raw(j, i));
                if i != j {
                    prop_assert!(s.raw(i, j) > 0);
                }
                for k in 0..n {
                    prop_assert!(s.raw(i, k) <= s.raw(i, j) + s.raw(j, k));
                }
            }
        }
    }

    #[test]
    fn subdivision_preserves_original_distances(g in small_graph(7, 3), k in 1u32..3) {
        let s = g.space();
        let sub = s.subdivide(k).unwrap();
        prop_assert_eq!(sub.len(), s.len() + k as usize * s.edges().len());
        for i in 0..s.len() {
            for j in 0..s.len() {
                let (a, b) = (sub.index_of(s.label(i)).unwrap(), sub.index_of(s.label(j)).unwrap());
                prop_assert_eq!(sub.dist(a, b), s.dist(i, j));
            }
        }
        // pieces of a non-tight edge can be tight, so slack may exceed slack / (k + 1)
        let pieces = k as i64 + 1;
        let heaviest = g.edges.iter().map(|e| e.2).max().unwrap();
        prop_assert!(sub.slack() >= s.slack() / pieces);
        prop_assert!(sub.slack() <= Rational::new(heaviest, pieces));
    }

    #[test]
    fn balls_have_zero_eccentricity(g in small_graph(8, 3), c in 0usize..8, p in 0usize..8) {
        let s = g.space();
        let (c, p) = (c % s.len(), p % s.len());
        let b = ball(&s, c, s.dist(c, p));
        prop_assert_eq!(ecc_report(&s, &b).eccentricity, Rational::from_integer(0));
    }

    #[test]
    fn eccentricity_and_hausdorff_within_twice_slim_constant(g in small_graph(8, 2)) {
        let s = g.space();
        let slim = delta_slim(&s);
        let bound = slim.value * 2 + s.slack() * 2;
        let scan = scan_ball_pairs(&s, RadiusPolicy::AllRealized, ScanTargets::BOTH);
        prop_assert!(scan.max_ecc <= bound, "ecc {} > {}", scan.max_ecc, bound);
        prop_assert!(scan.max_hausdorff <= bound, "hausdorff {} > {}", scan.max_hausdorff, bound);
    }

    #[test]
    fn four_point_and_slim_constants_vanish_together_on_trees(n in 3usize..30, seed in any::<u64>()) {
        let s = generate(&GenSpec::new(GenKind::Tree).n(n).seed(seed)).unwrap();
        prop_assert_eq!(delta_four_point(&s).value, Rational::from_integer(0));
        prop_assert_eq!(delta_slim(&s).value, Rational::from_integer(0));
    }

    #[test]
    fn synchronous_distances_stay_bounded(g in small_graph(8, 1)) {
        let s = g.space();
        let scan = synchronous_scan(&s, 100_000);
        prop_assert!(!scan.truncated);
        prop_assert_eq!(scan.violations, 0, "{:?}", scan.first_violation);
    }

    #[test]
    fn inscribed_ball_statements_hold(g in small_graph(7, 1)) {
        let s = g.space().subdivide(1).unwrap();
        let failures = inscribed_scan(&s, false);
        prop_assert!(failures.is_empty(), "{:?}", failures.first());
    }

    #[test]
    fn broken_geodesics_travel_close(g in small_graph(8, 2)) {
        let s = g.space();
        let eps = scan_ball_pairs(&s, RadiusPolicy::AllRealized, ScanTargets::ECC).max_ecc;
        let check = kpath_travel_check(&s, eps, 2);
        prop_assert_eq!(check.violations, 0, "{:?}", check.first_violation);
    }

    #[test]
    fn generators_are_deterministic_and_connected(kind in 0usize..6, n in 3usize..12, seed in any::<u64>()) {
        let spec = match kind {
            0 => GenSpec::new(GenKind::Tree).n(n),
            1 => GenSpec::new(GenKind::BinaryTree).depth((n % 4) as u32 + 1),
            2 => GenSpec::new(GenKind::Cycle).n(n),
            3 => GenSpec::new(GenKind::Grid).n(n).m(n / 2 + 1),
            4 => GenSpec::new(GenKind::Torus).n(n).m(3),
            _ => GenSpec::new(GenKind::RandomGraph).n(n).m(2 * n),
        }
        .seed(seed);
        let edges = generate_edges(&spec).unwrap();
        prop_assert_eq!(&edges, &generate_edges(&spec).unwrap());
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_edge_list(&spec, &edges, &mut a).unwrap();
        write_edge_list(&spec, &edges, &mut b).unwrap();
        prop_assert_eq!(a, b);
        // building the space fails on disconnected graphs
        let s = generate(&spec).unwrap();
        if matches!(spec.kind, GenKind::Tree | GenKind::BinaryTree) {
            prop_assert_eq!(s.edges().len(), s.len() - 1);
        }
        if spec.kind == GenKind::Torus {
            prop_assert!((0..s.len()).all(|p| s.neighbors(p).len() == 4));
        }
    }
}
