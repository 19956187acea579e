//! Library results against independent brute-force computations.

mod common;

use std::collections::VecDeque;

use common::{all_geodesics, cycle, small_graph, SmallGraph};
use curvlab::balls::{
    ball, ecc_report, hausdorff, nearest_ball_hausdorff, scan_ball_pairs, PointSet, RadiusPolicy, ScanTargets,
};
use curvlab::divergence::{estimate_e, estimate_f_d, ProfileValue};
use curvlab::hyperbolicity::{delta_four_point, delta_slim};
use curvlab::{MetricSpace, Rational};
use proptest::prelude::*;

fn q(n: i64) -> Rational {
    Rational::from_integer(n)
}

fn brute_delta4(d: &[Vec<i64>]) -> Rational {
    let n = d.len();
    let mut best = 0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for e in 0..n {
                    let s1 = d[a][b] + d[c][e];
                    let s2 = d[a][c] + d[b][e];
                    let s3 = d[a][e] + d[b][c];
                    best = best.max(s1 - s2.max(s3));
                }
            }
        }
    }
    Rational::new(best, 2)
}

/// Slim constant straight from its definition: every triple, every choice
/// of the three geodesic sides, every waypoint of the first side.
fn brute_delta_slim(g: &SmallGraph, d: &[Vec<i64>]) -> i64 {
    let n = g.n;
    let geo: Vec<Vec<Vec<Vec<usize>>>> = (0..n)
        .map(|a| (0..n).map(|b| all_geodesics(g, d, a, b)).collect())
        .collect();
    let dist_to = |p: usize, path: &[usize]| path.iter().map(|&v| d[p][v]).min().unwrap();
    let mut best = 0;
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                for side in &geo[x][y] {
                    for yz in &geo[y][z] {
                        for zx in &geo[z][x] {
                            for &p in side {
                                best = best.max(dist_to(p, yz).min(dist_to(p, zx)));
                            }
                        }
                    }
                }
            }
        }
    }
    best
}

fn brute_eccentricity(space: &MetricSpace, set: &[usize]) -> Rational {
    let n = space.len();
    let circ = (0..n)
        .map(|c| set.iter().map(|&a| space.dist(c, a)).max().unwrap())
        .min()
        .unwrap();
    let mut inr = q(0);
    for &c in set {
        for r in (0..n).map(|p| space.dist(c, p)) {
            if (0..n).filter(|&p| space.dist(c, p) <= r).all(|p| set.contains(&p)) && r > inr {
                inr = r;
            }
        }
    }
    (circ - inr).max(q(0))
}

fn brute_hausdorff(space: &MetricSpace, a: &[usize], b: &[usize]) -> Rational {
    let one = |from: &[usize], to: &[usize]| {
        from.iter()
            .map(|&p| to.iter().map(|&q| space.dist(p, q)).min().unwrap())
            .max()
            .unwrap()
    };
    one(a, b).max(one(b, a))
}

fn subset(n: usize, mask: u32) -> Vec<usize> {
    (0..n).filter(|&i| mask >> (i % 32) & 1 == 1).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn distances_match_floyd_warshall(g in small_graph(9, 4)) {
        let space = g.space();
        let d = g.distances();
        for i in 0..g.n {
            for j in 0..g.n {
                prop_assert_eq!(space.dist(i, j), q(d[i][j]));
            }
        }
    }

    #[test]
    fn four_point_constant_matches_brute_force(g in small_graph(8, 3)) {
        let space = g.space();
        prop_assert_eq!(delta_four_point(&space).value, brute_delta4(&g.distances()));
    }

    #[test]
    fn slim_constant_matches_brute_force(g in small_graph(7, 2)) {
        let space = g.space();
        let d = g.distances();
        let slim = delta_slim(&space);
        prop_assert!(slim.exact);
        prop_assert_eq!(slim.value, q(brute_delta_slim(&g, &d)));
    }

    #[test]
    fn geodesic_enumeration_matches_brute_force(g in small_graph(8, 3)) {
        let space = g.space();
        let d = g.distances();
        for a in 0..g.n {
            for b in 0..g.n {
                let set = space.enumerate_geodesics(a, b, 10_000);
                let mut got: Vec<Vec<usize>> = set.paths.iter().map(|p| p.waypoints().to_vec()).collect();
                got.sort();
                prop_assert_eq!(got, all_geodesics(&g, &d, a, b));
            }
        }
    }

    #[test]
    fn eccentricity_and_hausdorff_match_brute_force(g in small_graph(8, 3), m1 in 1u32.., m2 in 1u32..) {
        let space = g.space();
        let a = subset(g.n, m1);
        let b = subset(g.n, m2);
        prop_assume!(!a.is_empty() && !b.is_empty());
        let sa = PointSet::from_points(g.n, a.iter().copied());
        let sb = PointSet::from_points(g.n, b.iter().copied());
        prop_assert_eq!(ecc_report(&space, &sa).eccentricity, brute_eccentricity(&space, &a));
        prop_assert_eq!(hausdorff(&space, &sa, &sb).unwrap().value, brute_hausdorff(&space, &a, &b));

        let best = (0..g.n)
            .flat_map(|c| (0..g.n).map(move |p| (c, p)))
            .map(|(c, p)| {
                let r = space.dist(c, p);
                let members: Vec<usize> = (0..g.n).filter(|&v| space.dist(c, v) <= r).collect();
                brute_hausdorff(&space, &members, &a)
            })
            .min()
            .unwrap();
        let (nearest, value) = nearest_ball_hausdorff(&space, &sa).unwrap();
        prop_assert_eq!(value, best);
        let members = ball(&space, nearest.center, nearest.radius).to_vec();
        prop_assert_eq!(brute_hausdorff(&space, &members, &a), value);
    }

    #[test]
    fn ball_pair_scan_matches_brute_force(g in small_graph(7, 2)) {
        let space = g.space();
        let n = g.n;
        let mut best = q(0);
        let mut best_h = q(0);
        for x in 0..n {
            for y in 0..n {
                for p in 0..n {
                    for r in 0..n {
                        let (s, t) = (space.dist(x, p), space.dist(y, r));
                        let set: Vec<usize> = (0..n)
                            .filter(|&v| space.dist(x, v) <= s && space.dist(y, v) <= t)
                            .collect();
                        if set.is_empty() {
                            continue;
                        }
                        best = best.max(brute_eccentricity(&space, &set));
                        let ps = PointSet::from_points(n, set.iter().copied());
                        best_h = best_h.max(nearest_ball_hausdorff(&space, &ps).unwrap().1);
                    }
                }
            }
        }
        let scan = scan_ball_pairs(&space, RadiusPolicy::AllRealized, ScanTargets::BOTH);
        prop_assert_eq!(scan.max_ecc, best);
        prop_assert_eq!(scan.max_hausdorff, best_h);
    }
}

/// Candidate `(a, b)` states of `f_D` / `e` at offset `r`, by enumerating
/// pairs of maximal geodesics from every basepoint of a unit-weight graph.
fn divergence_states(g: &SmallGraph, d: &[Vec<i64>], dd: i64, r: usize) -> Vec<(usize, usize, usize)> {
    let adj = g.adjacency();
    let mut out = Vec::new();
    for x in 0..g.n {
        let mut maximal = Vec::new();
        let mut stack = vec![vec![x]];
        while let Some(path) = stack.pop() {
            let last = *path.last().unwrap();
            let next: Vec<usize> = adj[last]
                .iter()
                .filter(|&&(w, _)| d[x][w] == d[x][last] + 1)
                .map(|&(w, _)| w)
                .collect();
            if next.is_empty() {
                maximal.push(path);
            } else {
                for w in next {
                    let mut p = path.clone();
                    p.push(w);
                    stack.push(p);
                }
            }
        }
        for g1 in &maximal {
            for g2 in &maximal {
                let len = g1.len().min(g2.len());
                for big_r in 0..len {
                    if d[g1[big_r]][g2[big_r]] >= dd && big_r + r < len {
                        out.push((x, g1[big_r + r], g2[big_r + r]));
                    }
                }
            }
        }
    }
    out
}

fn bfs_outside(g: &SmallGraph, d: &[Vec<i64>], x: usize, a: usize, b: usize) -> Option<i64> {
    let adj = g.adjacency();
    let floor = d[x][a];
    let mut seen = vec![None; g.n];
    seen[a] = Some(0);
    let mut queue = VecDeque::from([a]);
    while let Some(v) = queue.pop_front() {
        for &(w, _) in &adj[v] {
            if d[x][w] >= floor && seen[w].is_none() {
                seen[w] = Some(seen[v].unwrap() + 1);
                queue.push_back(w);
            }
        }
    }
    seen[b]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn divergence_profiles_match_pair_enumeration(g in small_graph(8, 1), dd in 1i64..3) {
        let space = g.space();
        let d = g.distances();
        let r_max = 4;
        let f = estimate_f_d(&space, q(dd), r_max);
        let e = estimate_e(&space, q(dd), r_max);
        if divergence_states(&g, &d, dd, 0).is_empty() {
            prop_assert!(f.is_err() && e.is_err());
            return Ok(());
        }
        let (f, e) = (f.unwrap(), e.unwrap());
        for r in 1..=r_max as usize {
            let states = divergence_states(&g, &d, dd, r);
            if states.is_empty() {
                prop_assert_eq!(f.value_at(r as u64), None);
                continue;
            }
            let fv = states.iter().map(|&(_, a, b)| d[a][b]).min().unwrap();
            prop_assert_eq!(f.value_at(r as u64), Some(ProfileValue::Finite(q(fv))));
            let ev = states
                .iter()
                .map(|&(x, a, b)| bfs_outside(&g, &d, x, a, b).map_or(ProfileValue::Infinite, |v| ProfileValue::Finite(q(v))))
                .min()
                .unwrap();
            prop_assert_eq!(e.value_at(r as u64), Some(ev));
        }
    }
}

#[test]
fn geodesic_counts_on_grids_and_cycles() {
    let grid = curvlab::generate::generate(
        &curvlab::generate::GenSpec::new(curvlab::generate::GenKind::Grid)
            .n(4)
            .m(5),
    )
    .unwrap();
    // corner (0,0) to corner (3,4): C(7,3) monotone lattice paths
    assert_eq!(grid.enumerate_geodesics(0, 19, 1000).paths.len(), 35);
    let c8 = cycle(8);
    assert_eq!(c8.enumerate_geodesics(0, 4, 1000).paths.len(), 2);
    assert_eq!(c8.enumerate_geodesics(0, 3, 1000).paths.len(), 1);
    let capped = grid.enumerate_geodesics(0, 19, 10);
    assert!(capped.truncated);
    assert_eq!(capped.paths.len(), 10);
}
