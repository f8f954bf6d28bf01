use fppdt::fpp::{count_geodesics, first_passage_time, passage_times, path_weight, point_passage_time, reached_set};
use fppdt::geometry::{build_delaunay, build_voronoi_dual, sample_poisson, DelaunayGraph, Point, PointSet, Window};
use fppdt::weights::{assign_weights, EdgeWeights, WeightDistribution};
use fppdt::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_instance(seed: u64) -> (DelaunayGraph, EdgeWeights) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(3..=10);
    let w = Window::square(10.0, 1.0).unwrap();
    let pts = (0..n).map(|_| Point::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0))).collect();
    let g = build_delaunay(&PointSet::new(pts, w).unwrap()).unwrap();
    let dist = match seed % 3 {
        0 => WeightDistribution::Exponential { rate: 1.0 },
        1 => WeightDistribution::BernoulliAtom { p0: 0.4, v: 1.0 },
        _ => WeightDistribution::Uniform { a: 0.5, b: 2.0 },
    };
    let x = assign_weights(&g, &dist, seed ^ 0xabc).unwrap();
    (g, x)
}

/// Minimum over every self-avoiding path of its left-to-right weight sum.
fn brute_force(g: &DelaunayGraph, x: &EdgeWeights, u: usize, v: usize) -> (f64, usize) {
    fn go(g: &DelaunayGraph, x: &EdgeWeights, a: usize, v: usize, acc: f64, used: &mut Vec<bool>, best: &mut (f64, usize)) {
        if a == v {
            if acc < best.0 {
                *best = (acc, 1);
            } else if acc == best.0 {
                best.1 += 1;
            }
            return;
        }
        for b in 0..g.num_vertices() {
            if let Some(e) = g.edge_index(a, b) {
                if !used[b] {
                    used[b] = true;
                    go(g, x, b, v, acc + x.get(e), used, best);
                    used[b] = false;
                }
            }
        }
    }
    let mut used = vec![false; g.num_vertices()];
    used[u] = true;
    let mut best = (f64::INFINITY, 0);
    go(g, x, u, v, 0.0, &mut used, &mut best);
    best
}

#[test]
fn matches_exhaustive_enumeration() {
    for seed in 0..200 {
        let (g, x) = small_instance(seed);
        let n = g.num_vertices();
        for u in 0..n {
            for v in 0..n {
                let r = first_passage_time(&g, &x, u, v).unwrap();
                let (t, count) = brute_force(&g, &x, u, v);
                assert_eq!(r.time, t, "seed {seed} {u}->{v}");
                assert_eq!(r.geodesic.first(), Some(&u));
                assert_eq!(r.geodesic.last(), Some(&v));
                assert_eq!(path_weight(&g, &x, &r.geodesic).unwrap(), t);
                let mut seen = r.geodesic.clone();
                seen.sort_unstable();
                seen.dedup();
                assert_eq!(seen.len(), r.geodesic.len());
                if u != v {
                    let c = count_geodesics(&g, &x, u, v, usize::MAX, 1 << 30).unwrap();
                    assert_eq!(c, count, "seed {seed} {u}->{v}");
                }
            }
        }
    }
}

#[test]
fn lexicographically_smallest_geodesic() {
    // Unit weights on a square split by a diagonal: two 2-step routes.
    let w = Window::square(2.0, 0.5).unwrap();
    let pts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.1)];
    let g = build_delaunay(&PointSet::new(pts, w).unwrap()).unwrap();
    let x = EdgeWeights::constant(&g, 1.0).unwrap();
    let (a, b) = if g.edge_index(0, 2).is_some() { (1, 3) } else { (0, 2) };
    let r = first_passage_time(&g, &x, a, b).unwrap();
    assert_eq!(r.time, 2.0);
    let others: Vec<usize> = (0..4).filter(|&k| k != a && k != b).collect();
    assert_eq!(r.geodesic, vec![a, others[0], b]);
    assert_eq!(count_geodesics(&g, &x, a, b, 10, 1000).unwrap(), 2);
}

#[test]
fn degenerate_queries() {
    let (g, x) = small_instance(4);
    let r = first_passage_time(&g, &x, 0, 0).unwrap();
    assert_eq!((r.time, r.geodesic), (0.0, vec![0]));
    assert!(matches!(first_passage_time(&g, &x, 0, 99), Err(Error::UnknownVertex(99))));
    let zero = EdgeWeights::constant(&g, 0.0).unwrap();
    assert!(passage_times(&g, &zero, 0).iter().all(|&t| t == 0.0));
    assert_eq!(reached_set(&g, &zero, 0, 0.0).unwrap().vertices.len(), g.num_vertices());
    assert!(reached_set(&g, &x, 0, -1.0).is_err());
}

#[test]
fn reached_set_matches_threshold() {
    for seed in 0..50 {
        let w = Window::square(20.0, 1.0).unwrap();
        let g = build_delaunay(&sample_poisson(&w, 1.0, seed).unwrap()).unwrap();
        let x = assign_weights(&g, &WeightDistribution::Exponential { rate: 1.0 }, seed).unwrap();
        let all = passage_times(&g, &x, 0);
        for t in [0.0, 0.5, 1.0, 3.0] {
            let r = reached_set(&g, &x, 0, t).unwrap();
            let want: Vec<usize> = (0..g.num_vertices()).filter(|&v| all[v] <= t).collect();
            assert_eq!(r.vertices, want);
        }
    }
}

#[test]
fn point_queries_use_nearest_generator() {
    let w = Window::square(20.0, 1.0).unwrap();
    let g = build_delaunay(&sample_poisson(&w, 1.0, 2).unwrap()).unwrap();
    let x = assign_weights(&g, &WeightDistribution::Exponential { rate: 1.0 }, 2).unwrap();
    let d = build_voronoi_dual(&g, &w);
    let (p, q) = (Point::new(3.3, 4.4), Point::new(15.0, 12.5));
    let nearest = |z: &Point| (0..g.num_vertices()).min_by(|&a, &b| g.points()[a].dist2(z).total_cmp(&g.points()[b].dist2(z))).unwrap();
    let r = point_passage_time(&p, &q, &d, &g, &x).unwrap();
    assert_eq!(r.time, first_passage_time(&g, &x, nearest(&p), nearest(&q)).unwrap().time);
    assert!(point_passage_time(&Point::new(50.0, 0.0), &q, &d, &g, &x).is_err());
}

/// Dyadic weights with few mantissa bits: every sum and every product by 3
/// is exact, so scaling must hold bit for bit.
fn dyadic(g: &DelaunayGraph, seed: u64) -> EdgeWeights {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..g.num_edges()).map(|_| f64::from(rng.random_range(0u32..1 << 12)) / 1024.0).collect();
    EdgeWeights::new(g, v).unwrap()
}

#[test]
fn scaling_by_three_is_exact_on_dyadic_weights() {
    for seed in 0..20 {
        let w = Window::square(25.0, 1.0).unwrap();
        let g = build_delaunay(&sample_poisson(&w, 1.0, seed).unwrap()).unwrap();
        let x = dyadic(&g, seed);
        let x3 = x.scaled(3.0).unwrap();
        let a = passage_times(&g, &x, 0);
        let b = passage_times(&g, &x3, 0);
        for (s, t) in a.iter().zip(&b) {
            assert_eq!(3.0 * s, *t);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn triangle_inequality(seed in any::<u64>(), i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>(), k in any::<prop::sample::Index>()) {
        let w = Window::square(15.0, 1.0).unwrap();
        let g = build_delaunay(&sample_poisson(&w, 1.0, seed).unwrap()).unwrap();
        let x = assign_weights(&g, &WeightDistribution::Exponential { rate: 1.0 }, seed).unwrap();
        let n = g.num_vertices();
        let (a, b, c) = (i.index(n), j.index(n), k.index(n));
        let ta = passage_times(&g, &x, a);
        let tb = passage_times(&g, &x, b);
        prop_assert!(ta[c] <= (ta[b] + tb[c]) * (1.0 + 1e-12));
        prop_assert!((ta[b] - tb[a]).abs() <= 1e-12 * ta[b].max(1.0));
    }

    #[test]
    fn scaling_with_relative_tolerance(seed in any::<u64>(), c in 0.1f64..10.0) {
        let w = Window::square(15.0, 1.0).unwrap();
        let g = build_delaunay(&sample_poisson(&w, 1.0, seed).unwrap()).unwrap();
        let x = assign_weights(&g, &WeightDistribution::Exponential { rate: 1.0 }, seed).unwrap();
        let a = passage_times(&g, &x, 0);
        let b = passage_times(&g, &x.scaled(c).unwrap(), 0);
        for (s, t) in a.iter().zip(&b) {
            prop_assert!((c * s - t).abs() <= 1e-12 * t.max(1e-300));
        }
    }

    #[test]
    fn monotone_in_weights(seed in any::<u64>(), bump in 0.0f64..2.0) {
        let w = Window::square(12.0, 1.0).unwrap();
        let g = build_delaunay(&sample_poisson(&w, 1.0, seed).unwrap()).unwrap();
        let x = assign_weights(&g, &WeightDistribution::Uniform { a: 0.0, b: 1.0 }, seed).unwrap();
        let y = EdgeWeights::new(&g, x.values().iter().enumerate().map(|(e, v)| if e % 2 == 0 { v + bump } else { *v }).collect()).unwrap();
        for (s, t) in passage_times(&g, &x, 0).iter().zip(&passage_times(&g, &y, 0)) {
            prop_assert!(s <= t);
        }
    }
}
