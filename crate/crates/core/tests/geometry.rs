use fppdt::geometry::predicates::{incircle, orient};
use fppdt::geometry::{
    build_delaunay, build_voronoi_dual, io, locate_tile, sample_poisson, truncated_process, DelaunayGraph, Point,
    PointSet, Provenance, Window,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

fn random_set(n: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = Window::square(10.0, 1.0).unwrap();
    let pts = (0..n).map(|_| Point::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0))).collect();
    PointSet::new(pts, w).unwrap()
}

/// Points on a coarse integer lattice: many exactly cocircular quadruples.
fn lattice_set(n: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = Window::square(10.0, 1.0).unwrap();
    let mut seen = BTreeSet::new();
    while seen.len() < n {
        seen.insert((rng.random_range(0..=10u32), rng.random_range(0..=10u32)));
    }
    let pts = seen.into_iter().map(|(x, y)| Point::new(f64::from(x), f64::from(y))).collect();
    PointSet::new(pts, w).unwrap()
}

fn check_empty_circles(g: &DelaunayGraph) {
    let p = g.points();
    for t in g.triangles() {
        assert!(orient(&p[t[0]], &p[t[1]], &p[t[2]]) > 0.0, "triangle {t:?} not CCW");
        for (v, q) in p.iter().enumerate() {
            if !t.contains(&v) {
                assert!(incircle(&p[t[0]], &p[t[1]], &p[t[2]], q) <= 0.0, "vertex {v} inside circle of {t:?}");
            }
        }
    }
}

fn hull_size(g: &DelaunayGraph) -> usize {
    (0..g.num_edges()).filter(|&e| !g.is_interior_edge(e)).count()
}

/// Convex hull vertex count including collinear boundary points.
fn brute_hull_boundary(p: &[Point]) -> usize {
    let n = p.len();
    let mut on = 0;
    for i in 0..n {
        // i is on the hull boundary iff some line through it has all points on one closed side.
        let mut boundary = false;
        for j in 0..n {
            if j == i {
                continue;
            }
            if p.iter().all(|q| orient(&p[i], &p[j], q) >= 0.0) || p.iter().all(|q| orient(&p[i], &p[j], q) <= 0.0) {
                boundary = true;
                break;
            }
        }
        on += usize::from(boundary);
    }
    on
}

#[test]
fn random_instances_satisfy_delaunay_invariants() {
    for seed in 0..100 {
        let ps = random_set(3 + (seed as usize % 48), seed);
        let g = build_delaunay(&ps).unwrap();
        check_empty_circles(&g);
        assert_eq!(g.euler_characteristic(), 2);
        assert_eq!(hull_size(&g), brute_hull_boundary(ps.points()));
        assert_eq!(3 * g.triangles().len() + hull_size(&g), 2 * g.num_edges());
    }
}

#[test]
fn cocircular_lattice_instances() {
    for seed in 0..100 {
        let ps = lattice_set(4 + (seed as usize % 60), seed);
        let g = build_delaunay(&ps).unwrap();
        check_empty_circles(&g);
        assert_eq!(g.euler_characteristic(), 2);
        // With every point a vertex and V − E + F = 2, the triangle count is fixed.
        let h = brute_hull_boundary(ps.points());
        assert_eq!(g.triangles().len(), 2 * ps.len() - h - 2);
    }
}

#[test]
fn relabelling_permutes_the_triangulation() {
    let ps = random_set(60, 5);
    let g = build_delaunay(&ps).unwrap();
    let n = ps.len();
    let perm: Vec<usize> = (0..n).map(|i| (i * 37 + 11) % n).collect();
    let mut moved = vec![Point::new(0.0, 0.0); n];
    for i in 0..n {
        moved[perm[i]] = ps.points()[i];
    }
    let g2 = build_delaunay(&PointSet::new(moved, *ps.window()).unwrap()).unwrap();
    let e1: BTreeSet<(usize, usize)> =
        g.edges().iter().map(|&(i, j)| (perm[i].min(perm[j]), perm[i].max(perm[j]))).collect();
    let e2: BTreeSet<(usize, usize)> = g2.edges().iter().copied().collect();
    assert_eq!(e1, e2);
}

#[test]
fn duality_and_perpendicularity() {
    for seed in 0..50 {
        let ps = random_set(50, 1000 + seed);
        let g = build_delaunay(&ps).unwrap();
        let d = build_voronoi_dual(&g, ps.window());
        let p = g.points();
        let interior = d.interior_edges().count();
        assert_eq!(interior, g.num_edges() - hull_size(&g));
        for e in d.interior_edges() {
            let (i, j) = g.edges()[e];
            let (a, b) = d.dual_segment(e).unwrap();
            let (ex, ey) = (p[j].x - p[i].x, p[j].y - p[i].y);
            let (fx, fy) = (b.x - a.x, b.y - a.y);
            assert!((ex * fx + ey * fy).abs() <= 1e-9 * ex.hypot(ey) * fx.hypot(fy));
            // Circumcenters are equidistant from both endpoints.
            for c in [a, b] {
                let (di, dj) = (c.dist(&p[i]), c.dist(&p[j]));
                assert!((di - dj).abs() <= 1e-9 * di.max(1.0));
            }
        }
    }
}

#[test]
fn cells_contain_their_nearest_points() {
    let ps = random_set(50, 77);
    let g = build_delaunay(&ps).unwrap();
    let d = build_voronoi_dual(&g, ps.window());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut total = 0.0;
    for v in 0..ps.len() {
        let cell = d.cell(v);
        total += area(&cell);
        // Convexity.
        for k in 0..cell.len() {
            let (a, b, c) = (cell[k], cell[(k + 1) % cell.len()], cell[(k + 2) % cell.len()]);
            assert!((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x) >= -1e-9);
        }
        // Random convex combinations of cell vertices are nearest to v.
        for _ in 0..20 {
            let wts: Vec<f64> = cell.iter().map(|_| rng.random::<f64>()).collect();
            let s: f64 = wts.iter().sum();
            let x = cell.iter().zip(&wts).fold(Point::new(0.0, 0.0), |acc, (q, w)| {
                Point::new(acc.x + q.x * w / s, acc.y + q.y * w / s)
            });
            let dv = x.dist(&ps.points()[v]);
            for q in ps.points() {
                assert!(dv <= x.dist(q) + 1e-9);
            }
        }
    }
    assert!((total - ps.window().area()).abs() < 1e-8);
}

#[test]
fn locate_matches_linear_scan() {
    let ps = random_set(50, 8);
    let g = build_delaunay(&ps).unwrap();
    let d = build_voronoi_dual(&g, ps.window());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10_000 {
        let x = Point::new(rng.random_range(1.0..9.0), rng.random_range(1.0..9.0));
        let want = brute_nearest(ps.points(), &x);
        assert_eq!(locate_tile(&x, &d).unwrap(), want);
    }
    for (i, q) in ps.points().iter().enumerate() {
        if ps.window().admits(q) {
            assert_eq!(locate_tile(q, &d).unwrap(), i);
        }
    }
}

#[test]
fn locate_tie_goes_to_lower_index() {
    let w = Window::square(10.0, 1.0).unwrap();
    let ps = PointSet::new(vec![Point::new(6.0, 5.0), Point::new(4.0, 5.0), Point::new(5.0, 9.0)], w).unwrap();
    let g = build_delaunay(&ps).unwrap();
    let d = build_voronoi_dual(&g, &w);
    assert_eq!(locate_tile(&Point::new(5.0, 3.0), &d).unwrap(), 0);
}

fn brute_nearest(p: &[Point], x: &Point) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, q) in p.iter().enumerate() {
        let d = x.dist2(q);
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

fn area(p: &[Point]) -> f64 {
    let mut a = 0.0;
    for k in 0..p.len() {
        let (u, v) = (p[k], p[(k + 1) % p.len()]);
        a += u.x * v.y - v.x * u.y;
    }
    0.5 * a
}

#[test]
fn poisson_count_mean() {
    let w = Window::square(10.0, 0.0).unwrap();
    let n = 10_000;
    let total: usize = (0..n).map(|s| sample_poisson(&w, 1.0, s).unwrap().len()).sum();
    let mean = total as f64 / n as f64;
    // Standard error of the mean is √100 / √10⁴ = 0.1.
    assert!((mean - 100.0).abs() < 3.0 * 0.1, "mean {mean}");
}

#[test]
fn truncated_boxes_bounded() {
    let w = Window::square(40.0, 5.0).unwrap();
    let ps = sample_poisson(&w, 1.0, 11).unwrap();
    let n = 128;
    let t = truncated_process(&ps, n, 1.0 / 14.0, 5).unwrap();
    let side = t.box_side;
    let nx = (40.0 / side).ceil() as usize;
    let mut counts = vec![0usize; nx * nx];
    for q in t.points.points() {
        let i = ((q.x / side) as usize).min(nx - 1);
        let j = ((q.y / side) as usize).min(nx - 1);
        counts[j * nx + i] += 1;
    }
    assert!(counts.iter().all(|&c| c >= 1 && c <= t.cap));
    let originals: BTreeSet<usize> = t
        .provenance
        .iter()
        .filter_map(|p| if let Provenance::Original(i) = p { Some(*i) } else { None })
        .collect();
    assert_eq!(originals.len(), t.provenance.iter().filter(|p| matches!(p, Provenance::Original(_))).count());
}

#[test]
fn delaunay_is_deterministic() {
    let ps = random_set(500, 21);
    assert_eq!(build_delaunay(&ps).unwrap(), build_delaunay(&ps).unwrap());
    let g = build_delaunay(&ps).unwrap();
    assert_eq!(io::write_graph(&g), io::write_graph(&build_delaunay(&ps).unwrap()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prop_small_sets_triangulate(coords in prop::collection::btree_set((0u8..12, 0u8..12), 3..40)) {
        let w = Window::square(12.0, 0.0).unwrap();
        let pts: Vec<Point> = coords.iter().map(|&(x, y)| Point::new(f64::from(x), f64::from(y))).collect();
        let ps = PointSet::new(pts, w).unwrap();
        let collinear = ps.points().iter().all(|q| orient(&ps.points()[0], &ps.points()[1], q) == 0.0);
        match build_delaunay(&ps) {
            Ok(g) => {
                prop_assert!(!collinear);
                check_empty_circles(&g);
                prop_assert_eq!(g.euler_characteristic(), 2);
            }
            Err(_) => prop_assert!(collinear),
        }
    }
}
