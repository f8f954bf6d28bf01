use fppdt::geometry::{build_delaunay, build_voronoi_dual, Point, PointSet, Window};
use fppdt::renorm::{
    circuit_separation_check, greedy_animal, is_full_box, max_separated, open_density, random_circuit, AnimalMode,
    BoxCircuit, Site, SiteField,
};
use fppdt::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeSet, HashSet};

fn sub_box_centres(lo: Point, hi: Point) -> Vec<Point> {
    let (w, h) = ((hi.x - lo.x) / 6.0, (hi.y - lo.y) / 6.0);
    (0..36).map(|k| Point::new(lo.x + (f64::from(k % 6) + 0.5) * w, lo.y + (f64::from(k / 6) + 0.5) * h)).collect()
}

#[test]
fn full_box_truth_table() {
    let (lo, hi) = (Point::new(1.0, 2.0), Point::new(4.0, 5.0));
    let all = sub_box_centres(lo, hi);
    assert!(is_full_box(&lo, &hi, &all));
    assert!(!is_full_box(&lo, &hi, &[]));
    for skip in 0..36 {
        let some: Vec<Point> = all.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, p)| *p).collect();
        assert!(!is_full_box(&lo, &hi, &some), "35 occupied sub-boxes (missing {skip})");
    }
    // Points outside the box do not count.
    let shifted: Vec<Point> = all.iter().map(|p| Point::new(p.x + 3.0, p.y)).collect();
    assert!(!is_full_box(&lo, &hi, &shifted));
}

#[test]
fn full_box_counts_shared_sides_for_both_neighbours() {
    // Points on the 5×5 interior grid corners touch four sub-boxes each.
    let (lo, hi) = (Point::new(0.0, 0.0), Point::new(6.0, 6.0));
    let corners: Vec<Point> = [1.0, 3.0, 5.0].iter().flat_map(|&x| [1.0, 3.0, 5.0].map(|y| Point::new(x, y))).collect();
    assert!(is_full_box(&lo, &hi, &corners));
    assert!(!is_full_box(&lo, &hi, &corners[1..]));
}

proptest! {
    #[test]
    fn full_box_monotone_in_points(seed in any::<u64>(), n in 0usize..200, extra in 0usize..50) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (lo, hi) = (Point::new(0.0, 0.0), Point::new(3.0, 3.0));
        let mut pts: Vec<Point> = (0..n).map(|_| Point::new(rng.random_range(-0.5..3.5), rng.random_range(-0.5..3.5))).collect();
        let before = is_full_box(&lo, &hi, &pts);
        pts.extend((0..extra).map(|_| Point::new(rng.random_range(-0.5..3.5), rng.random_range(-0.5..3.5))));
        prop_assert!(!before || is_full_box(&lo, &hi, &pts));
    }
}

/// Even–odd test against the polygon through the circuit sites.
fn inside_polygon(sites: &[Site], x: f64, y: f64) -> bool {
    let mut inside = false;
    for k in 0..sites.len() {
        let (a, b) = (sites[k], sites[(k + 1) % sites.len()]);
        let (ax, ay, bx, by) = (a.0 as f64, a.1 as f64, b.0 as f64, b.1 as f64);
        if (ay > y) != (by > y) && ax + (y - ay) / (by - ay) * (bx - ax) > x {
            inside = !inside;
        }
    }
    inside
}

#[test]
fn circuits_of_full_boxes_separate() {
    let r = 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for inst in 0..200 {
        let width = rng.random_range(1..=4);
        let c = random_circuit(&mut rng, width, 3, (3, 3), r).unwrap();
        let on: HashSet<Site> = c.sites.iter().copied().collect();
        let xs = c.sites.iter().map(|s| s.0);
        let ys = c.sites.iter().map(|s| s.1);
        let (x0, x1) = (xs.clone().min().unwrap() - 3, xs.max().unwrap() + 3);
        let (y0, y1) = (ys.clone().min().unwrap() - 3, ys.max().unwrap() + 3);
        let (lo, hi) = (Point::new(x0 as f64 * r, y0 as f64 * r), Point::new(x1 as f64 * r, y1 as f64 * r));
        let w = Window::new(lo, hi, 0.5).unwrap();
        let n = (100.0 * (hi.x - lo.x) * (hi.y - lo.y)) as usize;
        // Redraw until every circuit box is full.
        let (ps, g) = loop {
            let pts = (0..n).map(|_| Point::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y))).collect();
            let ps = PointSet::new(pts, w).unwrap();
            let full = c.sites.iter().all(|z| {
                let (a, b) = (Point::new((z.0 as f64 - 0.5) * r, (z.1 as f64 - 0.5) * r), Point::new((z.0 as f64 + 0.5) * r, (z.1 as f64 + 0.5) * r));
                is_full_box(&a, &b, ps.points())
            });
            if full {
                let g = build_delaunay(&ps).unwrap();
                break (ps, g);
            }
        };
        let d = build_voronoi_dual(&g, &w);
        let report = circuit_separation_check(&c, &ps, &d).unwrap();
        assert!(report.holds(), "instance {inst}: {report:?}");
        assert!(report.cells_checked > 0);
        // Sampled oracle: classify points of each nearby cell directly.
        let box_in = |p: &Point| {
            let z = ((p.x / r).round() as i64, (p.y / r).round() as i64);
            if on.contains(&z) {
                None
            } else {
                Some(inside_polygon(&c.sites, z.0 as f64 + 1e-7, z.1 as f64 + 2e-7))
            }
        };
        let lam_in = |p: &Point| inside_polygon(&c.sites, p.x / r, p.y / r);
        for v in 0..ps.len() {
            let cell = d.cell(v);
            if cell.len() < 3 {
                continue;
            }
            let gen = ps.points()[v];
            let mut samples = vec![gen];
            for k in 0..cell.len() {
                let (a, b) = (cell[k], cell[(k + 1) % cell.len()]);
                for t in [0.05, 0.5, 0.95] {
                    let e = Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
                    samples.push(Point::new(0.999 * e.x + 0.001 * gen.x, 0.999 * e.y + 0.001 * gen.y));
                }
            }
            let big: Vec<Option<bool>> = samples.iter().map(box_in).collect();
            let small: Vec<bool> = samples.iter().map(lam_in).collect();
            let bad = (big.contains(&Some(true)) && small.contains(&false)) || (big.contains(&Some(false)) && small.contains(&true));
            assert!(!bad, "instance {inst}: cell {v} straddles the circuit");
        }
    }
}

#[test]
fn separation_needs_full_boxes() {
    let c = BoxCircuit::ring((0, 0), (2, 2), 1.0).unwrap();
    let w = Window::new(Point::new(-3.0, -3.0), Point::new(5.0, 5.0), 0.5).unwrap();
    let ps = PointSet::new(vec![Point::new(0.0, 0.0), Point::new(2.0, 0.1), Point::new(1.0, 2.0)], w).unwrap();
    let g = build_delaunay(&ps).unwrap();
    let d = build_voronoi_dual(&g, &w);
    assert!(matches!(circuit_separation_check(&c, &ps, &d), Err(Error::Precondition(_))));
    assert!(BoxCircuit::new(vec![(0, 0), (1, 0), (1, 1)], 1.0).is_err());
    assert!(BoxCircuit::new(vec![(0, 0), (2, 0), (2, 1), (0, 1)], 1.0).is_err());
}

/// Every animal with ≤ s sites containing the origin, found by growing sets
/// one neighbour at a time and deduplicating.
fn animals_by_closure(s: usize, allowed: impl Fn(Site) -> bool) -> Vec<BTreeSet<Site>> {
    let mut all: Vec<BTreeSet<Site>> = Vec::new();
    let mut layer: HashSet<BTreeSet<Site>> = HashSet::new();
    if allowed((0, 0)) {
        layer.insert(BTreeSet::from([(0, 0)]));
    }
    for _ in 0..s {
        let mut next = HashSet::new();
        for a in &layer {
            for z in a {
                for d in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                    let y = (z.0 + d.0, z.1 + d.1);
                    if allowed(y) && !a.contains(&y) {
                        let mut b = a.clone();
                        b.insert(y);
                        next.insert(b);
                    }
                }
            }
        }
        all.extend(layer.drain());
        layer = next;
    }
    all.into_iter().filter(|a| a.len() <= s).collect()
}

fn random_field(rng: &mut impl Rng, rad: i64) -> SiteField<f64> {
    SiteField::from_fn((-rad, -rad), (rad, rad), |_| f64::from(rng.random_range(0u32..10))).unwrap()
}

#[test]
fn exact_animals_match_closure_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut equal = 0;
    for _ in 0..100 {
        let f = random_field(&mut rng, 2);
        let s = rng.random_range(1..=7);
        let exact = greedy_animal(&f, s, AnimalMode::Exact).unwrap();
        let want = animals_by_closure(s, |z| f.contains(z))
            .iter()
            .map(|a| a.iter().map(|&z| f.get(z)).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(exact.value, want);
        assert!(exact.animal.contains(&(0, 0)) && exact.animal.len() <= s);
        assert_eq!(exact.animal.iter().map(|&z| f.get(z)).sum::<f64>(), want);
        let heur = greedy_animal(&f, s, AnimalMode::Heuristic).unwrap();
        assert!(heur.value <= exact.value);
        equal += usize::from(heur.value == exact.value);
    }
    assert!(equal >= 90, "heuristic matched {equal}/100");
}

#[test]
fn closure_counts_fixed_polyominoes() {
    // Animals containing the origin with exactly n sites number n · (fixed n-ominoes).
    let fixed = [1usize, 2, 6, 19, 63, 216];
    for (k, &f) in fixed.iter().enumerate() {
        let n = k + 1;
        let count = animals_by_closure(n, |_| true).iter().filter(|a| a.len() == n).count();
        assert_eq!(count, n * f);
    }
}

#[test]
fn trivial_animal_values() {
    let f = SiteField::from_fn((-3, -3), (3, 3), |z| if z == (0, 0) { 5.0 } else { 1.0 }).unwrap();
    assert_eq!(greedy_animal(&f, 1, AnimalMode::Exact).unwrap().value, 5.0);
    let ones = SiteField::from_fn((-3, -3), (3, 3), |_| 1.0).unwrap();
    for s in 1..=8 {
        assert_eq!(greedy_animal(&ones, s, AnimalMode::Exact).unwrap().value, s as f64);
    }
    assert!(greedy_animal(&ones, 13, AnimalMode::Exact).is_err());
    let off = SiteField::from_fn((1, 1), (3, 3), |_| 1.0).unwrap();
    assert!(greedy_animal(&off, 2, AnimalMode::Exact).is_err());
}

/// Largest k-separated subset by trying every subset.
fn brute_separated(sites: &[Site], k: i64) -> usize {
    (0u32..1 << sites.len())
        .filter(|m| {
            let chosen: Vec<Site> = (0..sites.len()).filter(|i| m & (1 << i) != 0).map(|i| sites[i]).collect();
            chosen.iter().enumerate().all(|(i, a)| chosen[i + 1..].iter().all(|b| (a.0 - b.0).abs().max((a.1 - b.1).abs()) >= k))
        })
        .map(u32::count_ones)
        .max()
        .unwrap() as usize
}

#[test]
fn open_density_matches_double_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..100 {
        let p = rng.random_range(0.2..0.9);
        let f = SiteField::from_fn((-2, -2), (2, 2), |_| rng.random_bool(p)).unwrap();
        let s = rng.random_range(1..=6);
        let k = rng.random_range(1..=3);
        let want = animals_by_closure(s, |z| f.contains(z))
            .iter()
            .filter(|a| a.len() == s)
            .map(|a| {
                let open: Vec<Site> = a.iter().copied().filter(|&z| f.get(z)).collect();
                brute_separated(&open, k)
            })
            .min();
        let got = open_density(&f, s, k).unwrap();
        assert_eq!(got, want);
        let m1 = open_density(&f, s, 1).unwrap().unwrap();
        let mk = got.unwrap();
        assert!(m1 as i64 <= (2 * k - 1).pow(2) * mk as i64);
    }
}

#[test]
fn open_density_trivial_cases() {
    let open = SiteField::from_fn((-2, -2), (2, 2), |_| true).unwrap();
    let closed = SiteField::from_fn((-2, -2), (2, 2), |_| false).unwrap();
    for s in 1..=6 {
        assert_eq!(open_density(&open, s, 1).unwrap(), Some(s));
        assert_eq!(open_density(&closed, s, 2).unwrap(), Some(0));
    }
    assert!(open_density(&open, 11, 1).is_err());
    let big = SiteField::from_fn((-4, -4), (4, 4), |_| true).unwrap();
    assert!(open_density(&big, 3, 1).is_err());
}

proptest! {
    #[test]
    fn max_separated_matches_subsets(pts in prop::collection::btree_set((0i64..6, 0i64..6), 0..12), k in 1i64..4) {
        let v: Vec<Site> = pts.into_iter().collect();
        prop_assert_eq!(max_separated(&v, k).unwrap(), brute_separated(&v, k));
    }

    #[test]
    fn raising_a_site_never_lowers_m_s(seed in any::<u64>(), s in 1usize..7, bump in 0.0f64..5.0, i in -2i64..=2, j in -2i64..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_field(&mut rng, 2);
        let g = SiteField::from_fn((-2, -2), (2, 2), |z| f.get(z) + if z == (i, j) { bump } else { 0.0 }).unwrap();
        prop_assert!(greedy_animal(&g, s, AnimalMode::Exact).unwrap().value >= greedy_animal(&f, s, AnimalMode::Exact).unwrap().value);
    }
}
