use fppdt::geometry::{build_delaunay, sample_poisson, DelaunayGraph, Window};
use fppdt::weights::{
    assign_weights, assign_weights_keyed, threshold_indicator, truncate_weights, truncation_cap, EdgeWeights,
    WeightDistribution,
};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn big_graph() -> DelaunayGraph {
    // About 3·10⁴ points, so roughly 10⁵ edges.
    let w = Window::square(180.0, 1.0).unwrap();
    build_delaunay(&sample_poisson(&w, 1.0, 17).unwrap()).unwrap()
}

#[test]
fn atom_fraction_within_three_sigma() {
    let g = big_graph();
    assert!(g.num_edges() >= 90_000);
    let d: WeightDistribution = "bernoulliAtom(0.3,1)".parse().unwrap();
    let w = assign_weights(&g, &d, 5).unwrap();
    let n = w.len() as f64;
    let zeros = w.values().iter().filter(|&&x| x == 0.0).count() as f64;
    assert!(w.values().iter().all(|&x| x == 0.0 || x == 1.0));
    let sigma = (0.3 * 0.7 / n).sqrt();
    assert!((zeros / n - 0.3).abs() < 3.0 * sigma, "zero fraction {}", zeros / n);
}

#[test]
fn exponential_mean_and_tail() {
    let g = big_graph();
    let w = assign_weights(&g, &WeightDistribution::Exponential { rate: 2.0 }, 9).unwrap();
    let n = w.len() as f64;
    let mean = w.values().iter().sum::<f64>() / n;
    // sd of the mean is 0.5/√n
    assert!((mean - 0.5).abs() < 4.0 * 0.5 / n.sqrt(), "mean {mean}");
    let tail = w.values().iter().filter(|&&x| x > 1.0).count() as f64 / n;
    let p = (-2.0f64).exp();
    assert!((tail - p).abs() < 4.0 * (p * (1.0 - p) / n).sqrt());
}

#[test]
fn threshold_field_is_bernoulli() {
    let g = big_graph();
    let d = WeightDistribution::BernoulliAtom { p0: 0.3, v: 1.0 };
    let crit = ChiSquared::new(1.0).unwrap().inverse_cdf(0.99);
    for (seed, eps) in [(1u64, 0.5), (2, 1.0), (3, 1e-6)] {
        let w = assign_weights(&g, &d, seed).unwrap();
        let open = threshold_indicator(&w, eps).unwrap();
        let n = open.len() as f64;
        let o = open.count_open() as f64;
        let (e_open, e_closed) = (0.7 * n, 0.3 * n);
        let chi = (o - e_open).powi(2) / e_open + (n - o - e_closed).powi(2) / e_closed;
        assert!(chi < crit, "eps {eps}: chi-square {chi} above {crit}");
    }
}

#[test]
fn same_seed_same_weights() {
    let g = big_graph();
    let d = WeightDistribution::Uniform { a: 0.0, b: 3.0 };
    assert_eq!(assign_weights(&g, &d, 4).unwrap(), assign_weights(&g, &d, 4).unwrap());
    assert_ne!(assign_weights(&g, &d, 4).unwrap(), assign_weights(&g, &d, 5).unwrap());
}

#[test]
fn keyed_weights_follow_labels() {
    let w = Window::square(10.0, 1.0).unwrap();
    let ps = sample_poisson(&w, 1.0, 3).unwrap();
    let g = build_delaunay(&ps).unwrap();
    let labels: Vec<u64> = (0..g.num_vertices() as u64).map(|i| 1000 + 7 * i).collect();
    let d = WeightDistribution::Exponential { rate: 1.0 };
    let a = assign_weights_keyed(&g, &labels, &d, 11).unwrap();
    // Reversing vertex order relabels nothing: same label pair, same weight.
    let rev: Vec<_> = ps.points().iter().rev().copied().collect();
    let ps2 = fppdt::geometry::PointSet::new(rev, w).unwrap();
    let g2 = build_delaunay(&ps2).unwrap();
    let n = g.num_vertices();
    let labels2: Vec<u64> = (0..n).map(|i| labels[n - 1 - i]).collect();
    let b = assign_weights_keyed(&g2, &labels2, &d, 11).unwrap();
    for (e, &(i, j)) in g.edges().iter().enumerate() {
        let e2 = g2.edge_index(n - 1 - i, n - 1 - j).expect("same triangulation");
        assert_eq!(a.get(e), b.get(e2));
    }
}

#[test]
fn invalid_inputs_rejected() {
    let w = Window::square(10.0, 1.0).unwrap();
    let g = build_delaunay(&sample_poisson(&w, 1.0, 3).unwrap()).unwrap();
    assert!(EdgeWeights::new(&g, vec![1.0; g.num_edges() + 1]).is_err());
    let mut v = vec![1.0; g.num_edges()];
    v[0] = -1.0;
    assert!(EdgeWeights::new(&g, v).is_err());
    let ok = EdgeWeights::constant(&g, 1.0).unwrap();
    assert!(threshold_indicator(&ok, 0.0).is_err());
    assert!(truncate_weights(&ok, 1, 1.0).is_err());
    assert!(assign_weights(&g, &WeightDistribution::Exponential { rate: -1.0 }, 0).is_err());
}

#[test]
fn truncation_examples() {
    let w = Window::square(10.0, 1.0).unwrap();
    let g = build_delaunay(&sample_poisson(&w, 1.0, 8).unwrap()).unwrap();
    let cap = truncation_cap(10, 1.0).unwrap();
    assert!((cap - 8.0 * 10f64.ln()).abs() < 1e-12);
    let big = EdgeWeights::constant(&g, 1e3).unwrap();
    assert!(truncate_weights(&big, 10, 1.0).unwrap().values().iter().all(|&x| x == cap));
    let small = EdgeWeights::constant(&g, 0.25).unwrap();
    assert_eq!(truncate_weights(&small, 10, 1.0).unwrap(), small);
}

proptest! {
    #[test]
    fn truncation_is_monotone(seed in any::<u64>(), n in 2usize..10_000, a in 0.05f64..5.0, rate in 0.01f64..2.0) {
        let w = Window::square(6.0, 1.0).unwrap();
        let g = build_delaunay(&sample_poisson(&w, 1.0, seed).unwrap()).unwrap();
        let x = assign_weights(&g, &WeightDistribution::Exponential { rate }, seed).unwrap();
        let t = truncate_weights(&x, n, a).unwrap();
        let cap = truncation_cap(n, a).unwrap();
        for (o, c) in x.values().iter().zip(t.values()) {
            prop_assert!(c <= o);
            prop_assert!(*c <= cap);
            prop_assert!(*o > cap || c == o);
        }
    }

    #[test]
    fn coupled_thresholds_nest(seed in any::<u64>(), e1 in 0.01f64..2.0, e2 in 0.01f64..2.0) {
        let w = Window::square(6.0, 1.0).unwrap();
        let g = build_delaunay(&sample_poisson(&w, 1.0, seed).unwrap()).unwrap();
        let x = assign_weights(&g, &WeightDistribution::Exponential { rate: 1.0 }, seed).unwrap();
        let (lo, hi) = (e1.min(e2), e1.max(e2));
        prop_assert!(threshold_indicator(&x, hi).unwrap().is_subset_of(&threshold_indicator(&x, lo).unwrap()));
    }
}
