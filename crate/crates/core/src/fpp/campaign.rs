//! Monte Carlo campaigns over fresh Poisson–Delaunay replicas.
//!
//! Replica `r` draws its points from `derive_seed(seed, r, "points")` (or
//! index 0 for every replica when points are frozen) and its weights from
//! `derive_seed(seed, r, "weights")`.

use super::{count_geodesics, shortest_paths_until};
use crate::error::{invalid, Error, Result};
use crate::geometry::{
    build_delaunay, build_voronoi_dual, sample_poisson, truncated_process, DelaunayGraph, Point, PointSet, Provenance,
    Window, DEFAULT_DELTA,
};
use crate::runner::replicate;
use crate::seed::{derive_seed, AUX, POINTS, WEIGHTS};
use crate::stats::{fit_power_law, LineFit, Proportion, Summary};
use crate::weights::{assign_weights, assign_weights_keyed, truncate_weights, EdgeWeights, WeightDistribution};
use serde::Serialize;

/// Square window `[0, side]²` of Poisson points at the given intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FppSetup {
    pub side: f64,
    pub margin: f64,
    pub intensity: f64,
    /// Reuse replica 0's points in every replica (weights still vary).
    pub freeze_points: bool,
}

impl FppSetup {
    /// Unit intensity with the default margin `side / 8`.
    pub fn square(side: f64) -> Self {
        FppSetup { side, margin: side / 8.0, intensity: 1.0, freeze_points: false }
    }

    pub fn window(&self) -> Result<Window> {
        Window::square(self.side, self.margin)
    }

    /// Window centred on the origin, used for growth from `0`.
    pub fn centered_window(&self) -> Result<Window> {
        let h = self.side / 2.0;
        Window::new(Point::new(-h, -h), Point::new(h, h), self.margin)
    }

    /// Location of the points `0` and `n` on the window midline.
    pub fn endpoints(&self, n: f64) -> (Point, Point) {
        let y = self.side / 2.0;
        (Point::new(self.margin, y), Point::new(self.margin + n, y))
    }

    fn check_distance(&self, n: usize) -> Result<()> {
        if (n as f64) > self.side - 2.0 * self.margin {
            return Err(invalid(format!(
                "n = {n} exceeds the usable window width {}",
                self.side - 2.0 * self.margin
            )));
        }
        Ok(())
    }

    fn points(&self, window: &Window, seed: u64, r: usize) -> Result<PointSet> {
        let idx = if self.freeze_points { 0 } else { r as u64 };
        sample_poisson(window, self.intensity, derive_seed(seed, idx, POINTS))
    }
}

fn validate_grid(grid: &[usize], min: usize) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("empty distance grid"));
    }
    if let Some(n) = grid.iter().find(|&&n| n < min) {
        return Err(invalid(format!("grid value {n} below the minimum {min}")));
    }
    Ok(())
}

/// Raw `T(0, n)` samples: `times[k][r]` for `grid[k]` and replica `r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PassageSamples {
    pub grid: Vec<usize>,
    pub times: Vec<Vec<f64>>,
    pub seed: u64,
    pub distribution: String,
}

impl PassageSamples {
    pub fn replicas(&self) -> usize {
        self.times.first().map_or(0, Vec::len)
    }

    fn column(&self, n: usize) -> Option<&[f64]> {
        self.grid.iter().position(|&m| m == n).map(|k| self.times[k].as_slice())
    }
}

/// One replica: `T(v(0), v(n))` for every `n` in the grid from a single
/// shortest-path search.
fn passage_row(setup: &FppSetup, dist: &WeightDistribution, grid: &[usize], seed: u64, r: usize) -> Result<Vec<f64>> {
    let window = setup.window()?;
    let points = setup.points(&window, seed, r)?;
    let graph = build_delaunay(&points)?;
    let weights = assign_weights(&graph, dist, derive_seed(seed, r as u64, WEIGHTS))?;
    let diagram = build_voronoi_dual(&graph, &window);
    let (o, _) = setup.endpoints(0.0);
    let src = diagram.nearest(&o);
    let targets: Vec<usize> = grid.iter().map(|&n| diagram.nearest(&setup.endpoints(n as f64).1)).collect();
    let mut left = targets.clone();
    left.sort_unstable();
    left.dedup();
    let d = shortest_paths_until(&graph, &weights, src, f64::INFINITY, |v, _| {
        if let Ok(k) = left.binary_search(&v) {
            left.remove(k);
        }
        left.is_empty()
    });
    targets
        .iter()
        .map(|&t| {
            if d[t].is_finite() {
                Ok(d[t])
            } else {
                Err(Error::Disconnected(src, t))
            }
        })
        .collect()
}

pub fn sample_passage_times(
    setup: &FppSetup,
    dist: &WeightDistribution,
    grid: &[usize],
    replicas: usize,
    seed: u64,
) -> Result<PassageSamples> {
    dist.validate()?;
    validate_grid(grid, 1)?;
    for &n in grid {
        setup.check_distance(n)?;
    }
    if replicas == 0 {
        return Err(invalid("replicas must be at least 1"));
    }
    let rows = replicate(replicas, |r| passage_row(setup, dist, grid, seed, r))?;
    let times = (0..grid.len()).map(|k| rows.iter().map(|row| row[k]).collect()).collect();
    Ok(PassageSamples { grid: grid.to_vec(), times, seed, distribution: dist.to_string() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeConstantEstimate {
    pub grid: Vec<usize>,
    /// Summary of `T(0, n) / n` per grid value.
    pub per_n: Vec<Summary>,
    /// Estimate at the largest `n`.
    pub mu_hat: Summary,
    /// `per_n[k+1].mean ≤ per_n[k].mean + 2·(CI_k + CI_{k+1})` for all k.
    pub nonincreasing_within_2ci: bool,
    pub samples: PassageSamples,
}

pub fn estimate_time_constant(
    setup: &FppSetup,
    dist: &WeightDistribution,
    grid: &[usize],
    replicas: usize,
    seed: u64,
) -> Result<TimeConstantEstimate> {
    validate_grid(grid, 8)?;
    let samples = sample_passage_times(setup, dist, grid, replicas, seed)?;
    Ok(time_constant_from(samples))
}

pub fn time_constant_from(samples: PassageSamples) -> TimeConstantEstimate {
    let mut order: Vec<usize> = (0..samples.grid.len()).collect();
    order.sort_by_key(|&k| samples.grid[k]);
    let per_n: Vec<Summary> = samples
        .grid
        .iter()
        .zip(&samples.times)
        .map(|(&n, t)| Summary::of(&t.iter().map(|x| x / n as f64).collect::<Vec<_>>()))
        .collect();
    let mu_hat = per_n[*order.last().unwrap()];
    let ci = |s: &Summary| if s.ci_half_width.is_nan() { 0.0 } else { s.ci_half_width };
    let nonincreasing_within_2ci = order.windows(2).all(|w| {
        let (a, b) = (&per_n[w[0]], &per_n[w[1]]);
        b.mean <= a.mean + 2.0 * (ci(a) + ci(b))
    });
    TimeConstantEstimate { grid: samples.grid.clone(), per_n, mu_hat, nonincreasing_within_2ci, samples }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceScaling {
    pub grid: Vec<usize>,
    /// Sample variance of `T(0, n)` and its approximate 95% half-width.
    pub variance: Vec<f64>,
    pub variance_ci_half_width: Vec<f64>,
    /// Least squares of `ln V` on `ln n`.
    pub fit: Option<LineFit>,
    pub samples: PassageSamples,
}

pub fn variance_scaling(
    setup: &FppSetup,
    dist: &WeightDistribution,
    grid: &[usize],
    replicas: usize,
    seed: u64,
) -> Result<VarianceScaling> {
    if replicas < 100 {
        return Err(invalid("variance scaling needs at least 100 replicas"));
    }
    let mut distinct = grid.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(invalid("variance scaling needs at least two distinct n"));
    }
    let samples = sample_passage_times(setup, dist, grid, replicas, seed)?;
    Ok(variance_from(samples))
}

pub fn variance_from(samples: PassageSamples) -> VarianceScaling {
    let variance: Vec<f64> = samples.times.iter().map(|t| Summary::of(t).variance).collect();
    let variance_ci_half_width = samples.times.iter().map(|t| Summary::variance_ci_half_width(t)).collect();
    let xs: Vec<f64> = samples.grid.iter().map(|&n| n as f64).collect();
    let fit = fit_power_law(&xs, &variance);
    VarianceScaling { grid: samples.grid.clone(), variance, variance_ci_half_width, fit, samples }
}

/// Exceedance frequencies `P̂(|T − Ê T| ≥ r n^κ)` with the reference
/// curves `exp(−r^ν)` for both exponent normalisations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationProfile {
    pub n: usize,
    pub kappa: f64,
    /// `(4κ − 2) / 7`.
    pub nu: f64,
    /// `4δ / (1 + 7δ)` with `δ = (2κ − 1) / 7`.
    pub nu_alt: f64,
    pub r_grid: Vec<f64>,
    pub exceedance: Vec<Proportion>,
    pub reference: Vec<f64>,
    pub reference_alt: Vec<f64>,
    pub mean: f64,
    pub samples: Vec<f64>,
}

pub const MIN_TAIL_REPLICAS: usize = 20;

#[allow(clippy::too_many_arguments)]
pub fn concentration_profile(
    setup: &FppSetup,
    dist: &WeightDistribution,
    n: usize,
    kappa: f64,
    r_grid: &[f64],
    replicas: usize,
    seed: u64,
) -> Result<ConcentrationProfile> {
    if !(kappa > 0.5 && kappa <= 1.0) {
        return Err(invalid(format!("kappa must lie in (1/2, 1], got {kappa}")));
    }
    if replicas < MIN_TAIL_REPLICAS {
        return Err(invalid(format!("tail tables need at least {MIN_TAIL_REPLICAS} replicas")));
    }
    if r_grid.is_empty() || r_grid.iter().any(|r| !(*r >= 0.0)) {
        return Err(invalid("r grid must be nonempty and nonnegative"));
    }
    let s = sample_passage_times(setup, dist, &[n], replicas, seed)?;
    Ok(concentration_from(n, kappa, r_grid, s.times[0].clone()))
}

pub fn concentration_from(n: usize, kappa: f64, r_grid: &[f64], samples: Vec<f64>) -> ConcentrationProfile {
    let mean = Summary::of(&samples).mean;
    let scale = (n as f64).powf(kappa);
    let nu = (4.0 * kappa - 2.0) / 7.0;
    let delta = (2.0 * kappa - 1.0) / 7.0;
    let nu_alt = 4.0 * delta / (1.0 + 7.0 * delta);
    let exceedance = r_grid
        .iter()
        .map(|&r| Proportion::from_flags(samples.iter().map(|t| (t - mean).abs() >= r * scale)))
        .collect();
    ConcentrationProfile {
        n,
        kappa,
        nu,
        nu_alt,
        r_grid: r_grid.to_vec(),
        exceedance,
        reference: r_grid.iter().map(|r| (-r.powf(nu)).exp()).collect(),
        reference_alt: r_grid.iter().map(|r| (-r.powf(nu_alt)).exp()).collect(),
        mean,
        samples,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubadditivityPair {
    pub n: usize,
    /// Per-replica `T(0, 2n) − 2 T(0, n)`, summarised.
    pub doubling_gap: Summary,
    /// `Ê T(0, n) / n − μ̂`, with the CI half-widths added.
    pub bias: f64,
    pub bias_ci_half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubadditivityCheck {
    pub mu_hat: Summary,
    pub pairs: Vec<SubadditivityPair>,
    pub samples: PassageSamples,
}

pub fn subadditivity_check(
    setup: &FppSetup,
    dist: &WeightDistribution,
    grid: &[usize],
    replicas: usize,
    seed: u64,
) -> Result<SubadditivityCheck> {
    if !grid.iter().any(|&n| grid.contains(&(2 * n))) {
        return Err(invalid("grid must contain at least one (n, 2n) pair"));
    }
    let samples = sample_passage_times(setup, dist, grid, replicas, seed)?;
    Ok(subadditivity_from(samples))
}

pub fn subadditivity_from(samples: PassageSamples) -> SubadditivityCheck {
    let tc = time_constant_from(samples.clone());
    let mut ns: Vec<usize> = samples.grid.clone();
    ns.sort_unstable();
    ns.dedup();
    let mut pairs = Vec::new();
    for &n in &ns {
        let (Some(a), Some(b)) = (samples.column(n), samples.column(2 * n)) else { continue };
        let gaps: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - 2.0 * x).collect();
        let k = samples.grid.iter().position(|&m| m == n).unwrap();
        let s = tc.per_n[k];
        let ci = |h: f64| if h.is_nan() { 0.0 } else { h };
        pairs.push(SubadditivityPair {
            n,
            doubling_gap: Summary::of(&gaps),
            bias: s.mean - tc.mu_hat.mean,
            bias_ci_half_width: ci(s.ci_half_width) + ci(tc.mu_hat.ci_half_width),
        });
    }
    SubadditivityCheck { mu_hat: tc.mu_hat, pairs, samples }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessProbe {
    pub n: usize,
    pub ties: Proportion,
    /// Replicas where the path count ran out of budget (excluded).
    pub undetermined: usize,
    pub per_replica: Vec<Option<bool>>,
}

/// Fraction of replicas with two distinct simple geodesics from `v(0)` to `v(n)`.
pub fn geodesic_uniqueness_probe(
    setup: &FppSetup,
    dist: &WeightDistribution,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<UniquenessProbe> {
    dist.validate()?;
    setup.check_distance(n)?;
    let flags = replicate(replicas, |r| {
        let window = setup.window()?;
        let points = setup.points(&window, seed, r)?;
        let graph = build_delaunay(&points)?;
        let weights = assign_weights(&graph, dist, derive_seed(seed, r as u64, WEIGHTS))?;
        let diagram = build_voronoi_dual(&graph, &window);
        let (a, b) = setup.endpoints(n as f64);
        match count_geodesics(&graph, &weights, diagram.nearest(&a), diagram.nearest(&b), 2, 5_000_000) {
            Ok(k) => Ok(Some(k >= 2)),
            Err(Error::BoundExceeded(_)) => Ok(None),
            Err(e) => Err(e),
        }
    })?;
    let undetermined = flags.iter().filter(|f| f.is_none()).count();
    Ok(UniquenessProbe { n, ties: Proportion::from_flags(flags.iter().flatten().copied()), undetermined, per_replica: flags })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationGap {
    pub n: usize,
    pub a: f64,
    pub delta: f64,
    /// `|T_n − T̄_n|` per replica.
    pub gaps: Vec<f64>,
    /// Summary of the squared gaps (mean = mean-square gap).
    pub mean_square: Summary,
    /// Fraction of replicas with a nonzero gap.
    pub nonzero: Proportion,
}

/// Labels shared between a point set and its truncation.
fn provenance_labels(prov: &[Provenance]) -> Vec<u64> {
    prov.iter()
        .map(|p| match *p {
            Provenance::Original(i) => i as u64,
            Provenance::Added(b) => (1u64 << 48) + b as u64,
        })
        .collect()
}

/// `|T(0,n) − T̄(0,n)|` where `T̄` runs on the truncated process with
/// weights capped at `8 a⁻¹ ln n`. Edges present in both graphs carry the
/// same passage time (weights are keyed by point labels).
#[allow(clippy::too_many_arguments)]
pub fn truncation_gap(
    setup: &FppSetup,
    dist: &WeightDistribution,
    n: usize,
    a: f64,
    delta: f64,
    replicas: usize,
    seed: u64,
) -> Result<TruncationGap> {
    dist.validate()?;
    setup.check_distance(n)?;
    if replicas == 0 {
        return Err(invalid("replicas must be at least 1"));
    }
    crate::weights::truncation_cap(n, a)?;
    let gaps = replicate(replicas, |r| {
        let window = setup.window()?;
        let points = setup.points(&window, seed, r)?;
        let wseed = derive_seed(seed, r as u64, WEIGHTS);
        let labels: Vec<u64> = (0..points.len() as u64).collect();
        let t = endpoint_time(setup, &points, &labels, dist, wseed, n, None)?;
        let tp = truncated_process(&points, n, delta, derive_seed(seed, r as u64, AUX))?;
        let tl = provenance_labels(&tp.provenance);
        let tb = endpoint_time(setup, &tp.points, &tl, dist, wseed, n, Some(a))?;
        Ok((t - tb).abs())
    })?;
    let sq: Vec<f64> = gaps.iter().map(|g| g * g).collect();
    Ok(TruncationGap {
        n,
        a,
        delta,
        mean_square: Summary::of(&sq),
        nonzero: Proportion::from_flags(gaps.iter().map(|&g| g != 0.0)),
        gaps,
    })
}

fn endpoint_time(
    setup: &FppSetup,
    points: &PointSet,
    labels: &[u64],
    dist: &WeightDistribution,
    wseed: u64,
    n: usize,
    truncate_a: Option<f64>,
) -> Result<f64> {
    let graph: DelaunayGraph = build_delaunay(points)?;
    let mut weights: EdgeWeights = assign_weights_keyed(&graph, labels, dist, wseed)?;
    if let Some(a) = truncate_a {
        weights = truncate_weights(&weights, n, a)?;
    }
    let diagram = build_voronoi_dual(&graph, points.window());
    let (p, q) = setup.endpoints(n as f64);
    let (s, t) = (diagram.nearest(&p), diagram.nearest(&q));
    let d = shortest_paths_until(&graph, &weights, s, f64::INFINITY, |v, _| v == t);
    if d[t].is_finite() {
        Ok(d[t])
    } else {
        Err(Error::Disconnected(s, t))
    }
}

/// Default box exponent for [`truncation_gap`].
pub const TRUNCATION_DELTA: f64 = DEFAULT_DELTA;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeDeviation {
    pub t_grid: Vec<f64>,
    pub kappa: f64,
    pub mu_hat: f64,
    pub rays: usize,
    /// Per-t summary over replicas of the in-band fraction of rays.
    pub in_band: Vec<Summary>,
    /// `radii[k][r][j]`: support radius of `B₀(t_k)` along ray `j` in replica `r`.
    pub radii: Vec<Vec<Vec<f64>>>,
}

/// Unit vectors at angles `2πj / rays`, built for the first quadrant and
/// rotated by exact quarter turns so the set is invariant under `(x,y) ↦ (−y,x)`.
pub fn ray_directions(rays: usize) -> Result<Vec<Point>> {
    if rays == 0 || rays % 4 != 0 {
        return Err(invalid("ray count must be a positive multiple of 4"));
    }
    let q = rays / 4;
    let first: Vec<Point> = (0..q)
        .map(|j| {
            let th = std::f64::consts::TAU * j as f64 / rays as f64;
            Point::new(th.cos(), th.sin())
        })
        .collect();
    let mut out = Vec::with_capacity(rays);
    for turn in 0..4 {
        for p in &first {
            let mut v = *p;
            for _ in 0..turn {
                v = Point::new(-v.y, v.x);
            }
            out.push(v);
        }
    }
    Ok(out)
}

/// Support function of the union of reached tiles, measured from `origin`
/// along each direction: the maximum projection of the cell corners
/// (circumcenters of triangles at a reached vertex). Returns one row per
/// horizon in `t_sorted` (ascending).
pub fn support_radii(
    graph: &DelaunayGraph,
    weights: &EdgeWeights,
    origin: &Point,
    source: usize,
    t_sorted: &[f64],
    dirs: &[Point],
) -> Vec<Vec<f64>> {
    let tmax = t_sorted.last().copied().unwrap_or(0.0);
    let d = shortest_paths_until(graph, weights, source, tmax, |_, _| false);
    let pts = graph.points();
    let mut out = vec![vec![f64::NEG_INFINITY; dirs.len()]; t_sorted.len()];
    for t in graph.triangles() {
        let arrival = t.iter().map(|&v| d[v]).fold(f64::INFINITY, f64::min);
        if !arrival.is_finite() {
            continue;
        }
        let c = crate::geometry::predicates::circumcenter(&pts[t[0]], &pts[t[1]], &pts[t[2]]);
        let (cx, cy) = (c.x - origin.x, c.y - origin.y);
        for (k, &h) in t_sorted.iter().enumerate() {
            if arrival > h {
                continue;
            }
            for (j, u) in dirs.iter().enumerate() {
                let p = cx * u.x + cy * u.y;
                if p > out[k][j] {
                    out[k][j] = p;
                }
            }
        }
    }
    // A reached vertex with no finite triangle around it cannot occur in a
    // triangulation; the source tile alone still gives its generator.
    for row in &mut out {
        for (j, u) in dirs.iter().enumerate() {
            let s = pts[source];
            let p = (s.x - origin.x) * u.x + (s.y - origin.y) * u.y;
            if p > row[j] {
                row[j] = p;
            }
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
pub fn shape_deviation(
    setup: &FppSetup,
    dist: &WeightDistribution,
    t_grid: &[f64],
    kappa: f64,
    mu_hat: f64,
    rays: usize,
    replicas: usize,
    seed: u64,
) -> Result<ShapeDeviation> {
    dist.validate()?;
    if !(mu_hat > 0.0 && mu_hat.is_finite()) {
        return Err(invalid("shape deviation needs a positive time-constant estimate"));
    }
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(invalid("t grid must be nonempty and nonnegative"));
    }
    if replicas == 0 {
        return Err(invalid("replicas must be at least 1"));
    }
    let dirs = ray_directions(rays)?;
    let window = setup.centered_window()?;
    let half_usable = setup.side / 2.0 - setup.margin;
    for &t in t_grid {
        let outer = (t + t.powf(kappa)) / mu_hat;
        if outer > half_usable {
            return Err(invalid(format!("t = {t}: outer radius {outer} exceeds the usable half-width {half_usable}")));
        }
    }
    let mut sorted: Vec<f64> = t_grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let origin = Point::new(0.0, 0.0);
    let per_replica = replicate(replicas, |r| {
        let points = setup.points(&window, seed, r)?;
        let graph = build_delaunay(&points)?;
        let weights = assign_weights(&graph, dist, derive_seed(seed, r as u64, WEIGHTS))?;
        let diagram = build_voronoi_dual(&graph, &window);
        let src = diagram.nearest(&origin);
        Ok(support_radii(&graph, &weights, &origin, src, &sorted, &dirs))
    })?;
    let mut in_band = Vec::new();
    let mut radii = Vec::new();
    for &t in t_grid {
        let k = sorted.iter().position(|&s| s == t).unwrap();
        let lo = (t - t.powf(kappa)) / mu_hat;
        let hi = (t + t.powf(kappa)) / mu_hat;
        let rows: Vec<Vec<f64>> = per_replica.iter().map(|rep| rep[k].clone()).collect();
        let fractions: Vec<f64> = rows
            .iter()
            .map(|row| row.iter().filter(|&&x| x >= lo && x <= hi).count() as f64 / rays as f64)
            .collect();
        in_band.push(Summary::of(&fractions));
        radii.push(rows);
    }
    Ok(ShapeDeviation { t_grid: t_grid.to_vec(), kappa, mu_hat, rays, in_band, radii })
}
