//! Segment walks through the Voronoi tiling, the box animals of paths,
//! cheapest long paths and self-avoiding path counts.

use crate::error::{invalid, Error, Result};
use crate::fpp::shortest_paths_until;
use crate::geometry::predicates::{orient, segment_meets_rect, segments_intersect};
use crate::geometry::{build_delaunay, build_voronoi_dual, sample_poisson, DelaunayGraph, Point, VoronoiDiagram, Window};
use crate::renorm::Site;
use crate::runner::replicate;
use crate::seed::{derive_seed, POINTS, WEIGHTS};
use crate::stats::{quantile, Proportion, Summary};
use crate::weights::{assign_weights, EdgeWeights, WeightDistribution};
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexPath {
    pub vertices: Vec<usize>,
    pub self_avoiding: bool,
}

impl VertexPath {
    pub fn new(vertices: Vec<usize>) -> Self {
        let distinct = vertices.iter().collect::<BTreeSet<_>>().len();
        let self_avoiding = distinct == vertices.len();
        VertexPath { vertices, self_avoiding }
    }

    /// Number of edges.
    pub fn steps(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }
}

/// Offset applied to both ends of a segment query that meets a Voronoi vertex.
pub const TIE_OFFSET: Point = Point::new(1e-9, 1e-9 * 1.618_033_988_749_895);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegmentWalk {
    pub path: VertexPath,
    /// True when the query was shifted by [`TIE_OFFSET`].
    pub perturbed: bool,
}

/// Crossing parameter of `[x, y]` with `[c, d]` along `x → y`.
fn crossing_param(x: &Point, y: &Point, c: &Point, d: &Point) -> f64 {
    let (rx, ry) = (y.x - x.x, y.y - x.y);
    let (sx, sy) = (d.x - c.x, d.y - c.y);
    let den = rx * sy - ry * sx;
    if den == 0.0 {
        // Collinear overlap: take the nearer end.
        let len2 = rx * rx + ry * ry;
        let t = |p: &Point| ((p.x - x.x) * rx + (p.y - x.y) * ry) / len2;
        return t(c).min(t(d));
    }
    ((c.x - x.x) * sy - (c.y - x.y) * sx) / den
}

enum Step {
    Done(Vec<usize>),
    /// The segment touched a Voronoi vertex.
    Degenerate,
}

fn walk_once(x: &Point, y: &Point, diagram: &VoronoiDiagram<'_>) -> Result<Step> {
    let g = diagram.graph();
    let start = diagram.nearest(x);
    let end = diagram.nearest(y);
    let mut path = vec![start];
    let mut prev = usize::MAX;
    let mut cur = start;
    let mut t_cur = f64::NEG_INFINITY;
    let cap = g.num_vertices() + 1;
    while cur != end {
        let mut best: Option<(f64, usize)> = None;
        for (&u, &e) in g.neighbors(cur).iter().zip(g.neighbor_edges(cur)) {
            if u == prev {
                continue;
            }
            let Some((c, d)) = diagram.dual_segment(e) else { continue };
            if !segments_intersect(x, y, &c, &d) {
                continue;
            }
            if orient(x, y, &c) == 0.0 || orient(x, y, &d) == 0.0 {
                return Ok(Step::Degenerate);
            }
            let t = crossing_param(x, y, &c, &d);
            if t >= t_cur && best.is_none_or(|(bt, _)| t > bt) {
                best = Some((t, u));
            }
        }
        let Some((t, u)) = best else {
            return Err(Error::Degenerate(format!("segment walk stuck at vertex {cur}")));
        };
        prev = cur;
        cur = u;
        t_cur = t;
        path.push(u);
        if path.len() > cap {
            return Err(Error::Degenerate("segment walk did not terminate".into()));
        }
    }
    Ok(Step::Done(path))
}

/// `γ(x, y)`: from `v(x)`, repeatedly step to the neighbour (other than the
/// previous vertex) whose shared Voronoi edge crosses `[x, y]` furthest
/// along, until `v(y)`. A query through a Voronoi vertex is shifted once by
/// [`TIE_OFFSET`].
pub fn segment_walk(x: &Point, y: &Point, diagram: &VoronoiDiagram<'_>) -> Result<SegmentWalk> {
    let w = diagram.window();
    for p in [x, y] {
        if !p.is_finite() || !w.admits(p) {
            return Err(Error::OutsideRegion { x: p.x, y: p.y });
        }
    }
    match walk_once(x, y, diagram)? {
        Step::Done(v) => Ok(SegmentWalk { path: VertexPath::new(v), perturbed: false }),
        Step::Degenerate => {
            let shift = |p: &Point| Point::new(p.x + TIE_OFFSET.x, p.y + TIE_OFFSET.y);
            match walk_once(&shift(x), &shift(y), diagram)? {
                Step::Done(v) => Ok(SegmentWalk { path: VertexPath::new(v), perturbed: true }),
                Step::Degenerate => Err(Error::Degenerate("segment meets a Voronoi vertex after the tie offset".into())),
            }
        }
    }
}

/// `A(γ)`: sites `z` whose closed box `B_z^{1/2,L}` meets a segment of the
/// path (or the single vertex of a one-vertex path).
pub fn path_animal(positions: &[Point], path: &[usize], l: f64) -> Result<BTreeSet<Site>> {
    if path.is_empty() {
        return Err(invalid("empty path"));
    }
    if !(l > 0.0 && l.is_finite()) {
        return Err(invalid("box scale must be positive"));
    }
    let mut out = BTreeSet::new();
    let mut cover = |p: &Point, q: &Point| {
        let range = |a: f64, b: f64| ((a.min(b) / l - 0.5).ceil() as i64, (a.max(b) / l + 0.5).floor() as i64);
        let (i0, i1) = range(p.x, q.x);
        let (j0, j1) = range(p.y, q.y);
        for i in i0..=i1 {
            for j in j0..=j1 {
                let lo = Point::new((i as f64 - 0.5) * l, (j as f64 - 0.5) * l);
                let hi = Point::new((i as f64 + 0.5) * l, (j as f64 + 0.5) * l);
                if segment_meets_rect(p, q, &lo, &hi) {
                    out.insert((i, j));
                }
            }
        }
    };
    if path.len() == 1 {
        let p = positions[path[0]];
        cover(&p, &p);
    }
    for w in path.windows(2) {
        cover(&positions[w[0]], &positions[w[1]]);
    }
    Ok(out)
}

pub const MAX_EXACT_STEPS: usize = 9;
pub const MAX_COUNT_STEPS: usize = 10;

/// Depth-first enumeration of self-avoiding paths from `v` with at most
/// `r` steps. `visit(path)` returns false to prune the extension of
/// `path`. Errors once more than `budget` paths have been visited.
fn for_each_saw(
    graph: &DelaunayGraph,
    v: usize,
    r: usize,
    budget: u64,
    mut visit: impl FnMut(&[usize], &[usize]) -> bool,
) -> Result<()> {
    let n = graph.num_vertices();
    let mut used = vec![false; n];
    let mut path = vec![v];
    let mut edges: Vec<usize> = Vec::new();
    let mut slot = vec![0usize];
    used[v] = true;
    let mut visited = 0u64;
    if !visit(&path, &edges) {
        return Ok(());
    }
    while let Some(k) = slot.last_mut() {
        let a = *path.last().unwrap();
        let nb = graph.neighbors(a);
        if path.len() > r || *k >= nb.len() {
            used[a] = false;
            path.pop();
            edges.pop();
            slot.pop();
            continue;
        }
        let (b, e) = (nb[*k], graph.neighbor_edges(a)[*k]);
        *k += 1;
        if used[b] {
            continue;
        }
        visited += 1;
        if visited > budget {
            return Err(Error::BoundExceeded(format!("more than {budget} self-avoiding paths")));
        }
        path.push(b);
        edges.push(e);
        if visit(&path, &edges) {
            used[b] = true;
            slot.push(0);
        } else {
            path.pop();
            edges.pop();
        }
    }
    Ok(())
}

pub const DEFAULT_BUDGET: u64 = 200_000_000;

/// `t_r`: least passage time over self-avoiding paths from `source` with at
/// least `r` edges (equivalently exactly `r`, since weights are
/// nonnegative). Branch and bound on the running sum. `None` if no such
/// path exists.
pub fn cheapest_long_path(graph: &DelaunayGraph, weights: &EdgeWeights, source: usize, r: usize) -> Result<Option<f64>> {
    if source >= graph.num_vertices() {
        return Err(Error::UnknownVertex(source));
    }
    if r > MAX_EXACT_STEPS {
        return Err(Error::BoundExceeded(format!("exact t_r needs r ≤ {MAX_EXACT_STEPS}")));
    }
    if weights.len() != graph.num_edges() {
        return Err(Error::Precondition("weights do not match the graph's edges".into()));
    }
    let mut best: Option<f64> = None;
    for_each_saw(graph, source, r, DEFAULT_BUDGET, |_, edges| {
        let s: f64 = edges.iter().map(|&e| weights.get(e)).sum();
        if best.is_some_and(|b| s >= b) {
            return false;
        }
        if edges.len() == r {
            best = Some(s);
            return false;
        }
        true
    })?;
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SawCount {
    pub r: usize,
    pub count: u64,
    /// `ln N_r`; `None` when there is no such path.
    pub kappa: Option<f64>,
}

/// `N_r`: self-avoiding paths of exactly `r` steps from `v`.
pub fn count_self_avoiding(graph: &DelaunayGraph, v: usize, r: usize) -> Result<SawCount> {
    if v >= graph.num_vertices() {
        return Err(Error::UnknownVertex(v));
    }
    if r > MAX_COUNT_STEPS {
        return Err(Error::BoundExceeded(format!("exact counts need r ≤ {MAX_COUNT_STEPS}")));
    }
    let mut count = 0u64;
    for_each_saw(graph, v, r, u64::MAX, |p, _| {
        if p.len() == r + 1 {
            count += 1;
            return false;
        }
        true
    })?;
    Ok(SawCount { r, count, kappa: (count > 0).then(|| (count as f64).ln()) })
}

/// `N_r` for every `r ≤ rmax` from one enumeration.
pub fn count_table(graph: &DelaunayGraph, v: usize, rmax: usize) -> Result<Vec<SawCount>> {
    if v >= graph.num_vertices() {
        return Err(Error::UnknownVertex(v));
    }
    if rmax > MAX_COUNT_STEPS {
        return Err(Error::BoundExceeded(format!("exact counts need r ≤ {MAX_COUNT_STEPS}")));
    }
    let mut counts = vec![0u64; rmax + 1];
    for_each_saw(graph, v, rmax, u64::MAX, |p, _| {
        counts[p.len() - 1] += 1;
        true
    })?;
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(r, count)| SawCount { r, count, kappa: (count > 0).then(|| (count as f64).ln()) })
        .collect())
}

/// `(g_r, G_r)`: least box-animal size over self-avoiding paths with at
/// least `r` edges, and greatest over those with at most `r` edges, all
/// from `source`.
pub fn animal_extrema(graph: &DelaunayGraph, source: usize, r: usize, l: f64) -> Result<(Option<usize>, usize)> {
    if r > MAX_EXACT_STEPS {
        return Err(Error::BoundExceeded(format!("exact extrema need r ≤ {MAX_EXACT_STEPS}")));
    }
    if source >= graph.num_vertices() {
        return Err(Error::UnknownVertex(source));
    }
    let pos = graph.points();
    let mut g: Option<usize> = None;
    let mut big = 0usize;
    // A(γ) only grows along a path, so each prefix's animal is reused.
    let mut stack: Vec<BTreeSet<Site>> = Vec::new();
    let mut err = None;
    for_each_saw(graph, source, r, DEFAULT_BUDGET, |p, _| {
        stack.truncate(p.len() - 1);
        let mut a = match stack.last() {
            Some(prev) => prev.clone(),
            None => match path_animal(pos, &p[..1], l) {
                Ok(a) => a,
                Err(e) => {
                    err = Some(e);
                    return false;
                }
            },
        };
        if p.len() >= 2 {
            match path_animal(pos, &p[p.len() - 2..], l) {
                Ok(seg) => a.extend(seg),
                Err(e) => {
                    err = Some(e);
                    return false;
                }
            }
        }
        big = big.max(a.len());
        if p.len() == r + 1 {
            g = Some(g.map_or(a.len(), |x| x.min(a.len())));
        }
        stack.push(a);
        true
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok((g, big))
}

/// Centred square window for growth from the origin.
fn centred_window(half: f64, margin: f64) -> Result<Window> {
    Window::new(Point::new(-half, -half), Point::new(half, half), margin)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkLengthRow {
    pub r: f64,
    /// `|γ_r| / r` with `|γ_r|` the vertex count.
    pub ratio: Summary,
    pub q99: f64,
    /// `P(|γ_r| > z r)` for each `z` in the scan's grid.
    pub tail: Vec<Proportion>,
    pub perturbed: usize,
    pub self_avoidance_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkLengthScan {
    pub direction: Point,
    pub z_grid: Vec<f64>,
    pub rows: Vec<WalkLengthRow>,
    /// `ratios[k][replica]`.
    pub ratios: Vec<Vec<f64>>,
}

/// `γ_r = γ(0, r·d)` on fresh unit-intensity Poisson windows; `d = (1, 1)`
/// by default.
pub fn walk_length_scan(
    r_grid: &[f64],
    z_grid: &[f64],
    direction: Point,
    replicas: usize,
    seed: u64,
) -> Result<WalkLengthScan> {
    if r_grid.is_empty() || r_grid.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(invalid("r grid must be nonempty and positive"));
    }
    if !direction.is_finite() || (direction.x == 0.0 && direction.y == 0.0) {
        return Err(invalid("direction must be a nonzero vector"));
    }
    let reach = r_grid.iter().fold(0.0f64, |m, r| m.max(r * direction.x.abs().max(direction.y.abs())));
    let margin = (reach / 4.0).max(8.0);
    let window = centred_window(reach + 2.0 * margin, margin)?;
    let rows = replicate(replicas, |rep| {
        let points = sample_poisson(&window, 1.0, derive_seed(seed, rep as u64, POINTS))?;
        let graph = build_delaunay(&points)?;
        let diagram = build_voronoi_dual(&graph, &window);
        let o = Point::new(0.0, 0.0);
        r_grid
            .iter()
            .map(|&r| segment_walk(&o, &Point::new(r * direction.x, r * direction.y), &diagram))
            .collect::<Result<Vec<SegmentWalk>>>()
    })?;
    let mut out = Vec::new();
    let mut ratios = Vec::new();
    for (k, &r) in r_grid.iter().enumerate() {
        let walks: Vec<&SegmentWalk> = rows.iter().map(|row| &row[k]).collect();
        let ratio: Vec<f64> = walks.iter().map(|w| w.path.vertices.len() as f64 / r).collect();
        out.push(WalkLengthRow {
            r,
            ratio: Summary::of(&ratio),
            q99: quantile(&ratio, 0.99),
            tail: z_grid.iter().map(|&z| Proportion::from_flags(ratio.iter().map(|&x| x > z))).collect(),
            perturbed: walks.iter().filter(|w| w.perturbed).count(),
            self_avoidance_violations: walks.iter().filter(|w| !w.path.self_avoiding).count(),
        });
        ratios.push(ratio);
    }
    Ok(WalkLengthScan { direction, z_grid: z_grid.to_vec(), rows: out, ratios })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnimalScanRow {
    pub r: usize,
    /// Exact extrema (r within the enumeration bound), per replica.
    pub g: Option<Summary>,
    pub big_g: Option<Summary>,
    /// Sampled evidence, not extrema: `|A|/r` of the segment walk `γ_r`
    /// and of the geodesic from `v(0)` to `v(r·d)` under exponential(1).
    pub walk_ratio: Summary,
    pub geodesic_ratio: Summary,
}

/// `g_r^L`, `G_r^L` by exhaustive enumeration for `r ≤ 9`; sampled animal
/// sizes of segment walks and geodesics for every `r`.
pub fn min_animal_scan(r_grid: &[usize], l: f64, direction: Point, replicas: usize, seed: u64) -> Result<Vec<AnimalScanRow>> {
    if r_grid.is_empty() || r_grid.contains(&0) {
        return Err(invalid("r grid must be nonempty and positive"));
    }
    if !(l > 0.0) {
        return Err(invalid("box scale must be positive"));
    }
    let rmax = *r_grid.iter().max().unwrap() as f64;
    let reach = rmax * direction.x.abs().max(direction.y.abs());
    let margin = (reach / 4.0).max(8.0);
    let window = centred_window(reach.max(3.0 * MAX_EXACT_STEPS as f64) + 2.0 * margin, margin)?;
    let exp1 = WeightDistribution::Exponential { rate: 1.0 };
    let rows = replicate(replicas, |rep| {
        let points = sample_poisson(&window, 1.0, derive_seed(seed, rep as u64, POINTS))?;
        let graph = build_delaunay(&points)?;
        let diagram = build_voronoi_dual(&graph, &window);
        let weights = assign_weights(&graph, &exp1, derive_seed(seed, rep as u64, WEIGHTS))?;
        let o = Point::new(0.0, 0.0);
        let src = diagram.nearest(&o);
        let dist = shortest_paths_until(&graph, &weights, src, f64::INFINITY, |_, _| false);
        let mut out = Vec::new();
        for &r in r_grid {
            let exact = if r <= MAX_EXACT_STEPS { Some(animal_extrema(&graph, src, r, l)?) } else { None };
            let target = Point::new(r as f64 * direction.x, r as f64 * direction.y);
            let walk = segment_walk(&o, &target, &diagram)?;
            let wa = path_animal(graph.points(), &walk.path.vertices, l)?.len();
            let geo = crate::fpp::first_passage_time(&graph, &weights, src, diagram.nearest(&target))?;
            debug_assert_eq!(geo.time, dist[*geo.geodesic.last().unwrap()]);
            let ga = path_animal(graph.points(), &geo.geodesic, l)?.len();
            out.push((exact, wa as f64 / r as f64, ga as f64 / r as f64));
        }
        Ok(out)
    })?;
    Ok(r_grid
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let col: Vec<_> = rows.iter().map(|row| row[k]).collect();
            let exact: Vec<(Option<usize>, usize)> = col.iter().filter_map(|c| c.0).collect();
            let g: Vec<f64> = exact.iter().filter_map(|e| e.0).map(|x| x as f64).collect();
            let big: Vec<f64> = exact.iter().map(|e| e.1 as f64).collect();
            AnimalScanRow {
                r,
                g: (!g.is_empty()).then(|| Summary::of(&g)),
                big_g: (!big.is_empty()).then(|| Summary::of(&big)),
                walk_ratio: Summary::of(&col.iter().map(|c| c.1).collect::<Vec<_>>()),
                geodesic_ratio: Summary::of(&col.iter().map(|c| c.2).collect::<Vec<_>>()),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheapPathRow {
    pub r: usize,
    pub t: Summary,
    /// `P(t_r ≤ c r)`.
    pub below: Proportion,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheapPathScan {
    pub distribution: String,
    pub c: f64,
    pub rows: Vec<CheapPathRow>,
    /// `t[k][replica]`.
    pub values: Vec<Vec<f64>>,
}

/// Exact `t_r` from `v(0)` on fresh Poisson windows.
pub fn cheap_path_scan(
    dist: &WeightDistribution,
    r_grid: &[usize],
    c: f64,
    replicas: usize,
    seed: u64,
) -> Result<CheapPathScan> {
    dist.validate()?;
    if r_grid.is_empty() || r_grid.iter().any(|&r| r == 0 || r > MAX_EXACT_STEPS) {
        return Err(Error::BoundExceeded(format!("r must lie in 1..={MAX_EXACT_STEPS}")));
    }
    let rmax = *r_grid.iter().max().unwrap() as f64;
    let window = centred_window(3.0 * rmax + 16.0, 8.0)?;
    let rows = replicate(replicas, |rep| {
        let points = sample_poisson(&window, 1.0, derive_seed(seed, rep as u64, POINTS))?;
        let graph = build_delaunay(&points)?;
        let diagram = build_voronoi_dual(&graph, &window);
        let weights = assign_weights(&graph, dist, derive_seed(seed, rep as u64, WEIGHTS))?;
        let src = diagram.nearest(&Point::new(0.0, 0.0));
        r_grid
            .iter()
            .map(|&r| {
                cheapest_long_path(&graph, &weights, src, r)?
                    .ok_or_else(|| Error::Degenerate(format!("no {r}-step path from the origin tile")))
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    let values: Vec<Vec<f64>> = (0..r_grid.len()).map(|k| rows.iter().map(|row| row[k]).collect()).collect();
    Ok(CheapPathScan {
        distribution: dist.to_string(),
        c,
        rows: r_grid
            .iter()
            .zip(&values)
            .map(|(&r, v)| CheapPathRow {
                r,
                t: Summary::of(v),
                below: Proportion::from_flags(v.iter().map(|&t| t <= c * r as f64)),
            })
            .collect(),
        values,
    })
}
