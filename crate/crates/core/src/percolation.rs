//! Bond percolation on the Voronoi tessellation: rectangle crossings,
//! crossing probabilities and thresholds, annulus circuits and the
//! good-box predicates built on them.

use crate::error::{invalid, Error, Result};
use crate::geometry::predicates::{orient, segment_meets_rect, segments_intersect};
use crate::geometry::{build_delaunay, build_voronoi_dual, sample_poisson, BoxGrid, Point, PointSet, VoronoiDiagram, Window};
use crate::renorm::is_full_box;
use crate::runner::replicate;
use crate::seed::{derive_seed, AUX, BONDS, POINTS};
use crate::stats::{median_interval, Proportion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

/// Open/closed marks indexed by Delaunay edge id (the dual edge `e*`).
/// Hull edges have no dual segment and are never open.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BondConfiguration {
    open: Vec<bool>,
}

impl BondConfiguration {
    pub fn from_flags(open: Vec<bool>) -> Self {
        BondConfiguration { open }
    }

    pub fn is_open(&self, e: usize) -> bool {
        self.open[e]
    }

    pub fn flags(&self) -> &[bool] {
        &self.open
    }

    pub fn len(&self) -> usize {
        self.open.len()
    }

    pub fn is_empty(&self) -> bool {
        self.open.is_empty()
    }

    pub fn count_open(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }

    /// True when every edge open here is open in `other`.
    pub fn is_subset_of(&self, other: &BondConfiguration) -> bool {
        self.open.len() == other.open.len() && self.open.iter().zip(&other.open).all(|(&a, &b)| !a || b)
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(format!("probability {p} outside [0, 1]")))
    }
}

/// One uniform per edge in canonical edge order. Thresholding the same
/// uniforms at different `p` gives the monotone coupling.
pub fn bond_uniforms(num_edges: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..num_edges).map(|_| rng.random::<f64>()).collect()
}

/// Edge open iff its uniform is below `p`; hull edges stay closed.
pub fn open_from_uniforms(diagram: &VoronoiDiagram<'_>, uniforms: &[f64], p: f64) -> Result<BondConfiguration> {
    check_probability(p)?;
    let g = diagram.graph();
    if uniforms.len() != g.num_edges() {
        return Err(invalid("one uniform per edge required"));
    }
    Ok(BondConfiguration::from_flags(
        uniforms.iter().enumerate().map(|(e, &u)| u < p && g.is_interior_edge(e)).collect(),
    ))
}

pub fn open_bonds(diagram: &VoronoiDiagram<'_>, p: f64, seed: u64) -> Result<BondConfiguration> {
    check_probability(p)?;
    open_from_uniforms(diagram, &bond_uniforms(diagram.graph().num_edges(), seed), p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// Left side to right side.
    Horizontal,
    /// Bottom side to top side.
    Vertical,
}

/// Closed rectangle `[lo, hi]` and the direction to be crossed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingSpec {
    pub lo: Point,
    pub hi: Point,
    pub direction: Direction,
}

impl CrossingSpec {
    /// `lo + [0, 3R] × [0, R]`, crossed horizontally.
    pub fn long_way(lo: Point, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(invalid(format!("R must be positive, got {r}")));
        }
        Ok(CrossingSpec { lo, hi: Point::new(lo.x + 3.0 * r, lo.y + r), direction: Direction::Horizontal })
    }

    pub fn new(lo: Point, hi: Point, direction: Direction) -> Result<Self> {
        if !(hi.x > lo.x && hi.y > lo.y) {
            return Err(invalid("crossing rectangle is degenerate"));
        }
        Ok(CrossingSpec { lo, hi, direction })
    }

    /// Errors unless the rectangle lies in the window minus its margin.
    pub fn validate(&self, window: &Window) -> Result<()> {
        if window.admits(&self.lo) && window.admits(&self.hi) {
            Ok(())
        } else {
            Err(invalid("crossing rectangle leaves the window minus margin"))
        }
    }

    fn contains(&self, p: &Point) -> bool {
        p.x >= self.lo.x && p.x <= self.hi.x && p.y >= self.lo.y && p.y <= self.hi.y
    }

    /// `(source, target)` sides as segments.
    pub fn sides(&self) -> ((Point, Point), (Point, Point)) {
        let (lo, hi) = (self.lo, self.hi);
        match self.direction {
            Direction::Horizontal => (
                (Point::new(lo.x, lo.y), Point::new(lo.x, hi.y)),
                (Point::new(hi.x, lo.y), Point::new(hi.x, hi.y)),
            ),
            Direction::Vertical => (
                (Point::new(lo.x, lo.y), Point::new(hi.x, lo.y)),
                (Point::new(lo.x, hi.y), Point::new(hi.x, hi.y)),
            ),
        }
    }
}

/// A planar embedded graph: vertex positions plus an edge list whose
/// entries carry the id used to look up open marks.
pub struct Embedded<'a> {
    pub positions: &'a [Point],
    pub edges: Vec<(usize, usize, usize)>,
}

impl<'a> Embedded<'a> {
    /// The Voronoi tessellation: circumcenters joined by interior dual edges.
    pub fn voronoi(diagram: &'a VoronoiDiagram<'_>) -> Self {
        let edges = diagram.interior_edges().map(|e| {
            let (l, r) = diagram.dual_edge(e).unwrap();
            (l, r, e)
        });
        Embedded { positions: diagram.vertices(), edges: edges.collect() }
    }

    /// The Delaunay triangulation itself.
    pub fn delaunay(graph: &'a crate::geometry::DelaunayGraph) -> Self {
        let edges = graph.edges().iter().enumerate().map(|(e, &(i, j))| (i, j, e)).collect();
        Embedded { positions: graph.points(), edges }
    }
}

/// How an edge enters the crossing search.
enum Role {
    Skip,
    /// First and last segment at once.
    Both,
    Links { src: [Option<usize>; 2], dst: [Option<usize>; 2], inner: Option<(usize, usize)> },
}

fn classify(emb: &Embedded<'_>, spec: &CrossingSpec, a: usize, b: usize) -> Role {
    let (pa, pb) = (emb.positions[a], emb.positions[b]);
    let ((s0, s1), (t0, t1)) = spec.sides();
    let ms = segments_intersect(&pa, &pb, &s0, &s1);
    let mt = segments_intersect(&pa, &pb, &t0, &t1);
    if ms && mt {
        return Role::Both;
    }
    let (ia, ib) = (spec.contains(&pa), spec.contains(&pb));
    let pick = |hit: bool| [if hit && ib { Some(b) } else { None }, if hit && ia { Some(a) } else { None }];
    let inner = if ia && ib { Some((a, b)) } else { None };
    let (src, dst) = (pick(ms), pick(mt));
    if inner.is_none() && src == [None, None] && dst == [None, None] {
        Role::Skip
    } else {
        Role::Links { src, dst, inner }
    }
}

/// Open path `v₁ … v_h` with `[v₁, v₂]` meeting the source side,
/// `[v_{h−1}, v_h]` meeting the target side and `v₂ … v_{h−1}` in the
/// rectangle. Breadth-first search from the source side over open edges.
pub fn crossing_in(emb: &Embedded<'_>, open: impl Fn(usize) -> bool, spec: &CrossingSpec) -> bool {
    let n = emb.positions.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut is_target = vec![false; n];
    let mut queue = VecDeque::new();
    let mut seen = vec![false; n];
    for &(a, b, id) in &emb.edges {
        if !open(id) {
            continue;
        }
        match classify(emb, spec, a, b) {
            Role::Skip => {}
            Role::Both => return true,
            Role::Links { src, dst, inner } => {
                for v in src.into_iter().flatten() {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
                for v in dst.into_iter().flatten() {
                    is_target[v] = true;
                }
                if let Some((a, b)) = inner {
                    adj[a].push(b);
                    adj[b].push(a);
                }
            }
        }
    }
    while let Some(v) = queue.pop_front() {
        if is_target[v] {
            return true;
        }
        for &u in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    false
}

/// `A_R`-type crossing of `spec` by open Voronoi edges.
pub fn crossing_event(config: &BondConfiguration, spec: &CrossingSpec, diagram: &VoronoiDiagram<'_>) -> bool {
    crossing_in(&Embedded::voronoi(diagram), |e| config.is_open(e), spec)
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        match self.rank[a].cmp(&self.rank[b]) {
            std::cmp::Ordering::Less => self.parent[a] = b,
            std::cmp::Ordering::Greater => self.parent[b] = a,
            std::cmp::Ordering::Equal => {
                self.parent[b] = a;
                self.rank[a] += 1;
            }
        }
    }
}

/// Smallest `q` such that the edges with `uniform ≤ q` cross `spec`; the
/// crossing at level `p` (open iff `u < p`) occurs iff `p > q`. `None` when
/// even the fully open configuration does not cross.
pub fn critical_uniform(emb: &Embedded<'_>, uniforms: &[f64], spec: &CrossingSpec) -> Option<f64> {
    let n = emb.positions.len();
    let (src, dst) = (n, n + 1);
    let mut order: Vec<usize> = (0..emb.edges.len()).collect();
    order.sort_by(|&x, &y| uniforms[emb.edges[x].2].total_cmp(&uniforms[emb.edges[y].2]).then(x.cmp(&y)));
    let mut uf = UnionFind::new(n + 2);
    for k in order {
        let (a, b, id) = emb.edges[k];
        match classify(emb, spec, a, b) {
            Role::Skip => continue,
            Role::Both => uf.union(src, dst),
            Role::Links { src: s, dst: t, inner } => {
                for v in s.into_iter().flatten() {
                    uf.union(src, v);
                }
                for v in t.into_iter().flatten() {
                    uf.union(v, dst);
                }
                if let Some((a, b)) = inner {
                    uf.union(a, b);
                }
            }
        }
        if uf.find(src) == uf.find(dst) {
            return Some(uniforms[id]);
        }
    }
    None
}

/// Rectangle window holding a `3R × R` crossing box with a margin band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PercolationSetup {
    pub r: f64,
    pub margin: f64,
    pub intensity: f64,
}

impl PercolationSetup {
    /// Unit intensity with margin `max(4, R/2)`.
    pub fn new(r: f64) -> Self {
        PercolationSetup { r, margin: (r / 2.0).max(4.0), intensity: 1.0 }
    }

    pub fn window(&self) -> Result<Window> {
        let m = self.margin;
        Window::new(Point::new(0.0, 0.0), Point::new(3.0 * self.r + 2.0 * m, self.r + 2.0 * m), m)
    }

    pub fn spec(&self) -> Result<CrossingSpec> {
        CrossingSpec::long_way(Point::new(self.margin, self.margin), self.r)
    }

    fn validate(&self) -> Result<()> {
        if !(self.margin > 0.0 && self.intensity > 0.0) {
            return Err(invalid("margin and intensity must be positive"));
        }
        self.spec()?.validate(&self.window()?)
    }
}

/// Which graph carries the bonds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Lattice {
    Voronoi,
    Delaunay,
}

fn replica_points(setup: &PercolationSetup, seed: u64, r: usize) -> Result<PointSet> {
    sample_poisson(&setup.window()?, setup.intensity, derive_seed(seed, r as u64, POINTS))
}

fn stream_for(lattice: Lattice) -> &'static str {
    match lattice {
        Lattice::Voronoi => BONDS,
        Lattice::Delaunay => AUX,
    }
}

/// Runs `f` on one replica's embedded graph and uniforms.
fn with_replica<T>(
    setup: &PercolationSetup,
    lattice: Lattice,
    seed: u64,
    r: usize,
    f: impl FnOnce(&Embedded<'_>, &[f64], &CrossingSpec) -> T,
) -> Result<T> {
    let points = replica_points(setup, seed, r)?;
    let graph = build_delaunay(&points)?;
    let window = setup.window()?;
    let diagram = build_voronoi_dual(&graph, &window);
    let uniforms = bond_uniforms(graph.num_edges(), derive_seed(seed, r as u64, stream_for(lattice)));
    let spec = setup.spec()?;
    let emb = match lattice {
        Lattice::Voronoi => Embedded::voronoi(&diagram),
        Lattice::Delaunay => Embedded::delaunay(&graph),
    };
    Ok(f(&emb, &uniforms, &spec))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtaCurve {
    pub r: f64,
    pub p_grid: Vec<f64>,
    /// `crossed[k][r]` at `p_grid[k]` for replica `r`.
    pub crossed: Vec<Vec<bool>>,
    pub eta: Vec<Proportion>,
    /// Replicas whose crossing flag decreases somewhere along the sorted grid.
    pub violations: usize,
    /// Replicas with no crossing even with every bond open.
    pub geometry_failures: usize,
}

/// Coupled crossing frequencies: each replica draws geometry and one
/// uniform per edge, then every `p` thresholds the same uniforms.
pub fn eta_curve(setup: &PercolationSetup, p_grid: &[f64], replicas: usize, seed: u64) -> Result<EtaCurve> {
    setup.validate()?;
    if p_grid.is_empty() {
        return Err(invalid("empty p grid"));
    }
    for &p in p_grid {
        check_probability(p)?;
    }
    let mut order: Vec<usize> = (0..p_grid.len()).collect();
    order.sort_by(|&a, &b| p_grid[a].total_cmp(&p_grid[b]));
    let rows = replicate(replicas, |r| {
        with_replica(setup, Lattice::Voronoi, seed, r, |emb, u, spec| {
            let flags: Vec<bool> = p_grid.iter().map(|&p| crossing_in(emb, |e| u[e] < p, spec)).collect();
            let full = crossing_in(emb, |_| true, spec);
            (flags, full)
        })
    })?;
    let crossed: Vec<Vec<bool>> = (0..p_grid.len()).map(|k| rows.iter().map(|(f, _)| f[k]).collect()).collect();
    let violations = rows.iter().filter(|(f, _)| order.windows(2).any(|w| f[w[0]] && !f[w[1]])).count();
    Ok(EtaCurve {
        r: setup.r,
        p_grid: p_grid.to_vec(),
        eta: crossed.iter().map(|c| Proportion::from_flags(c.iter().copied())).collect(),
        crossed,
        violations,
        geometry_failures: rows.iter().filter(|(_, full)| !full).count(),
    })
}

/// Crossing frequency at a single `p`.
pub fn estimate_eta(setup: &PercolationSetup, p: f64, replicas: usize, seed: u64) -> Result<Proportion> {
    Ok(eta_curve(setup, &[p], replicas, seed)?.eta[0])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdEstimate {
    pub lattice: Lattice,
    pub r: f64,
    pub replicas: usize,
    /// Bisection bracket: `η̂(lo) < 1/2 ≤ η̂(hi)`.
    pub lo: f64,
    pub hi: f64,
    pub eta_lo: f64,
    pub eta_hi: f64,
    pub steps: usize,
    /// Order-statistic 95% interval for the median critical level.
    pub median: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Per-replica critical levels (`∞` when the replica never crosses).
    pub critical: Vec<f64>,
}

impl ThresholdEstimate {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn ci_half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }
}

/// Bisection for the level where the coupled crossing frequency reaches
/// 1/2. Each replica's crossing indicator is the step function
/// `p ↦ [p > q_r]` with `q_r` its critical uniform, so the whole bisection
/// reuses one union-find pass per replica.
pub fn estimate_threshold(
    setup: &PercolationSetup,
    lattice: Lattice,
    replicas: usize,
    tol: f64,
    seed: u64,
) -> Result<ThresholdEstimate> {
    setup.validate()?;
    if replicas == 0 {
        return Err(invalid("replicas must be at least 1"));
    }
    if !(tol >= 0.01) {
        return Err(invalid(format!("tolerance must be at least 0.01, got {tol}")));
    }
    let critical = replicate(replicas, |r| {
        with_replica(setup, lattice, seed, r, |emb, u, spec| critical_uniform(emb, u, spec).unwrap_or(f64::INFINITY))
    })?;
    let eta = |p: f64| critical.iter().filter(|&&q| p > q).count() as f64 / replicas as f64;
    let (mut lo, mut hi) = (0.0, 1.0);
    let (mut eta_lo, mut eta_hi) = (eta(lo), eta(hi));
    if !(eta_lo < 0.5 && eta_hi >= 0.5) {
        return Err(Error::Numeric(format!("no bracket: eta(0) = {eta_lo}, eta(1) = {eta_hi}")));
    }
    let mut steps = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let e = eta(mid);
        if e >= 0.5 {
            hi = mid;
            eta_hi = e;
        } else {
            lo = mid;
            eta_lo = e;
        }
        steps += 1;
    }
    let (ci_low, median, ci_high) = median_interval(&critical);
    Ok(ThresholdEstimate {
        lattice,
        r: setup.r,
        replicas,
        lo,
        hi,
        eta_lo,
        eta_hi,
        steps,
        median,
        ci_low,
        ci_high,
        critical,
    })
}

/// Threshold of Voronoi bond percolation at fixed R.
pub fn estimate_pc_star(setup: &PercolationSetup, replicas: usize, tol: f64, seed: u64) -> Result<ThresholdEstimate> {
    estimate_threshold(setup, Lattice::Voronoi, replicas, tol, seed)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualityProbe {
    pub pc: ThresholdEstimate,
    pub pc_star: ThresholdEstimate,
    pub sum: f64,
    pub combined_ci: f64,
    /// `p̂_c + p̂_c* ≥ 1 − combined CI`.
    pub holds: bool,
}

/// Delaunay and Voronoi thresholds from the same geometry seeds.
pub fn duality_probe(setup: &PercolationSetup, replicas: usize, tol: f64, seed: u64) -> Result<DualityProbe> {
    let pc = estimate_threshold(setup, Lattice::Delaunay, replicas, tol, seed)?;
    let pc_star = estimate_threshold(setup, Lattice::Voronoi, replicas, tol, seed)?;
    let sum = pc.midpoint() + pc_star.midpoint();
    let combined_ci = pc.ci_half_width() + pc_star.ci_half_width() + 0.5 * (pc.hi - pc.lo + pc_star.hi - pc_star.lo);
    Ok(DualityProbe { holds: sum >= 1.0 - combined_ci, pc, pc_star, sum, combined_ci })
}

/// Upward crossings of the horizontal ray from `c` minus downward ones.
fn ray_crossing(a: &Point, b: &Point, c: &Point) -> i64 {
    let (ua, ub) = (a.y >= c.y, b.y >= c.y);
    if ua == ub {
        return 0;
    }
    if ub {
        // a below, b above: the crossing is right of c iff c is left of a→b
        i64::from(orient(a, b, c) > 0.0)
    } else {
        -i64::from(orient(b, a, c) > 0.0)
    }
}

fn box_contains(lo: &Point, hi: &Point, p: &Point) -> bool {
    p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y
}

/// Open Voronoi cycle with vertices in the closed outer box, edges
/// missing the closed inner box, and nonzero winding number about the
/// inner box's centre. Exact: a union-find carries each vertex's integer
/// ray-crossing potential relative to its root, and a cycle winds iff
/// closing it meets an inconsistent potential.
pub fn circuit_exists(
    config: &BondConfiguration,
    inner: (Point, Point),
    outer: (Point, Point),
    diagram: &VoronoiDiagram<'_>,
) -> Result<bool> {
    let ((ilo, ihi), (olo, ohi)) = (inner, outer);
    if !(olo.x < ilo.x && olo.y < ilo.y && ihi.x < ohi.x && ihi.y < ohi.y && ilo.x < ihi.x && ilo.y < ihi.y) {
        return Err(invalid("inner box must lie strictly inside the outer box"));
    }
    let c = Point::new(0.5 * (ilo.x + ihi.x), 0.5 * (ilo.y + ihi.y));
    let pos = diagram.vertices();
    let n = pos.len();
    let mut parent: Vec<usize> = (0..n).collect();
    // pot[v] = potential(v) − potential(parent[v])
    let mut pot = vec![0i64; n];
    fn find(parent: &mut [usize], pot: &mut [i64], v: usize) -> (usize, i64) {
        let mut path = Vec::new();
        let mut x = v;
        while parent[x] != x {
            path.push(x);
            x = parent[x];
        }
        let root = x;
        // Compress from the top so each node's parent is already resolved.
        for &y in path.iter().rev() {
            let p = parent[y];
            if p != root {
                pot[y] += pot[p];
            }
            parent[y] = root;
        }
        (root, if v == root { 0 } else { pot[v] })
    }
    for e in diagram.interior_edges() {
        if !config.is_open(e) {
            continue;
        }
        let (a, b) = diagram.dual_edge(e).unwrap();
        let (pa, pb) = (pos[a], pos[b]);
        if !box_contains(&olo, &ohi, &pa) || !box_contains(&olo, &ohi, &pb) || segment_meets_rect(&pa, &pb, &ilo, &ihi) {
            continue;
        }
        let w = ray_crossing(&pa, &pb, &c);
        let (ra, xa) = find(&mut parent, &mut pot, a);
        let (rb, xb) = find(&mut parent, &mut pot, b);
        if ra == rb {
            if xa + w != xb {
                return Ok(true);
            }
        } else {
            // potential(b) = potential(a) + w
            parent[rb] = ra;
            pot[rb] = xa + w - xb;
        }
    }
    Ok(false)
}

/// Simultaneous open crossings of the four rectangles that tile the
/// annulus between `B^{1/2,L}` and `B^{3/2,L}` around `center`, each in
/// its long direction. Sufficient evidence for a circuit only.
pub fn four_rectangle_crossings(
    config: &BondConfiguration,
    center: Point,
    l: f64,
    diagram: &VoronoiDiagram<'_>,
) -> Result<bool> {
    let (h, q) = (1.5 * l, 0.5 * l);
    let at = |x0: f64, y0: f64, x1: f64, y1: f64, d| {
        CrossingSpec::new(Point::new(center.x + x0, center.y + y0), Point::new(center.x + x1, center.y + y1), d)
    };
    let rects = [
        at(q, -h, h, h, Direction::Vertical)?,
        at(-h, q, h, h, Direction::Horizontal)?,
        at(-h, -h, -q, h, Direction::Vertical)?,
        at(-h, -h, h, -q, Direction::Horizontal)?,
    ];
    Ok(rects.iter().all(|s| crossing_event(config, s, diagram)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GoodBoxVariant {
    /// Every box on the surrounding ring `|z' − z|∞ = 1` is full.
    Y,
    /// The box itself is full.
    Z,
    /// The 3 × 3 block is full with at most `4L²` points per box and every
    /// dual edge meeting the block is open.
    V,
    /// The ring `|z' − z|∞ = 2` is full and an open circuit separates
    /// `B^{1/2,L}` from `∂B^{3/2,L}` (sufficient for the path condition).
    W,
}

impl fmt::Display for GoodBoxVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for GoodBoxVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "Y" | "y" => Ok(Self::Y),
            "Z" | "z" => Ok(Self::Z),
            "V" | "v" => Ok(Self::V),
            "W" | "w" => Ok(Self::W),
            other => Err(invalid(format!("unknown good-box variant {other:?}"))),
        }
    }
}

fn ring(z: (i64, i64), d: i64) -> impl Iterator<Item = (i64, i64)> {
    (-d..=d).flat_map(move |i| (-d..=d).map(move |j| (i, j))).filter(move |&(i, j)| i.abs().max(j.abs()) == d).map(
        move |(i, j)| (z.0 + i, z.1 + j),
    )
}

/// Good-box indicator for every site of `grid` (in `grid.sites()` order).
/// The box side is `2 · halfwidth · scale`; with halfwidth 1/2 this is
/// `B_z^{1/2,L}` for `L = scale`. `V` and `W` need a bond configuration
/// and a diagram; without a diagram (too few points) they are false.
pub fn classify_good_boxes(
    variant: GoodBoxVariant,
    grid: &BoxGrid,
    points: &PointSet,
    diagram: Option<&VoronoiDiagram<'_>>,
    bonds: Option<&BondConfiguration>,
) -> Result<Vec<bool>> {
    let pts = points.points();
    let l = grid.scale;
    let full = |z: (i64, i64)| {
        let (lo, hi) = grid.bounds_with(z, 0.5);
        is_full_box(&lo, &hi, pts)
    };
    let count = |z: (i64, i64)| {
        let (lo, hi) = grid.bounds_with(z, 0.5);
        pts.iter().filter(|p| box_contains(&lo, &hi, p)).count()
    };
    if matches!(variant, GoodBoxVariant::V | GoodBoxVariant::W) && bonds.is_none() {
        return Err(Error::Precondition(format!("variant {variant} needs a bond configuration")));
    }
    let out = grid
        .sites()
        .map(|z| -> Result<bool> {
            Ok(match variant {
                GoodBoxVariant::Z => full(z),
                GoodBoxVariant::Y => ring(z, 1).all(full),
                GoodBoxVariant::V => {
                    let (Some(d), Some(b)) = (diagram, bonds) else { return Ok(false) };
                    let block_ok = std::iter::once(z).chain(ring(z, 1)).all(|y| full(y) && count(y) as f64 <= 4.0 * l * l);
                    block_ok && {
                        let (lo, hi) = grid.bounds_with(z, 1.5);
                        d.interior_edges().all(|e| {
                            let (a, c) = d.dual_segment(e).unwrap();
                            b.is_open(e) || !segment_meets_rect(&a, &c, &lo, &hi)
                        })
                    }
                }
                GoodBoxVariant::W => {
                    let (Some(d), Some(b)) = (diagram, bonds) else { return Ok(false) };
                    ring(z, 2).all(full) && circuit_exists(b, grid.bounds_with(z, 0.5), grid.bounds_with(z, 1.5), d)?
                }
            })
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ray_crossings_are_signed() {
        let c = Point::new(0.0, 0.0);
        assert_eq!(ray_crossing(&Point::new(1.0, -1.0), &Point::new(1.0, 1.0), &c), 1);
        assert_eq!(ray_crossing(&Point::new(1.0, 1.0), &Point::new(1.0, -1.0), &c), -1);
        assert_eq!(ray_crossing(&Point::new(-1.0, -1.0), &Point::new(-1.0, 1.0), &c), 0);
        assert_eq!(ray_crossing(&Point::new(1.0, 1.0), &Point::new(2.0, 1.0), &c), 0);
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("W".parse::<GoodBoxVariant>().unwrap(), GoodBoxVariant::W);
        assert!("Q".parse::<GoodBoxVariant>().is_err());
    }

    #[test]
    fn ring_sizes() {
        assert_eq!(ring((0, 0), 1).count(), 8);
        assert_eq!(ring((3, -2), 2).count(), 16);
    }
}
