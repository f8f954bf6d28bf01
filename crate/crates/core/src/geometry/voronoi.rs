use super::predicates::circumcenter;
use super::{DelaunayGraph, Point, Window};
use crate::error::{Error, Result};

/// Voronoi dual of a Delaunay graph. Voronoi vertices are triangle
/// circumcenters (indexed like the triangles); the dual of an interior
/// Delaunay edge joins the circumcenters of its two triangles. Hull edges
/// have no dual segment.
#[derive(Debug, Clone)]
pub struct VoronoiDiagram<'g> {
    graph: &'g DelaunayGraph,
    window: Window,
    centers: Vec<Point>,
    index: BucketIndex,
}

pub fn build_voronoi_dual<'g>(delaunay: &'g DelaunayGraph, window: &Window) -> VoronoiDiagram<'g> {
    let pts = delaunay.points();
    let centers = delaunay
        .triangles()
        .iter()
        .map(|t| circumcenter(&pts[t[0]], &pts[t[1]], &pts[t[2]]))
        .collect();
    VoronoiDiagram { graph: delaunay, window: *window, centers, index: BucketIndex::new(pts, window) }
}

/// Nearest generator to `x`, lowest index on ties. `x` must lie in the
/// window with the margin band removed.
pub fn locate_tile(x: &Point, diagram: &VoronoiDiagram<'_>) -> Result<usize> {
    if !x.is_finite() || !diagram.window.admits(x) {
        return Err(Error::OutsideRegion { x: x.x, y: x.y });
    }
    Ok(diagram.nearest(x))
}

impl<'g> VoronoiDiagram<'g> {
    pub fn graph(&self) -> &'g DelaunayGraph {
        self.graph
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// Voronoi vertices, one per Delaunay triangle.
    pub fn vertices(&self) -> &[Point] {
        &self.centers
    }

    /// Voronoi vertex ids joined by the dual of edge `e`, as `(left, right)`
    /// of the Delaunay edge `i → j`.
    pub fn dual_edge(&self, e: usize) -> Option<(usize, usize)> {
        match self.graph.edge_faces(e) {
            [Some(l), Some(r)] => Some((l, r)),
            _ => None,
        }
    }

    pub fn dual_segment(&self, e: usize) -> Option<(Point, Point)> {
        self.dual_edge(e).map(|(l, r)| (self.centers[l], self.centers[r]))
    }

    /// Delaunay edge ids that have a dual segment.
    pub fn interior_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.graph.num_edges()).filter(move |&e| self.graph.is_interior_edge(e))
    }

    /// Nearest generator with no region check.
    pub fn nearest(&self, x: &Point) -> usize {
        self.index.nearest(self.graph.points(), x)
    }

    /// Cell of `v` clipped to the window, counterclockwise.
    pub fn cell(&self, v: usize) -> Vec<Point> {
        let pts = self.graph.points();
        let w = &self.window;
        let mut poly = vec![
            Point::new(w.lo.x, w.lo.y),
            Point::new(w.hi.x, w.lo.y),
            Point::new(w.hi.x, w.hi.y),
            Point::new(w.lo.x, w.hi.y),
        ];
        let p = pts[v];
        for &u in self.graph.neighbors(v) {
            let q = pts[u];
            // keep 2x·(q − p) ≤ |q|² − |p|²
            let nx = q.x - p.x;
            let ny = q.y - p.y;
            let mx = 0.5 * (p.x + q.x);
            let my = 0.5 * (p.y + q.y);
            let f = |r: &Point| (r.x - mx) * nx + (r.y - my) * ny;
            poly = clip(&poly, f);
            if poly.is_empty() {
                break;
            }
        }
        poly
    }
}

/// Sutherland–Hodgman step keeping `f ≤ 0`.
fn clip(poly: &[Point], f: impl Fn(&Point) -> f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for k in 0..poly.len() {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        let fa = f(&a);
        let fb = f(&b);
        if fa <= 0.0 {
            out.push(a);
        }
        if (fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0) {
            let t = fa / (fa - fb);
            out.push(Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
        }
    }
    out
}

#[derive(Debug, Clone)]
struct BucketIndex {
    lo: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    start: Vec<usize>,
    items: Vec<usize>,
}

impl BucketIndex {
    fn new(pts: &[Point], w: &Window) -> Self {
        let n = pts.len().max(1);
        let cell = (w.area() / n as f64).sqrt().max(f64::MIN_POSITIVE);
        let nx = ((w.width() / cell).ceil() as usize).clamp(1, 1 << 15);
        let ny = ((w.height() / cell).ceil() as usize).clamp(1, 1 << 15);
        let mut idx = BucketIndex { lo: w.lo, cell, nx, ny, start: vec![0; nx * ny + 1], items: vec![0; pts.len()] };
        let keys: Vec<usize> = pts.iter().map(|p| idx.key(p)).collect();
        for &k in &keys {
            idx.start[k + 1] += 1;
        }
        for k in 0..nx * ny {
            idx.start[k + 1] += idx.start[k];
        }
        let mut fill = idx.start.clone();
        for (i, &k) in keys.iter().enumerate() {
            idx.items[fill[k]] = i;
            fill[k] += 1;
        }
        idx
    }

    fn coords(&self, p: &Point) -> (i64, i64) {
        let i = ((p.x - self.lo.x) / self.cell).floor() as i64;
        let j = ((p.y - self.lo.y) / self.cell).floor() as i64;
        (i.clamp(0, self.nx as i64 - 1), j.clamp(0, self.ny as i64 - 1))
    }

    fn key(&self, p: &Point) -> usize {
        let (i, j) = self.coords(p);
        j as usize * self.nx + i as usize
    }

    fn nearest(&self, pts: &[Point], x: &Point) -> usize {
        let (ci, cj) = self.coords(x);
        let mut best = (f64::INFINITY, usize::MAX);
        let reach = self.nx.max(self.ny) as i64;
        // x outside the grid is clamped to a border bucket, which only
        // makes the ring bound below more conservative.
        for k in 0..=reach {
            let mut visit = |i: i64, j: i64| {
                if i < 0 || j < 0 || i >= self.nx as i64 || j >= self.ny as i64 {
                    return;
                }
                let b = j as usize * self.nx + i as usize;
                for &v in &self.items[self.start[b]..self.start[b + 1]] {
                    let d = x.dist2(&pts[v]);
                    if d < best.0 || (d == best.0 && v < best.1) {
                        best = (d, v);
                    }
                }
            };
            if k == 0 {
                visit(ci, cj);
            } else {
                for i in ci - k..=ci + k {
                    visit(i, cj - k);
                    visit(i, cj + k);
                }
                for j in cj - k + 1..cj + k {
                    visit(ci - k, j);
                    visit(ci + k, j);
                }
            }
            // Anything in ring k + 1 or beyond is at least k cells away
            // (x may sit on its bucket's edge); stop only on a strict margin
            // so equal-distance lower indices are never skipped.
            let bound = k as f64 * self.cell;
            if best.1 != usize::MAX && best.0 < bound * bound * (1.0 - 1e-9) {
                break;
            }
        }
        best.1
    }
}
