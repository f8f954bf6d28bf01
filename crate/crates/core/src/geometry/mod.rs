//! Planar point processes, Delaunay triangulation, Voronoi dual and box grids.

mod delaunay;
pub mod io;
mod poisson;
pub mod predicates;
mod voronoi;

pub use delaunay::{build_delaunay, DelaunayGraph};
pub use poisson::{sample_poisson, truncated_process, Provenance, TruncatedProcess, DEFAULT_DELTA};
pub use voronoi::{build_voronoi_dual, locate_tile, VoronoiDiagram};

use crate::error::{invalid, Error, Result};
use serde::Serialize;
use std::collections::HashSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist2(&self, o: &Point) -> f64 {
        let dx = self.x - o.x;
        let dy = self.y - o.y;
        dx * dx + dy * dy
    }

    pub fn dist(&self, o: &Point) -> f64 {
        self.dist2(o).sqrt()
    }
}

/// Axis-aligned simulation window with a measurement margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub lo: Point,
    pub hi: Point,
    pub margin: f64,
}

impl Window {
    pub fn new(lo: Point, hi: Point, margin: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || !margin.is_finite() {
            return Err(invalid("window coordinates must be finite"));
        }
        if !(hi.x > lo.x && hi.y > lo.y) {
            return Err(invalid("window must have positive width and height"));
        }
        let min_side = (hi.x - lo.x).min(hi.y - lo.y);
        if !(margin >= 0.0 && margin < 0.5 * min_side) {
            return Err(invalid(format!("margin {margin} must lie in [0, {})", 0.5 * min_side)));
        }
        Ok(Window { lo, hi, margin })
    }

    /// `[0, side]²` with the given margin.
    pub fn square(side: f64, margin: f64) -> Result<Self> {
        Window::new(Point::new(0.0, 0.0), Point::new(side, side), margin)
    }

    /// `[0, side]²` with the default margin `side / 8`.
    pub fn square_default(side: f64) -> Result<Self> {
        Window::square(side, side / 8.0)
    }

    pub fn width(&self) -> f64 {
        self.hi.x - self.lo.x
    }

    pub fn height(&self) -> f64 {
        self.hi.y - self.lo.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.lo.x && p.x <= self.hi.x && p.y >= self.lo.y && p.y <= self.hi.y
    }

    /// Inside the window with the margin band removed (closed).
    pub fn admits(&self, p: &Point) -> bool {
        p.x >= self.lo.x + self.margin
            && p.x <= self.hi.x - self.margin
            && p.y >= self.lo.y + self.margin
            && p.y <= self.hi.y - self.margin
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.lo.x + self.hi.x), 0.5 * (self.lo.y + self.hi.y))
    }
}

/// Finite point configuration; indices are the vertex labels downstream.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSet {
    points: Vec<Point>,
    window: Window,
}

fn key(p: &Point) -> (u64, u64) {
    // +0.0 folds -0.0 into 0.0
    ((p.x + 0.0).to_bits(), (p.y + 0.0).to_bits())
}

impl PointSet {
    pub fn new(points: Vec<Point>, window: Window) -> Result<Self> {
        let mut seen = HashSet::with_capacity(points.len());
        for p in &points {
            if !p.is_finite() {
                return Err(invalid("point coordinates must be finite"));
            }
            if !window.contains(p) {
                return Err(Error::OutsideRegion { x: p.x, y: p.y });
            }
            if !seen.insert(key(p)) {
                return Err(Error::Degenerate(format!("duplicate point ({}, {})", p.x, p.y)));
            }
        }
        Ok(PointSet { points, window })
    }

    pub fn empty(window: Window) -> Self {
        PointSet { points: Vec::new(), window }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&Point> {
        self.points.get(i)
    }

    /// Copy with every point mapped by `f` into a new window.
    pub fn map(&self, window: Window, f: impl Fn(&Point) -> Point) -> Result<Self> {
        PointSet::new(self.points.iter().map(f).collect(), window)
    }

    /// Adds points, keeping existing indices.
    pub fn extended(&self, extra: &[Point]) -> Result<Self> {
        let mut pts = self.points.clone();
        pts.extend_from_slice(extra);
        PointSet::new(pts, self.window)
    }
}

/// Boxes `r·z + [−s·r, s·r]²` for integer sites `z` in an inclusive range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxGrid {
    pub scale: f64,
    pub halfwidth: f64,
    pub zmin: (i64, i64),
    pub zmax: (i64, i64),
}

impl BoxGrid {
    pub fn new(scale: f64, halfwidth: f64, zmin: (i64, i64), zmax: (i64, i64)) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid("box scale must be positive"));
        }
        if !(halfwidth > 0.0) || (2.0 * halfwidth).fract() != 0.0 {
            return Err(invalid("box halfwidth must be a positive multiple of 1/2"));
        }
        if zmin.0 > zmax.0 || zmin.1 > zmax.1 {
            return Err(invalid("empty box index range"));
        }
        Ok(BoxGrid { scale, halfwidth, zmin, zmax })
    }

    /// Largest grid of scale `r`, halfwidth 1/2, whose boxes fit in `region`.
    pub fn covering(lo: Point, hi: Point, r: f64) -> Result<Self> {
        let zx0 = ((lo.x / r) + 0.5).ceil() as i64;
        let zy0 = ((lo.y / r) + 0.5).ceil() as i64;
        let zx1 = ((hi.x / r) - 0.5).floor() as i64;
        let zy1 = ((hi.y / r) - 0.5).floor() as i64;
        BoxGrid::new(r, 0.5, (zx0, zy0), (zx1, zy1))
    }

    pub fn center(&self, z: (i64, i64)) -> Point {
        Point::new(self.scale * z.0 as f64, self.scale * z.1 as f64)
    }

    /// `(lo, hi)` corners of `box(z)`.
    pub fn bounds(&self, z: (i64, i64)) -> (Point, Point) {
        self.bounds_with(z, self.halfwidth)
    }

    /// Corners of `r·z + [−h·r, h·r]²` for an arbitrary halfwidth `h`.
    pub fn bounds_with(&self, z: (i64, i64), h: f64) -> (Point, Point) {
        let c = self.center(z);
        let d = h * self.scale;
        (Point::new(c.x - d, c.y - d), Point::new(c.x + d, c.y + d))
    }

    pub fn in_range(&self, z: (i64, i64)) -> bool {
        z.0 >= self.zmin.0 && z.0 <= self.zmax.0 && z.1 >= self.zmin.1 && z.1 <= self.zmax.1
    }

    pub fn sites(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (self.zmin.1..=self.zmax.1).flat_map(move |y| (self.zmin.0..=self.zmax.0).map(move |x| (x, y)))
    }

    pub fn dims(&self) -> (usize, usize) {
        ((self.zmax.0 - self.zmin.0 + 1) as usize, (self.zmax.1 - self.zmin.1 + 1) as usize)
    }
}
