//! Exact orientation and in-circle signs with a symbolic tie-break.
//!
//! The floating-point determinants come from Shewchuk's adaptive predicates
//! (`robust`), whose signs are exact. When four points are exactly
//! cocircular, the tie is resolved as if point `i` had its paraboloid lift
//! raised by `ε^(2^-i)`-style infinitesimals with lower indices dominating:
//! the sign is that of the lift cofactor of the lowest-indexed point whose
//! cofactor is nonzero. Raising a lift pushes that point outward, so for
//! the unit square `0:(0,0) 1:(1,0) 2:(1,1) 3:(0,1)` the diagonal is `1–3`.

use super::Point;
use robust::Coord;
use std::cmp::Ordering;

#[inline]
fn c(p: &Point) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

/// Positive when `a, b, c` turn counterclockwise, zero when collinear.
#[inline]
pub fn orient(a: &Point, b: &Point, c_: &Point) -> f64 {
    robust::orient2d(c(a), c(b), c(c_))
}

#[inline]
pub fn orient_sign(a: &Point, b: &Point, c_: &Point) -> Ordering {
    orient(a, b, c_).partial_cmp(&0.0).unwrap_or(Ordering::Equal)
}

/// Positive when `d` is strictly inside the circle through CCW `a, b, c`.
#[inline]
pub fn incircle(a: &Point, b: &Point, c_: &Point, d: &Point) -> f64 {
    robust::incircle(c(a), c(b), c(c_), c(d))
}

/// In-circle sign with the index tie-break; never `Equal` unless at least
/// three of the four points are collinear with a zero cofactor chain.
pub fn incircle_perturbed(pts: &[Point], ia: usize, ib: usize, ic: usize, id: usize) -> Ordering {
    let (a, b, cc, d) = (&pts[ia], &pts[ib], &pts[ic], &pts[id]);
    let det = incircle(a, b, cc, d);
    if det > 0.0 {
        return Ordering::Greater;
    }
    if det < 0.0 {
        return Ordering::Less;
    }
    let mut order = [(ia, 0u8), (ib, 1), (ic, 2), (id, 3)];
    order.sort_unstable();
    for (_, slot) in order {
        let cof = match slot {
            0 => orient(b, cc, d),
            1 => -orient(a, cc, d),
            2 => orient(a, b, d),
            _ => -orient(a, b, cc),
        };
        if cof > 0.0 {
            return Ordering::Greater;
        }
        if cof < 0.0 {
            return Ordering::Less;
        }
    }
    Ordering::Equal
}

/// Closed-segment intersection with exact signs.
pub fn segments_intersect(p1: &Point, p2: &Point, q1: &Point, q2: &Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// `r` collinear with `p, q` assumed; is it within their bounding box?
fn on_segment(p: &Point, q: &Point, r: &Point) -> bool {
    r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
}

/// Closed segment against closed axis-aligned rectangle.
pub fn segment_meets_rect(p: &Point, q: &Point, lo: &Point, hi: &Point) -> bool {
    let inside = |r: &Point| r.x >= lo.x && r.x <= hi.x && r.y >= lo.y && r.y <= hi.y;
    if inside(p) || inside(q) {
        return true;
    }
    if p.x.max(q.x) < lo.x || p.x.min(q.x) > hi.x || p.y.max(q.y) < lo.y || p.y.min(q.y) > hi.y {
        return false;
    }
    // Separating axis along the segment normal: the rectangle meets the
    // line iff its corners are not all strictly on one side.
    let corners = [
        Point::new(lo.x, lo.y),
        Point::new(hi.x, lo.y),
        Point::new(hi.x, hi.y),
        Point::new(lo.x, hi.y),
    ];
    let mut pos = false;
    let mut neg = false;
    for k in &corners {
        let s = orient(p, q, k);
        if s >= 0.0 {
            pos = true;
        }
        if s <= 0.0 {
            neg = true;
        }
    }
    pos && neg
}

/// Circumcenter in coordinates relative to `a`; exact under 90° rotations
/// and reflections because every step is sign- and swap-symmetric.
pub fn circumcenter(a: &Point, b: &Point, c_: &Point) -> Point {
    let bx = b.x - a.x;
    let by = b.y - a.y;
    let cx = c_.x - a.x;
    let cy = c_.y - a.y;
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / d;
    let uy = (bx * c2 - cx * b2) / d;
    Point::new(a.x + ux, a.y + uy)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq() -> Vec<Point> {
        vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)]
    }

    #[test]
    fn orientation_signs() {
        let p = sq();
        assert!(orient(&p[0], &p[1], &p[2]) > 0.0);
        assert!(orient(&p[0], &p[2], &p[1]) < 0.0);
        assert_eq!(orient(&p[0], &p[1], &Point::new(2.0, 0.0)), 0.0);
    }

    #[test]
    fn cocircular_square_tie_break() {
        let p = sq();
        assert_eq!(incircle(&p[1], &p[2], &p[3], &p[0]), 0.0);
        // 0 is lifted highest, so it lies outside the circle of 1,2,3 ...
        assert_eq!(incircle_perturbed(&p, 1, 2, 3, 0), Ordering::Less);
        // ... and 2 lies outside the circle of 0,1,3: both halves of the 1-3 split are empty.
        assert_eq!(incircle_perturbed(&p, 0, 1, 3, 2), Ordering::Less);
        // The other split is rejected from both sides.
        assert_eq!(incircle_perturbed(&p, 0, 1, 2, 3), Ordering::Greater);
        assert_eq!(incircle_perturbed(&p, 0, 2, 3, 1), Ordering::Greater);
    }

    #[test]
    fn perturbation_is_consistent_under_rotation_of_arguments() {
        let p = sq();
        for (a, b, c_, d) in [(1, 2, 3, 0), (0, 1, 2, 3), (0, 1, 3, 2), (0, 2, 3, 1)] {
            let s = incircle_perturbed(&p, a, b, c_, d);
            assert_eq!(incircle_perturbed(&p, b, c_, a, d), s);
            assert_eq!(incircle_perturbed(&p, c_, a, b, d), s);
        }
    }

    #[test]
    fn segment_intersections() {
        let o = Point::new(0.0, 0.0);
        let a = Point::new(2.0, 2.0);
        assert!(segments_intersect(&o, &a, &Point::new(0.0, 2.0), &Point::new(2.0, 0.0)));
        assert!(segments_intersect(&o, &a, &Point::new(1.0, 1.0), &Point::new(5.0, 0.0)));
        assert!(!segments_intersect(&o, &a, &Point::new(3.0, 3.0), &Point::new(4.0, 4.0)));
        assert!(segments_intersect(&o, &a, &Point::new(2.0, 2.0), &Point::new(4.0, 4.0)));
    }

    #[test]
    fn segment_rectangle() {
        let lo = Point::new(0.0, 0.0);
        let hi = Point::new(1.0, 1.0);
        assert!(segment_meets_rect(&Point::new(-1.0, 0.5), &Point::new(2.0, 0.5), &lo, &hi));
        assert!(segment_meets_rect(&Point::new(-1.0, 0.0), &Point::new(1.0, 2.0), &lo, &hi));
        assert!(!segment_meets_rect(&Point::new(-1.0, 0.1), &Point::new(1.0, 2.1), &lo, &hi));
        assert!(segment_meets_rect(&Point::new(0.5, 0.5), &Point::new(0.6, 0.6), &lo, &hi));
    }

    #[test]
    fn circumcenter_equidistant() {
        let a = Point::new(0.3, 0.1);
        let b = Point::new(2.0, 0.7);
        let c_ = Point::new(0.9, 1.9);
        let o = circumcenter(&a, &b, &c_);
        let r = o.dist(&a);
        assert!((o.dist(&b) - r).abs() < 1e-12 && (o.dist(&c_) - r).abs() < 1e-12);
    }

    #[test]
    fn circumcenter_rotation_exact() {
        let rot = |p: &Point| Point::new(-p.y, p.x);
        let a = Point::new(0.37, 0.11);
        let b = Point::new(2.3, 0.71);
        let c_ = Point::new(0.93, 1.97);
        let o = circumcenter(&a, &b, &c_);
        assert_eq!(circumcenter(&rot(&a), &rot(&b), &rot(&c_)), rot(&o));
    }
}
