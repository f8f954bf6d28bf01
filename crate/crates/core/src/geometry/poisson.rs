use super::{Point, PointSet, Window};
use crate::error::{invalid, Result};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use std::collections::HashSet;

/// Box-size exponent used when none is given.
pub const DEFAULT_DELTA: f64 = 1.0 / 14.0;

/// Homogeneous Poisson process on the window. The count is
/// Poisson(intensity · area); positions are i.i.d. uniform.
pub fn sample_poisson(window: &Window, intensity: f64, seed: u64) -> Result<PointSet> {
    if !(intensity > 0.0 && intensity.is_finite()) {
        return Err(invalid(format!("intensity must be positive, got {intensity}")));
    }
    let mean = intensity * window.area();
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(invalid("window area must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = Poisson::new(mean).map_err(|e| invalid(e.to_string()))?.sample(&mut rng) as usize;
    let mut seen = HashSet::with_capacity(count);
    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        let p = Point::new(
            rng.random_range(window.lo.x..window.hi.x),
            rng.random_range(window.lo.y..window.hi.y),
        );
        // A repeated draw has probability ~2⁻⁵³ per pair; redraw it.
        if seen.insert((p.x.to_bits(), p.y.to_bits())) {
            points.push(p);
        }
    }
    PointSet::new(points, *window)
}

/// Origin of a point in a truncated process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Provenance {
    /// Kept from the input, with its input index.
    Original(usize),
    /// Added to an empty box, labelled by the box's linear index.
    Added(usize),
}

#[derive(Debug, Clone)]
pub struct TruncatedProcess {
    pub points: PointSet,
    pub provenance: Vec<Provenance>,
    pub box_side: f64,
    pub cap: usize,
}

/// Caps each box of side `n^δ` (tiled from `window.lo`, half-open, the last
/// row and column clipped to the window) at `⌈4 n^{2δ}⌉` points by uniform
/// subsampling, and puts one uniform point into each empty box.
pub fn truncated_process(points: &PointSet, n: usize, delta: f64, seed: u64) -> Result<TruncatedProcess> {
    if !(delta > 0.0 && delta < 0.125) {
        return Err(invalid(format!("delta must lie in (0, 1/8), got {delta}")));
    }
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let w = *points.window();
    let side = (n as f64).powf(delta);
    // The slack keeps exact integers like 4·2² from rounding up through powf.
    let cap = (4.0 * (n as f64).powf(2.0 * delta) * (1.0 - 1e-12)).ceil() as usize;
    let nx = (w.width() / side).ceil() as usize;
    let ny = (w.height() / side).ceil() as usize;
    let cell = |p: &Point| -> usize {
        let i = (((p.x - w.lo.x) / side) as usize).min(nx - 1);
        let j = (((p.y - w.lo.y) / side) as usize).min(ny - 1);
        j * nx + i
    };
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); nx * ny];
    for (i, p) in points.points().iter().enumerate() {
        members[cell(p)].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(points.len());
    let mut prov = Vec::with_capacity(points.len());
    for (b, m) in members.iter().enumerate() {
        if m.is_empty() {
            let (i, j) = (b % nx, b / nx);
            let x0 = w.lo.x + i as f64 * side;
            let y0 = w.lo.y + j as f64 * side;
            let x1 = (x0 + side).min(w.hi.x);
            let y1 = (y0 + side).min(w.hi.y);
            out.push(Point::new(rng.random_range(x0..x1), rng.random_range(y0..y1)));
            prov.push(Provenance::Added(b));
        } else if m.len() > cap {
            let mut keep: Vec<usize> = sample(&mut rng, m.len(), cap).into_iter().map(|k| m[k]).collect();
            keep.sort_unstable();
            for i in keep {
                out.push(points.points()[i]);
                prov.push(Provenance::Original(i));
            }
        } else {
            for &i in m {
                out.push(points.points()[i]);
                prov.push(Provenance::Original(i));
            }
        }
    }
    Ok(TruncatedProcess { points: PointSet::new(out, w)?, provenance: prov, box_side: side, cap })
}
