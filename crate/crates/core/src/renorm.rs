//! Full boxes, circuits of boxes, greedy lattice animals and the
//! k-separated open density.

use crate::error::{invalid, Error, Result};
use crate::geometry::{
    build_delaunay, build_voronoi_dual, sample_poisson, BoxGrid, Point, PointSet, VoronoiDiagram, Window,
};
use crate::percolation::{classify_good_boxes, open_bonds, GoodBoxVariant};
use crate::runner::replicate;
use crate::seed::{derive_seed, AUX, BONDS, POINTS, WEIGHTS};
use crate::stats::{correlation, quantile, Correlation, Proportion, Summary};
use crate::weights::{assign_weights, threshold_indicator, WeightDistribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

pub type Site = (i64, i64);

const NEIGHBORS: [Site; 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

fn add(a: Site, b: Site) -> Site {
    (a.0 + b.0, a.1 + b.1)
}

/// Each of the 6 × 6 closed sub-boxes of `[lo, hi]` holds a point.
pub fn is_full_box(lo: &Point, hi: &Point, points: &[Point]) -> bool {
    let (w, h) = ((hi.x - lo.x) / 6.0, (hi.y - lo.y) / 6.0);
    if !(w > 0.0 && h > 0.0) {
        return false;
    }
    let mut hit = [false; 36];
    let span = |t: f64| -> (usize, usize) {
        // sub-boxes i with i ≤ t ≤ i + 1
        let f = t.floor();
        let i = (f as i64).clamp(0, 5) as usize;
        if t == f && t > 0.0 && t <= 6.0 {
            ((t as usize - 1).min(5), i.min(5))
        } else {
            (i, i)
        }
    };
    for p in points {
        if p.x < lo.x || p.x > hi.x || p.y < lo.y || p.y > hi.y {
            continue;
        }
        let (i0, i1) = span((p.x - lo.x) / w);
        let (j0, j1) = span((p.y - lo.y) / h);
        for i in i0..=i1 {
            for j in j0..=j1 {
                hit[6 * j + i] = true;
            }
        }
    }
    hit.iter().all(|&b| b)
}

/// Cyclic sequence of sites, consecutive ones nearest neighbours, no
/// repeats. Box `j` is `B_{z_j}^{1/2,r}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxCircuit {
    pub sites: Vec<Site>,
    pub scale: f64,
}

/// Position of a region relative to a circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    On,
    In,
    Out,
}

impl BoxCircuit {
    pub fn new(sites: Vec<Site>, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid("circuit scale must be positive"));
        }
        if sites.len() < 4 {
            return Err(Error::Precondition("a circuit needs at least 4 sites".into()));
        }
        let k = sites.len();
        for j in 0..k {
            let (a, b) = (sites[j], sites[(j + 1) % k]);
            if (a.0 - b.0).abs() + (a.1 - b.1).abs() != 1 {
                return Err(Error::Precondition(format!("{a:?} and {b:?} are not nearest neighbours")));
            }
        }
        if sites.iter().collect::<HashSet<_>>().len() != k {
            return Err(Error::Precondition("circuit revisits a site".into()));
        }
        Ok(BoxCircuit { sites, scale })
    }

    /// Lattice boundary of a finite set of unit squares `[i, i+1] × [j, j+1]`
    /// (keyed by lower-left corner), traced counterclockwise. Requires the
    /// boundary to be a single simple closed curve.
    pub fn boundary_of(cells: &BTreeSet<Site>, scale: f64) -> Result<Self> {
        if cells.is_empty() {
            return Err(invalid("empty polyomino"));
        }
        // Directed unit edges with the polyomino on the left.
        let mut next: HashMap<Site, Site> = HashMap::new();
        let mut push = |a: Site, b: Site| -> Result<()> {
            if next.insert(a, b).is_some() {
                return Err(Error::Precondition("polyomino boundary pinches at a corner".into()));
            }
            Ok(())
        };
        for &(i, j) in cells {
            if !cells.contains(&(i, j - 1)) {
                push((i, j), (i + 1, j))?;
            }
            if !cells.contains(&(i + 1, j)) {
                push((i + 1, j), (i + 1, j + 1))?;
            }
            if !cells.contains(&(i, j + 1)) {
                push((i + 1, j + 1), (i, j + 1))?;
            }
            if !cells.contains(&(i - 1, j)) {
                push((i, j + 1), (i, j))?;
            }
        }
        let start = *next.keys().min().unwrap();
        let mut sites = vec![start];
        let mut cur = next[&start];
        while cur != start {
            sites.push(cur);
            cur = *next.get(&cur).ok_or_else(|| Error::Precondition("open boundary".into()))?;
            if sites.len() > next.len() {
                return Err(Error::Precondition("boundary is not a single cycle".into()));
            }
        }
        if sites.len() != next.len() {
            return Err(Error::Precondition("polyomino has holes or several components".into()));
        }
        BoxCircuit::new(sites, scale)
    }

    /// Boundary of `lo..=hi` rectangle of sites.
    pub fn ring(lo: Site, hi: Site, scale: f64) -> Result<Self> {
        let cells: BTreeSet<Site> = (lo.0..hi.0).flat_map(|i| (lo.1..hi.1).map(move |j| (i, j))).collect();
        BoxCircuit::boundary_of(&cells, scale)
    }

    fn bounds(&self) -> (Site, Site) {
        let xs = self.sites.iter().map(|s| s.0);
        let ys = self.sites.iter().map(|s| s.1);
        ((xs.clone().min().unwrap(), ys.clone().min().unwrap()), (xs.max().unwrap(), ys.max().unwrap()))
    }

    /// Even–odd test of the point `(x, y)` (in lattice units, never on a
    /// lattice line segment of λ) against the polygon λ.
    fn inside_lambda(&self, x: f64, y: f64) -> bool {
        let k = self.sites.len();
        let mut inside = false;
        for j in 0..k {
            let (a, b) = (self.sites[j], self.sites[(j + 1) % k]);
            let (ay, by) = (a.1 as f64, b.1 as f64);
            if (ay > y) != (by > y) {
                let xc = a.0 as f64 + (y - ay) / (by - ay) * (b.0 - a.0) as f64;
                if xc > x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Status of every site in the bounding range padded by one: `On` for
    /// circuit sites, `In` for sites enclosed by the union of boxes.
    fn box_sides(&self) -> (Site, usize, Vec<Side>) {
        let ((x0, y0), (x1, y1)) = self.bounds();
        let origin = (x0 - 1, y0 - 1);
        let w = (x1 - x0 + 3) as usize;
        let h = (y1 - y0 + 3) as usize;
        let mut side = vec![Side::In; w * h];
        for s in &self.sites {
            side[(s.1 - origin.1) as usize * w + (s.0 - origin.0) as usize] = Side::On;
        }
        // Flood the outside from a padding corner.
        let mut stack = vec![0usize];
        side[0] = Side::Out;
        while let Some(c) = stack.pop() {
            let (i, j) = ((c % w) as i64, (c / w) as i64);
            for d in NEIGHBORS {
                let (a, b) = (i + d.0, j + d.1);
                if a < 0 || b < 0 || a >= w as i64 || b >= h as i64 {
                    continue;
                }
                let idx = b as usize * w + a as usize;
                if side[idx] == Side::In {
                    side[idx] = Side::Out;
                    stack.push(idx);
                }
            }
        }
        (origin, w, side)
    }
}

/// Convex polygon and open axis-aligned rectangle share an interior point.
fn polygon_overlaps_rect(poly: &[Point], lo: &Point, hi: &Point) -> bool {
    if poly.len() < 3 {
        return false;
    }
    let (mut pxl, mut pxh, mut pyl, mut pyh) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in poly {
        pxl = pxl.min(p.x);
        pxh = pxh.max(p.x);
        pyl = pyl.min(p.y);
        pyh = pyh.max(p.y);
    }
    if pxh <= lo.x || pxl >= hi.x || pyh <= lo.y || pyl >= hi.y {
        return false;
    }
    let corners = [Point::new(lo.x, lo.y), Point::new(hi.x, lo.y), Point::new(hi.x, hi.y), Point::new(lo.x, hi.y)];
    for k in 0..poly.len() {
        let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
        let (nx, ny) = (b.y - a.y, a.x - b.x);
        let proj = |p: &Point| (p.x - a.x) * nx + (p.y - a.y) * ny;
        let pmax = poly.iter().map(proj).fold(f64::NEG_INFINITY, f64::max);
        let rmin = corners.iter().map(proj).fold(f64::INFINITY, f64::min);
        if rmin >= pmax {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationReport {
    /// Cells meeting both `Λ^in` and `λ^out`.
    pub in_out_violations: Vec<usize>,
    /// Cells meeting both `Λ^out` and `λ^in`.
    pub out_in_violations: Vec<usize>,
    pub cells_checked: usize,
}

impl SeparationReport {
    pub fn holds(&self) -> bool {
        self.in_out_violations.is_empty() && self.out_in_violations.is_empty()
    }
}

/// No Voronoi cell meets both `Λ^in` and `λ^out`, or both `Λ^out` and
/// `λ^in`. Errors with `Precondition` unless every box is full.
pub fn circuit_separation_check(
    circuit: &BoxCircuit,
    points: &PointSet,
    diagram: &VoronoiDiagram<'_>,
) -> Result<SeparationReport> {
    let r = circuit.scale;
    let grid = BoxGrid::new(r, 0.5, (0, 0), (0, 0))?;
    for &z in &circuit.sites {
        let (lo, hi) = grid.bounds_with(z, 0.5);
        if !is_full_box(&lo, &hi, points.points()) {
            return Err(Error::Precondition(format!("box {z:?} is not full")));
        }
    }
    let (origin, w, sides) = circuit.box_sides();
    let h = sides.len() / w;
    let box_side = |z: Site| -> Side {
        let (i, j) = (z.0 - origin.0, z.1 - origin.1);
        if i < 0 || j < 0 || i >= w as i64 || j >= h as i64 {
            Side::Out
        } else {
            sides[j as usize * w + i as usize]
        }
    };
    let ((bx0, by0), (bx1, by1)) = circuit.bounds();
    let lambda_side = |i: i64, j: i64| -> Side {
        // dual square [i, i+1] × [j, j+1] in lattice units
        if i < bx0 || j < by0 || i >= bx1 || j >= by1 {
            Side::Out
        } else if circuit.inside_lambda(i as f64 + 0.5, j as f64 + 0.5) {
            Side::In
        } else {
            Side::Out
        }
    };
    let mut report = SeparationReport { in_out_violations: vec![], out_in_violations: vec![], cells_checked: 0 };
    // Only cells that reach the padded circuit region can meet Λ^in or λ^in.
    let reach_lo = Point::new((bx0 as f64 - 1.5) * r, (by0 as f64 - 1.5) * r);
    let reach_hi = Point::new((bx1 as f64 + 1.5) * r, (by1 as f64 + 1.5) * r);
    for v in 0..points.len() {
        let cell = diagram.cell(v);
        if cell.len() < 3 {
            continue;
        }
        let (mut xl, mut xh, mut yl, mut yh) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in &cell {
            xl = xl.min(p.x);
            xh = xh.max(p.x);
            yl = yl.min(p.y);
            yh = yh.max(p.y);
        }
        if xh < reach_lo.x || xl > reach_hi.x || yh < reach_lo.y || yl > reach_hi.y {
            continue;
        }
        report.cells_checked += 1;
        let (mut big_in, mut big_out, mut small_in, mut small_out) = (false, false, false, false);
        // Boxes B_z^{1/2,r}: z ranges over sites whose box meets the bbox.
        let zx = ((xl / r - 0.5).floor() as i64, (xh / r + 0.5).ceil() as i64);
        let zy = ((yl / r - 0.5).floor() as i64, (yh / r + 0.5).ceil() as i64);
        for i in zx.0..=zx.1 {
            for j in zy.0..=zy.1 {
                let (lo, hi) = grid.bounds_with((i, j), 0.5);
                if polygon_overlaps_rect(&cell, &lo, &hi) {
                    match box_side((i, j)) {
                        Side::In => big_in = true,
                        Side::Out => big_out = true,
                        Side::On => {}
                    }
                }
            }
        }
        // Dual squares [i r, (i+1) r] × [j r, (j+1) r].
        for i in (xl / r).floor() as i64..=(xh / r).floor() as i64 {
            for j in (yl / r).floor() as i64..=(yh / r).floor() as i64 {
                let lo = Point::new(i as f64 * r, j as f64 * r);
                let hi = Point::new((i + 1) as f64 * r, (j + 1) as f64 * r);
                if polygon_overlaps_rect(&cell, &lo, &hi) {
                    match lambda_side(i, j) {
                        Side::In => small_in = true,
                        _ => small_out = true,
                    }
                }
            }
        }
        if big_in && small_out {
            report.in_out_violations.push(v);
        }
        if big_out && small_in {
            report.out_in_violations.push(v);
        }
    }
    Ok(report)
}

/// Random column-convex polyomino with `width` columns of heights in
/// `1..=max_height`, consecutive columns overlapping in at least one row,
/// so its boundary is a simple lattice circuit.
pub fn random_circuit(rng: &mut impl Rng, width: i64, max_height: i64, offset: Site, scale: f64) -> Result<BoxCircuit> {
    if width < 1 || max_height < 1 {
        return Err(invalid("circuit dimensions must be positive"));
    }
    let mut cells = BTreeSet::new();
    let (mut a, mut b) = (0i64, rng.random_range(1..=max_height));
    for i in 0..width {
        if i > 0 {
            // new interval [a', b') overlapping [a, b) in ≥ 1 row
            let h = rng.random_range(1..=max_height);
            let lo = a - h + 1;
            let hi = b - 1;
            let na = rng.random_range(lo..=hi);
            a = na;
            b = na + h;
        }
        for j in a..b {
            cells.insert((offset.0 + i, offset.1 + j));
        }
    }
    BoxCircuit::boundary_of(&cells, scale)
}

/// Values on the sites of a rectangle of `Z²`; sites outside read as 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SiteField<T> {
    pub zmin: Site,
    pub zmax: Site,
    values: Vec<T>,
}

impl<T: Copy + Default> SiteField<T> {
    pub fn new(zmin: Site, zmax: Site, values: Vec<T>) -> Result<Self> {
        if zmin.0 > zmax.0 || zmin.1 > zmax.1 {
            return Err(invalid("empty site range"));
        }
        let n = ((zmax.0 - zmin.0 + 1) * (zmax.1 - zmin.1 + 1)) as usize;
        if values.len() != n {
            return Err(invalid(format!("{} values for {n} sites", values.len())));
        }
        Ok(SiteField { zmin, zmax, values })
    }

    pub fn from_fn(zmin: Site, zmax: Site, mut f: impl FnMut(Site) -> T) -> Result<Self> {
        let values = (zmin.1..=zmax.1).flat_map(|y| (zmin.0..=zmax.0).map(move |x| (x, y))).map(&mut f).collect();
        SiteField::new(zmin, zmax, values)
    }

    pub fn contains(&self, z: Site) -> bool {
        z.0 >= self.zmin.0 && z.0 <= self.zmax.0 && z.1 >= self.zmin.1 && z.1 <= self.zmax.1
    }

    pub fn get(&self, z: Site) -> T {
        if self.contains(z) {
            let w = (self.zmax.0 - self.zmin.0 + 1) as usize;
            self.values[(z.1 - self.zmin.1) as usize * w + (z.0 - self.zmin.0) as usize]
        } else {
            T::default()
        }
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (self.zmin.1..=self.zmax.1).flat_map(move |y| (self.zmin.0..=self.zmax.0).map(move |x| (x, y)))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

impl<T: Copy + Default + fmt::Display> SiteField<T> {
    /// `"z.x z.y value"` lines.
    pub fn export(&self) -> String {
        self.sites().map(|z| format!("{} {} {}\n", z.0, z.1, self.get(z))).collect()
    }
}

pub const MAX_EXACT_ANIMAL: usize = 12;

/// Redelmeier enumeration of every connected site set that contains the
/// origin, has at most `s` sites and stays in `allowed`. Each set is
/// visited exactly once; `visit` sees the current set.
fn enumerate_animals(s: usize, allowed: impl Fn(Site) -> bool, mut visit: impl FnMut(&[Site])) {
    fn rec(
        s: usize,
        allowed: &dyn Fn(Site) -> bool,
        current: &mut Vec<Site>,
        untried: &mut Vec<Site>,
        seen: &mut HashSet<Site>,
        visit: &mut dyn FnMut(&[Site]),
    ) {
        while let Some(z) = untried.pop() {
            current.push(z);
            visit(current);
            if current.len() < s {
                let mut fresh = Vec::new();
                for d in NEIGHBORS {
                    let y = add(z, d);
                    if allowed(y) && seen.insert(y) {
                        fresh.push(y);
                    }
                }
                let mut next = untried.clone();
                next.extend(fresh.iter().copied());
                rec(s, allowed, current, &mut next, seen, visit);
                for y in fresh {
                    seen.remove(&y);
                }
            }
            current.pop();
        }
    }
    if s == 0 || !allowed((0, 0)) {
        return;
    }
    let mut seen = HashSet::from([(0, 0)]);
    let mut untried = vec![(0, 0)];
    let mut current = Vec::with_capacity(s);
    rec(s, &allowed, &mut current, &mut untried, &mut seen, &mut visit);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AnimalMode {
    Exact,
    /// Greedy growth plus improving swaps; a lower bound.
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnimalResult {
    pub value: f64,
    pub animal: Vec<Site>,
    pub mode: AnimalMode,
}

/// `M_s`: the largest field sum over animals with at most `s` sites.
/// Animals are confined to the field's range, which must hold the origin.
pub fn greedy_animal(field: &SiteField<f64>, s: usize, mode: AnimalMode) -> Result<AnimalResult> {
    if s == 0 {
        return Err(invalid("animal size must be positive"));
    }
    if !field.contains((0, 0)) {
        return Err(invalid("field range must contain the origin"));
    }
    if field.values().iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(invalid("field values must be finite and nonnegative"));
    }
    match mode {
        AnimalMode::Exact => {
            if s > MAX_EXACT_ANIMAL {
                return Err(Error::BoundExceeded(format!("exact animals need s ≤ {MAX_EXACT_ANIMAL}")));
            }
            let mut best = (f64::NEG_INFINITY, Vec::new());
            enumerate_animals(s, |z| field.contains(z), |a| {
                let v: f64 = a.iter().map(|&z| field.get(z)).sum();
                if v > best.0 {
                    best = (v, a.to_vec());
                }
            });
            let mut animal = best.1;
            animal.sort_unstable();
            Ok(AnimalResult { value: best.0, animal, mode })
        }
        AnimalMode::Heuristic => Ok(heuristic_animal(field, s)),
    }
}

fn is_connected_without(set: &BTreeSet<Site>, drop: Site) -> bool {
    let rest: Vec<Site> = set.iter().copied().filter(|&z| z != drop).collect();
    let Some(&start) = rest.first() else { return true };
    let mut seen = HashSet::from([start]);
    let mut stack = vec![start];
    while let Some(z) = stack.pop() {
        for d in NEIGHBORS {
            let y = add(z, d);
            if y != drop && set.contains(&y) && seen.insert(y) {
                stack.push(y);
            }
        }
    }
    seen.len() == rest.len()
}

fn heuristic_animal(field: &SiteField<f64>, s: usize) -> AnimalResult {
    let mut set = BTreeSet::from([(0, 0)]);
    let frontier = |set: &BTreeSet<Site>| -> BTreeSet<Site> {
        set.iter()
            .flat_map(|&z| NEIGHBORS.iter().map(move |&d| add(z, d)))
            .filter(|y| field.contains(*y) && !set.contains(y))
            .collect()
    };
    while set.len() < s {
        let best = frontier(&set).into_iter().max_by(|a, b| field.get(*a).total_cmp(&field.get(*b)).then(b.cmp(a)));
        match best {
            Some(z) => {
                set.insert(z);
            }
            None => break,
        }
    }
    // Swap a removable site for a better frontier site while that helps.
    loop {
        let mut improved = false;
        let removable: Vec<Site> =
            set.iter().copied().filter(|&z| z != (0, 0) && is_connected_without(&set, z)).collect();
        'outer: for z in removable {
            let mut trial = set.clone();
            trial.remove(&z);
            for y in frontier(&trial) {
                if y != z && field.get(y) > field.get(z) {
                    trial.insert(y);
                    set = trial;
                    improved = true;
                    break 'outer;
                }
            }
        }
        if !improved {
            break;
        }
    }
    let value = set.iter().map(|&z| field.get(z)).sum();
    AnimalResult { value, animal: set.into_iter().collect(), mode: AnimalMode::Heuristic }
}

/// Law of the i.i.d. site values fed to animal scans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum SiteLaw {
    Constant { c: f64 },
    Poisson { mean: f64 },
    Bernoulli { p: f64 },
}

impl SiteLaw {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            SiteLaw::Constant { c } => c >= 0.0 && c.is_finite(),
            SiteLaw::Poisson { mean } => mean > 0.0 && mean.is_finite(),
            SiteLaw::Bernoulli { p } => (0.0..=1.0).contains(&p),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("invalid site law {self}")))
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            SiteLaw::Constant { c } => c,
            SiteLaw::Poisson { mean } => Poisson::new(mean).expect("validated mean").sample(rng),
            SiteLaw::Bernoulli { p } => f64::from(u8::from(rng.random::<f64>() < p)),
        }
    }
}

impl fmt::Display for SiteLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SiteLaw::Constant { c } => write!(f, "constant({c})"),
            SiteLaw::Poisson { mean } => write!(f, "poisson({mean})"),
            SiteLaw::Bernoulli { p } => write!(f, "bernoulli({p})"),
        }
    }
}

impl FromStr for SiteLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s.split_once('(').ok_or_else(|| invalid(format!("site law {s:?} lacks parameters")))?;
        let arg: f64 = rest
            .strip_suffix(')')
            .ok_or_else(|| invalid(format!("site law {s:?} lacks ')'")))?
            .trim()
            .parse()
            .map_err(|e| invalid(format!("{s:?}: {e}")))?;
        let law = match kind.trim() {
            "constant" => SiteLaw::Constant { c: arg },
            "poisson" => SiteLaw::Poisson { mean: arg },
            "bernoulli" => SiteLaw::Bernoulli { p: arg },
            other => return Err(invalid(format!("unknown site law {other:?}"))),
        };
        law.validate()?;
        Ok(law)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnimalScanRow {
    pub s: usize,
    /// Summary of `M_s / s` over replicas.
    pub ratio: Summary,
    pub max_ratio: f64,
    pub q99_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnimalScan {
    pub law: SiteLaw,
    pub rows: Vec<AnimalScanRow>,
    /// `M_s / s` per s (outer) and replica (inner).
    pub ratios: Vec<Vec<f64>>,
    /// `max M_s / s` does not increase over the two largest s.
    pub max_ratio_stabilizes: bool,
}

/// Exact `M_s / s` on i.i.d. fields of radius `max s − 1` around the origin.
/// One field per replica serves every `s`.
pub fn animal_growth_scan(law: &SiteLaw, s_grid: &[usize], replicas: usize, seed: u64) -> Result<AnimalScan> {
    law.validate()?;
    if s_grid.is_empty() || replicas == 0 {
        return Err(invalid("empty s grid or zero replicas"));
    }
    let smax = *s_grid.iter().max().unwrap();
    if smax > MAX_EXACT_ANIMAL || s_grid.contains(&0) {
        return Err(Error::BoundExceeded(format!("s must lie in 1..={MAX_EXACT_ANIMAL}")));
    }
    let rad = smax as i64 - 1;
    let rows = replicate(replicas, |r| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, r as u64, AUX));
        let field = SiteField::from_fn((-rad, -rad), (rad, rad), |_| law.sample(&mut rng))?;
        // One enumeration to smax, recording the best sum per size.
        let mut best = vec![0.0f64; smax + 1];
        enumerate_animals(smax, |z| field.contains(z), |a| {
            let v: f64 = a.iter().map(|&z| field.get(z)).sum();
            if v > best[a.len()] {
                best[a.len()] = v;
            }
        });
        for k in 1..=smax {
            best[k] = best[k].max(best[k - 1]);
        }
        Ok(s_grid.iter().map(|&s| best[s] / s as f64).collect::<Vec<f64>>())
    })?;
    let ratios: Vec<Vec<f64>> = (0..s_grid.len()).map(|k| rows.iter().map(|row| row[k]).collect()).collect();
    let out: Vec<AnimalScanRow> = s_grid
        .iter()
        .zip(&ratios)
        .map(|(&s, v)| AnimalScanRow {
            s,
            ratio: Summary::of(v),
            max_ratio: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            q99_ratio: quantile(v, 0.99),
        })
        .collect();
    let mut order: Vec<usize> = (0..s_grid.len()).collect();
    order.sort_by_key(|&k| s_grid[k]);
    let max_ratio_stabilizes =
        order.len() < 2 || out[order[order.len() - 1]].max_ratio <= out[order[order.len() - 2]].max_ratio;
    Ok(AnimalScan { law: *law, rows: out, ratios, max_ratio_stabilizes })
}

pub const MAX_DENSITY_S: usize = 10;
pub const MAX_DENSITY_SITES: usize = 49;
pub const MAX_MIS_CANDIDATES: usize = 25;

/// Largest subset of `sites` with pairwise `d∞ ≥ k`, by branch and bound.
pub fn max_separated(sites: &[Site], k: i64) -> Result<usize> {
    if sites.len() > MAX_MIS_CANDIDATES {
        return Err(Error::BoundExceeded(format!("at most {MAX_MIS_CANDIDATES} candidate sites")));
    }
    let n = sites.len();
    let conflict: Vec<u32> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && {
                    let (a, b) = (sites[i], sites[j]);
                    (a.0 - b.0).abs().max((a.1 - b.1).abs()) < k
                })
                .fold(0u32, |m, j| m | (1 << j))
        })
        .collect();
    fn bb(cand: u32, size: usize, best: &mut usize, conflict: &[u32]) {
        if cand == 0 {
            *best = (*best).max(size);
            return;
        }
        if size + cand.count_ones() as usize <= *best {
            return;
        }
        let v = cand.trailing_zeros() as usize;
        bb(cand & !(1 << v) & !conflict[v], size + 1, best, conflict);
        bb(cand & !(1 << v), size, best, conflict);
    }
    let mut best = 0;
    bb(if n == 32 { u32::MAX } else { (1u32 << n) - 1 }, 0, &mut best, &conflict);
    Ok(best)
}

/// `m_s^k`: the smallest, over animals of at least `s` sites within the
/// field's range, of the largest k-separated set of open sites. Since
/// `m^k` can only grow with the animal, animals of exactly `s` sites
/// suffice.
pub fn open_density(field: &SiteField<bool>, s: usize, k: i64) -> Result<Option<usize>> {
    if s == 0 || k < 1 {
        return Err(invalid("s and k must be positive"));
    }
    if s > MAX_DENSITY_S || field.len() > MAX_DENSITY_SITES {
        return Err(Error::BoundExceeded(format!("need s ≤ {MAX_DENSITY_S} and at most {MAX_DENSITY_SITES} sites")));
    }
    if !field.contains((0, 0)) {
        return Err(invalid("field range must contain the origin"));
    }
    let mut best: Option<usize> = None;
    let mut open = Vec::with_capacity(s);
    enumerate_animals(s, |z| field.contains(z), |a| {
        if a.len() != s {
            return;
        }
        open.clear();
        open.extend(a.iter().copied().filter(|&z| field.get(z)));
        let m = if k == 1 { open.len() } else { max_separated(&open, k).expect("s ≤ 25") };
        best = Some(best.map_or(m, |b| b.min(m)));
    });
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodBoxParams {
    pub variant: GoodBoxVariant,
    /// Box scale L.
    pub l: f64,
    /// Sites `0..grid` in each direction.
    pub grid: i64,
    /// Bond probability for variant V.
    pub p: f64,
    /// Passage-time law and threshold for variant W.
    pub dist: WeightDistribution,
    pub eps: f64,
    /// Sites at this `d∞` are tested for correlation.
    pub dependence: i64,
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodBoxProbe {
    pub params: GoodBoxParams,
    /// Fraction of good boxes per replica.
    pub fraction: Summary,
    /// Pooled good-box frequency over all sites and replicas.
    pub pooled: Proportion,
    /// Correlation of the indicators at sites `(0,0)` and `(l,0)`, one
    /// pair per replica.
    pub correlation: Correlation,
}

/// Good-box statistics on fresh Poisson windows `[−3L, (grid + 2)L]²`,
/// wide enough for every box the variants look at.
pub fn good_box_density_probe(params: &GoodBoxParams, replicas: usize, seed: u64) -> Result<GoodBoxProbe> {
    let p = params;
    if !(p.l > 0.0) || p.grid < 1 || p.dependence < 1 || p.dependence >= p.grid || replicas == 0 {
        return Err(invalid("good-box probe needs L > 0, 1 ≤ dependence < grid and replicas ≥ 1"));
    }
    if matches!(p.variant, GoodBoxVariant::W) {
        p.dist.validate()?;
        if !(p.eps > 0.0) {
            return Err(invalid("eps must be positive"));
        }
    }
    if !(0.0..=1.0).contains(&p.p) {
        return Err(invalid("p outside [0, 1]"));
    }
    let (lo, hi) = (-3.0 * p.l, (p.grid + 2) as f64 * p.l);
    let window = Window::new(Point::new(lo, lo), Point::new(hi, hi), 0.0)?;
    let grid = BoxGrid::new(p.l, 0.5, (0, 0), (p.grid - 1, p.grid - 1))?;
    let flags = replicate(replicas, |r| {
        let points = sample_poisson(&window, p.intensity, derive_seed(seed, r as u64, POINTS))?;
        let graph = if points.len() >= 3 { build_delaunay(&points).ok() } else { None };
        let diagram = graph.as_ref().map(|g| build_voronoi_dual(g, &window));
        let bonds = match (&diagram, p.variant) {
            (Some(d), GoodBoxVariant::V) => Some(open_bonds(d, p.p, derive_seed(seed, r as u64, BONDS))?),
            (Some(d), GoodBoxVariant::W) => {
                let w = assign_weights(d.graph(), &p.dist, derive_seed(seed, r as u64, WEIGHTS))?;
                Some(threshold_indicator(&w, p.eps)?)
            }
            (None, GoodBoxVariant::V | GoodBoxVariant::W) => Some(crate::percolation::BondConfiguration::from_flags(vec![])),
            _ => None,
        };
        classify_good_boxes(p.variant, &grid, &points, diagram.as_ref(), bonds.as_ref())
    })?;
    let fractions: Vec<f64> =
        flags.iter().map(|f| f.iter().filter(|&&b| b).count() as f64 / f.len() as f64).collect();
    let pooled = Proportion::from_flags(flags.iter().flatten().copied());
    let w = p.grid as usize;
    let (a, b): (Vec<f64>, Vec<f64>) =
        flags.iter().map(|f| (f64::from(u8::from(f[0])), f64::from(u8::from(f[p.dependence as usize % w])))).unzip();
    Ok(GoodBoxProbe { params: p.clone(), fraction: Summary::of(&fractions), pooled, correlation: correlation(&a, &b) })
}
