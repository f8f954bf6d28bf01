use super::predicates::{incircle_perturbed, orient};
use super::{Point, PointSet};
use crate::error::{Error, Result};
use std::cmp::Ordering;

const GHOST: usize = usize::MAX;

/// Canonical Delaunay triangulation.
///
/// Triangles are CCW with their smallest index first and sorted; edges are
/// `(i, j)` with `i < j`, sorted. Edge `k` has `edge_faces[k] = [left, right]`
/// where `left` lies to the left of `i → j`; `None` marks the outer face.
#[derive(Debug, Clone, PartialEq)]
pub struct DelaunayGraph {
    vertices: PointSet,
    triangles: Vec<[usize; 3]>,
    edges: Vec<(usize, usize)>,
    edge_faces: Vec<[Option<usize>; 2]>,
    offsets: Vec<usize>,
    nbrs: Vec<usize>,
    nbr_edges: Vec<usize>,
}

impl DelaunayGraph {
    pub fn vertices(&self) -> &PointSet {
        &self.vertices
    }

    pub fn points(&self) -> &[Point] {
        self.vertices.points()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// `[left, right]` triangle indices of edge `e`.
    pub fn edge_faces(&self, e: usize) -> [Option<usize>; 2] {
        self.edge_faces[e]
    }

    /// True when both sides of the edge are triangles.
    pub fn is_interior_edge(&self, e: usize) -> bool {
        let [l, r] = self.edge_faces[e];
        l.is_some() && r.is_some()
    }

    /// Sorted neighbours of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.nbrs[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Edge ids aligned with [`neighbors`](Self::neighbors).
    pub fn neighbor_edges(&self, v: usize) -> &[usize] {
        &self.nbr_edges[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        if u >= self.num_vertices() || v >= self.num_vertices() {
            return None;
        }
        let nb = self.neighbors(u);
        nb.binary_search(&v).ok().map(|k| self.neighbor_edges(u)[k])
    }

    /// Faces including the outer one.
    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.edges.len() as i64 + self.triangles.len() as i64 + 1
    }

    /// Copy with the same combinatorics over a different (congruent) point
    /// set. Used for rigid motions, which preserve the triangulation.
    pub fn relabel_points(&self, vertices: PointSet) -> Result<Self> {
        if vertices.len() != self.num_vertices() {
            return Err(Error::Precondition("point count changed".into()));
        }
        let mut g = self.clone();
        g.vertices = vertices;
        Ok(g)
    }
}

/// Incremental Bowyer–Watson with ghost triangles and exact predicates.
pub fn build_delaunay(points: &PointSet) -> Result<DelaunayGraph> {
    let pts = points.points();
    let n = pts.len();
    if n < 3 {
        return Err(Error::Degenerate(format!("need at least 3 points, got {n}")));
    }
    let order = hilbert_order(pts);
    let mut mesh = Mesh::new(pts);
    let rest = mesh.seed(&order)?;
    for &p in &rest {
        mesh.insert(p)?;
    }
    Ok(mesh.finish(points.clone()))
}

struct Mesh<'a> {
    pts: &'a [Point],
    v: Vec<[usize; 3]>,
    nb: Vec<[usize; 3]>,
    alive: Vec<bool>,
    free: Vec<usize>,
    last: usize,
    rng: u64,
    // scratch
    stamp: Vec<u32>,
    epoch: u32,
    cavity: Vec<usize>,
    boundary: Vec<(usize, usize, usize)>,
    created: Vec<usize>,
}

impl<'a> Mesh<'a> {
    fn new(pts: &'a [Point]) -> Self {
        let cap = 2 * pts.len() + 8;
        Mesh {
            pts,
            v: Vec::with_capacity(cap),
            nb: Vec::with_capacity(cap),
            alive: Vec::with_capacity(cap),
            free: Vec::new(),
            last: 0,
            rng: 0x9E37_79B9_7F4A_7C15,
            stamp: Vec::with_capacity(cap),
            epoch: 0,
            cavity: Vec::new(),
            boundary: Vec::new(),
            created: Vec::new(),
        }
    }

    fn alloc(&mut self, v: [usize; 3]) -> usize {
        if let Some(t) = self.free.pop() {
            self.v[t] = v;
            self.nb[t] = [GHOST; 3];
            self.alive[t] = true;
            t
        } else {
            self.v.push(v);
            self.nb.push([GHOST; 3]);
            self.alive.push(true);
            self.stamp.push(0);
            self.v.len() - 1
        }
    }

    fn is_ghost(&self, t: usize) -> bool {
        self.v[t].contains(&GHOST)
    }

    /// First non-collinear triple becomes the seed triangle. Returns the
    /// remaining points in insertion order.
    fn seed(&mut self, order: &[usize]) -> Result<Vec<usize>> {
        let a = order[0];
        let b = order[1];
        let mut third = None;
        for (k, &c) in order.iter().enumerate().skip(2) {
            if orient(&self.pts[a], &self.pts[b], &self.pts[c]) != 0.0 {
                third = Some(k);
                break;
            }
        }
        let k = third.ok_or_else(|| Error::Degenerate("all points are collinear".into()))?;
        let c = order[k];
        let (a, b) = if orient(&self.pts[a], &self.pts[b], &self.pts[c]) > 0.0 { (a, b) } else { (b, a) };
        let t = self.alloc([a, b, c]);
        // Ghosts: exterior to the left of the real edge u→w in (u, w, G).
        let g0 = self.alloc([b, a, GHOST]);
        let g1 = self.alloc([c, b, GHOST]);
        let g2 = self.alloc([a, c, GHOST]);
        self.nb[t] = [g1, g2, g0];
        // g0 = (b, a, G): opposite b is (a, G) → g2; opposite a is (G, b) → g1.
        self.nb[g0] = [g2, g1, t];
        self.nb[g1] = [g0, g2, t];
        self.nb[g2] = [g1, g0, t];
        self.last = t;
        Ok(order[2..].iter().copied().filter(|&i| i != c).collect())
    }

    fn next_rand(&mut self) -> u64 {
        self.rng ^= self.rng << 13;
        self.rng ^= self.rng >> 7;
        self.rng ^= self.rng << 17;
        self.rng
    }

    /// Conflict test: `p` strictly inside the (perturbed) circumcircle; for
    /// ghosts, strictly outside the hull edge or on its line inside the
    /// neighbouring solid triangle's circle.
    fn conflicts(&self, t: usize, p: usize) -> bool {
        let [a, b, c] = self.v[t];
        if let Some(gk) = [a, b, c].iter().position(|&x| x == GHOST) {
            let u = self.v[t][(gk + 1) % 3];
            let w = self.v[t][(gk + 2) % 3];
            let s = orient(&self.pts[u], &self.pts[w], &self.pts[p]);
            if s > 0.0 {
                return true;
            }
            if s < 0.0 {
                return false;
            }
            let solid = self.nb[t][gk];
            return self.conflicts(solid, p);
        }
        incircle_perturbed(self.pts, a, b, c, p) == Ordering::Greater
    }

    /// Visibility walk to a triangle whose closure contains `p`, or to a
    /// ghost whose open exterior half-plane contains it.
    fn locate(&mut self, p: usize) -> usize {
        let mut t = self.last;
        if self.is_ghost(t) {
            let gk = self.v[t].iter().position(|&x| x == GHOST).unwrap();
            t = self.nb[t][gk];
        }
        let q = self.pts[p];
        'walk: loop {
            if self.is_ghost(t) {
                return t;
            }
            let start = (self.next_rand() % 3) as usize;
            for s in 0..3 {
                let i = (start + s) % 3;
                let a = self.v[t][(i + 1) % 3];
                let b = self.v[t][(i + 2) % 3];
                if orient(&self.pts[a], &self.pts[b], &q) < 0.0 {
                    t = self.nb[t][i];
                    continue 'walk;
                }
            }
            return t;
        }
    }

    fn insert(&mut self, p: usize) -> Result<()> {
        let start = self.locate(p);
        if !self.is_ghost(start) && self.v[start].iter().any(|&u| self.pts[u] == self.pts[p]) {
            return Err(Error::Degenerate(format!("duplicate point index {p}")));
        }
        debug_assert!(self.conflicts(start, p));
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        let epoch = self.epoch;
        let mut cavity = std::mem::take(&mut self.cavity);
        let mut boundary = std::mem::take(&mut self.boundary);
        let mut created = std::mem::take(&mut self.created);
        cavity.clear();
        boundary.clear();
        created.clear();
        cavity.push(start);
        self.stamp[start] = epoch;
        let mut head = 0;
        while head < cavity.len() {
            let t = cavity[head];
            head += 1;
            for i in 0..3 {
                let n = self.nb[t][i];
                if self.stamp[n] != epoch && self.conflicts(n, p) {
                    self.stamp[n] = epoch;
                    cavity.push(n);
                }
            }
        }
        // Boundary edges (a → b, outside neighbour) in CCW order of the cavity.
        for &t in &cavity {
            for i in 0..3 {
                let n = self.nb[t][i];
                if self.stamp[n] != epoch {
                    boundary.push((self.v[t][(i + 1) % 3], self.v[t][(i + 2) % 3], n));
                }
            }
        }
        for &t in &cavity {
            self.alive[t] = false;
            self.free.push(t);
        }
        for &(a, b, n) in &boundary {
            let t = self.alloc([a, b, p]);
            self.nb[t][2] = n;
            // Point n's slot for edge (b, a) back to t.
            let slot = (0..3).find(|&j| self.v[n][j] != a && self.v[n][j] != b).expect("shared edge");
            self.nb[n][slot] = t;
            created.push(t);
        }
        for &t in &created {
            let [a, b, _] = self.v[t];
            // Across b → p is the new triangle starting at b; across p → a
            // the one ending at a.
            let across_bp = created.iter().copied().find(|&u| self.v[u][0] == b);
            let across_pa = created.iter().copied().find(|&u| self.v[u][1] == a);
            match (across_bp, across_pa) {
                (Some(x), Some(y)) => {
                    self.nb[t][0] = x;
                    self.nb[t][1] = y;
                }
                _ => return Err(Error::Numeric("cavity boundary is not a closed cycle".into())),
            }
        }
        self.last = *created.iter().find(|&&t| !self.is_ghost(t)).unwrap_or(&created[0]);
        self.cavity = cavity;
        self.boundary = boundary;
        self.created = created;
        Ok(())
    }

    fn finish(self, vertices: PointSet) -> DelaunayGraph {
        let n = vertices.len();
        // Canonical triangles: rotate to min index first, bucket by it.
        let solid: Vec<usize> = (0..self.v.len()).filter(|&t| self.alive[t] && !self.is_ghost(t)).collect();
        let rotated = |t: usize| {
            let v = self.v[t];
            let k = (0..3).min_by_key(|&i| v[i]).unwrap();
            [v[k], v[(k + 1) % 3], v[(k + 2) % 3]]
        };
        let mut order: Vec<([usize; 3], usize)> = solid.iter().map(|&t| (rotated(t), t)).collect();
        bucket_sort(&mut order, n, |e| e.0[0]);
        let mut canon = vec![usize::MAX; self.v.len()];
        for (k, &(_, t)) in order.iter().enumerate() {
            canon[t] = k;
        }
        let triangles: Vec<[usize; 3]> = order.iter().map(|e| e.0).collect();

        // One record per edge, emitted from the side where a < b or from
        // the only solid side of a hull edge.
        let mut recs: Vec<(usize, usize, [Option<usize>; 2])> = Vec::with_capacity(3 * triangles.len() / 2 + 8);
        for &t in &solid {
            for i in 0..3 {
                let a = self.v[t][(i + 1) % 3];
                let b = self.v[t][(i + 2) % 3];
                let nbr = self.nb[t][i];
                let me = Some(canon[t]);
                if self.is_ghost(nbr) {
                    recs.push(if a < b { (a, b, [me, None]) } else { (b, a, [None, me]) });
                } else if a < b {
                    recs.push((a, b, [me, Some(canon[nbr])]));
                }
            }
        }
        bucket_sort(&mut recs, n, |r| r.0);
        let edges: Vec<(usize, usize)> = recs.iter().map(|r| (r.0, r.1)).collect();
        let edge_faces: Vec<[Option<usize>; 2]> = recs.iter().map(|r| r.2).collect();

        let mut offsets = vec![0usize; n + 1];
        for &(i, j) in &edges {
            offsets[i + 1] += 1;
            offsets[j + 1] += 1;
        }
        for v in 0..n {
            offsets[v + 1] += offsets[v];
        }
        let mut fill = offsets.clone();
        let mut nbrs = vec![0usize; offsets[n]];
        let mut nbr_edges = vec![0usize; offsets[n]];
        // Lower neighbours first, then higher; edge order keeps each run sorted.
        for (e, &(i, j)) in edges.iter().enumerate() {
            nbrs[fill[j]] = i;
            nbr_edges[fill[j]] = e;
            fill[j] += 1;
        }
        for (e, &(i, j)) in edges.iter().enumerate() {
            nbrs[fill[i]] = j;
            nbr_edges[fill[i]] = e;
            fill[i] += 1;
        }
        DelaunayGraph { vertices, triangles, edges, edge_faces, offsets, nbrs, nbr_edges }
    }
}

/// Stable counting sort on a small integer key, then a full sort inside
/// each bucket (buckets hold a handful of items).
fn bucket_sort<T: Copy + Ord>(items: &mut Vec<T>, keys: usize, key: impl Fn(&T) -> usize) {
    let mut start = vec![0usize; keys + 1];
    for it in items.iter() {
        start[key(it) + 1] += 1;
    }
    for k in 0..keys {
        start[k + 1] += start[k];
    }
    let mut fill = start.clone();
    let mut out = items.clone();
    for it in items.iter() {
        let k = key(it);
        out[fill[k]] = *it;
        fill[k] += 1;
    }
    for k in 0..keys {
        out[start[k]..start[k + 1]].sort_unstable();
    }
    *items = out;
}

/// Indices sorted along a Hilbert curve over the bounding box.
fn hilbert_order(pts: &[Point]) -> Vec<usize> {
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    const ORDER: u32 = 16;
    let side = (1u64 << ORDER) as f64 - 1.0;
    let mut keyed: Vec<(u64, usize)> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let gx = (((p.x - x0) / span) * side) as u64;
            let gy = (((p.y - y0) / span) * side) as u64;
            (hilbert_d(ORDER, gx, gy), i)
        })
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, i)| i).collect()
}

fn hilbert_d(order: u32, mut x: u64, mut y: u64) -> u64 {
    let n = 1u64 << order;
    let mut d = 0u64;
    let mut s = n / 2;
    while s > 0 {
        let rx = u64::from(x & s > 0);
        let ry = u64::from(y & s > 0);
        d += s * s * ((3 * rx) ^ ry);
        if ry == 0 {
            if rx == 1 {
                x = n - 1 - x;
                y = n - 1 - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        s /= 2;
    }
    d
}
