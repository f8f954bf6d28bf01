//! First-passage times, geodesics and reached sets.

pub mod campaign;

use crate::error::{Error, Result};
use crate::geometry::{locate_tile, DelaunayGraph, Point, VoronoiDiagram};
use crate::weights::EdgeWeights;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PassageResult {
    pub time: f64,
    pub geodesic: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReachedSet {
    pub horizon: f64,
    /// Sorted vertex indices.
    pub vertices: Vec<usize>,
}

#[derive(Copy, Clone, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        // min-heap on (distance, vertex)
        o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Label-setting shortest paths from `source`. Distances are accumulated
/// left to right along paths (`d[b] = d[a] + τ_ab`). The search stops once
/// `stop(v, d)` returns true for a settled vertex or once the next settled
/// distance would exceed `limit`; unsettled vertices report `∞`.
pub fn shortest_paths_until(
    graph: &DelaunayGraph,
    weights: &EdgeWeights,
    source: usize,
    limit: f64,
    mut stop: impl FnMut(usize, f64) -> bool,
) -> Vec<f64> {
    let n = graph.num_vertices();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry(0.0, source));
    while let Some(Entry(d, v)) = heap.pop() {
        if done[v] {
            continue;
        }
        if d > limit {
            break;
        }
        done[v] = true;
        if stop(v, d) {
            break;
        }
        for (&u, &e) in graph.neighbors(v).iter().zip(graph.neighbor_edges(v)) {
            if done[u] {
                continue;
            }
            let nd = d + weights.get(e);
            if nd < dist[u] {
                dist[u] = nd;
                heap.push(Entry(nd, u));
            }
        }
    }
    for v in 0..n {
        if !done[v] {
            dist[v] = f64::INFINITY;
        }
    }
    dist
}

/// Passage times from `source` to every vertex.
pub fn passage_times(graph: &DelaunayGraph, weights: &EdgeWeights, source: usize) -> Vec<f64> {
    shortest_paths_until(graph, weights, source, f64::INFINITY, |_, _| false)
}

/// Settles every vertex with `T(u, ·) ≤ T(u, v)`, so that all geodesic
/// vertices carry final labels even when distances tie with `v`'s.
fn settle_through(graph: &DelaunayGraph, weights: &EdgeWeights, u: usize, v: usize) -> Vec<f64> {
    let mut tv = f64::INFINITY;
    shortest_paths_until(graph, weights, u, f64::INFINITY, |x, d| {
        if x == v {
            tv = d;
        }
        d > tv
    })
}

fn check_vertex(graph: &DelaunayGraph, v: usize) -> Result<()> {
    if v >= graph.num_vertices() {
        Err(Error::UnknownVertex(v))
    } else {
        Ok(())
    }
}

fn check_weights(graph: &DelaunayGraph, weights: &EdgeWeights) -> Result<()> {
    if weights.len() != graph.num_edges() {
        return Err(Error::Precondition("weights do not match the graph's edges".into()));
    }
    Ok(())
}

/// `T(u, v)` and the lexicographically smallest geodesic.
pub fn first_passage_time(graph: &DelaunayGraph, weights: &EdgeWeights, u: usize, v: usize) -> Result<PassageResult> {
    check_vertex(graph, u)?;
    check_vertex(graph, v)?;
    check_weights(graph, weights)?;
    let dist = settle_through(graph, weights, u, v);
    if !dist[v].is_finite() {
        return Err(Error::Disconnected(u, v));
    }
    let geodesic = lexicographic_geodesic(graph, weights, &dist, u, v);
    Ok(PassageResult { time: dist[v], geodesic })
}

/// Edge `a → b` is tight when `d[a] + τ = d[b]` exactly.
fn tight(dist: &[f64], w: f64, a: usize, b: usize) -> bool {
    dist[a].is_finite() && dist[b].is_finite() && dist[a] + w == dist[b]
}

/// Vertices from which `v` is reachable along tight edges.
fn tight_ancestors(graph: &DelaunayGraph, weights: &EdgeWeights, dist: &[f64], v: usize) -> Vec<bool> {
    let mut mark = vec![false; graph.num_vertices()];
    mark[v] = true;
    let mut stack = vec![v];
    while let Some(b) = stack.pop() {
        for (&a, &e) in graph.neighbors(b).iter().zip(graph.neighbor_edges(b)) {
            if !mark[a] && tight(dist, weights.get(e), a, b) {
                mark[a] = true;
                stack.push(a);
            }
        }
    }
    mark
}

/// Greedy smallest-next-vertex walk over tight edges, accepting a step only
/// if the target stays reachable without revisiting.
fn lexicographic_geodesic(graph: &DelaunayGraph, weights: &EdgeWeights, dist: &[f64], u: usize, v: usize) -> Vec<usize> {
    let anc = tight_ancestors(graph, weights, dist, v);
    let n = graph.num_vertices();
    let mut used = vec![false; n];
    let mut path = vec![u];
    used[u] = true;
    let mut cur = u;
    let mut seen = vec![0u32; n];
    let mut epoch = 0u32;
    while cur != v {
        let mut next = None;
        for (&x, &e) in graph.neighbors(cur).iter().zip(graph.neighbor_edges(cur)) {
            if used[x] || !anc[x] || !tight(dist, weights.get(e), cur, x) {
                continue;
            }
            epoch += 1;
            if reaches_avoiding(graph, weights, dist, &anc, &used, x, v, &mut seen, epoch) {
                next = Some(x);
                break;
            }
        }
        let x = next.expect("a tight simple path exists along the shortest-path tree");
        used[x] = true;
        path.push(x);
        cur = x;
    }
    path
}

#[allow(clippy::too_many_arguments)]
fn reaches_avoiding(
    graph: &DelaunayGraph,
    weights: &EdgeWeights,
    dist: &[f64],
    anc: &[bool],
    used: &[bool],
    from: usize,
    to: usize,
    seen: &mut [u32],
    epoch: u32,
) -> bool {
    let mut stack = vec![from];
    seen[from] = epoch;
    while let Some(a) = stack.pop() {
        if a == to {
            return true;
        }
        for (&b, &e) in graph.neighbors(a).iter().zip(graph.neighbor_edges(a)) {
            if seen[b] != epoch && !used[b] && anc[b] && tight(dist, weights.get(e), a, b) {
                seen[b] = epoch;
                stack.push(b);
            }
        }
    }
    false
}

/// Number of distinct simple geodesics from `u` to `v`, counted up to
/// `cap`. `Err(BoundExceeded)` if the search exceeds `budget` steps.
pub fn count_geodesics(
    graph: &DelaunayGraph,
    weights: &EdgeWeights,
    u: usize,
    v: usize,
    cap: usize,
    budget: usize,
) -> Result<usize> {
    check_vertex(graph, u)?;
    check_vertex(graph, v)?;
    check_weights(graph, weights)?;
    let dist = settle_through(graph, weights, u, v);
    if !dist[v].is_finite() {
        return Err(Error::Disconnected(u, v));
    }
    let anc = tight_ancestors(graph, weights, &dist, v);
    let mut used = vec![false; graph.num_vertices()];
    let mut found = 0;
    let mut steps = 0;
    // Explicit DFS: (vertex, next neighbour slot).
    let mut stack: Vec<(usize, usize)> = vec![(u, 0)];
    used[u] = true;
    while let Some(&mut (a, ref mut k)) = stack.last_mut() {
        steps += 1;
        if steps > budget {
            return Err(Error::BoundExceeded(format!("geodesic count exceeded {budget} steps")));
        }
        if a == v {
            found += 1;
            if found >= cap {
                return Ok(found);
            }
            used[a] = false;
            stack.pop();
            continue;
        }
        let nb = graph.neighbors(a);
        let ne = graph.neighbor_edges(a);
        let mut pushed = None;
        while *k < nb.len() {
            let (b, e) = (nb[*k], ne[*k]);
            *k += 1;
            if !used[b] && anc[b] && tight(&dist, weights.get(e), a, b) {
                pushed = Some(b);
                break;
            }
        }
        match pushed {
            Some(b) => {
                used[b] = true;
                stack.push((b, 0));
            }
            None => {
                used[a] = false;
                stack.pop();
            }
        }
    }
    Ok(found)
}

/// `T(x, y) = T(v(x), v(y))`.
pub fn point_passage_time(
    x: &Point,
    y: &Point,
    diagram: &VoronoiDiagram<'_>,
    graph: &DelaunayGraph,
    weights: &EdgeWeights,
) -> Result<PassageResult> {
    let u = locate_tile(x, diagram)?;
    let v = locate_tile(y, diagram)?;
    first_passage_time(graph, weights, u, v)
}

/// Vertices with `T(source, ·) ≤ t`.
pub fn reached_set(graph: &DelaunayGraph, weights: &EdgeWeights, source: usize, t: f64) -> Result<ReachedSet> {
    check_vertex(graph, source)?;
    check_weights(graph, weights)?;
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("horizon must be nonnegative, got {t}")));
    }
    let dist = shortest_paths_until(graph, weights, source, t, |_, _| false);
    let vertices = (0..graph.num_vertices()).filter(|&v| dist[v] <= t).collect();
    Ok(ReachedSet { horizon: t, vertices })
}

/// Sum of weights along a vertex path, left to right.
pub fn path_weight(graph: &DelaunayGraph, weights: &EdgeWeights, path: &[usize]) -> Result<f64> {
    let mut s = 0.0;
    for w in path.windows(2) {
        let e = graph
            .edge_index(w[0], w[1])
            .ok_or_else(|| Error::Precondition(format!("{} and {} are not adjacent", w[0], w[1])))?;
        s += weights.get(e);
    }
    Ok(s)
}
