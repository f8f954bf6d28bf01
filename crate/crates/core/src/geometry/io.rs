//! Text formats for point sets and graphs.
//!
//! Point files start with `# window lo.x lo.y hi.x hi.y margin` followed
//! by one `x y` line per point. Graph files start with `# vertices N`
//! followed by one `i j` line per edge. Floats use Rust's shortest
//! round-trip formatting, so reading back is bit-exact.

use super::{DelaunayGraph, Point, PointSet, Window};
use crate::error::{Error, Result};
use std::fmt::Write as _;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

pub fn write_points(ps: &PointSet) -> String {
    let w = ps.window();
    let mut s = String::with_capacity(40 * ps.len() + 64);
    let _ = writeln!(s, "# window {} {} {} {} {}", w.lo.x, w.lo.y, w.hi.x, w.hi.y, w.margin);
    for p in ps.points() {
        let _ = writeln!(s, "{} {}", p.x, p.y);
    }
    s
}

fn floats(line: &str, lineno: usize, count: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = line
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|e| parse_err(lineno, format!("{t:?}: {e}"))))
        .collect::<Result<_>>()?;
    if v.len() != count {
        return Err(parse_err(lineno, format!("expected {count} numbers, found {}", v.len())));
    }
    Ok(v)
}

pub fn read_points(text: &str) -> Result<PointSet> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let rest = header
        .strip_prefix("# window")
        .ok_or_else(|| parse_err(1, "missing '# window' header"))?;
    let h = floats(rest, 1, 5)?;
    let window = Window::new(Point::new(h[0], h[1]), Point::new(h[2], h[3]), h[4])?;
    let mut pts = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let v = floats(line, i + 1, 2)?;
        pts.push(Point::new(v[0], v[1]));
    }
    PointSet::new(pts, window)
}

pub fn write_graph(g: &DelaunayGraph) -> String {
    let mut s = String::with_capacity(16 * g.num_edges() + 32);
    let _ = writeln!(s, "# vertices {}", g.num_vertices());
    for &(i, j) in g.edges() {
        let _ = writeln!(s, "{i} {j}");
    }
    s
}

/// Vertex count and edge list from a graph export.
pub fn read_graph(text: &str) -> Result<(usize, Vec<(usize, usize)>)> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let n: usize = header
        .strip_prefix("# vertices")
        .ok_or_else(|| parse_err(1, "missing '# vertices' header"))?
        .trim()
        .parse()
        .map_err(|e| parse_err(1, format!("{e}")))?;
    let mut edges = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace().map(str::parse::<usize>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(a)), Some(Ok(b)), None) if a < n && b < n => edges.push((a, b)),
            _ => return Err(parse_err(i + 1, format!("bad edge line {line:?}"))),
        }
    }
    Ok((n, edges))
}
