//! Passage-time distributions and per-edge weight fields.

use crate::error::{invalid, Error, Result};
use crate::geometry::DelaunayGraph;
use crate::percolation::BondConfiguration;
use crate::seed::{mix64, unit_from_key};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

/// Law of a single passage time. Every variant is sampled by inversion
/// from one uniform, so distributions sharing a seed are coupled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum WeightDistribution {
    Deterministic { c: f64 },
    /// Mass `p0` at zero, value `v` otherwise.
    BernoulliAtom { p0: f64, v: f64 },
    Exponential { rate: f64 },
    Uniform { a: f64, b: f64 },
}

impl WeightDistribution {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Deterministic { c } => c >= 0.0 && c.is_finite(),
            Self::BernoulliAtom { p0, v } => (0.0..=1.0).contains(&p0) && v > 0.0 && v.is_finite(),
            Self::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            Self::Uniform { a, b } => a >= 0.0 && a < b && b.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("invalid distribution parameters: {self}")))
        }
    }

    /// Inverse distribution function at `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            Self::Deterministic { c } => c,
            Self::BernoulliAtom { p0, v } => {
                if u < p0 {
                    0.0
                } else {
                    v
                }
            }
            Self::Exponential { rate } => -(-u).ln_1p() / rate,
            Self::Uniform { a, b } => a + (b - a) * u,
        }
    }

    /// `F(0) = P(τ = 0)`.
    pub fn mass_at_zero(&self) -> f64 {
        match *self {
            Self::Deterministic { c } => f64::from(u8::from(c == 0.0)),
            Self::BernoulliAtom { p0, .. } => p0,
            Self::Exponential { .. } | Self::Uniform { .. } => 0.0,
        }
    }

    /// True when the law has no atoms.
    pub fn is_continuous(&self) -> bool {
        matches!(self, Self::Exponential { .. } | Self::Uniform { .. })
    }

    /// Same law with every value multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        match *self {
            Self::Deterministic { c: d } => Self::Deterministic { c: d * c },
            Self::BernoulliAtom { p0, v } => Self::BernoulliAtom { p0, v: v * c },
            Self::Exponential { rate } => Self::Exponential { rate: rate / c },
            Self::Uniform { a, b } => Self::Uniform { a: a * c, b: b * c },
        }
    }
}

impl fmt::Display for WeightDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Deterministic { c } => write!(f, "deterministic({c})"),
            Self::BernoulliAtom { p0, v } => write!(f, "bernoulliAtom({p0},{v})"),
            Self::Exponential { rate } => write!(f, "exponential({rate})"),
            Self::Uniform { a, b } => write!(f, "uniform({a},{b})"),
        }
    }
}

impl FromStr for WeightDistribution {
    type Err = Error;

    /// Parses `kind(p1,p2)`, e.g. `exponential(1)` or `bernoulliAtom(0.3,1)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let open = s.find('(').ok_or_else(|| invalid(format!("distribution {s:?} lacks parameters")))?;
        let body = s[open + 1..]
            .strip_suffix(')')
            .ok_or_else(|| invalid(format!("distribution {s:?} lacks ')'")))?;
        let args: Vec<f64> = body
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| invalid(format!("{t:?}: {e}"))))
            .collect::<Result<_>>()?;
        let kind = s[..open].trim();
        let d = match (kind, args.as_slice()) {
            ("deterministic", &[c]) => Self::Deterministic { c },
            ("bernoulliAtom", &[p0, v]) => Self::BernoulliAtom { p0, v },
            ("exponential", &[rate]) => Self::Exponential { rate },
            ("uniform", &[a, b]) => Self::Uniform { a, b },
            _ => return Err(invalid(format!("unknown distribution {s:?}"))),
        };
        d.validate()?;
        Ok(d)
    }
}

/// Passage times indexed by Delaunay edge id.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeights {
    values: Vec<f64>,
}

impl EdgeWeights {
    pub fn new(graph: &DelaunayGraph, values: Vec<f64>) -> Result<Self> {
        if values.len() != graph.num_edges() {
            return Err(invalid(format!("{} weights for {} edges", values.len(), graph.num_edges())));
        }
        if let Some(w) = values.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(invalid(format!("weight {w} is not a finite nonnegative number")));
        }
        Ok(EdgeWeights { values })
    }

    /// All edges share one value.
    pub fn constant(graph: &DelaunayGraph, c: f64) -> Result<Self> {
        EdgeWeights::new(graph, vec![c; graph.num_edges()])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, e: usize) -> f64 {
        self.values[e]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid("scale factor must be positive"));
        }
        Ok(EdgeWeights { values: self.values.iter().map(|w| w * c).collect() })
    }

    /// `"i j tau"` lines in canonical edge order, 17 significant digits.
    pub fn export(&self, graph: &DelaunayGraph) -> String {
        let mut s = String::with_capacity(32 * self.values.len());
        for (&(i, j), w) in graph.edges().iter().zip(&self.values) {
            s.push_str(&format!("{i} {j} {w:.16e}\n"));
        }
        s
    }
}

/// One uniform per edge in canonical edge order, mapped through `dist`.
pub fn assign_weights(graph: &DelaunayGraph, dist: &WeightDistribution, seed: u64) -> Result<EdgeWeights> {
    dist.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..graph.num_edges()).map(|_| dist.quantile(rng.random::<f64>())).collect();
    Ok(EdgeWeights { values })
}

/// Weights keyed by endpoint labels rather than edge order: an edge
/// between points labelled `a` and `b` gets the same passage time in every
/// graph that contains it. `labels[v]` is the label of vertex `v`.
pub fn assign_weights_keyed(
    graph: &DelaunayGraph,
    labels: &[u64],
    dist: &WeightDistribution,
    seed: u64,
) -> Result<EdgeWeights> {
    dist.validate()?;
    if labels.len() != graph.num_vertices() {
        return Err(invalid("one label per vertex required"));
    }
    let values = graph
        .edges()
        .iter()
        .map(|&(i, j)| {
            let (a, b) = (labels[i].min(labels[j]), labels[i].max(labels[j]));
            dist.quantile(unit_from_key(mix64(mix64(seed ^ a) ^ b.rotate_left(32))))
        })
        .collect();
    Ok(EdgeWeights { values })
}

/// `8 · a⁻¹ · ln n`.
pub fn truncation_cap(n: usize, a: f64) -> Result<f64> {
    if n < 2 {
        return Err(invalid("truncation needs n ≥ 2"));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid("exponential-moment parameter a must be positive"));
    }
    Ok(8.0 / a * (n as f64).ln())
}

/// Elementwise `min(τ, 8 · a⁻¹ · ln n)`.
pub fn truncate_weights(weights: &EdgeWeights, n: usize, a: f64) -> Result<EdgeWeights> {
    let cap = truncation_cap(n, a)?;
    Ok(EdgeWeights { values: weights.values.iter().map(|&w| w.min(cap)).collect() })
}

/// Dual edge `e*` open iff `τ_e ≥ eps`.
pub fn threshold_indicator(weights: &EdgeWeights, eps: f64) -> Result<BondConfiguration> {
    if !(eps > 0.0) {
        return Err(invalid("eps must be positive"));
    }
    Ok(BondConfiguration::from_flags(weights.values.iter().map(|&w| w >= eps).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["deterministic(2.5)", "bernoulliAtom(0.3,1)", "exponential(1)", "uniform(0,2)"] {
            let d: WeightDistribution = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert!("exponential(0)".parse::<WeightDistribution>().is_err());
        assert!("bernoulliAtom(1.5,1)".parse::<WeightDistribution>().is_err());
        assert!("gamma(1)".parse::<WeightDistribution>().is_err());
        assert!("uniform(2,1)".parse::<WeightDistribution>().is_err());
    }

    #[test]
    fn quantiles() {
        let e = WeightDistribution::Exponential { rate: 2.0 };
        assert_eq!(e.quantile(0.0), 0.0);
        assert!((e.quantile(0.5) - std::f64::consts::LN_2 / 2.0).abs() < 1e-15);
        let b = WeightDistribution::BernoulliAtom { p0: 0.3, v: 1.0 };
        assert_eq!(b.quantile(0.29), 0.0);
        assert_eq!(b.quantile(0.3), 1.0);
    }

    #[test]
    fn cap_values() {
        assert!((truncation_cap(100, 1.0).unwrap() - 8.0 * 100f64.ln()).abs() < 1e-12);
        assert!(truncation_cap(1, 1.0).is_err());
        assert!(truncation_cap(10, 0.0).is_err());
    }
}
