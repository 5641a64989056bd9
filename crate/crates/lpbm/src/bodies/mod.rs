//! Convex bodies with the origin in their interior, and the evaluations every
//! other module consumes: support, radial, gauge, membership, polarity,
//! volume, graph decomposition and section lengths.

mod ellipsoid;
pub mod graph;
pub mod hull;
mod polytope;
mod sampled;

use std::sync::Arc;

pub use ellipsoid::Ellipsoid;
pub use graph::{Chord, ChordField, Frame, GraphBody, GraphOrigin, LensParams, QuarticGauge, SmoothGauge, Which};
pub use polytope::{Facet, Polytope};
pub use sampled::SupportSampled;

use crate::error::{check_dim, Error, Result};
use crate::quadrature::{Interpolation, SphereRule};
use crate::{V2, V3};

/// Gauge slack used by [`Body::contains`].
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// A direction on `S^{n-1}`, stored with `z = 0` when n = 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector {
    dim: usize,
    v: V3,
}

impl UnitVector {
    pub fn new(dim: usize, v: V3) -> Result<Self> {
        check_dim(dim)?;
        if dim == 2 && v[2] != 0.0 {
            return Err(Error::Argument("planar direction with nonzero third coordinate".into()));
        }
        let r = v.norm();
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Argument("zero or non-finite direction".into()));
        }
        // already-unit input is kept bit-for-bit so files round trip
        let v = if (r - 1.0).abs() <= 4.0 * f64::EPSILON { v } else { v / r };
        Ok(Self { dim, v })
    }

    pub fn from_slice(dim: usize, c: &[f64]) -> Result<Self> {
        if c.len() != dim {
            return Err(Error::Argument(format!("expected {dim} coordinates, got {}", c.len())));
        }
        let mut v = V3::zeros();
        v.as_mut_slice()[..dim].copy_from_slice(c);
        Self::new(dim, v)
    }

    pub fn axis(dim: usize, i: usize) -> Result<Self> {
        if i >= dim {
            return Err(Error::Argument(format!("axis {i} out of range")));
        }
        let mut v = V3::zeros();
        v[i] = 1.0;
        Self::new(dim, v)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn v(&self) -> &V3 {
        &self.v
    }

    pub fn coords(&self) -> &[f64] {
        &self.v.as_slice()[..self.dim]
    }
}

/// Tagged union of body representations.
#[derive(Debug, Clone)]
pub enum Body {
    Ellipsoid(Ellipsoid),
    Polytope(Polytope),
    Graph(GraphBody),
    Sampled(SupportSampled),
}

pub(crate) fn nonzero(u: &V3) -> Result<f64> {
    let r = u.norm();
    if r > 0.0 && r.is_finite() {
        Ok(r)
    } else {
        Err(Error::Argument("zero or non-finite direction".into()))
    }
}

impl Body {
    pub fn ball(dim: usize, r: f64) -> Result<Body> {
        Ok(Body::Ellipsoid(Ellipsoid::ball(dim, r)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            Body::Ellipsoid(e) => e.dim,
            Body::Polytope(p) => p.dim,
            Body::Graph(g) => g.dim(),
            Body::Sampled(s) => s.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Body::Ellipsoid(_) => "ellipsoid",
            Body::Polytope(_) => "polytope",
            Body::Graph(_) => "graph",
            Body::Sampled(_) => "sampled",
        }
    }

    /// The dilate `sK`, `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Body> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Argument(format!("dilation factor {s} must be positive")));
        }
        Ok(match self {
            Body::Ellipsoid(e) => Body::Ellipsoid(Ellipsoid::new(e.dim, e.matrix() * s)?),
            Body::Polytope(p) => {
                Body::Polytope(Polytope::from_vertices(p.dim, &p.vertices.iter().map(|v| v * s).collect::<Vec<_>>())?)
            }
            Body::Sampled(b) => Body::Sampled(b.scaled(s)?),
            Body::Graph(_) => return Err(Error::Argument("graph bodies are not rescaled".into())),
        })
    }

    /// `h_K(u) = sup{u·x : x ∈ K}`.
    pub fn support(&self, u: &V3) -> Result<f64> {
        nonzero(u)?;
        match self {
            Body::Ellipsoid(e) => Ok(e.support(u)),
            Body::Polytope(p) => Ok(p.support(u)),
            Body::Graph(g) => g.support(u),
            Body::Sampled(s) => Ok(s.support(u)),
        }
    }

    /// `|x|_K = inf{λ ≥ 0 : x ∈ λK}`.
    pub fn gauge(&self, x: &V3) -> Result<f64> {
        if x.norm() == 0.0 {
            return Ok(0.0);
        }
        match self {
            Body::Ellipsoid(e) => Ok(e.gauge(x)),
            Body::Polytope(p) => Ok(p.gauge(x)),
            Body::Graph(g) => Ok(1.0 / g.radial(x)?),
            Body::Sampled(s) => Ok(s.gauge(x)?),
        }
    }

    /// `ρ_K(u) = sup{λ ≥ 0 : λu ∈ K}`.
    pub fn radial(&self, u: &V3) -> Result<f64> {
        nonzero(u)?;
        match self {
            Body::Graph(g) => g.radial(u),
            _ => {
                let gauge = self.gauge(u)?;
                if !(gauge > 0.0) || !gauge.is_finite() {
                    return Err(Error::Domain("origin not interior".into()));
                }
                Ok(1.0 / gauge)
            }
        }
    }

    /// Gauge test with relative slack [`MEMBERSHIP_TOL`].
    pub fn contains(&self, x: &V3) -> Result<bool> {
        Ok(self.gauge(x)? <= 1.0 + MEMBERSHIP_TOL)
    }

    /// Polar volume formula `(1/n)∫ρ^n` under the rule.
    pub fn volume(&self, rule: &SphereRule) -> Result<f64> {
        self.check_rule(rule)?;
        let n = self.dim() as i32;
        let rho = self.radial_at_nodes(rule)?;
        Ok(rule.integrate_values(&rho.iter().map(|r| r.powi(n)).collect::<Vec<_>>())? / n as f64)
    }

    /// Closed-form volume where the representation has one.
    pub fn exact_volume(&self) -> Option<f64> {
        match self {
            Body::Ellipsoid(e) => Some(e.volume()),
            Body::Polytope(p) => Some(p.volume()),
            Body::Sampled(s) => s.wulff().ok().map(|p| p.volume()),
            Body::Graph(_) => None,
        }
    }

    pub fn radial_at_nodes(&self, rule: &SphereRule) -> Result<Vec<f64>> {
        self.check_rule(rule)?;
        rule.nodes.iter().map(|u| self.radial(u)).collect()
    }

    pub fn support_at_nodes(&self, rule: &SphereRule) -> Result<Vec<f64>> {
        self.check_rule(rule)?;
        rule.nodes.iter().map(|u| self.support(u)).collect()
    }

    fn check_rule(&self, rule: &SphereRule) -> Result<()> {
        if rule.dim != self.dim() {
            return Err(Error::Argument(format!(
                "rule dimension {} does not match body dimension {}",
                rule.dim,
                self.dim()
            )));
        }
        Ok(())
    }

    /// Polar body. Ellipsoids and polytopes are dualized exactly; other
    /// representations become support samples of the polar on `rule`.
    pub fn polar(&self, rule: &SphereRule) -> Result<Body> {
        match self {
            Body::Ellipsoid(e) => Ok(Body::Ellipsoid(e.polar()?)),
            Body::Polytope(p) => Ok(Body::Polytope(p.polar()?)),
            _ => {
                let rho = self.radial_at_nodes(rule)?;
                let values: Vec<f64> = rho.iter().map(|r| 1.0 / r).collect();
                Ok(Body::Sampled(SupportSampled::new(
                    Arc::new(rule.clone()),
                    values,
                    Interpolation::FirstOrder,
                    self.is_origin_symmetric(rule)?,
                )?))
            }
        }
    }

    /// Support values at antipodal nodes agree within 1e-9.
    pub fn is_origin_symmetric(&self, rule: &SphereRule) -> Result<bool> {
        match self {
            Body::Ellipsoid(_) => Ok(true),
            Body::Polytope(p) => Ok(p.is_origin_symmetric()),
            Body::Graph(g) => Ok(g.is_origin_symmetric()),
            Body::Sampled(s) => {
                let h = &s.values;
                Ok((0..rule.len().min(h.len())).all(|k| {
                    let a = s.rule().antipode(k);
                    (h[k] - h[a]).abs() <= 1e-9 * h[k].abs().max(1.0)
                }))
            }
        }
    }

    /// Upper bound on `max |x|` over the body.
    pub fn radius_bound(&self) -> f64 {
        match self {
            Body::Ellipsoid(e) => e.max_semi_axis(),
            Body::Polytope(p) => p.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max),
            Body::Graph(g) => g.radius_bound(),
            Body::Sampled(s) => s.values.iter().copied().fold(0.0, f64::max) * 1.05 + 1e-12,
        }
    }

    pub fn as_graph(&self) -> Option<&GraphBody> {
        match self {
            Body::Graph(g) => Some(g),
            _ => None,
        }
    }
}

/// Decomposes `K = {(x, λ) : −g(x) ≤ λ ≤ f(x), x ∈ K|ξ⊥}` against `ξ`.
/// Ellipsoids, polytopes, smooth gauge bodies and sampled bodies get exact
/// chord functions; graph bodies given against another axis fall back to
/// membership bisection with finite-difference gradients.
pub fn graph_decompose(body: &Body, xi: &UnitVector) -> Result<GraphBody> {
    if xi.dim() != body.dim() {
        return Err(Error::Argument("axis dimension does not match body".into()));
    }
    GraphBody::decompose(body, xi)
}

/// `⟨f⟩(x) = f(x) − ∇f(x)·x` (or the same for `g`).
pub fn bracket(gb: &GraphBody, which: Which, y: &V2) -> Result<f64> {
    gb.bracket(which, y)
}

/// Length `f(y) + g(y)` of the chord through `y` parallel to `ξ`; zero off the base.
pub fn section_length(body: &Body, xi: &UnitVector, y: &V2) -> Result<f64> {
    let gb = match body {
        Body::Graph(g) if (g.frame.xi - xi.v()).norm() < 1e-15 => g.clone(),
        _ => graph_decompose(body, xi)?,
    };
    Ok(gb.chord(y).map(|c| (c.f + c.g).max(0.0)).unwrap_or(0.0))
}
