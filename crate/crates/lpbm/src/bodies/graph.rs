//! Graph decompositions `K = {(y, λ) : −g(y) ≤ λ ≤ f(y), y ∈ K|ξ⊥}`.
//!
//! A [`GraphBody`] stores the chord functions `F, G` of a source body and a
//! midpoint factor `c`. The represented body has chords
//! `f = aF + (1−a)G`, `g = aG + (1−a)F` with `a = (1+c)/2`, so its chord
//! midpoints are `c·(F−G)/2` and its half-lengths `(F+G)/2`. Continuous
//! Steiner symmetrization multiplies `c` by `1−t`; reflection in `ξ⊥` negates it.

use std::fmt;
use std::sync::Arc;

use super::polytope::orthonormal_pair;
use super::{Body, Ellipsoid, Polytope, UnitVector};
use crate::error::{check_dim, Error, Result};
use crate::numerics::{golden_max, minimize_convex, root_bracketed, CubicSpline};
use crate::quadrature::{planar_rule, BaseDomain, PlanarRule};
use crate::{M3, V2, V3};

/// Orthonormal frame `(e₀, e₁, ξ)`; `e₁ = 0` for n = 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub dim: usize,
    pub xi: V3,
    pub basis: [V3; 2],
}

impl Frame {
    /// Gram–Schmidt on the coordinate axes ordered by `|ξᵢ|` ascending,
    /// ties broken by index.
    pub fn new(xi: &UnitVector) -> Self {
        let n = xi.dim();
        let x = *xi.v();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&i, &j| x[i].abs().partial_cmp(&x[j].abs()).unwrap().then(i.cmp(&j)));
        let mut accepted = vec![x];
        for &i in &idx {
            if accepted.len() == n {
                break;
            }
            let mut v = V3::zeros();
            v[i] = 1.0;
            for b in &accepted {
                v -= b * b.dot(&v);
            }
            let r = v.norm();
            if r > 1e-8 {
                accepted.push(v / r);
            }
        }
        let mut basis = [V3::zeros(); 2];
        for (k, b) in accepted.iter().skip(1).enumerate() {
            basis[k] = *b;
        }
        Frame { dim: n, xi: x, basis }
    }

    pub fn to_world(&self, y: &V2, lambda: f64) -> V3 {
        self.basis[0] * y[0] + self.basis[1] * y[1] + self.xi * lambda
    }

    pub fn to_frame(&self, x: &V3) -> (V2, f64) {
        (V2::new(self.basis[0].dot(x), self.basis[1].dot(x)), self.xi.dot(x))
    }

    /// Columns `e₀, e₁, ξ`.
    pub fn matrix(&self) -> M3 {
        M3::from_columns(&[self.basis[0], self.basis[1], self.xi])
    }
}

/// Chord data at a base point: values and gradients of the upper function
/// `f` and the (negated) lower function `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chord {
    pub f: f64,
    pub g: f64,
    pub df: V2,
    pub dg: V2,
    /// `⟨f⟩ = f − ∇f·y`
    pub bf: f64,
    /// `⟨g⟩ = g − ∇g·y`
    pub bg: f64,
}

impl Chord {
    pub fn new(y: &V2, f: f64, g: f64, df: V2, dg: V2) -> Self {
        Chord { f, g, df, dg, bf: f - df.dot(y), bg: g - dg.dot(y) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    F,
    G,
}

/// Chord-midpoint and half-length view of a graph body.
#[derive(Debug, Clone, Copy)]
pub struct ChordField<'a> {
    body: &'a GraphBody,
}

impl ChordField<'_> {
    /// `(c_y, l_y) = ((f−g)/2, (f+g)/2)`, or `None` off the base.
    pub fn at(&self, y: &V2) -> Option<(f64, f64)> {
        self.body.chord(y).map(|c| (0.5 * (c.f - c.g), 0.5 * (c.f + c.g)))
    }
}

/// Evaluates the chord functions of a fixed body against a fixed frame.
pub trait ChordSource: Send + Sync {
    /// `None` when `y` is not interior to the base.
    fn chord(&self, y: &V2) -> Option<Chord>;
    fn base(&self) -> &BaseDomain;
    /// Strict upper bound on `|x|` over the body.
    fn bound(&self) -> f64;
    /// Chord values without gradients.
    fn values(&self, y: &V2) -> Option<(f64, f64)> {
        self.chord(y).map(|c| (c.f, c.g))
    }
    /// Gauge of the unsymmetrized body, where a closed form exists.
    fn direct_gauge(&self, _x: &V3) -> Option<f64> {
        None
    }
    /// Convex cells covering the base on which `f` and `g` are affine.
    fn affine_cells(&self) -> Option<&[Vec<V2>]> {
        None
    }
}

/// A smooth, convex, positively 1-homogeneous gauge.
pub trait SmoothGauge: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn gauge(&self, x: &V3) -> f64;
    fn gradient(&self, x: &V3) -> V3;
    /// Strict upper bound on `|x|` over `{gauge ≤ 1}`.
    fn radius_bound(&self) -> f64;
    fn is_even(&self) -> bool {
        true
    }
    /// Gauge at `x` and its derivative along `d`.
    fn gauge_slope(&self, x: &V3, d: &V3) -> (f64, f64) {
        (self.gauge(x), self.gradient(x).dot(d))
    }
}

/// `Q(x)^{1/4}` with `Q(x) = (xᵀPx)² + Σ wₖ(aₖ·x)⁴`: a smooth, strictly
/// convex, origin-symmetric gauge that is not Euclidean unless every `wₖ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuarticGauge {
    pub dim: usize,
    pub p: M3,
    pub terms: Vec<(V3, f64)>,
    lambda_min: f64,
}

impl QuarticGauge {
    pub fn new(dim: usize, p: M3, terms: Vec<(V3, f64)>) -> Result<Self> {
        check_dim(dim)?;
        let mut p = p;
        if dim == 2 {
            for i in 0..3 {
                p[(2, i)] = 0.0;
                p[(i, 2)] = 0.0;
            }
        }
        if (p - p.transpose()).norm() > 1e-12 * p.norm() {
            return Err(Error::Validation("quartic form matrix is not symmetric".into()));
        }
        let lambda_min = if dim == 2 {
            nalgebra::Matrix2::new(p[(0, 0)], p[(0, 1)], p[(1, 0)], p[(1, 1)]).symmetric_eigenvalues().min()
        } else {
            p.symmetric_eigenvalues().min()
        };
        if !(lambda_min > 1e-12) {
            return Err(Error::Validation("quartic form matrix is not positive definite".into()));
        }
        for (a, w) in &terms {
            if !(*w >= 0.0) || (dim == 2 && a[2] != 0.0) {
                return Err(Error::Validation("quartic term weights must be nonnegative and in-plane".into()));
            }
        }
        Ok(Self { dim, p, terms, lambda_min })
    }

    pub fn q(&self, x: &V3) -> f64 {
        let s = x.dot(&(self.p * x));
        s * s + self.terms.iter().map(|(a, w)| w * a.dot(x).powi(4)).sum::<f64>()
    }
}

impl SmoothGauge for QuarticGauge {
    fn dim(&self) -> usize {
        self.dim
    }

    fn gauge(&self, x: &V3) -> f64 {
        self.q(x).sqrt().sqrt()
    }

    fn gradient(&self, x: &V3) -> V3 {
        let px = self.p * x;
        let s = x.dot(&px);
        let mut dq = px * (4.0 * s);
        for (a, w) in &self.terms {
            dq += a * (4.0 * w * a.dot(x).powi(3));
        }
        let q = self.q(x);
        dq * (0.25 * q.powf(-0.75))
    }

    fn radius_bound(&self) -> f64 {
        (1.0 + 1e-6) / self.lambda_min.sqrt()
    }
}

/// Unit ball intersected with the ball of radius `big_radius` centred at
/// `offset·e₁`, translated along `e₁` so its centroid is the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensParams {
    pub dim: usize,
    pub big_radius: f64,
    pub offset: f64,
    shift: f64,
    kink: f64,
}

impl LensParams {
    pub fn new(dim: usize, big_radius: f64, offset: f64) -> Result<Self> {
        check_dim(dim)?;
        let (r, d) = (big_radius, offset);
        if !(d > 0.0) || !(r - d < 1.0) || !((r * r - 1.0).max(0.0).sqrt() > d) {
            return Err(Error::Argument(format!(
                "lens needs 0 < offset, big_radius − offset < 1 and √(big_radius²−1) > offset (got {r}, {d})"
            )));
        }
        let m = (r * r + d * d - 1.0) / (2.0 * d);
        let kink = (r * r - m * m).sqrt();
        let mut lp = LensParams { dim, big_radius: r, offset: d, shift: 0.0, kink };
        let rule = planar_rule(&BaseDomain::Interval { a: 0.0, b: 1.0, breaks: vec![kink] }, 2048, 2.0)?;
        let jac = |x: f64| if dim == 2 { 2.0 } else { 2.0 * std::f64::consts::PI * x };
        let mass = rule.integrate(|y| {
            let (f, g) = lp.raw(y[0]);
            jac(y[0]) * (f + g)
        })?;
        let moment = rule.integrate(|y| {
            let (f, g) = lp.raw(y[0]);
            jac(y[0]) * 0.5 * (f * f - g * g)
        })?;
        lp.shift = moment / mass;
        Ok(lp)
    }

    pub fn standard(dim: usize) -> Self {
        Self::new(dim, 2.0, 1.5).expect("standard lens parameters are valid")
    }

    /// Centroid offset along `e₁` removed from the raw lens.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    fn raw(&self, r: f64) -> (f64, f64) {
        let top = (1.0 - r * r).max(0.0).sqrt();
        let low = top.min((self.big_radius * self.big_radius - r * r).sqrt() - self.offset);
        (top, low)
    }
}

/// What a graph body was built from.
#[derive(Debug, Clone)]
pub enum GraphOrigin {
    Body(Box<Body>),
    Quartic(QuarticGauge),
    Lens(LensParams),
    /// Uniformly spaced samples of `F, G` on `[a, b]` (n = 2).
    Table { a: f64, b: f64, f: Vec<f64>, g: Vec<f64> },
    /// A gauge without a file representation.
    Gauge(Arc<dyn SmoothGauge>),
}

/// Graph decomposition of a body along an axis, with a Steiner midpoint factor.
#[derive(Clone)]
pub struct GraphBody {
    pub frame: Frame,
    source: Arc<dyn ChordSource>,
    origin: Arc<GraphOrigin>,
    c: f64,
    symmetric: bool,
}

impl fmt::Debug for GraphBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GraphBody")
            .field("frame", &self.frame)
            .field("origin", &self.origin)
            .field("c", &self.c)
            .field("symmetric", &self.symmetric)
            .finish()
    }
}

impl GraphBody {
    fn build(frame: Frame, source: Arc<dyn ChordSource>, origin: GraphOrigin, symmetric: bool) -> Self {
        GraphBody { frame, source, origin: Arc::new(origin), c: 1.0, symmetric }
    }

    /// Decomposes `body` against `ξ`. Ellipsoids, polytopes and smooth gauges
    /// get closed-form chords; everything else falls back to bisection on
    /// membership with finite-difference gradients.
    pub fn decompose(body: &Body, xi: &UnitVector) -> Result<Self> {
        if xi.dim() != body.dim() {
            return Err(Error::Argument("axis dimension does not match body".into()));
        }
        let frame = Frame::new(xi);
        match body {
            Body::Ellipsoid(e) => Ok(Self::build(
                frame,
                Arc::new(EllipsoidChords::new(e, frame)),
                GraphOrigin::Body(Box::new(body.clone())),
                true,
            )),
            Body::Polytope(p) => Ok(Self::build(
                frame,
                Arc::new(PolytopeChords::new(p, frame)?),
                GraphOrigin::Body(Box::new(body.clone())),
                p.is_origin_symmetric(),
            )),
            Body::Sampled(s) => Ok(Self::build(
                frame,
                Arc::new(NumericChords::new(body.clone(), frame)?),
                GraphOrigin::Body(Box::new(body.clone())),
                s.symmetric,
            )),
            Body::Graph(g) => {
                if (g.frame.xi - xi.v()).norm() < 1e-15 {
                    return Ok(g.clone());
                }
                if g.c == 1.0 {
                    match g.origin.as_ref() {
                        GraphOrigin::Body(b) => return Self::decompose(b, xi),
                        GraphOrigin::Quartic(q) => return Self::from_quartic(q.clone(), xi),
                        GraphOrigin::Gauge(s) => return Self::from_gauge(s.clone(), xi),
                        _ => {}
                    }
                }
                Ok(Self::build(
                    frame,
                    Arc::new(NumericChords::new(body.clone(), frame)?),
                    GraphOrigin::Body(Box::new(body.clone())),
                    g.is_origin_symmetric(),
                ))
            }
        }
    }

    pub fn from_quartic(q: QuarticGauge, xi: &UnitVector) -> Result<Self> {
        let frame = Frame::new(xi);
        let src = GaugeChords::new(Arc::new(q.clone()), frame)?;
        Ok(Self::build(frame, Arc::new(src), GraphOrigin::Quartic(q), true))
    }

    pub fn from_gauge(gauge: Arc<dyn SmoothGauge>, xi: &UnitVector) -> Result<Self> {
        let frame = Frame::new(xi);
        let even = gauge.is_even();
        let src = GaugeChords::new(gauge.clone(), frame)?;
        Ok(Self::build(frame, Arc::new(src), GraphOrigin::Gauge(gauge), even))
    }

    /// The lens with axis `e₁`.
    pub fn lens(params: LensParams) -> Result<Self> {
        let xi = UnitVector::axis(params.dim, 0)?;
        let frame = Frame::new(&xi);
        let src = LensChords::new(params);
        Ok(Self::build(frame, Arc::new(src), GraphOrigin::Lens(params), false))
    }

    /// Planar body from tabulated `F, G` on a uniform grid over `[a, b]`.
    pub fn from_tables(xi: &UnitVector, a: f64, b: f64, f: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if xi.dim() != 2 {
            return Err(Error::Argument("tabulated graph bodies are planar only".into()));
        }
        if f.len() != g.len() || f.len() < 4 || !(b > a) || !(a < 0.0 && b > 0.0) {
            return Err(Error::Validation("graph tables need ≥ 4 matching samples on an interval around 0".into()));
        }
        let m = f.len();
        for i in 1..m - 1 {
            if !(f[i] + g[i] > 0.0) {
                return Err(Error::Validation(format!("f + g not positive at table sample {i}")));
            }
        }
        let symmetric = (a + b).abs() < 1e-12 * (b - a) && (0..m).all(|i| (f[i] - g[m - 1 - i]).abs() < 1e-12);
        let frame = Frame::new(xi);
        let src = TableChords::new(a, b, f.clone(), g.clone());
        Ok(Self::build(frame, Arc::new(src), GraphOrigin::Table { a, b, f, g }, symmetric))
    }

    pub fn dim(&self) -> usize {
        self.frame.dim
    }

    pub fn origin(&self) -> &GraphOrigin {
        &self.origin
    }

    /// Midpoint factor: chords of this body have midpoints `c·(F−G)/2`.
    pub fn steiner_c(&self) -> f64 {
        self.c
    }

    pub fn with_steiner_c(&self, c: f64) -> Self {
        GraphBody { c, ..self.clone() }
    }

    pub fn base(&self) -> &BaseDomain {
        self.source.base()
    }

    pub fn planar_rule(&self, resolution: usize, grading: f64) -> Result<PlanarRule> {
        planar_rule(self.source.base(), resolution, grading)
    }

    pub fn chord_field(&self) -> ChordField<'_> {
        ChordField { body: self }
    }

    /// Chord of the source body, before Steiner mixing.
    pub fn source_chord(&self, y: &V2) -> Option<Chord> {
        self.source.chord(y)
    }

    pub fn chord(&self, y: &V2) -> Option<Chord> {
        let ch = self.source.chord(y)?;
        if self.c == 1.0 {
            return Some(ch);
        }
        let a = 0.5 * (1.0 + self.c);
        let b = 1.0 - a;
        Some(Chord {
            f: a * ch.f + b * ch.g,
            g: a * ch.g + b * ch.f,
            df: ch.df * a + ch.dg * b,
            dg: ch.dg * a + ch.df * b,
            bf: a * ch.bf + b * ch.bg,
            bg: a * ch.bg + b * ch.bf,
        })
    }

    /// `(f(y), g(y))` without gradients.
    pub fn values(&self, y: &V2) -> Option<(f64, f64)> {
        let (f, g) = self.source.values(y)?;
        if self.c == 1.0 {
            return Some((f, g));
        }
        let a = 0.5 * (1.0 + self.c);
        let b = 1.0 - a;
        Some((a * f + b * g, a * g + b * f))
    }

    /// `⟨f⟩(y) = f(y) − ∇f(y)·y` or the same for `g`.
    pub fn bracket(&self, which: Which, y: &V2) -> Result<f64> {
        let ch = self.chord(y).ok_or_else(|| {
            Error::Domain(format!("base point ({}, {}) not interior to the base", y[0], y[1]))
        })?;
        Ok(match which {
            Which::F => ch.bf,
            Which::G => ch.bg,
        })
    }

    /// `S^t` for `t ∈ [0, 2]`.
    pub fn steiner(&self, t: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&t) {
            return Err(Error::Argument(format!("Steiner parameter {t} outside [0, 2]")));
        }
        Ok(self.with_steiner_c(self.c * (1.0 - t)))
    }

    /// Reflection in `ξ⊥`.
    pub fn reflect(&self) -> Self {
        self.with_steiner_c(-self.c)
    }

    pub fn is_origin_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn radius_bound(&self) -> f64 {
        if self.c.abs() == 1.0 {
            self.source.bound()
        } else {
            self.source.bound() * std::f64::consts::SQRT_2
        }
    }

    /// `∫(f + g)` over the base.
    pub fn section_volume(&self, resolution: usize, grading: f64) -> Result<f64> {
        if let Some(cells) = self.source.affine_cells() {
            let mut acc = crate::numerics::CompensatedSum::new();
            for cell in cells {
                let (area, centroid) = polygon_moments(cell);
                if let Some((f, g)) = self.values(&centroid) {
                    acc.add(area * (f + g));
                }
            }
            return Ok(acc.value());
        }
        let rule = self.planar_rule(resolution, grading)?;
        rule.integrate(|y| self.chord(y).map(|c| (c.f + c.g).max(0.0)).unwrap_or(0.0))
    }

    pub fn radial(&self, u: &V3) -> Result<f64> {
        let r0 = super::nonzero(u)?;
        let u = u / r0;
        if self.c.abs() == 1.0 {
            let x = if self.c == 1.0 {
                u
            } else {
                let (y, l) = self.frame.to_frame(&u);
                self.frame.to_world(&y, -l)
            };
            if let Some(gauge) = self.source.direct_gauge(&x) {
                if !(gauge > 0.0) {
                    return Err(Error::Domain("origin not interior".into()));
                }
                return Ok(1.0 / gauge / r0);
            }
        }
        let (w, mu) = self.frame.to_frame(&u);
        let wn = w.norm();
        let (f0, g0) = self
            .values(&V2::zeros())
            .ok_or_else(|| Error::Domain("origin not interior to the base".into()))?;
        if !(f0 > 0.0 && g0 > 0.0) {
            return Err(Error::Domain("origin not interior".into()));
        }
        if wn < 1e-14 {
            let r = if mu > 0.0 { f0 / mu } else { -g0 / mu };
            return Ok(r / r0);
        }
        let r_max = self.base().extent(&(w / wn)) / wn;
        let m = |r: f64| self.values(&(w * r)).map(|(f, g)| (f - r * mu).min(g + r * mu));
        let mut near = r_max * (1.0 - 1e-13);
        let mut m_near = m(near);
        if m_near.is_none() {
            // chords can be undefined on a thin shell inside the nominal base
            let (mut lo, mut hi) = (0.0, near);
            while hi - lo > 1e-15 * r_max {
                let mid = 0.5 * (lo + hi);
                if m(mid).is_some() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            near = lo;
            m_near = m(lo);
        }
        match m_near {
            Some(v) if v >= 0.0 => return Ok(near / r0),
            None => return Err(Error::Domain("chord values undefined along ray".into())),
            _ => {}
        }
        let mf = |r: f64| m(r).unwrap_or(-f64::MIN_POSITIVE);
        Ok(root_bracketed(mf, 0.0, near, 1e-15 * r_max) / r0)
    }

    /// Support as the maximum of `w·y + μ f(y)` (or `w·y − μ g(y)` when
    /// `μ < 0`) over the base, a concave program. Points outside the base
    /// are pulled back radially and penalized so line searches stay unimodal.
    pub fn support(&self, u: &V3) -> Result<f64> {
        let r0 = super::nonzero(u)?;
        let u = u / r0;
        if self.c.abs() == 1.0 && self.source.direct_gauge(&u).is_some() {
            return Ok(self.support_from_radial(&u)? * r0);
        }
        let (w, mu) = self.frame.to_frame(&u);
        let base = self.base();
        let bound = self.radius_bound();
        let penalty = 1e3 * bound;
        let inner = 1.0 - 1e-12;
        let obj = |y: V2| -> f64 {
            let r = y.norm();
            let (yy, excess) = if r == 0.0 {
                (y, 0.0)
            } else {
                let e = base.extent(&(y / r)) * inner;
                if r < e {
                    (y, 0.0)
                } else {
                    (y * (e / r), r / e - 1.0)
                }
            };
            match self.values(&yy) {
                Some((f, g)) => w.dot(&yy) + if mu >= 0.0 { mu * f } else { -mu * g } - penalty * excess,
                None => -penalty * (1.0 + excess),
            }
        };
        let tol = 1e-11 * bound;
        let h = if self.dim() == 2 {
            golden_max(|a| obj(V2::new(a, 0.0)), -bound, bound, tol).1
        } else {
            let line = |a: f64| golden_max(|b| obj(V2::new(a, b)), -bound, bound, tol).1;
            golden_max(line, -bound, bound, tol).1
        };
        if !(h > 0.0) {
            return Err(Error::Domain("origin not interior".into()));
        }
        Ok(h * r0)
    }

    /// Maximizes the radial function over the tangent plane `{z : z·u = 1}`,
    /// where it is quasi-concave. Used when the radial function is closed form.
    fn support_from_radial(&self, u: &V3) -> Result<f64> {
        let rho_u = self.radial(u)?;
        let span = 1.01 * self.radius_bound() / rho_u;
        let tol = 1e-11 * span;
        Ok(if self.dim() == 2 {
            let e = V3::new(-u[1], u[0], 0.0);
            golden_max(|a| self.radial(&(u + e * a)).unwrap_or(0.0), -span, span, tol).1
        } else {
            let (e1, e2) = orthonormal_pair(u);
            let inner =
                |a: f64| golden_max(|b| self.radial(&(u + e1 * a + e2 * b)).unwrap_or(0.0), -span, span, tol).1;
            golden_max(inner, -span, span, tol).1
        })
    }
}

/// Extent of `{x : gauge(x) ≤ 1}|ξ⊥` along the base direction `w`:
/// `1 / min_μ gauge(w, μ)`.
fn projected_extent<G: Fn(&V3) -> f64>(gauge: G, frame: &Frame, w: &V2, scale: f64) -> f64 {
    let (_, v) = minimize_convex(|mu| gauge(&frame.to_world(w, mu)), 0.0, 0.25 * scale, 1e-12 * scale);
    1.0 / v
}

struct EllipsoidChords {
    e: Ellipsoid,
    q: V2,
    qll: f64,
    s: nalgebra::Matrix2<f64>,
    base: BaseDomain,
    bound: f64,
}

impl EllipsoidChords {
    fn new(e: &Ellipsoid, frame: Frame) -> Self {
        let ainv = e.inverse();
        let qw = ainv.transpose() * ainv;
        let fm = frame.matrix();
        let qf = fm.transpose() * qw * fm;
        let qll = qf[(2, 2)];
        let q = V2::new(qf[(0, 2)], qf[(1, 2)]);
        let qyy = nalgebra::Matrix2::new(qf[(0, 0)], qf[(0, 1)], qf[(1, 0)], qf[(1, 1)]);
        let s = qyy - q * q.transpose() / qll;
        let base = if frame.dim == 2 {
            let r = 1.0 / s[(0, 0)].sqrt();
            BaseDomain::Interval { a: -r, b: r, breaks: vec![] }
        } else {
            BaseDomain::Star {
                radius: Arc::new(move |phi: f64| {
                    let w = V2::new(phi.cos(), phi.sin());
                    1.0 / w.dot(&(s * w)).sqrt()
                }),
            }
        };
        EllipsoidChords { e: e.clone(), q, qll, s, base, bound: e.max_semi_axis() * (1.0 + 1e-9) }
    }
}

impl ChordSource for EllipsoidChords {
    fn chord(&self, y: &V2) -> Option<Chord> {
        let rem = 1.0 - y.dot(&(self.s * y));
        if !(rem > 0.0) {
            return None;
        }
        let d = (self.qll * rem).sqrt();
        let qy = self.q.dot(y);
        let dd = -(self.s * y) * (self.qll / d);
        Some(Chord {
            f: (d - qy) / self.qll,
            g: (d + qy) / self.qll,
            df: (dd - self.q) / self.qll,
            dg: (dd + self.q) / self.qll,
            bf: 1.0 / d,
            bg: 1.0 / d,
        })
    }

    fn base(&self) -> &BaseDomain {
        &self.base
    }

    fn bound(&self) -> f64 {
        self.bound
    }

    fn direct_gauge(&self, x: &V3) -> Option<f64> {
        Some(self.e.gauge(x))
    }
}

struct PolytopeChords {
    poly: Polytope,
    upper: Vec<(V2, f64, f64)>,
    lower: Vec<(V2, f64, f64)>,
    base: BaseDomain,
    bound: f64,
    cells: Vec<Vec<V2>>,
}

/// Pairwise intersections of the projected upper and lower facets.
fn overlay_cells(p: &Polytope, frame: &Frame, proj: &[V2]) -> Vec<Vec<V2>> {
    let side = |upper: bool| -> Vec<Vec<V2>> {
        p.facets
            .iter()
            .filter(|f| {
                let nl = frame.xi.dot(&f.normal);
                if upper {
                    nl > 1e-14
                } else {
                    nl < -1e-14
                }
            })
            .map(|f| {
                let pts: Vec<V2> = f.vertices.iter().map(|&i| proj[i]).collect();
                super::hull::hull2(&pts).iter().map(|&i| pts[i]).collect::<Vec<V2>>()
            })
            .filter(|poly| poly.len() >= 3)
            .collect()
    };
    let (up, low) = (side(true), side(false));
    let mut cells = Vec::new();
    for a in &up {
        for b in &low {
            let c = clip_convex(a, b);
            if c.len() >= 3 && polygon_moments(&c).0 > 0.0 {
                cells.push(c);
            }
        }
    }
    cells
}

/// Sutherland–Hodgman clip of `subject` by the counter-clockwise convex `clip`.
fn clip_convex(subject: &[V2], clip: &[V2]) -> Vec<V2> {
    let mut out = subject.to_vec();
    let n = clip.len();
    for i in 0..n {
        if out.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % n]);
        let side = |q: &V2| (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0]);
        let input = std::mem::take(&mut out);
        for k in 0..input.len() {
            let (cur, prev) = (input[k], input[(k + input.len() - 1) % input.len()]);
            let (sc, sp) = (side(&cur), side(&prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    out.push(prev + (cur - prev) * (sp / (sp - sc)));
                }
                out.push(cur);
            } else if sp >= 0.0 {
                out.push(prev + (cur - prev) * (sp / (sp - sc)));
            }
        }
    }
    out
}

/// Signed area and centroid of a simple polygon.
fn polygon_moments(v: &[V2]) -> (f64, V2) {
    let n = v.len();
    let mut a = 0.0;
    let mut c = V2::zeros();
    for i in 0..n {
        let (p, q) = (v[i], v[(i + 1) % n]);
        let w = p[0] * q[1] - p[1] * q[0];
        a += w;
        c += (p + q) * w;
    }
    if a == 0.0 {
        return (0.0, v.iter().sum::<V2>() / n as f64);
    }
    (0.5 * a, c / (3.0 * a))
}

impl PolytopeChords {
    fn new(p: &Polytope, frame: Frame) -> Result<Self> {
        let mut upper = Vec::new();
        let mut lower = Vec::new();
        for f in &p.facets {
            let (ny, nl) = frame.to_frame(&f.normal);
            if nl > 1e-14 {
                upper.push((ny, nl, f.offset));
            } else if nl < -1e-14 {
                lower.push((ny, -nl, f.offset));
            }
        }
        let proj: Vec<V2> = p.vertices.iter().map(|v| frame.to_frame(v).0).collect();
        let base = if frame.dim == 2 {
            let xs: Vec<f64> = proj.iter().map(|y| y[0]).collect();
            let a = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let b = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            BaseDomain::Interval { a, b, breaks: xs }
        } else {
            let h = super::hull::hull2(&proj);
            if h.len() < 3 {
                return Err(Error::Validation("degenerate polytope projection".into()));
            }
            BaseDomain::Polygon { vertices: h.iter().map(|&i| proj[i]).collect() }
        };
        let bound = p.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max) * (1.0 + 1e-9);
        let cells = if frame.dim == 3 { overlay_cells(p, &frame, &proj) } else { Vec::new() };
        Ok(PolytopeChords { poly: p.clone(), upper, lower, base, bound, cells })
    }

    fn side(facets: &[(V2, f64, f64)], y: &V2) -> Option<(f64, V2)> {
        let mut best: Option<(f64, V2)> = None;
        for (ny, nl, h) in facets {
            let v = (h - ny.dot(y)) / nl;
            if best.map_or(true, |b| v < b.0) {
                best = Some((v, -ny / *nl));
            }
        }
        best
    }
}

impl ChordSource for PolytopeChords {
    fn chord(&self, y: &V2) -> Option<Chord> {
        if !self.base.contains(y) {
            return None;
        }
        let (f, df) = Self::side(&self.upper, y)?;
        let (g, dg) = Self::side(&self.lower, y)?;
        if !(f + g > 0.0) {
            return None;
        }
        Some(Chord::new(y, f, g, df, dg))
    }

    fn base(&self) -> &BaseDomain {
        &self.base
    }

    fn bound(&self) -> f64 {
        self.bound
    }

    fn direct_gauge(&self, x: &V3) -> Option<f64> {
        Some(self.poly.gauge(x))
    }

    fn affine_cells(&self) -> Option<&[Vec<V2>]> {
        (!self.cells.is_empty()).then_some(self.cells.as_slice())
    }
}

/// Chords of `{gauge ≤ 1}` by Newton's method from above on the convex
/// function `λ ↦ gauge(y, λ) − 1`, with gradients by implicit differentiation.
struct GaugeChords {
    gauge: Arc<dyn SmoothGauge>,
    frame: Frame,
    base: BaseDomain,
    bound: f64,
}

impl GaugeChords {
    fn new(gauge: Arc<dyn SmoothGauge>, frame: Frame) -> Result<Self> {
        if gauge.dim() != frame.dim {
            return Err(Error::Argument("gauge dimension does not match axis".into()));
        }
        let bound = gauge.radius_bound();
        let base = if frame.dim == 2 {
            let g = |x: &V3| gauge.gauge(x);
            let b = projected_extent(g, &frame, &V2::new(1.0, 0.0), bound);
            let a = -projected_extent(g, &frame, &V2::new(-1.0, 0.0), bound);
            BaseDomain::Interval { a, b, breaks: vec![] }
        } else {
            let gg = gauge.clone();
            BaseDomain::Star {
                radius: Arc::new(move |phi: f64| {
                    projected_extent(|x| gg.gauge(x), &frame, &V2::new(phi.cos(), phi.sin()), bound)
                }),
            }
        };
        Ok(GaugeChords { gauge, frame, base, bound })
    }

    /// Largest `λ` with `gauge(y, sign·λ) = 1`.
    fn top(&self, y: &V2, sign: f64) -> Option<f64> {
        let mut lam = self.bound;
        let dir = self.frame.xi * sign;
        let mut best = (f64::INFINITY, lam);
        for _ in 0..400 {
            let x = self.frame.to_world(y, sign * lam);
            let (g, slope) = self.gauge.gauge_slope(&x, &dir);
            let phi = g - 1.0;
            if phi.abs() >= best.0 {
                // rounding cycle
                return (best.0 <= 1e-12).then_some(best.1);
            }
            best = (phi.abs(), lam);
            if phi.abs() <= 1e-15 {
                return Some(lam);
            }
            if !(slope > 0.0) {
                return None;
            }
            let step = phi / slope;
            lam -= step;
            if step.abs() <= 1e-15 * self.bound {
                return Some(lam);
            }
        }
        (best.0 <= 1e-12).then_some(best.1)
    }
}

impl ChordSource for GaugeChords {
    fn chord(&self, y: &V2) -> Option<Chord> {
        let (f, g) = self.values(y)?;
        let gf = self.gauge.gradient(&self.frame.to_world(y, f));
        let gg = self.gauge.gradient(&self.frame.to_world(y, -g));
        let split = |gr: &V3| (V2::new(self.frame.basis[0].dot(gr), self.frame.basis[1].dot(gr)), self.frame.xi.dot(gr));
        let (fy, fl) = split(&gf);
        let (gy, gl) = split(&gg);
        // Euler's identity gives the brackets without cancellation
        Some(Chord { f, g, df: -fy / fl, dg: gy / gl, bf: 1.0 / fl, bg: -1.0 / gl })
    }

    fn values(&self, y: &V2) -> Option<(f64, f64)> {
        if !self.base.contains(y) {
            return None;
        }
        let f = self.top(y, 1.0)?;
        let g = self.top(y, -1.0)?;
        if !(f + g > 0.0) {
            return None;
        }
        Some((f, g))
    }

    fn base(&self) -> &BaseDomain {
        &self.base
    }

    fn bound(&self) -> f64 {
        self.bound
    }

    fn direct_gauge(&self, x: &V3) -> Option<f64> {
        Some(self.gauge.gauge(x))
    }
}

/// Chords by bisection on the gauge of an arbitrary body, gradients by
/// central differences with step `1e-5·diam`, one-sided near the boundary.
struct NumericChords {
    body: Arc<Body>,
    frame: Frame,
    base: BaseDomain,
    bound: f64,
    step: f64,
}

impl NumericChords {
    fn new(body: Body, frame: Frame) -> Result<Self> {
        let bound = body.radius_bound() * (1.0 + 1e-9);
        let body = Arc::new(body);
        let gauge_of = |b: &Body, x: &V3| b.gauge(x).unwrap_or(f64::INFINITY);
        let base = if frame.dim == 2 {
            let b = projected_extent(|x| gauge_of(&body, x), &frame, &V2::new(1.0, 0.0), bound);
            let a = -projected_extent(|x| gauge_of(&body, x), &frame, &V2::new(-1.0, 0.0), bound);
            BaseDomain::Interval { a, b, breaks: vec![] }
        } else {
            let bb = body.clone();
            BaseDomain::Star {
                radius: Arc::new(move |phi: f64| {
                    projected_extent(|x| gauge_of(&bb, x), &frame, &V2::new(phi.cos(), phi.sin()), bound)
                }),
            }
        };
        let step = 1e-5 * base.diameter();
        Ok(NumericChords { body, frame, base, bound, step })
    }

    fn values(&self, y: &V2) -> Option<(f64, f64)> {
        if !self.base.contains(y) {
            return None;
        }
        let gauge = |l: f64| self.body.gauge(&self.frame.to_world(y, l)).unwrap_or(f64::INFINITY);
        let r = self.bound;
        let (lmid, gmin) = minimize_convex(gauge, 0.0, 0.25 * r, 1e-12 * r);
        if !(gmin < 1.0) {
            return None;
        }
        let tol = 1e-13 * r;
        let f = root_bracketed(|l| gauge(l) - 1.0, lmid, 1.5 * r, tol);
        let g = -root_bracketed(|l| gauge(l) - 1.0, -1.5 * r, lmid, tol);
        Some((f, g))
    }
}

impl ChordSource for NumericChords {
    fn chord(&self, y: &V2) -> Option<Chord> {
        let (f, g) = self.values(y)?;
        let h = self.step;
        let mut df = V2::zeros();
        let mut dg = V2::zeros();
        let axes = if self.frame.dim == 2 { 1 } else { 2 };
        for i in 0..axes {
            let mut e = V2::zeros();
            e[i] = h;
            let plus = self.values(&(y + e));
            let minus = self.values(&(y - e));
            let (a, b) = match (plus, minus) {
                (Some(p), Some(m)) => ((p.0 - m.0) / (2.0 * h), (p.1 - m.1) / (2.0 * h)),
                (Some(p), None) => ((p.0 - f) / h, (p.1 - g) / h),
                (None, Some(m)) => ((f - m.0) / h, (g - m.1) / h),
                (None, None) => (0.0, 0.0),
            };
            df[i] = a;
            dg[i] = b;
        }
        Some(Chord::new(y, f, g, df, dg))
    }

    fn base(&self) -> &BaseDomain {
        &self.base
    }

    fn bound(&self) -> f64 {
        self.bound
    }
}

struct LensChords {
    p: LensParams,
    base: BaseDomain,
}

impl LensChords {
    fn new(p: LensParams) -> Self {
        let base = if p.dim == 2 {
            BaseDomain::Interval { a: -1.0, b: 1.0, breaks: vec![-p.kink, p.kink] }
        } else {
            BaseDomain::Star { radius: Arc::new(|_| 1.0) }
        };
        LensChords { p, base }
    }
}

impl ChordSource for LensChords {
    fn chord(&self, y: &V2) -> Option<Chord> {
        let r2 = y.norm_squared();
        if r2 >= 1.0 {
            return None;
        }
        let top = (1.0 - r2).sqrt();
        let big = (self.p.big_radius * self.p.big_radius - r2).sqrt();
        let dtop = -y / top;
        let (low, dlow) = if top <= big - self.p.offset { (top, dtop) } else { (big - self.p.offset, -y / big) };
        Some(Chord::new(y, top - self.p.shift, low + self.p.shift, dtop, dlow))
    }

    fn base(&self) -> &BaseDomain {
        &self.base
    }

    fn bound(&self) -> f64 {
        1.0 + self.p.shift.abs() + 1e-9
    }
}

struct TableChords {
    f: CubicSpline,
    g: CubicSpline,
    base: BaseDomain,
    bound: f64,
}

impl TableChords {
    fn new(a: f64, b: f64, f: Vec<f64>, g: Vec<f64>) -> Self {
        let m = f.iter().chain(&g).map(|v| v.abs()).fold(0.0, f64::max);
        let bound = (m * m + a * a + b * b).sqrt() * 1.01 + 1e-9;
        TableChords {
            f: CubicSpline::new(a, b, f),
            g: CubicSpline::new(a, b, g),
            base: BaseDomain::Interval { a, b, breaks: vec![] },
            bound,
        }
    }
}

impl ChordSource for TableChords {
    fn chord(&self, y: &V2) -> Option<Chord> {
        if !self.base.contains(y) {
            return None;
        }
        let x = y[0];
        let (f, g) = (self.f.value(x), self.g.value(x));
        if !(f + g > 0.0) {
            return None;
        }
        Some(Chord::new(y, f, g, V2::new(self.f.derivative(x), 0.0), V2::new(self.g.derivative(x), 0.0)))
    }

    fn base(&self) -> &BaseDomain {
        &self.base
    }

    fn bound(&self) -> f64 {
        self.bound
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn e2() -> UnitVector {
        UnitVector::axis(2, 1).unwrap()
    }

    #[test]
    fn polytope_sections_integrate_exactly() {
        let pts = [
            V3::new(0.9, 0.2, -0.3),
            V3::new(-0.1, 0.8, 0.4),
            V3::new(0.3, -0.5, 0.7),
            V3::new(0.5, 0.5, 0.5),
            V3::new(0.2, 0.0, 0.0),
            V3::new(0.0, 0.2, 0.0),
            V3::new(0.0, 0.0, 0.2),
        ];
        let all: Vec<V3> = pts.iter().flat_map(|v| [*v, -v]).collect();
        let poly = Polytope::from_vertices(3, &all).unwrap();
        let xi = UnitVector::new(3, V3::new(0.3, -0.2, 0.9)).unwrap();
        let gb = GraphBody::decompose(&Body::Polytope(poly.clone()), &xi).unwrap();
        for t in [0.0, 0.3, 1.0, 1.7] {
            let v = gb.steiner(t).unwrap().section_volume(8, 2.0).unwrap();
            assert!((v / poly.volume() - 1.0).abs() < 1e-12, "t = {t}: {v} vs {}", poly.volume());
        }
    }

    #[test]
    fn frame_for_vertical_axis_is_e1() {
        let f = Frame::new(&e2());
        assert_eq!(f.basis[0], V3::new(1.0, 0.0, 0.0));
        let f3 = Frame::new(&UnitVector::new(3, V3::new(1.0, 2.0, 3.0)).unwrap());
        let m = f3.matrix();
        assert!((m.transpose() * m - M3::identity()).norm() < 1e-14);
    }

    #[test]
    fn ball_chords_and_bracket() {
        let b = Body::ball(2, 1.0).unwrap();
        let g = GraphBody::decompose(&b, &e2()).unwrap();
        let c = g.chord(&V2::new(0.6, 0.0)).unwrap();
        assert!((c.f - 0.8).abs() < 1e-15 && (c.g - 0.8).abs() < 1e-15);
        assert!((g.bracket(Which::F, &V2::new(0.6, 0.0)).unwrap() - 1.25).abs() < 1e-14);
        assert!(g.bracket(Which::F, &V2::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn quartic_chords_match_closed_form_radial() {
        let q = QuarticGauge::new(
            2,
            M3::new(1.0, 0.2, 0.0, 0.2, 1.5, 0.0, 0.0, 0.0, 0.0),
            vec![(V3::new(1.0, 1.0, 0.0), 0.8)],
        )
        .unwrap();
        let xi = UnitVector::new(2, V3::new(0.3, 1.0, 0.0)).unwrap();
        let g = GraphBody::from_quartic(q.clone(), &xi).unwrap();
        let half = g.with_steiner_c(0.999_999);
        for k in 0..16 {
            let a = 2.0 * PI * k as f64 / 16.0 + 0.1;
            let u = V3::new(a.cos(), a.sin(), 0.0);
            let exact = 1.0 / q.gauge(&u);
            assert!((g.radial(&u).unwrap() - exact).abs() < 1e-12);
            assert!((half.radial(&u).unwrap() - exact).abs() < 1e-5);
        }
    }

    #[test]
    fn polytope_chords_piecewise_linear() {
        let tri = Polytope::from_vertices(
            2,
            &[V3::new(-0.25, -0.25, 0.0), V3::new(0.75, -0.25, 0.0), V3::new(-0.25, 0.75, 0.0)],
        )
        .unwrap();
        let g = GraphBody::decompose(&Body::Polytope(tri), &e2()).unwrap();
        let c = g.chord(&V2::new(0.25, 0.0)).unwrap();
        assert!((c.f - 0.25).abs() < 1e-14);
        assert!((c.g - 0.25).abs() < 1e-14);
        assert!((c.df[0] + 1.0).abs() < 1e-14 && c.dg[0].abs() < 1e-14);
    }

    #[test]
    fn support_of_steiner_ball_is_one() {
        let b = Body::ball(3, 1.0).unwrap();
        let g = GraphBody::decompose(&b, &UnitVector::axis(3, 2).unwrap()).unwrap().steiner(0.5).unwrap();
        let u = V3::new(0.3, -0.4, 0.5).normalize();
        assert!((g.support(&u).unwrap() - 1.0).abs() < 1e-10);
        assert!((g.radial(&u).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn numeric_chords_agree_with_ellipse() {
        let e = Ellipsoid::from_rows(2, &[1.0, 0.3, 0.0, 2.0]).unwrap();
        let xi = UnitVector::new(2, V3::new(1.0, 1.0, 0.0)).unwrap();
        let exact = GraphBody::decompose(&Body::Ellipsoid(e.clone()), &xi).unwrap();
        let num = NumericChords::new(Body::Ellipsoid(e), exact.frame).unwrap();
        let y = V2::new(0.4, 0.0);
        let (a, b) = (exact.chord(&y).unwrap(), num.chord(&y).unwrap());
        assert!((a.f - b.f).abs() < 1e-11 && (a.g - b.g).abs() < 1e-11);
        assert!((a.df - b.df).norm() < 1e-6);
    }

    #[test]
    fn lens_is_centred_and_kinked() {
        let l = LensParams::standard(2);
        assert!((l.kink - 0.9375f64.sqrt()).abs() < 1e-14);
        let g = GraphBody::lens(l).unwrap();
        let m = g.planar_rule(2048, 2.0).unwrap().integrate(|y| {
            let c = g.chord(y).unwrap();
            0.5 * (c.f * c.f - c.g * c.g)
        });
        assert!(m.unwrap().abs() < 1e-9);
    }
}
