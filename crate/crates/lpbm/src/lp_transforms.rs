//! `L^p` projection and centroid bodies.
//!
//! Every evaluation route reduces to a finite sum
//! `h^p(x) = Σ aᵢ |θᵢ·x|^p`, an [`LpZonoid`]: facet sums of the `L^p`
//! surface measure, the ellipsoid pushforward, the graph route over the base
//! of a [`GraphBody`], and the `ρ^{n+p}`-weighted sphere sum for `Γ̃_p`.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use statrs::function::gamma::gamma;

use crate::bodies::{Body, Ellipsoid, GraphBody, Polytope, SmoothGauge, SupportSampled};
use crate::error::{check_dim, Error, Result};
use crate::numerics::CompensatedSum;
use crate::quadrature::{Interpolation, PlanarRule, SphereRule, DEFAULT_GRADING, DEFAULT_PLANAR_RES};
use crate::{M3, V3};

/// Volume of the unit ball in "dimension" `q`: `π^{q/2} / Γ(1 + q/2)`.
pub fn omega(q: f64) -> f64 {
    PI.powf(0.5 * q) / gamma(1.0 + 0.5 * q)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpParams {
    pub n: usize,
    pub p: f64,
}

impl LpParams {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        check_dim(n)?;
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Domain(format!("exponent p = {p} must satisfy p > 1")));
        }
        Ok(Self { n, p })
    }

    /// `b_{n,p} = (n+p)ω_{n+p} / (ω₂ ω_n ω_{p−1})`.
    pub fn b(&self) -> f64 {
        let (n, p) = (self.n as f64, self.p);
        (n + p) * omega(n + p) / (omega(2.0) * omega(n) * omega(p - 1.0))
    }

    /// `d_{n,p} = 2ω_{n+p−2} / ω_{p−1}`.
    pub fn d(&self) -> f64 {
        let (n, p) = (self.n as f64, self.p);
        2.0 * omega(n + p - 2.0) / omega(p - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub b: f64,
    pub d: f64,
}

pub fn constants(params: &LpParams) -> Constants {
    Constants { b: params.b(), d: params.d() }
}

/// `|t|^e` with fast paths for even, integer and half-integer exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowKernel {
    Two,
    Int(i32),
    Half(i32),
    General(f64),
}

impl PowKernel {
    pub fn new(e: f64) -> Self {
        if e == 2.0 {
            PowKernel::Two
        } else if e.fract() == 0.0 && e.abs() < 64.0 {
            PowKernel::Int(e as i32)
        } else if (e - 0.5).fract() == 0.0 && e > 0.0 && e < 64.0 {
            PowKernel::Half((e - 0.5) as i32)
        } else {
            PowKernel::General(e)
        }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let a = t.abs();
        match *self {
            PowKernel::Two => t * t,
            PowKernel::Int(k) => a.powi(k),
            PowKernel::Half(k) => a.powi(k) * a.sqrt(),
            PowKernel::General(e) => a.powf(e),
        }
    }
}

/// `h^p(x) = Σ aᵢ |θᵢ·x|^p`, the support function of an `L^p` zonoid.
#[derive(Debug, Clone)]
pub struct LpZonoid {
    pub dim: usize,
    pub p: f64,
    pub dirs: Vec<V3>,
    pub weights: Vec<f64>,
    kernel: PowKernel,
    dkernel: PowKernel,
    moment: Option<M3>,
    bound: OnceLock<f64>,
}

impl LpZonoid {
    pub fn new(dim: usize, p: f64, dirs: Vec<V3>, weights: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        if dirs.len() != weights.len() {
            return Err(Error::Argument("direction/weight length mismatch".into()));
        }
        if let Some(k) = weights.iter().position(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Evaluation(format!("zonoid weight {} at atom {k} is invalid", weights[k])));
        }
        let moment = (p == 2.0).then(|| {
            let mut m = M3::zeros();
            for (t, w) in dirs.iter().zip(&weights) {
                m += t * t.transpose() * *w;
            }
            m
        });
        Ok(Self {
            dim,
            p,
            kernel: PowKernel::new(p),
            dkernel: PowKernel::new(p - 1.0),
            dirs,
            weights,
            moment,
            bound: OnceLock::new(),
        })
    }

    /// Multiplies all weights (hence `h^p`) by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.dim, self.p, self.dirs.clone(), self.weights.iter().map(|w| w * s).collect())
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    /// Second-moment matrix `Σ aθθᵀ`, present when `p = 2`.
    pub fn moment(&self) -> Option<&M3> {
        self.moment.as_ref()
    }

    pub fn hp(&self, x: &V3) -> f64 {
        if let Some(m) = &self.moment {
            return x.dot(&(m * x));
        }
        let mut s = CompensatedSum::new();
        for (t, w) in self.dirs.iter().zip(&self.weights) {
            s.add(w * self.kernel.eval(t.dot(x)));
        }
        s.value()
    }

    pub fn h(&self, x: &V3) -> f64 {
        let v = self.hp(x);
        if self.p == 2.0 {
            v.sqrt()
        } else {
            v.powf(1.0 / self.p)
        }
    }

    /// `∇(h^p/p)(x) = Σ aᵢ |θᵢ·x|^{p−1} sgn(θᵢ·x) θᵢ`.
    pub fn grad_hp_over_p(&self, x: &V3) -> V3 {
        if let Some(m) = &self.moment {
            return m * x;
        }
        let mut g = [CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new()];
        for (t, w) in self.dirs.iter().zip(&self.weights) {
            let s = t.dot(x);
            if s == 0.0 {
                continue;
            }
            let k = w * self.dkernel.eval(s) * s.signum();
            for i in 0..3 {
                g[i].add(k * t[i]);
            }
        }
        V3::new(g[0].value(), g[1].value(), g[2].value())
    }

    /// `∇h = h^{1−p} ∇(h^p/p)`.
    pub fn grad_h(&self, x: &V3) -> V3 {
        let h = self.h(x);
        self.grad_hp_over_p(x) * h.powf(1.0 - self.p)
    }

    pub fn support_at(&self, rule: &SphereRule) -> Vec<f64> {
        rule.nodes.iter().map(|u| self.h(u)).collect()
    }
}

impl SmoothGauge for LpZonoid {
    fn dim(&self) -> usize {
        self.dim
    }

    fn gauge(&self, x: &V3) -> f64 {
        self.h(x)
    }

    fn gradient(&self, x: &V3) -> V3 {
        self.grad_h(x)
    }

    fn gauge_slope(&self, x: &V3, d: &V3) -> (f64, f64) {
        if let Some(m) = &self.moment {
            let h = x.dot(&(m * x)).sqrt();
            return (h, d.dot(&(m * x)) / h);
        }
        let (mut hp, mut dp) = (0.0, 0.0);
        for (t, w) in self.dirs.iter().zip(&self.weights) {
            let s = t.dot(x);
            if s == 0.0 {
                continue;
            }
            let k = w * self.dkernel.eval(s);
            hp += k * s.abs();
            dp += k * s.signum() * t.dot(d);
        }
        let h = hp.powf(1.0 / self.p);
        (h, dp * h.powf(1.0 - self.p))
    }

    fn radius_bound(&self) -> f64 {
        *self.bound.get_or_init(|| {
            let dirs: Vec<V3> = if self.dim == 2 {
                (0..720).map(|k| {
                    let a = PI * k as f64 / 360.0;
                    V3::new(a.cos(), a.sin(), 0.0)
                })
                .collect()
            } else {
                let m = 2000;
                let golden = PI * (3.0 - 5f64.sqrt());
                (0..m)
                    .map(|k| {
                        let z = 1.0 - (2.0 * k as f64 + 1.0) / m as f64;
                        let r = (1.0 - z * z).sqrt();
                        let a = golden * k as f64;
                        V3::new(r * a.cos(), r * a.sin(), z)
                    })
                    .collect()
            };
            let hmin = dirs.iter().map(|u| self.h(u)).fold(f64::INFINITY, f64::min);
            1.25 / hmin
        })
    }
}

/// Atoms of `S_{p,K}` for a polytope: `(νᵢ, hᵢ^{1−p}·areaᵢ)`.
#[derive(Debug, Clone)]
pub struct DiscreteLpMeasure {
    pub atoms: Vec<(V3, f64)>,
    /// Facets skipped for having zero measure.
    pub dropped: usize,
}

pub fn lp_surface_measure(poly: &Polytope, params: &LpParams) -> Result<DiscreteLpMeasure> {
    let mut atoms = Vec::with_capacity(poly.facets.len());
    let mut dropped = 0;
    for f in &poly.facets {
        if !(f.offset > 0.0) {
            return Err(Error::Domain("origin not strictly interior".into()));
        }
        if !(f.area > 0.0) {
            dropped += 1;
            continue;
        }
        atoms.push((f.normal, f.offset.powf(1.0 - params.p) * f.area));
    }
    Ok(DiscreteLpMeasure { atoms, dropped })
}

/// Which boundary pieces of a graph body feed the graph route. `Both`
/// integrates the upper and lower graphs; the doubled forms use one graph
/// twice, which is valid for origin-symmetric bodies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphForm {
    Both,
    UpperDoubled,
    LowerDoubled,
}

/// How `Π̃_p K` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Polytope facets, the ellipsoid pushforward, or the graph route, by representation.
    Auto,
    Facet,
    Pushforward,
    Graph(GraphForm),
}

/// Quadrature settings shared by the operators.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub sphere: Arc<SphereRule>,
    pub planar_res: usize,
    pub grading: f64,
}

impl Discretization {
    pub fn new(sphere: SphereRule) -> Self {
        Self::shared(Arc::new(sphere))
    }

    pub fn shared(sphere: Arc<SphereRule>) -> Self {
        Self { sphere, planar_res: DEFAULT_PLANAR_RES, grading: DEFAULT_GRADING }
    }

    pub fn with_planar(mut self, res: usize, grading: f64) -> Self {
        self.planar_res = res;
        self.grading = grading;
        self
    }
}

pub fn facet_zonoid(poly: &Polytope, params: &LpParams) -> Result<LpZonoid> {
    let m = lp_surface_measure(poly, params)?;
    let (dirs, weights) = m.atoms.into_iter().unzip();
    LpZonoid::new(poly.dim, params.p, dirs, weights)
}

/// Boundary parametrization `x = Aω` pushed through the Gauss map:
/// `θ = A^{−T}ω`, weight `|det A|·w`.
pub fn ellipsoid_zonoid(e: &Ellipsoid, params: &LpParams, rule: &SphereRule) -> Result<LpZonoid> {
    let it = e.inverse().transpose();
    let dirs = rule.nodes.iter().map(|w| it * w).collect();
    let weights = rule.weights.iter().map(|w| w * e.abs_det()).collect();
    LpZonoid::new(e.dim, params.p, dirs, weights)
}

/// Graph route: upper atoms `(−∇f, 1)` with weight `W⟨f⟩^{1−p}`, lower
/// atoms `(∇g, 1)` with weight `W⟨g⟩^{1−p}`, mapped to world coordinates.
pub fn graph_zonoid(gb: &GraphBody, params: &LpParams, rule: &PlanarRule, form: GraphForm) -> Result<LpZonoid> {
    let (up, low) = match form {
        GraphForm::Both => (1.0, 1.0),
        GraphForm::UpperDoubled => (2.0, 0.0),
        GraphForm::LowerDoubled => (0.0, 2.0),
    };
    let e = 1.0 - params.p;
    let mut dirs = Vec::with_capacity(2 * rule.len());
    let mut weights = Vec::with_capacity(2 * rule.len());
    for (y, w) in rule.nodes.iter().zip(&rule.weights) {
        let Some(ch) = gb.chord(y) else { continue };
        let (bf, bg) = (ch.bf, ch.bg);
        if !(bf > 0.0 && bg > 0.0) {
            return Err(Error::Domain(format!(
                "nonpositive bracket at base point ({:.6}, {:.6}): origin not interior",
                y[0], y[1]
            )));
        }
        if up > 0.0 {
            dirs.push(gb.frame.to_world(&-ch.df, 1.0));
            weights.push(up * w * bf.powf(e));
        }
        if low > 0.0 {
            dirs.push(gb.frame.to_world(&ch.dg, 1.0));
            weights.push(low * w * bg.powf(e));
        }
    }
    LpZonoid::new(gb.dim(), params.p, dirs, weights)
}

/// `Γ̃_p` from radial samples: `θ = vⱼ`, weight `wⱼ ρ(vⱼ)^{n+p}`.
pub fn gamma_zonoid(radial: &[f64], rule: &SphereRule, params: &LpParams) -> Result<LpZonoid> {
    if radial.len() != rule.len() {
        return Err(Error::Argument("radial samples do not match the rule".into()));
    }
    let e = params.n as f64 + params.p;
    let weights = radial.iter().zip(&rule.weights).map(|(r, w)| w * r.powf(e)).collect();
    LpZonoid::new(params.n, params.p, rule.nodes.clone(), weights)
}

/// `Π̃_p K` as a zonoid, by the requested route.
pub fn pi_zonoid(body: &Body, params: &LpParams, disc: &Discretization, route: Route) -> Result<LpZonoid> {
    if body.dim() != params.n {
        return Err(Error::Argument("body dimension does not match parameters".into()));
    }
    match (route, body) {
        (Route::Auto | Route::Facet, Body::Polytope(p)) => facet_zonoid(p, params),
        (Route::Auto | Route::Facet, Body::Sampled(s)) => facet_zonoid(s.wulff()?, params),
        (Route::Auto | Route::Pushforward, Body::Ellipsoid(e)) => ellipsoid_zonoid(e, params, &disc.sphere),
        (Route::Auto, Body::Graph(g)) => {
            graph_zonoid(g, params, &g.planar_rule(disc.planar_res, disc.grading)?, GraphForm::Both)
        }
        (Route::Graph(form), Body::Graph(g)) => {
            graph_zonoid(g, params, &g.planar_rule(disc.planar_res, disc.grading)?, form)
        }
        (Route::Graph(_), _) => Err(Error::Representation(
            "graph route needs a graph decomposition; decompose the body first".into(),
        )),
        (r, b) => Err(Error::Representation(format!("route {r:?} does not apply to a {} body", b.kind()))),
    }
}

/// `h_{Π̃_p K}(x)`, or `h_{Π_p K}(x)` when `normalized` (divides `h^p` by `d_{n,p}`).
pub fn pi_p_support(body: &Body, x: &V3, params: &LpParams, disc: &Discretization, normalized: bool) -> Result<f64> {
    let z = pi_zonoid(body, params, disc, Route::Auto)?;
    let hp = z.hp(x);
    Ok(if normalized { (hp / params.d()).powf(1.0 / params.p) } else { hp.powf(1.0 / params.p) })
}

/// `Γ̃_p K` (or `Γ_p K`, dividing `h^p` by `b_{n,p}|K|`) as a zonoid.
pub fn gamma_p_zonoid(body: &Body, params: &LpParams, rule: &SphereRule, normalized: bool) -> Result<LpZonoid> {
    let rho = body.radial_at_nodes(rule)?;
    gamma_from_radial(&rho, rule, params, normalized)
}

fn gamma_from_radial(rho: &[f64], rule: &SphereRule, params: &LpParams, normalized: bool) -> Result<LpZonoid> {
    let z = gamma_zonoid(rho, rule, params)?;
    if normalized {
        let n = params.n as i32;
        let vol = rule.integrate_values(&rho.iter().map(|r| r.powi(n)).collect::<Vec<_>>())? / n as f64;
        z.scaled(1.0 / (params.b() * vol))
    } else {
        Ok(z)
    }
}

pub fn gamma_p_support(body: &Body, x: &V3, params: &LpParams, rule: &SphereRule, normalized: bool) -> Result<f64> {
    Ok(gamma_p_zonoid(body, params, rule, normalized)?.h(x))
}

/// `∇′(h^p_{Γ̃_p K}/p)(x) = ∫ ρ^{n+p}(ξ) |ξ·x|^{p−1} sgn(ξ·x) ξ dξ`.
pub fn gamma_p_gradient(body: &Body, x: &V3, params: &LpParams, rule: &SphereRule) -> Result<V3> {
    super::bodies::nonzero(x)?;
    Ok(gamma_p_zonoid(body, params, rule, false)?.grad_hp_over_p(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    PiTilde,
    Pi,
    GammaTilde,
    Gamma,
    PiPolarTilde,
    PiPolar,
    ComposedTilde,
    Composed,
}

impl TransformKind {
    pub fn name(&self) -> &'static str {
        match self {
            TransformKind::PiTilde => "pi_tilde",
            TransformKind::Pi => "pi",
            TransformKind::GammaTilde => "gamma_tilde",
            TransformKind::Gamma => "gamma",
            TransformKind::PiPolarTilde => "pi_polar_tilde",
            TransformKind::PiPolar => "pi_polar",
            TransformKind::ComposedTilde => "composed_tilde",
            TransformKind::Composed => "composed",
        }
    }
}

/// Which function a [`TransformedBody`] tabulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampled {
    Support,
    Radial,
}

/// Result of an operator, tabulated at the nodes of a sphere rule.
#[derive(Debug, Clone)]
pub struct TransformedBody {
    pub kind: TransformKind,
    pub params: LpParams,
    pub rule: Arc<SphereRule>,
    pub sampled: Sampled,
    pub values: Vec<f64>,
}

impl TransformedBody {
    fn new(kind: TransformKind, params: LpParams, rule: Arc<SphereRule>, sampled: Sampled, values: Vec<f64>) -> Result<Self> {
        if let Some(k) = values.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Evaluation(format!(
                "{} value {} at node {k} is not positive",
                kind.name(),
                values[k]
            )));
        }
        Ok(Self { kind, params, rule, sampled, values })
    }

    /// Support values at the nodes. Radial tabulations are converted through
    /// the discrete polar `h(u) = maxⱼ ρⱼ (vⱼ·u)`.
    pub fn support_values(&self) -> Vec<f64> {
        match self.sampled {
            Sampled::Support => self.values.clone(),
            Sampled::Radial => self
                .rule
                .nodes
                .iter()
                .map(|u| {
                    self.rule
                        .nodes
                        .iter()
                        .zip(&self.values)
                        .map(|(v, r)| r * v.dot(u))
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect(),
        }
    }

    /// Radial values at the nodes. Support tabulations are converted through
    /// the gauge of the Wulff polytope, `1/ρ(u) = maxⱼ (vⱼ·u)/hⱼ`.
    pub fn radial_values(&self) -> Vec<f64> {
        match self.sampled {
            Sampled::Radial => self.values.clone(),
            Sampled::Support => self
                .rule
                .nodes
                .iter()
                .map(|u| {
                    let g = self
                        .rule
                        .nodes
                        .iter()
                        .zip(&self.values)
                        .map(|(v, h)| v.dot(u) / h)
                        .fold(f64::NEG_INFINITY, f64::max);
                    1.0 / g
                })
                .collect(),
        }
    }

    /// Antipodal symmetry residual `max |vₖ − v_{−k}| / max v`.
    pub fn evenness_defect(&self) -> f64 {
        let m = self.values.iter().copied().fold(0.0, f64::max);
        (0..self.values.len())
            .map(|k| (self.values[k] - self.values[self.rule.antipode(k)]).abs())
            .fold(0.0, f64::max)
            / m
    }

    pub fn to_sampled(&self) -> Result<SupportSampled> {
        SupportSampled::new(self.rule.clone(), self.support_values(), Interpolation::FirstOrder, true)
    }

    pub fn to_body(&self) -> Result<Body> {
        Ok(Body::Sampled(self.to_sampled()?))
    }
}

fn pi_values(body: &Body, params: &LpParams, disc: &Discretization, normalized: bool) -> Result<Vec<f64>> {
    let z = pi_zonoid(body, params, disc, Route::Auto)?;
    let z = if normalized { z.scaled(1.0 / params.d())? } else { z };
    Ok(z.support_at(&disc.sphere))
}

/// `Π̃_p K` (or `Π_p K`) tabulated at the sphere nodes.
pub fn pi_body(body: &Body, params: &LpParams, disc: &Discretization, normalized: bool) -> Result<TransformedBody> {
    let kind = if normalized { TransformKind::Pi } else { TransformKind::PiTilde };
    TransformedBody::new(kind, *params, disc.sphere.clone(), Sampled::Support, pi_values(body, params, disc, normalized)?)
}

/// `Γ̃_p K` (or `Γ_p K`) tabulated at the sphere nodes.
pub fn gamma_body(body: &Body, params: &LpParams, rule: &Arc<SphereRule>, normalized: bool) -> Result<TransformedBody> {
    let kind = if normalized { TransformKind::Gamma } else { TransformKind::GammaTilde };
    let z = gamma_p_zonoid(body, params, rule, normalized)?;
    TransformedBody::new(kind, *params, rule.clone(), Sampled::Support, z.support_at(rule))
}

/// `Π̃_p° K` (or `Π_p° K`): radial values `1/h_{Π̃_p K}` at the nodes.
pub fn pi_polar_body(body: &Body, params: &LpParams, disc: &Discretization, normalized: bool) -> Result<TransformedBody> {
    let kind = if normalized { TransformKind::PiPolar } else { TransformKind::PiPolarTilde };
    let h = pi_values(body, params, disc, normalized)?;
    TransformedBody::new(kind, *params, disc.sphere.clone(), Sampled::Radial, h.iter().map(|v| 1.0 / v).collect())
}

/// `Γ_p Π_p° K` (or the tilde composition), reusing the cached radial
/// samples of the polar projection body on the same nodes.
pub fn compose_gamma_pi_polar(body: &Body, params: &LpParams, disc: &Discretization, normalized: bool) -> Result<TransformedBody> {
    let polar = pi_polar_body(body, params, disc, normalized)?;
    compose_from_polar(&polar, normalized)
}

pub fn compose_from_polar(polar: &TransformedBody, normalized: bool) -> Result<TransformedBody> {
    let kind = if normalized { TransformKind::Composed } else { TransformKind::ComposedTilde };
    let rho = polar.radial_values();
    let z = gamma_from_radial(&rho, &polar.rule, &polar.params, normalized)?;
    TransformedBody::new(kind, polar.params, polar.rule.clone(), Sampled::Support, z.support_at(&polar.rule))
}

/// `Γ_p` of a radially tabulated body, as a zonoid.
pub fn gamma_of_polar(polar: &TransformedBody, normalized: bool) -> Result<LpZonoid> {
    gamma_from_radial(&polar.radial_values(), &polar.rule, &polar.params, normalized)
}

/// With `r = log(h_L/h_K)` over the nodes, returns `((max r − min r)/2, c)`
/// where `c = exp((max r + min r)/2)` is the best dilation factor.
pub fn dilation_defect_values(hk: &[f64], hl: &[f64]) -> Result<(f64, f64)> {
    if hk.len() != hl.len() || hk.is_empty() {
        return Err(Error::Argument("support tables differ in length".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (a, b) in hk.iter().zip(hl) {
        if !(*a > 0.0 && *b > 0.0) {
            return Err(Error::Domain("nonpositive support value".into()));
        }
        let r = (b / a).ln();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((0.5 * (hi - lo), (0.5 * (hi + lo)).exp()))
}

pub fn dilation_defect(k: &Body, l: &Body, rule: &SphereRule) -> Result<(f64, f64)> {
    dilation_defect_values(&k.support_at_nodes(rule)?, &l.support_at_nodes(rule)?)
}

/// Weighted least-squares fit of `h(u)² ≈ uᵀMu` over the nodes. Returns the
/// relative sup residual `max|h² − uᵀMu| / max h²` and `M`; the residual is
/// infinite when `M` is not positive definite.
pub fn ellipsoid_defect(values: &[f64], rule: &SphereRule) -> Result<(f64, M3)> {
    if values.len() != rule.len() {
        return Err(Error::Argument("support table does not match the rule".into()));
    }
    let pairs: Vec<(usize, usize)> =
        if rule.dim == 2 { vec![(0, 0), (0, 1), (1, 1)] } else { vec![(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)] };
    let k = pairs.len();
    let m = values.len();
    let mut a = nalgebra::DMatrix::<f64>::zeros(m, k);
    let mut b = nalgebra::DVector::<f64>::zeros(m);
    for (r, (u, (h, w))) in rule.nodes.iter().zip(values.iter().zip(&rule.weights)).enumerate() {
        let sw = w.sqrt();
        for (c, &(i, j)) in pairs.iter().enumerate() {
            a[(r, c)] = sw * u[i] * u[j] * if i == j { 1.0 } else { 2.0 };
        }
        b[r] = sw * h * h;
    }
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Evaluation(format!("ellipsoid fit failed: {e}")))?;
    let mut mat = M3::zeros();
    for (c, &(i, j)) in pairs.iter().enumerate() {
        mat[(i, j)] = sol[c];
        mat[(j, i)] = sol[c];
    }
    let peak = values.iter().map(|h| h * h).fold(0.0, f64::max);
    let resid = rule
        .nodes
        .iter()
        .zip(values)
        .map(|(u, h)| (h * h - u.dot(&(mat * u))).abs())
        .fold(0.0, f64::max);
    let block = if rule.dim == 2 { mat.fixed_view::<2, 2>(0, 0).symmetric_eigenvalues().min() } else { mat.symmetric_eigenvalues().min() };
    let defect = if block > 0.0 { resid / peak } else { f64::INFINITY };
    Ok((defect, mat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::UnitVector;
    use crate::quadrature::sphere_rule;

    #[test]
    fn omega_values() {
        assert!((omega(1.0) - 2.0).abs() < 1e-14);
        assert!((omega(2.0) - PI).abs() < 1e-14);
        assert!((omega(3.0) - 4.0 * PI / 3.0).abs() < 1e-13);
        assert!((omega(4.0) - PI * PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn planar_constants_at_two() {
        let c = constants(&LpParams::new(2, 2.0).unwrap());
        assert!((c.b - 1.0).abs() < 1e-13);
        assert!((c.d - PI).abs() < 1e-13);
        let c3 = constants(&LpParams::new(3, 2.0).unwrap());
        assert!((c3.d - 4.0 * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_small_p() {
        assert!(LpParams::new(2, 1.0).is_err());
        assert!(LpParams::new(2, 0.5).is_err());
    }

    #[test]
    fn kernels_agree_with_powf() {
        for e in [2.0, 3.0, 5.0, 1.5, 0.5, 2.5, 1.7] {
            let k = PowKernel::new(e);
            for t in [-1.3, -0.2, 0.0, 0.7, 2.0] {
                let a: f64 = t;
                assert!((k.eval(t) - a.abs().powf(e)).abs() < 1e-14 * (1.0 + a.abs().powf(e)));
            }
        }
    }

    #[test]
    fn cube_measure_atoms() {
        let c = Polytope::cube(3, 1.0).unwrap();
        let m = lp_surface_measure(&c, &LpParams::new(3, 2.5).unwrap()).unwrap();
        assert_eq!(m.atoms.len(), 6);
        assert!(m.atoms.iter().all(|a| (a.1 - 4.0).abs() < 1e-12));
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let params = LpParams::new(2, 3.0).unwrap();
        let rule = sphere_rule(2, 256).unwrap();
        let e = Body::Ellipsoid(Ellipsoid::from_rows(2, &[1.0, 0.0, 0.0, 2.0]).unwrap());
        let z = gamma_p_zonoid(&e, &params, &rule, false).unwrap();
        let x = V3::new(1.0, 1.0, 0.0);
        let g = z.grad_hp_over_p(&x);
        let h = 1e-6;
        for i in 0..2 {
            let mut d = V3::zeros();
            d[i] = h;
            let fd = (z.hp(&(x + d)) - z.hp(&(x - d))) / (2.0 * h * 3.0);
            assert!((fd - g[i]).abs() < 1e-6 * g.norm());
        }
    }

    #[test]
    fn graph_route_matches_pushforward_on_ellipse() {
        let params = LpParams::new(2, 2.0).unwrap();
        let e = Ellipsoid::from_rows(2, &[1.0, 0.0, 0.0, 2.0]).unwrap();
        let disc = Discretization::new(sphere_rule(2, 512).unwrap());
        let push = ellipsoid_zonoid(&e, &params, &disc.sphere).unwrap();
        let gb = GraphBody::decompose(&Body::Ellipsoid(e), &UnitVector::axis(2, 1).unwrap()).unwrap();
        let graph = pi_zonoid(&Body::Graph(gb), &params, &disc, Route::Graph(GraphForm::UpperDoubled)).unwrap();
        for u in [V3::new(1.0, 0.0, 0.0), V3::new(0.6, 0.8, 0.0)] {
            assert!((push.h(&u) - graph.h(&u)).abs() < 1e-6 * push.h(&u));
        }
    }

    #[test]
    fn dilation_defect_of_ball_and_ellipse() {
        let rule = sphere_rule(2, 64).unwrap();
        let b = Body::ball(2, 1.0).unwrap();
        let e = Body::Ellipsoid(Ellipsoid::from_rows(2, &[1.0, 0.0, 0.0, 2.0]).unwrap());
        let (d, c) = dilation_defect(&b, &e, &rule).unwrap();
        assert!((d - 2f64.ln() / 2.0).abs() < 1e-12);
        assert!((c - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ellipsoid_fit_is_exact_on_ellipsoids() {
        let rule = sphere_rule(3, 8).unwrap();
        let e = Body::Ellipsoid(Ellipsoid::from_rows(3, &[1.0, 0.2, 0.0, 0.0, 1.5, 0.1, 0.3, 0.0, 2.0]).unwrap());
        let (d, _) = ellipsoid_defect(&e.support_at_nodes(&rule).unwrap(), &rule).unwrap();
        assert!(d < 1e-12);
        let c = Body::Polytope(Polytope::cube(3, 1.0).unwrap());
        let (d, _) = ellipsoid_defect(&c.support_at_nodes(&rule).unwrap(), &rule).unwrap();
        assert!(d > 1e-2);
    }
}
