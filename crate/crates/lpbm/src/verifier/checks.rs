use std::sync::Arc;

use super::report::VerificationReport;
use super::VerifyConfig;
use crate::bodies::{Body, GraphBody, UnitVector};
use crate::error::{Error, Result};
use crate::lp_transforms::{
    compose_gamma_pi_polar, dilation_defect_values, gamma_zonoid, graph_zonoid, Discretization, GraphForm, LpParams,
    LpZonoid,
};
use crate::quadrature::{sphere_rule, PlanarRule, SphereRule};
use crate::{V2, V3};

fn report(check: &str, fixture: &str, body: &Body, cfg: &VerifyConfig, params: &LpParams) -> VerificationReport {
    VerificationReport::new(check, fixture, body.dim(), cfg.settings()).p(params.p)
}

fn require_symmetric(body: &Body, cfg: &VerifyConfig) -> Result<()> {
    let rule = sphere_rule(body.dim(), cfg.direction_order)?;
    if !body.is_origin_symmetric(&rule)? {
        return Err(Error::Precondition("body is not origin-symmetric".into()));
    }
    Ok(())
}

struct InclusionSample {
    lhs: Vec<f64>,
    rhs: Vec<f64>,
    lemma: f64,
}

/// Radii of `S^t Π̃°K` and `Π̃° S^t K` over `dirs`, and the largest gauge of
/// `Π̃ S^t K` over sampled boundary points of `S^t Π̃°K`.
fn inclusion_sample(gb: &GraphBody, xi: &UnitVector, t: f64, params: &LpParams, res: usize, cfg: &VerifyConfig, dirs: &[V3]) -> Result<InclusionSample> {
    let rule = gb.planar_rule(res, cfg.grading)?;
    let z0: Arc<LpZonoid> = Arc::new(graph_zonoid(gb, params, &rule, GraphForm::Both)?);
    let zt = graph_zonoid(&gb.steiner(t)?, params, &rule, GraphForm::Both)?;
    let l = GraphBody::from_gauge(z0, xi)?.steiner(t)?;
    let mut lhs = Vec::with_capacity(dirs.len());
    let mut rhs = Vec::with_capacity(dirs.len());
    for u in dirs {
        lhs.push(l.radial(u)?);
        rhs.push(1.0 / zt.h(u));
    }
    let mut lemma = f64::NEG_INFINITY;
    for y in &l.planar_rule(cfg.boundary_res, cfg.grading)?.nodes {
        if let Some((f, g)) = l.values(y) {
            let up = zt.h(&l.frame.to_world(y, f));
            let down = zt.h(&l.frame.to_world(y, -g));
            lemma = lemma.max(up.max(down) - 1.0);
        }
    }
    Ok(InclusionSample { lhs, rhs, lemma })
}

/// `S^t Π̃°K ⊂ Π̃° S^t K` over the direction sample, and the boundary-point
/// form of the same inclusion. Both run at the planar resolution and its
/// double; the tolerance is `max(floor, 3·refinement delta)`.
pub fn check_inclusion(
    body: &Body,
    xi: &UnitVector,
    t: f64,
    params: &LpParams,
    cfg: &VerifyConfig,
    dirs: &[V3],
    fixture: &str,
) -> Result<(VerificationReport, VerificationReport)> {
    require_symmetric(body, cfg)?;
    if !(t > 0.0 && t < 2.0) {
        return Err(Error::Argument(format!("inclusion needs t in (0, 2), got {t}")));
    }
    let gb = GraphBody::decompose(body, xi)?;
    let a = inclusion_sample(&gb, xi, t, params, cfg.planar_res, cfg, dirs)?;
    let b = inclusion_sample(&gb, xi, t, params, 2 * cfg.planar_res, cfg, dirs)?;
    let mut worst = f64::NEG_INFINITY;
    let mut delta: f64 = 0.0;
    for k in 0..dirs.len() {
        worst = worst.max(a.lhs[k] / a.rhs[k] - 1.0).max(b.lhs[k] / b.rhs[k] - 1.0);
        delta = delta.max((a.lhs[k] - b.lhs[k]).abs().max((a.rhs[k] - b.rhs[k]).abs()) / b.rhs[k]);
    }
    let lemma_delta = (a.lemma - b.lemma).abs();
    let tol = cfg.tol_floor.max(3.0 * delta.max(lemma_delta));
    let label = if t == 1.0 { "symmetral case" } else { "continuous case" };
    let inc = report("inclusion", fixture, body, cfg, params)
        .xi(*xi.v())
        .t(format!("{t}"))
        .detail(format!("{label}; refinement delta {delta:.3e}"))
        .outcome(worst, tol);
    let lem = report("boundary_criterion", fixture, body, cfg, params)
        .xi(*xi.v())
        .t(format!("{t}"))
        .detail(format!("refinement delta {lemma_delta:.3e}"))
        .outcome(a.lemma.max(b.lemma), tol);
    Ok((inc, lem))
}

/// Section lengths of `Π̃° S^t K` at `z` for `t = k/5`, `k = 0..=10`.
fn section_profile(gb: &GraphBody, xi: &UnitVector, z: &V2, params: &LpParams, rule: &PlanarRule) -> Result<Vec<f64>> {
    (0..=10)
        .map(|k| {
            let t = k as f64 / 5.0;
            let zt: Arc<LpZonoid> = Arc::new(graph_zonoid(&gb.steiner(t)?, params, rule, GraphForm::Both)?);
            let m = GraphBody::from_gauge(zt, xi)?;
            let (f, g) = m
                .values(z)
                .ok_or_else(|| Error::Domain(format!("z = ({}, {}) outside the section base at t = {t}", z[0], z[1])))?;
            Ok(f + g)
        })
        .collect()
}

/// Section length of `Π̃° S^t K` at `z` is non-decreasing on `[0, 1]`,
/// non-increasing on `[1, 2]` and even about `t = 1`.
pub fn check_section_monotone(
    body: &Body,
    xi: &UnitVector,
    z: &V2,
    params: &LpParams,
    cfg: &VerifyConfig,
    fixture: &str,
) -> Result<(VerificationReport, VerificationReport)> {
    require_symmetric(body, cfg)?;
    let gb = GraphBody::decompose(body, xi)?;
    let ra = gb.planar_rule(cfg.planar_res, cfg.grading)?;
    let rb = gb.planar_rule(2 * cfg.planar_res, cfg.grading)?;
    let a = section_profile(&gb, xi, z, params, &ra)?;
    let b = section_profile(&gb, xi, z, params, &rb)?;
    let mut worst = f64::NEG_INFINITY;
    let mut even: f64 = 0.0;
    let mut delta: f64 = 0.0;
    for h in [&a, &b] {
        for k in 0..10 {
            let step = if k < 5 { h[k] - h[k + 1] } else { h[k + 1] - h[k] };
            worst = worst.max(step);
        }
        for k in 0..=10 {
            even = even.max((h[k] - h[10 - k]).abs());
        }
    }
    for k in 0..=10 {
        delta = delta.max((a[k] - b[k]).abs());
    }
    let tol = cfg.tol_floor.max(3.0 * delta);
    let zs = format!("z=({:.4} {:.4})", z[0], z[1]);
    let mono = report("section_monotone", fixture, body, cfg, params)
        .xi(*xi.v())
        .t("0:0.2:2")
        .detail(format!("{zs}; refinement delta {delta:.3e}"))
        .outcome(worst, tol);
    let ev = report("section_evenness", fixture, body, cfg, params)
        .xi(*xi.v())
        .t("0:0.2:2")
        .detail(zs)
        .outcome(even, 1e-8);
    Ok((mono, ev))
}

/// Base points for the section check: the origin and a point at 30% of the
/// radius of `Π̃°K` along `e₀`.
pub fn section_points(body: &Body, xi: &UnitVector, params: &LpParams, cfg: &VerifyConfig) -> Result<Vec<V2>> {
    let gb = GraphBody::decompose(body, xi)?;
    let z0 = graph_zonoid(&gb, params, &gb.planar_rule(cfg.planar_res, cfg.grading)?, GraphForm::Both)?;
    let r = 1.0 / z0.h(&gb.frame.basis[0]);
    Ok(vec![V2::zeros(), V2::new(0.3 * r, 0.0)])
}

/// `G(t) = h^p_{Π̃ S^t K}(y, s)` on `t = k/10` is midpoint convex and
/// satisfies `G(2−t; y, s) = G(t; −y, s)`, relative to `max G`.
pub fn check_convexity(
    body: &Body,
    xi: &UnitVector,
    ys: &[V3],
    params: &LpParams,
    cfg: &VerifyConfig,
    fixture: &str,
) -> Result<(VerificationReport, VerificationReport)> {
    require_symmetric(body, cfg)?;
    let gb = GraphBody::decompose(body, xi)?;
    let mut conv = f64::NEG_INFINITY;
    let mut sym: f64 = 0.0;
    for res in [cfg.planar_res, 2 * cfg.planar_res] {
        let rule = gb.planar_rule(res, cfg.grading)?;
        let zs: Vec<LpZonoid> = (0..=20)
            .map(|k| graph_zonoid(&gb.steiner(k as f64 / 10.0)?, params, &rule, GraphForm::UpperDoubled))
            .collect::<Result<_>>()?;
        for d in ys {
            let (y, s) = gb.frame.to_frame(d);
            let flipped = gb.frame.to_world(&-y, s);
            let g: Vec<f64> = zs.iter().map(|z| z.hp(d)).collect();
            let gm: Vec<f64> = zs.iter().map(|z| z.hp(&flipped)).collect();
            let scale = g.iter().chain(&gm).copied().fold(0.0, f64::max);
            for i in 0..=20 {
                for j in (i + 2..=20).step_by(2) {
                    conv = conv.max((g[(i + j) / 2] - 0.5 * (g[i] + g[j])) / scale);
                }
                sym = sym.max((g[20 - i] - gm[i]).abs() / scale);
            }
        }
    }
    let c = report("convexity", fixture, body, cfg, params).xi(*xi.v()).t("0:0.1:2").outcome(conv, cfg.tol_floor);
    let s = report("reflection_symmetry", fixture, body, cfg, params).xi(*xi.v()).t("0:0.1:2").outcome(sym, cfg.tol_floor);
    Ok((c, s))
}

/// Directions `(y, s)` for the convexity check: `ξ`, `0.6e₀ + 0.8ξ` and
/// seeded random directions.
pub fn convexity_directions(xi: &UnitVector, count: usize, seed: u64) -> Vec<V3> {
    let f = crate::bodies::Frame::new(xi);
    let mut v = vec![f.xi, f.basis[0] * 0.6 + f.xi * 0.8];
    v.extend(super::fixtures::random_directions(xi.dim(), count, seed));
    v
}

/// Discrete `|Π̃° S^t K|` and its exact `t`-derivative for the graph route
/// with the doubled upper graph on fixed nodes.
pub struct VariationModel<'a> {
    gb: &'a GraphBody,
    params: LpParams,
    planar: PlanarRule,
    sphere: &'a SphereRule,
}

impl<'a> VariationModel<'a> {
    pub fn new(gb: &'a GraphBody, params: &LpParams, res: usize, grading: f64, sphere: &'a SphereRule) -> Result<Self> {
        Ok(Self { gb, params: *params, planar: gb.planar_rule(res, grading)?, sphere })
    }

    fn zonoid(&self, t: f64) -> Result<LpZonoid> {
        graph_zonoid(&self.gb.steiner(t)?, &self.params, &self.planar, GraphForm::UpperDoubled)
    }

    /// `(1/n) Σ wⱼ h^p(vⱼ)^{−n/p}`.
    pub fn volume(&self, t: f64) -> Result<f64> {
        let z = self.zonoid(t)?;
        let e = -(self.params.n as f64) / self.params.p;
        let vals: Vec<f64> = self.sphere.nodes.iter().map(|v| z.hp(v).powf(e)).collect();
        Ok(self.sphere.integrate_values(&vals)? / self.params.n as f64)
    }

    /// `Σ W [∇(h_Γ^p/p)(θ_t)·(∇g−∇f, 0)⟨f_t⟩^{1−p} + ((p−1)/p) h_Γ^p(θ_t)⟨f_t⟩^{−p}⟨g−f⟩]`
    /// with `Γ = Γ̃_p Π̃_p° S^t K` on the sphere nodes.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        let p = self.params.p;
        let z = self.zonoid(t)?;
        let rho: Vec<f64> = self.sphere.nodes.iter().map(|v| z.hp(v).powf(-1.0 / p)).collect();
        let gamma = gamma_zonoid(&rho, self.sphere, &self.params)?;
        let st = self.gb.steiner(t)?;
        let frame = &self.gb.frame;
        let mut acc = crate::numerics::CompensatedSum::new();
        for (y, w) in self.planar.nodes.iter().zip(&self.planar.weights) {
            let (Some(k), Some(c)) = (self.gb.chord(y), st.chord(y)) else { continue };
            let theta = frame.to_world(&-c.df, 1.0);
            let bf = c.bf;
            if !(bf > 0.0) {
                return Err(Error::Representation("nonpositive bracket in the variation integrand".into()));
            }
            let dgrad = frame.to_world(&(k.dg - k.df), 0.0);
            let gmf = k.bg - k.bf;
            let first = gamma.grad_hp_over_p(&theta).dot(&dgrad) * bf.powf(1.0 - p);
            let second = (p - 1.0) / p * gamma.hp(&theta) * bf.powf(-p) * gmf;
            acc.add(w * (first + second));
        }
        Ok(acc.value())
    }

    /// Richardson-extrapolated difference with step `h`: central inside
    /// `(0, 2)`, one-sided at the endpoints.
    pub fn finite_difference(&self, t: f64, h: f64) -> Result<f64> {
        let d = |s: f64| -> Result<f64> {
            if t - s < 0.0 {
                Ok((self.volume(t + s)? - self.volume(t)?) / s)
            } else if t + s > 2.0 {
                Ok((self.volume(t)? - self.volume(t - s)?) / s)
            } else {
                Ok((self.volume(t + s)? - self.volume(t - s)?) / (2.0 * s))
            }
        };
        let (d1, d2) = (d(h)?, d(0.5 * h)?);
        if t - h < 0.0 || t + h > 2.0 {
            Ok(2.0 * d2 - d1)
        } else {
            Ok((4.0 * d2 - d1) / 3.0)
        }
    }
}

/// Why the derivative of `|Π̃° S^t K|` vanishes identically, if it does.
pub fn zero_case(body: &Body, gb: &GraphBody, t: f64, res: usize, grading: f64) -> Result<Option<&'static str>> {
    if let Body::Ellipsoid(e) = body {
        let m = e.matrix() * e.matrix().transpose();
        let n = body.dim();
        let tr = (0..n).map(|i| m[(i, i)]).sum::<f64>() / n as f64;
        let mut iso = true;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { tr } else { 0.0 };
                iso &= (m[(i, j)] - target).abs() <= 1e-12 * tr;
            }
        }
        return Ok(Some(if iso { "ball" } else { "ellipsoid: S^t K is a unimodular image of K" }));
    }
    if t == 1.0 {
        return Ok(Some("t = 1: the profile is even about 1"));
    }
    let rule = gb.planar_rule(res, grading)?;
    let mut gap: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for y in &rule.nodes {
        if let Some(c) = gb.chord(y) {
            gap = gap.max((c.f - c.g).abs()).max((c.df - c.dg).norm());
            scale = scale.max(c.f + c.g);
        }
    }
    Ok((gap <= 1e-12 * scale).then_some("f = g"))
}

/// Analytic derivative against the finite difference of the discrete
/// polar volume, at the planar resolution and its double.
pub fn check_variation(
    body: &Body,
    xi: &UnitVector,
    t: f64,
    params: &LpParams,
    cfg: &VerifyConfig,
    fixture: &str,
) -> Result<VerificationReport> {
    require_symmetric(body, cfg)?;
    if !(0.0..=2.0).contains(&t) {
        return Err(Error::Argument(format!("variation needs t in [0, 2], got {t}")));
    }
    let gb = GraphBody::decompose(body, xi)?;
    let sphere = sphere_rule(body.dim(), cfg.volume_order)?;
    let zero = zero_case(body, &gb, t, cfg.planar_res, cfg.grading)?;
    let mut worst: f64 = 0.0;
    let mut pairs = Vec::new();
    for res in [cfg.planar_res, 2 * cfg.planar_res] {
        let m = VariationModel::new(&gb, params, res, cfg.grading, &sphere)?;
        let rhs = m.derivative(t)?;
        let fd = m.finite_difference(t, 1e-3)?;
        pairs.push((rhs, fd));
        worst = worst.max(match zero {
            Some(_) => rhs.abs().max(fd.abs()),
            None => (rhs - fd).abs() / fd.abs().max(cfg.tol_floor),
        });
    }
    let (rhs, fd) = pairs[0];
    let (kind, tol) = match zero {
        Some(why) => (format!("zero case ({why}); absolute"), cfg.tol_floor),
        None => ("relative".to_string(), 1e-3),
    };
    Ok(report("variation", fixture, body, cfg, params)
        .xi(*xi.v())
        .t(format!("{t}"))
        .detail(format!("{kind}; analytic {rhs:.9e}; difference {fd:.9e}"))
        .outcome(worst, tol))
}

/// At a fixed point `Γ̃_p Π̃_p° K = cK` the derivative at `t = 0⁺` vanishes
/// for every axis. Bodies failing the hypothesis are reported not applicable.
pub fn check_derivative_zero_at_fixed_point(
    body: &Body,
    axes: &[UnitVector],
    params: &LpParams,
    cfg: &VerifyConfig,
    fixed_point_tol: f64,
    fixture: &str,
) -> Result<VerificationReport> {
    let sphere = sphere_rule(body.dim(), cfg.volume_order)?;
    let disc = Discretization::new(sphere.clone()).with_planar(cfg.planar_res, cfg.grading);
    let composed = compose_gamma_pi_polar(body, params, &disc, false)?;
    let (defect, _) = dilation_defect_values(&body.support_at_nodes(&sphere)?, &composed.support_values())?;
    let r = report("derivative_zero", fixture, body, cfg, params).t("0+");
    if defect > fixed_point_tol {
        return Ok(r.not_applicable(format!("dilation defect {defect:.3e} exceeds {fixed_point_tol:.1e}")));
    }
    let mut worst: f64 = 0.0;
    for xi in axes {
        let gb = GraphBody::decompose(body, xi)?;
        let m = VariationModel::new(&gb, params, cfg.planar_res, cfg.grading, &sphere)?;
        worst = worst.max(m.derivative(0.0)?.abs());
    }
    Ok(r.detail(format!("{} axes; dilation defect {defect:.3e}", axes.len())).outcome(worst, cfg.tol_floor))
}
