//! Numerical pass/fail restatements of the symmetrization inequalities, and
//! the fixed-point probe.

pub mod checks;
pub mod fixtures;
pub mod probe;
pub mod report;

use std::str::FromStr;
use std::sync::Arc;

pub use checks::{
    check_convexity, check_derivative_zero_at_fixed_point, check_inclusion, check_section_monotone, check_variation,
    VariationModel,
};
pub use fixtures::{sample_directions, standard_fixtures, Fixture};
pub use probe::{fixed_point_probe, ProbeRow, ProbeTrace};
pub use report::{write_csv, Settings, Status, VerificationReport};

use crate::bodies::{Body, GraphBody, UnitVector};
use crate::error::{Error, Result};
use crate::lp_transforms::LpParams;
use crate::quadrature::{default_order, sphere_rule, DEFAULT_GRADING};
use crate::steiner::{reflect, steiner_compose_check};
use crate::V3;

/// Inclusion, boundary criterion and composition tolerance on exactly
/// represented algebra.
pub const ALGEBRA_TOL: f64 = 1e-9;
/// Dilation defect below which a body counts as a fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-4;

/// Quadrature and tolerance settings for the checks in one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    /// Order of the sphere rule whose nodes sample "for all u" claims.
    pub direction_order: usize,
    /// Order of the sphere rule for volume and centroid integrals.
    pub volume_order: usize,
    pub planar_res: usize,
    /// Base resolution for sampling boundary points.
    pub boundary_res: usize,
    pub grading: f64,
    pub seed: u64,
    pub random_directions: usize,
    pub tol_floor: f64,
}

impl VerifyConfig {
    pub fn for_dim(dim: usize, seed: u64) -> Self {
        let (direction_order, planar_res) = if dim == 2 { (64, 256) } else { (8, 64) };
        Self {
            direction_order,
            volume_order: default_order(dim),
            planar_res,
            boundary_res: if dim == 2 { 64 } else { 16 },
            grading: DEFAULT_GRADING,
            seed,
            random_directions: 64,
            tol_floor: 1e-6,
        }
    }

    pub fn settings(&self) -> Settings {
        Settings { sphere_order: self.volume_order, planar_res: self.planar_res, grading: self.grading, seed: self.seed }
    }

    pub fn directions(&self, dim: usize) -> Result<Vec<V3>> {
        sample_directions(dim, self.direction_order, self.random_directions, self.seed)
    }
}

/// Command-line overrides applied on top of [`VerifyConfig::for_dim`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub sphere_order: Option<usize>,
    pub planar_res: Option<usize>,
    pub grading: Option<f64>,
    pub tol: Option<f64>,
    pub p: Option<f64>,
}

impl Overrides {
    pub fn config(&self, dim: usize, seed: u64) -> VerifyConfig {
        let mut c = VerifyConfig::for_dim(dim, seed);
        if let Some(o) = self.sphere_order {
            c.volume_order = o;
        }
        if let Some(r) = self.planar_res {
            c.planar_res = r;
        }
        if let Some(g) = self.grading {
            c.grading = g;
        }
        if let Some(t) = self.tol {
            c.tol_floor = t;
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Inclusion,
    Monotone,
    Convexity,
    Variation,
    Steiner,
    FixedPoint,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "inclusion" => Suite::Inclusion,
            "monotone" => Suite::Monotone,
            "convexity" => Suite::Convexity,
            "variation" => Suite::Variation,
            "steiner" => Suite::Steiner,
            "fixedpoint" => Suite::FixedPoint,
            "all" => Suite::All,
            _ => return Err(Error::Argument(format!("unknown suite {s:?}"))),
        })
    }
}

impl Suite {
    fn includes(&self, other: Suite) -> bool {
        *self == Suite::All || *self == other
    }
}

pub const INCLUSION_TIMES: [f64; 4] = [0.25, 0.5, 1.0, 1.5];
pub const VARIATION_TIMES: [f64; 3] = [0.0, 0.5, 1.0];

fn skipped(check: &str, f: &Fixture, cfg: &VerifyConfig, why: &str) -> VerificationReport {
    VerificationReport::new(check, &f.name, f.dim(), cfg.settings()).p(f.p).not_applicable(why)
}

fn params_for(f: &Fixture, o: &Overrides) -> Result<LpParams> {
    LpParams::new(f.dim(), o.p.unwrap_or(f.p))
}

/// Runs `suite` over the fixtures in order. Fixtures without a smooth
/// representation are not applicable to the graph-route checks.
pub fn run_suite(suite: Suite, fixtures: &[Fixture], overrides: &Overrides, seed: u64) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    for f in fixtures {
        let cfg = overrides.config(f.dim(), seed);
        let params = params_for(f, overrides)?;
        let graph_checks = [
            (Suite::Inclusion, "inclusion"),
            (Suite::Monotone, "section_monotone"),
            (Suite::Convexity, "convexity"),
            (Suite::Variation, "variation"),
        ];
        if !f.smooth {
            for (s, name) in graph_checks {
                if suite.includes(s) {
                    out.push(skipped(name, f, &cfg, "piecewise-linear body; graph-route checks need a smooth boundary"));
                }
            }
        } else {
            if suite.includes(Suite::Inclusion) {
                out.extend(inclusion_reports(f, &params, &cfg)?);
            }
            if suite.includes(Suite::Monotone) {
                for xi in &f.axes {
                    for z in checks::section_points(&f.body, xi, &params, &cfg)? {
                        let (a, b) = check_section_monotone(&f.body, xi, &z, &params, &cfg, &f.name)?;
                        out.push(a);
                        out.push(b);
                    }
                }
            }
            if suite.includes(Suite::Convexity) {
                for (k, xi) in f.axes.iter().enumerate() {
                    let ys = checks::convexity_directions(xi, 8, seed.wrapping_add(k as u64));
                    let (a, b) = check_convexity(&f.body, xi, &ys, &params, &cfg, &f.name)?;
                    out.push(a);
                    out.push(b);
                }
            }
            if suite.includes(Suite::Variation) {
                for xi in &f.axes {
                    for t in VARIATION_TIMES {
                        out.push(check_variation(&f.body, xi, t, &params, &cfg, &f.name)?);
                    }
                }
            }
        }
        if suite.includes(Suite::Steiner) {
            out.extend(steiner_reports(f, &params, &cfg)?);
        }
        if suite.includes(Suite::FixedPoint) {
            out.extend(fixed_point_reports(f, &params, &cfg)?);
        }
    }
    Ok(out)
}

pub fn inclusion_reports(f: &Fixture, params: &LpParams, cfg: &VerifyConfig) -> Result<Vec<VerificationReport>> {
    let dirs = cfg.directions(f.dim())?;
    let mut out = Vec::new();
    for xi in &f.axes {
        for t in INCLUSION_TIMES {
            let (a, b) = check_inclusion(&f.body, xi, t, params, cfg, &dirs, &f.name)?;
            out.push(a);
            out.push(b);
        }
    }
    Ok(out)
}

/// Volume invariance, endpoint algebra, the reflection identity
/// `S^{2−t}K = σ S^t K` and the composition identity, per axis.
pub fn steiner_reports(f: &Fixture, params: &LpParams, cfg: &VerifyConfig) -> Result<Vec<VerificationReport>> {
    let dim = f.dim();
    let dirs = fixtures::random_directions(dim, if dim == 2 { 32 } else { 12 }, cfg.seed);
    let vrule = sphere_rule(dim, cfg.volume_order)?;
    let exact = match f.body.exact_volume() {
        Some(v) => v,
        None => f.body.volume(&vrule)?,
    };
    let base = |name: &str, xi: &UnitVector| {
        VerificationReport::new(name, &f.name, dim, cfg.settings()).p(params.p).xi(*xi.v())
    };
    let mut out = Vec::new();
    for xi in &f.axes {
        let gb = GraphBody::decompose(&f.body, xi)?;
        let mut vol: f64 = 0.0;
        for t in [0.25, 0.5, 1.0, 1.5, 2.0] {
            let v = gb.steiner(t)?.section_volume(4 * cfg.planar_res, cfg.grading)?;
            vol = vol.max((v / exact - 1.0).abs());
        }
        out.push(base("steiner_volume", xi).t("0.25 0.5 1 1.5 2").outcome(vol, 1e-6));

        let refl = reflect(&f.body, xi)?;
        let (s0, s1, s2) = (gb.steiner(0.0)?, gb.steiner(1.0)?, gb.steiner(2.0)?);
        let mut end: f64 = 0.0;
        for u in &dirs {
            end = end.max((s0.support(u)? - f.body.support(u)?).abs());
            end = end.max((s2.support(u)? - refl.support(u)?).abs());
        }
        for y in &gb.planar_rule(cfg.boundary_res, cfg.grading)?.nodes {
            if let Some(c) = s1.chord(y) {
                end = end.max((c.f - c.g).abs());
            }
        }
        out.push(base("steiner_endpoints", xi).t("0 1 2").outcome(end, ALGEBRA_TOL));

        let sigma = nalgebra::Matrix3::identity() - xi.v() * xi.v().transpose() * 2.0;
        let mut lemma: f64 = 0.0;
        for t in [0.5, 0.25] {
            let (a, b) = (gb.steiner(2.0 - t)?, gb.steiner(t)?);
            for u in &dirs {
                lemma = lemma.max((a.support(u)? - b.support(&(sigma * u))?).abs());
            }
        }
        out.push(base("steiner_reflection", xi).t("0.25 0.5").outcome(lemma, ALGEBRA_TOL));

        for (t1, t2) in [(0.25, 0.75), (0.5, 1.0)] {
            out.push(steiner_compose_check(&f.body, xi, t1, t2, &dirs, cfg.settings(), &f.name)?.p(params.p));
        }
    }
    Ok(out)
}

fn is_ellipsoid(b: &Body) -> bool {
    matches!(b, Body::Ellipsoid(_))
}

/// Sphere order for the probe: the default in the plane, reduced in space
/// where each iterate needs an `O(m²)` discrete polar.
pub fn probe_order(dim: usize) -> usize {
    if dim == 2 {
        default_order(2)
    } else {
        16
    }
}

/// Derivative at a fixed point and a five-step probe. Ellipsoids must stay
/// fixed; other bodies are traced and checked for reproducibility only.
pub fn fixed_point_reports(f: &Fixture, params: &LpParams, cfg: &VerifyConfig) -> Result<Vec<VerificationReport>> {
    let dim = f.dim();
    let mut out = Vec::new();
    let mut axes = f.axes.clone();
    for v in fixtures::random_directions(dim, 16 - axes.len().min(16), cfg.seed ^ 0x5eed) {
        axes.push(UnitVector::new(dim, v)?);
    }
    out.push(check_derivative_zero_at_fixed_point(&f.body, &axes, params, cfg, FIXED_POINT_TOL, &f.name)?);

    let rule = Arc::new(sphere_rule(dim, probe_order(dim))?);
    let settings = Settings { sphere_order: rule.order, ..cfg.settings() };
    let base = |name: &str| VerificationReport::new(name, &f.name, dim, settings).p(params.p).t("0:5");
    let trace = fixed_point_probe(&f.body, params, 5, &rule)?;
    let aborted = trace.aborted.clone().map(|a| format!("; aborted: {a}")).unwrap_or_default();
    if is_ellipsoid(&f.body) {
        out.push(base("probe_dilation").detail(aborted.clone()).outcome(trace.max_dilation_defect(), FIXED_POINT_TOL));
        out.push(base("probe_ellipsoid").detail(aborted).outcome(trace.max_ellipsoid_defect(), 1e-5));
    } else {
        let again = fixed_point_probe(&f.body, params, 5, &rule)?;
        let same = trace.to_csv("") == again.to_csv("");
        out.push(base("probe_reproducible").detail(format!(
            "exploratory; max dilation defect {:.3e}; max ellipsoid defect {:.3e}{aborted}",
            trace.max_dilation_defect(),
            trace.max_ellipsoid_defect()
        ))
        .outcome(if same { 0.0 } else { 1.0 }, 0.0));
    }
    out.push(base("probe_volume").outcome(trace.volume_drift(), 1e-6));
    Ok(out)
}
