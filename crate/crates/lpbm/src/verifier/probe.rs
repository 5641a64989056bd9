//! Iterates `K ↦ s·Γ_p Π_p° K` at fixed volume and records how far each
//! iterate is from a dilate of its image and from an ellipsoid.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::bodies::{Body, Ellipsoid, SupportSampled};
use crate::error::{Error, Result};
use crate::lp_transforms::{
    dilation_defect_values, ellipsoid_defect, gamma_of_polar, pi_polar_body, Discretization, LpParams,
};
use crate::M3;
use crate::quadrature::{Interpolation, SphereRule};

pub const TRACE_VERSION_LINE: &str = "# lpbm probe trace v1";
pub const TRACE_COLUMNS: &str = "iterate,dilation_defect,ellipsoid_defect,scale,volume";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRow {
    pub iterate: usize,
    /// Dilation defect of `Γ_p Π_p° K_i` against `K_i`.
    pub dilation_defect: f64,
    pub ellipsoid_defect: f64,
    /// Factor applied to `Γ_p Π_p° K_i` to form `K_{i+1}`.
    pub scale: f64,
    /// `|K_i|`.
    pub volume: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProbeTrace {
    pub rows: Vec<ProbeRow>,
    /// Set when an iterate lost the origin from its interior.
    pub aborted: Option<String>,
}

impl ProbeTrace {
    pub fn to_csv(&self, header: &str) -> String {
        let mut s = String::new();
        s.push_str(TRACE_VERSION_LINE);
        s.push('\n');
        for line in header.lines() {
            let _ = writeln!(s, "# {line}");
        }
        s.push_str(TRACE_COLUMNS);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:.12e},{:.12e},{:.15e},{:.15e}",
                r.iterate, r.dilation_defect, r.ellipsoid_defect, r.scale, r.volume
            );
        }
        if let Some(a) = &self.aborted {
            let _ = writeln!(s, "# aborted: {a}");
        }
        s
    }

    pub fn max_dilation_defect(&self) -> f64 {
        self.rows.iter().map(|r| r.dilation_defect).fold(0.0, f64::max)
    }

    pub fn max_ellipsoid_defect(&self) -> f64 {
        self.rows.iter().map(|r| r.ellipsoid_defect).fold(0.0, f64::max)
    }

    /// Largest relative deviation of `|K_i|` from `|K₀|`.
    pub fn volume_drift(&self) -> f64 {
        let v0 = match self.rows.first() {
            Some(r) => r.volume,
            None => return 0.0,
        };
        self.rows.iter().map(|r| (r.volume / v0 - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Runs `iters` steps from `k0`, tabulated on `rule`. Ellipsoids and
/// polytopes enter as they are; other bodies are sampled. For `p = 2` every
/// image is an ellipsoid and is carried exactly; otherwise iterates are
/// sampled support functions whose bodies are their Wulff polytopes.
pub fn fixed_point_probe(k0: &Body, params: &LpParams, iters: usize, rule: &Arc<SphereRule>) -> Result<ProbeTrace> {
    let n = params.n as f64;
    let disc = Discretization::shared(rule.clone());
    let mut k = match k0 {
        Body::Ellipsoid(_) | Body::Polytope(_) => k0.clone(),
        _ => Body::Sampled(SupportSampled::new(rule.clone(), k0.support_at_nodes(rule)?, Interpolation::FirstOrder, true)?),
    };
    let volume_of = |b: &Body| b.exact_volume().ok_or_else(|| Error::Evaluation("iterate has no volume".into()));
    let v0 = volume_of(&k)?;
    let mut trace = ProbeTrace::default();
    for i in 0..iters {
        let step = (|| -> Result<(f64, f64, f64, Body, f64)> {
            let volume = volume_of(&k)?;
            let hk = k.support_at_nodes(rule)?;
            let polar = pi_polar_body(&k, params, &disc, true)?;
            let z = gamma_of_polar(&polar, true)?;
            let (dd, _) = dilation_defect_values(&hk, &z.support_at(rule))?;
            let (ed, _) = ellipsoid_defect(&hk, rule)?;
            let image = match z.moment() {
                Some(m) => Body::Ellipsoid(Ellipsoid::new(params.n, sqrt_psd(m, params.n)?)?),
                None => Body::Sampled(SupportSampled::new(rule.clone(), z.support_at(rule), Interpolation::FirstOrder, true)?),
            };
            let s = (v0 / volume_of(&image)?).powf(1.0 / n);
            Ok((dd, ed, volume, image.scaled(s)?, s))
        })();
        match step {
            Ok((dd, ed, volume, next, s)) => {
                trace.rows.push(ProbeRow { iterate: i, dilation_defect: dd, ellipsoid_defect: ed, scale: s, volume });
                k = next;
            }
            Err(e) => {
                trace.aborted = Some(e.to_string());
                break;
            }
        }
    }
    Ok(trace)
}

/// Symmetric square root of a positive semidefinite moment matrix.
fn sqrt_psd(m: &M3, dim: usize) -> Result<M3> {
    let mut a = *m;
    if dim == 2 {
        a[(2, 2)] = 1.0;
    }
    let eig = a.symmetric_eigen();
    if eig.eigenvalues.iter().any(|l| !(*l > 0.0)) {
        return Err(Error::Domain("moment matrix is not positive definite".into()));
    }
    let d = M3::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    Ok(eig.eigenvectors * d * eig.eigenvectors.transpose())
}
