use std::sync::{Arc, OnceLock};

use super::Polytope;
use crate::error::{Error, Result};
use crate::quadrature::{Interpolation, SphereRule};
use crate::V3;

/// Support values of a body tabulated at the nodes of a sphere rule.
///
/// Between nodes the support is read by interpolation. The body itself is
/// taken to be the Wulff polytope `⋂ {x : v·x ≤ h(v)}` over the nodes, which
/// is what [`gauge`](Self::gauge) and [`wulff`](Self::wulff) evaluate.
#[derive(Debug, Clone)]
pub struct SupportSampled {
    rule: Arc<SphereRule>,
    pub values: Vec<f64>,
    pub interpolation: Interpolation,
    pub symmetric: bool,
    wulff: OnceLock<Polytope>,
}

impl SupportSampled {
    pub fn new(rule: Arc<SphereRule>, values: Vec<f64>, interpolation: Interpolation, symmetric: bool) -> Result<Self> {
        if values.len() != rule.len() {
            return Err(Error::Argument(format!(
                "{} support values for a rule with {} nodes",
                values.len(),
                rule.len()
            )));
        }
        if let Some(k) = values.iter().position(|h| !(*h > 0.0) || !h.is_finite()) {
            return Err(Error::Domain(format!(
                "support value {} at node {k} is not positive: origin not interior",
                values[k]
            )));
        }
        if symmetric {
            for k in 0..values.len() {
                let a = rule.antipode(k);
                if (values[k] - values[a]).abs() > 1e-9 * values[k].max(1.0) {
                    return Err(Error::Validation(format!(
                        "flagged symmetric but nodes {k} and {a} differ: {} vs {}",
                        values[k], values[a]
                    )));
                }
            }
        }
        Ok(Self { rule, values, interpolation, symmetric, wulff: OnceLock::new() })
    }

    pub fn dim(&self) -> usize {
        self.rule.dim
    }

    pub fn rule(&self) -> &SphereRule {
        &self.rule
    }

    pub fn rule_arc(&self) -> &Arc<SphereRule> {
        &self.rule
    }

    pub fn support(&self, u: &V3) -> f64 {
        self.rule.interpolate(&self.values, u, self.interpolation) * u.norm()
    }

    /// Polytope cut out by the tabulated supporting halfspaces.
    pub fn wulff(&self) -> Result<&Polytope> {
        if let Some(p) = self.wulff.get() {
            return Ok(p);
        }
        let p = Polytope::from_halfspaces(self.dim(), &self.rule.nodes, &self.values)?;
        Ok(self.wulff.get_or_init(|| p))
    }

    pub fn gauge(&self, x: &V3) -> Result<f64> {
        Ok(self.wulff()?.gauge(x))
    }

    /// Rescales all support values by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(
            self.rule.clone(),
            self.values.iter().map(|h| h * s).collect(),
            self.interpolation,
            self.symmetric,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::sphere_rule;
    use std::f64::consts::PI;

    #[test]
    fn wulff_of_sampled_ball_approaches_ball() {
        let r = Arc::new(sphere_rule(2, 256).unwrap());
        let s = SupportSampled::new(r.clone(), vec![1.0; 256], Interpolation::FirstOrder, true).unwrap();
        let v = s.wulff().unwrap().volume();
        // circumscribed regular 256-gon
        let exact = 256.0 * (PI / 256.0).tan();
        assert!((v - exact).abs() < 1e-12);
        assert!((s.gauge(&V3::new(0.5, 0.0, 0.0)).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_and_asymmetric() {
        let r = Arc::new(sphere_rule(2, 8).unwrap());
        let mut v = vec![1.0; 8];
        v[3] = 0.0;
        assert!(SupportSampled::new(r.clone(), v, Interpolation::Nearest, false).is_err());
        let mut v = vec![1.0; 8];
        v[0] = 2.0;
        assert!(SupportSampled::new(r, v, Interpolation::Nearest, true).is_err());
    }

    #[test]
    fn wulff_3d_volume() {
        let r = Arc::new(sphere_rule(3, 16).unwrap());
        let s = SupportSampled::new(r.clone(), vec![1.0; r.len()], Interpolation::FirstOrder, true).unwrap();
        let v = s.wulff().unwrap().volume();
        assert!(v > 4.0 * PI / 3.0 && v < 4.0 * PI / 3.0 * 1.05);
    }
}
