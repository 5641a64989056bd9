//! Continuous Steiner symmetrization `S_ξ^t`, `t ∈ [0, 2]`: each chord
//! parallel to `ξ` slides so that its midpoint moves from `c_y` to
//! `(1−t)c_y`. `t = 1` is classical Steiner symmetrization and `t = 2` the
//! reflection in `ξ⊥`.

use crate::bodies::{Body, Chord, Ellipsoid, GraphBody, Polytope, UnitVector};
use crate::error::{Error, Result};
use crate::verifier::report::{Settings, VerificationReport};
use crate::{M3, V2, V3};

/// `S^t K` together with its source decomposition.
#[derive(Debug, Clone)]
pub struct SteinerPath {
    pub source: GraphBody,
    pub t: f64,
    body: GraphBody,
}

impl SteinerPath {
    pub fn new(source: GraphBody, t: f64) -> Result<Self> {
        let body = source.steiner(t)?;
        Ok(Self { source, t, body })
    }

    pub fn body(&self) -> &GraphBody {
        &self.body
    }

    /// `f_t = (1−t/2)f + (t/2)g` and `g_t = (1−t/2)g + (t/2)f`, with gradients.
    pub fn chord(&self, y: &V2) -> Option<Chord> {
        self.body.chord(y)
    }

    /// `θ_t(y) = (−∇f_t(y), 1)` in world coordinates.
    pub fn theta(&self, y: &V2) -> Option<V3> {
        self.body.chord(y).map(|c| self.body.frame.to_world(&-c.df, 1.0))
    }
}

/// `S_ξ^t K` as a graph body.
pub fn steiner_t(body: &Body, xi: &UnitVector, t: f64) -> Result<GraphBody> {
    if !(0.0..=2.0).contains(&t) {
        return Err(Error::Argument(format!("Steiner parameter {t} outside [0, 2]")));
    }
    GraphBody::decompose(body, xi)?.steiner(t)
}

fn reflection(xi: &UnitVector) -> M3 {
    M3::identity() - xi.v() * xi.v().transpose() * 2.0
}

/// Reflection in `ξ⊥`. Ellipsoids and polytopes stay in their
/// representation; other bodies become graph bodies.
pub fn reflect(body: &Body, xi: &UnitVector) -> Result<Body> {
    if xi.dim() != body.dim() {
        return Err(Error::Argument("axis dimension does not match body".into()));
    }
    let r = reflection(xi);
    match body {
        Body::Ellipsoid(e) => Ok(Body::Ellipsoid(Ellipsoid::new(e.dim, r * e.matrix())?)),
        Body::Polytope(p) => {
            let v: Vec<V3> = p.vertices.iter().map(|x| r * x).collect();
            Ok(Body::Polytope(Polytope::from_vertices(p.dim, &v)?))
        }
        _ => Ok(Body::Graph(GraphBody::decompose(body, xi)?.reflect())),
    }
}

/// Compares `S^λ S^{t₁} K` with `S^{t₂} K` for `λ = 1 − (1−t₂)/(1−t₁)` by the
/// largest support difference over `dirs`.
pub fn steiner_compose_check(
    body: &Body,
    xi: &UnitVector,
    t1: f64,
    t2: f64,
    dirs: &[V3],
    settings: Settings,
    fixture: &str,
) -> Result<VerificationReport> {
    if !(0.0 < t1 && t1 < t2 && t2 <= 1.0) {
        return Err(Error::Argument(format!("need 0 < t1 < t2 ≤ 1, got t1 = {t1}, t2 = {t2}")));
    }
    let lambda = 1.0 - (1.0 - t2) / (1.0 - t1);
    let g = GraphBody::decompose(body, xi)?;
    let lhs = g.steiner(t1)?.steiner(lambda)?;
    let rhs = g.steiner(t2)?;
    let mut worst: f64 = 0.0;
    for u in dirs {
        worst = worst.max((lhs.support(u)? - rhs.support(u)?).abs());
    }
    Ok(VerificationReport::new("steiner_compose", fixture, body.dim(), settings)
        .xi(*xi.v())
        .t(format!("{t1}->{t2}"))
        .detail(format!("lambda={lambda:.6}"))
        .outcome(worst, 1e-9))
}

/// Relative sup residual of the weighted least-squares fit of the chord
/// midpoints `c_y = (f−g)/2` by an affine function of `y`, over the nodes of
/// a base rule, normalized by the largest half-length.
pub fn midpoint_planarity_defect(body: &Body, xi: &UnitVector, resolution: usize, grading: f64) -> Result<f64> {
    let g = GraphBody::decompose(body, xi)?;
    let rule = g.planar_rule(resolution, grading)?;
    let k = if body.dim() == 2 { 2 } else { 3 };
    let mut rows = Vec::new();
    let mut lmax: f64 = 0.0;
    for (y, w) in rule.nodes.iter().zip(&rule.weights) {
        if let Some(c) = g.chord(y) {
            lmax = lmax.max(0.5 * (c.f + c.g));
            rows.push((*y, w.sqrt(), 0.5 * (c.f - c.g)));
        }
    }
    if rows.len() < k || !(lmax > 0.0) {
        return Err(Error::Evaluation("base rule has too few interior chords".into()));
    }
    let mut a = nalgebra::DMatrix::<f64>::zeros(rows.len(), k);
    let mut b = nalgebra::DVector::<f64>::zeros(rows.len());
    for (r, (y, sw, c)) in rows.iter().enumerate() {
        a[(r, 0)] = *sw;
        a[(r, 1)] = sw * y[0];
        if k == 3 {
            a[(r, 2)] = sw * y[1];
        }
        b[r] = sw * c;
    }
    let sol = a.svd(true, true).solve(&b, 1e-14).map_err(|e| Error::Evaluation(e.to_string()))?;
    let resid = rows
        .iter()
        .map(|(y, _, c)| {
            let fit = sol[0] + sol[1] * y[0] + if k == 3 { sol[2] * y[1] } else { 0.0 };
            (c - fit).abs()
        })
        .fold(0.0, f64::max);
    Ok(resid / lmax)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::LensParams;

    #[test]
    fn triangle_symmetral() {
        let tri = Polytope::from_vertices(
            2,
            &[V3::new(-0.3, -0.2, 0.0), V3::new(0.7, -0.2, 0.0), V3::new(-0.3, 0.8, 0.0)],
        )
        .unwrap();
        let xi = UnitVector::axis(2, 1).unwrap();
        let s = steiner_t(&Body::Polytope(tri), &xi, 1.0).unwrap();
        // f = 0.5 − x and g = 0.2 over [−0.3, 0.7]
        for x in [-0.2, 0.0, 0.3, 0.6] {
            let c = s.chord(&V2::new(x, 0.0)).unwrap();
            assert!((c.f - c.g).abs() < 1e-15);
            assert!((c.f - (0.7 - x) / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn reflection_involution() {
        let e = Body::Ellipsoid(Ellipsoid::from_rows(2, &[1.0, 0.4, 0.1, 2.0]).unwrap());
        let xi = UnitVector::new(2, V3::new(1.0, 2.0, 0.0)).unwrap();
        let twice = reflect(&reflect(&e, &xi).unwrap(), &xi).unwrap();
        let u = V3::new(0.6, 0.8, 0.0);
        assert!((twice.support(&u).unwrap() - e.support(&u).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn ellipse_midpoints_are_affine_and_lens_is_not() {
        let e = Body::Ellipsoid(Ellipsoid::from_rows(2, &[1.0, 0.5, 0.0, 1.0]).unwrap());
        let xi = UnitVector::axis(2, 1).unwrap();
        assert!(midpoint_planarity_defect(&e, &xi, 256, 2.0).unwrap() < 1e-12);
        let lens = Body::Graph(crate::bodies::GraphBody::lens(LensParams::standard(2)).unwrap());
        let xi = UnitVector::axis(2, 0).unwrap();
        assert!(midpoint_planarity_defect(&lens, &xi, 256, 2.0).unwrap() > 1e-3);
    }
}
