use std::sync::Arc;

use proptest::prelude::*;

use lpbm::bodies::{Body, Ellipsoid, GraphBody, Polytope, UnitVector};
use lpbm::lp_transforms::{ellipsoid_zonoid, gamma_p_zonoid, pi_zonoid, Discretization, LpParams, LpZonoid, Route};
use lpbm::quadrature::sphere_rule;
use lpbm::steiner::reflect;
use lpbm::verifier::fixtures::random_symmetric_polytope;
use lpbm::{M3, V3};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

fn vec2() -> impl Strategy<Value = V3> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| V3::new(a, b, 0.0)).prop_filter("nonzero", |v| v.norm() > 1e-3)
}

fn vec3() -> impl Strategy<Value = V3> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b, c)| V3::new(a, b, c)).prop_filter("nonzero", |v| v.norm() > 1e-3)
}

fn angle() -> impl Strategy<Value = f64> {
    0.0..std::f64::consts::PI
}

/// `R(a)·diag(s1, s2)`, so the ellipse is well conditioned and origin-centered.
fn ellipse() -> impl Strategy<Value = Ellipsoid> {
    (0.5..2.0f64, 0.5..2.0f64, angle()).prop_map(|(s1, s2, a)| {
        let (c, s) = (a.cos(), a.sin());
        Ellipsoid::from_rows(2, &[c * s1, -s * s2, s * s1, c * s2]).unwrap()
    })
}

fn ellipsoid3() -> impl Strategy<Value = Ellipsoid> {
    (prop::array::uniform9(-0.4..0.4f64), 0.7..1.5f64).prop_map(|(m, d)| {
        let a = M3::from_row_slice(&m) + M3::identity() * d;
        Ellipsoid::new(3, a).unwrap()
    })
}

fn polytope(dim: usize) -> impl Strategy<Value = Polytope> {
    (any::<u64>(), 4usize..12).prop_map(move |(seed, count)| random_symmetric_polytope(dim, count, seed).unwrap())
}

fn zonoid(dim: usize) -> impl Strategy<Value = LpZonoid> {
    let dirs = if dim == 2 { prop::collection::vec(vec2(), 3..8).boxed() } else { prop::collection::vec(vec3(), 4..8).boxed() };
    (dirs, 1.1..5.0f64).prop_map(move |(d, p)| {
        let w = d.iter().map(|v| 0.5 + v.norm()).collect();
        LpZonoid::new(dim, p, d, w).unwrap()
    })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn check_support_axioms(body: &Body, u: &V3, v: &V3, lambda: f64) -> Result<(), TestCaseError> {
    let hu = body.support(u).unwrap();
    prop_assert!(rel(body.support(&(u * lambda)).unwrap(), lambda * hu) < 1e-10, "homogeneity");
    prop_assert!(body.support(&(u + v)).unwrap() <= hu + body.support(v).unwrap() + 1e-10, "sublinearity");
    prop_assert!(rel(body.support(&-u).unwrap(), hu) < 1e-10, "evenness");
    Ok(())
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn ellipse_support_is_sublinear_and_even(e in ellipse(), u in vec2(), v in vec2(), l in 0.1..10.0f64) {
        check_support_axioms(&Body::Ellipsoid(e), &u, &v, l)?;
    }

    #[test]
    fn ellipsoid_support_is_sublinear_and_even(e in ellipsoid3(), u in vec3(), v in vec3(), l in 0.1..10.0f64) {
        check_support_axioms(&Body::Ellipsoid(e), &u, &v, l)?;
    }

    #[test]
    fn polytope_support_is_sublinear_and_even(p in polytope(2), q in polytope(3), u in vec3(), v in vec3(), l in 0.1..10.0f64) {
        let (u2, v2) = (V3::new(u[0], u[1], 0.0), V3::new(v[0], v[1], 0.0));
        if u2.norm() > 1e-3 && v2.norm() > 1e-3 {
            check_support_axioms(&Body::Polytope(p), &u2, &v2, l)?;
        }
        check_support_axioms(&Body::Polytope(q), &u, &v, l)?;
    }

    #[test]
    fn zonoid_support_is_sublinear_and_even(z in zonoid(3), u in vec3(), v in vec3(), l in 0.1..10.0f64) {
        let hu = z.h(&u);
        prop_assert!(rel(z.h(&(u * l)), l * hu) < 1e-10);
        prop_assert!(z.h(&(u + v)) <= hu + z.h(&v) + 1e-10);
        prop_assert!(rel(z.h(&-u), hu) < 1e-12);
    }

    #[test]
    fn radial_and_gauge_are_reciprocal(e in ellipsoid3(), p in polytope(3), u in vec3()) {
        for b in [Body::Ellipsoid(e), Body::Polytope(p)] {
            let r = b.radial(&u).unwrap();
            prop_assert!(rel(r * b.gauge(&u).unwrap(), 1.0) < 1e-10);
            prop_assert!(rel(b.gauge(&(u * r)).unwrap(), 1.0) < 1e-10);
        }
    }

    #[test]
    fn support_is_reciprocal_polar_radius(e in ellipsoid3(), p in polytope(3), u in vec3()) {
        let rule = sphere_rule(3, 8).unwrap();
        for b in [Body::Ellipsoid(e), Body::Polytope(p)] {
            let polar = b.polar(&rule).unwrap();
            prop_assert!(rel(b.support(&u).unwrap(), 1.0 / polar.radial(&u).unwrap()) < 1e-9);
        }
    }

    #[test]
    fn pi_is_contravariant_on_ellipses(e in ellipse(), p in 1.1..5.0f64, x in vec2()) {
        let rule = sphere_rule(2, 2048).unwrap();
        let params = LpParams::new(2, p).unwrap();
        let z = ellipsoid_zonoid(&e, &params, &rule).unwrap();
        let h = (z.hp(&x) / params.d()).powf(1.0 / p);
        let expect = e.abs_det().powf(1.0 / p) * (e.inverse() * x).norm();
        prop_assert!(rel(h, expect) < 1e-5, "{h} vs {expect}");
    }

    #[test]
    fn gamma_is_covariant_on_ellipses(e in ellipse(), p in 1.1..5.0f64, x in vec2()) {
        let rule = sphere_rule(2, 512).unwrap();
        let params = LpParams::new(2, p).unwrap();
        let z = gamma_p_zonoid(&Body::Ellipsoid(e.clone()), &params, &rule, true).unwrap();
        let expect = (e.matrix().transpose() * x).norm();
        prop_assert!(rel(z.h(&x), expect) < 1e-5, "{} vs {expect}", z.h(&x));
    }

    #[test]
    fn steiner_preserves_ellipse_area(e in ellipse(), a in angle(), t in 0.0..2.0f64) {
        let xi = UnitVector::new(2, V3::new(a.cos(), a.sin(), 0.0)).unwrap();
        let gb = GraphBody::decompose(&Body::Ellipsoid(e.clone()), &xi).unwrap();
        let v = gb.steiner(t).unwrap().section_volume(256, 2.0).unwrap();
        prop_assert!(rel(v, e.volume()) < 1e-6, "{v} vs {}", e.volume());
    }

    #[test]
    fn steiner_endpoints(e in ellipse(), a in angle(), u in vec2()) {
        let xi = UnitVector::new(2, V3::new(a.cos(), a.sin(), 0.0)).unwrap();
        let body = Body::Ellipsoid(e);
        let gb = GraphBody::decompose(&body, &xi).unwrap();
        let refl = reflect(&body, &xi).unwrap();
        prop_assert!((gb.steiner(0.0).unwrap().support(&u).unwrap() - body.support(&u).unwrap()).abs() < 1e-9);
        prop_assert!((gb.steiner(2.0).unwrap().support(&u).unwrap() - refl.support(&u).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn steiner_reflection_identity(e in ellipse(), a in angle(), t in 0.0..1.0f64, u in vec2()) {
        let xi = UnitVector::new(2, V3::new(a.cos(), a.sin(), 0.0)).unwrap();
        let gb = GraphBody::decompose(&Body::Ellipsoid(e), &xi).unwrap();
        let sigma = M3::identity() - xi.v() * xi.v().transpose() * 2.0;
        let lhs = gb.steiner(2.0 - t).unwrap().support(&u).unwrap();
        let rhs = gb.steiner(t).unwrap().support(&(sigma * u)).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9, "{lhs} vs {rhs}");
    }

    #[test]
    fn polytope_pi_matches_scaling(p in polytope(3), s in 0.5..2.0f64, x in vec3(), e in 1.1..4.0f64) {
        let params = LpParams::new(3, e).unwrap();
        let disc = Discretization::new(sphere_rule(3, 4).unwrap());
        let a = pi_zonoid(&Body::Polytope(p.clone()), &params, &disc, Route::Facet).unwrap();
        let b = pi_zonoid(&Body::Polytope(p).scaled(s).unwrap(), &params, &disc, Route::Facet).unwrap();
        // Π̃_p(sK) = s^{(n−p)/p} Π̃_p K
        prop_assert!(rel(b.h(&x), s.powf((3.0 - e) / e) * a.h(&x)) < 1e-9);
    }
}

#[test]
fn shared_rule_is_reused() {
    let rule = Arc::new(sphere_rule(2, 64).unwrap());
    let disc = Discretization::shared(rule.clone());
    assert!(Arc::ptr_eq(&rule, &disc.sphere));
}
