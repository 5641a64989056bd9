use std::sync::Arc;

use lpbm::bodies::{Body, Ellipsoid, GraphBody, Polytope, UnitVector};
use lpbm::lp_transforms::{
    compose_gamma_pi_polar, dilation_defect, ellipsoid_defect, gamma_body, gamma_p_gradient, gamma_p_support, pi_body,
    pi_p_support, pi_zonoid, Discretization, GraphForm, LpParams, Route,
};
use lpbm::quadrature::sphere_rule;
use lpbm::V3;

fn ellipse() -> Ellipsoid {
    Ellipsoid::from_rows(2, &[1.0, 0.0, 0.0, 2.0]).unwrap()
}

#[test]
fn ball_is_fixed_by_both_operators() {
    for (n, order) in [(2, 512), (3, 32)] {
        let rule = Arc::new(sphere_rule(n, order).unwrap());
        let disc = Discretization::shared(rule.clone());
        let ball = Body::ball(n, 1.0).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let params = LpParams::new(n, p).unwrap();
            let pi = pi_body(&ball, &params, &disc, true).unwrap();
            let gamma = gamma_body(&ball, &params, &rule, true).unwrap();
            for h in pi.support_values().into_iter().chain(gamma.support_values()) {
                assert!((h - 1.0).abs() < 1e-4, "n={n} p={p} h={h}");
            }
        }
    }
}

#[test]
fn cube_projection_body_is_a_ball() {
    let params = LpParams::new(3, 2.0).unwrap();
    let disc = Discretization::new(sphere_rule(3, 8).unwrap());
    let z = pi_zonoid(&Body::Polytope(Polytope::cube(3, 1.0).unwrap()), &params, &disc, Route::Facet).unwrap();
    for u in &disc.sphere.nodes {
        assert!((z.h(u) - 8f64.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn square_graph_route_needs_a_generic_axis() {
    let params = LpParams::new(2, 2.0).unwrap();
    let disc = Discretization::new(sphere_rule(2, 256).unwrap());
    let cube = Body::Polytope(Polytope::cube(2, 1.0).unwrap());
    let gb = GraphBody::decompose(&cube, &UnitVector::new(2, V3::new(0.3, 1.0, 0.0)).unwrap()).unwrap();
    let z = pi_zonoid(&Body::Graph(gb), &params, &disc, Route::Graph(GraphForm::Both)).unwrap();
    for u in &disc.sphere.nodes {
        assert!((z.h(u) - 2.0).abs() < 1e-3);
    }
}

#[test]
fn routes_agree_on_ellipse() {
    let e = ellipse();
    let disc = Discretization::new(sphere_rule(2, 1024).unwrap());
    let gb = GraphBody::decompose(&Body::Ellipsoid(e.clone()), &UnitVector::axis(2, 0).unwrap()).unwrap();
    let verts: Vec<V3> = (0..4096)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / 4096.0;
            e.matrix() * V3::new(a.cos(), a.sin(), 0.0)
        })
        .collect();
    let poly = Body::Polytope(Polytope::from_vertices(2, &verts).unwrap());
    for p in [1.5, 2.0, 3.0] {
        let params = LpParams::new(2, p).unwrap();
        let a = pi_zonoid(&Body::Ellipsoid(e.clone()), &params, &disc, Route::Pushforward).unwrap();
        let b = pi_zonoid(&Body::Graph(gb.clone()), &params, &disc, Route::Graph(GraphForm::Both)).unwrap();
        let c = pi_zonoid(&poly, &params, &disc, Route::Facet).unwrap();
        for u in disc.sphere.nodes.iter().step_by(37) {
            let h = a.h(u);
            assert!((b.h(u) / h - 1.0).abs() < 1e-4, "graph p={p}");
            assert!((c.h(u) / h - 1.0).abs() < 1e-4, "facet p={p}");
        }
    }
}

#[test]
fn normalized_support_scales_by_constants() {
    let e = Body::Ellipsoid(ellipse());
    let params = LpParams::new(2, 3.0).unwrap();
    let rule = sphere_rule(2, 512).unwrap();
    let disc = Discretization::new(rule.clone());
    let x = V3::new(0.3, -0.7, 0.0);
    let raw = pi_p_support(&e, &x, &params, &disc, false).unwrap();
    let norm = pi_p_support(&e, &x, &params, &disc, true).unwrap();
    assert!((norm.powi(3) * params.d() / raw.powi(3) - 1.0).abs() < 1e-12);
    let raw = gamma_p_support(&e, &x, &params, &rule, false).unwrap();
    let norm = gamma_p_support(&e, &x, &params, &rule, true).unwrap();
    let vol = std::f64::consts::PI * 2.0;
    assert!((norm.powi(3) * params.b() * vol / raw.powi(3) - 1.0).abs() < 1e-6);
}

#[test]
fn gamma_gradient_matches_finite_difference_on_polytope() {
    let params = LpParams::new(3, 2.5).unwrap();
    let rule = sphere_rule(3, 16).unwrap();
    let body = Body::Polytope(Polytope::cube(3, 1.0).unwrap());
    let x = V3::new(0.4, -0.2, 0.9);
    let g = gamma_p_gradient(&body, &x, &params, &rule).unwrap();
    let h = 1e-6;
    for i in 0..3 {
        let mut d = V3::zeros();
        d[i] = h;
        let hp = |y: V3| gamma_p_support(&body, &y, &params, &rule, false).unwrap().powf(2.5) / 2.5;
        let fd = (hp(x + d) - hp(x - d)) / (2.0 * h);
        assert!((fd - g[i]).abs() < 1e-6 * g.norm(), "component {i}: {fd} vs {}", g[i]);
    }
}

#[test]
fn ellipse_is_a_fixed_point_up_to_dilation() {
    let params = LpParams::new(2, 2.0).unwrap();
    let rule = sphere_rule(2, 512).unwrap();
    let disc = Discretization::new(rule.clone());
    let e = Body::Ellipsoid(ellipse());
    let composed = compose_gamma_pi_polar(&e, &params, &disc, false).unwrap().to_body().unwrap();
    let (defect, _) = dilation_defect(&e, &composed, &rule).unwrap();
    assert!(defect < 1e-6, "{defect}");
    let (ell, _) = ellipsoid_defect(&composed.support_at_nodes(&rule).unwrap(), &rule).unwrap();
    assert!(ell < 1e-6);
}

#[test]
fn square_is_not_a_dilate_of_its_image() {
    let params = LpParams::new(2, 2.0).unwrap();
    let rule = sphere_rule(2, 512).unwrap();
    let disc = Discretization::new(rule.clone());
    let c = Body::Polytope(Polytope::cube(2, 1.0).unwrap());
    let composed = compose_gamma_pi_polar(&c, &params, &disc, false).unwrap().to_body().unwrap();
    let (defect, _) = dilation_defect(&c, &composed, &rule).unwrap();
    assert!(defect > 1e-2, "{defect}");
}

#[test]
fn dimension_mismatch_is_rejected() {
    let params = LpParams::new(3, 2.0).unwrap();
    let disc = Discretization::new(sphere_rule(3, 4).unwrap());
    assert!(pi_zonoid(&Body::Ellipsoid(ellipse()), &params, &disc, Route::Auto).is_err());
    assert!(LpParams::new(2, 1.0).is_err());
    assert!(LpParams::new(4, 2.0).is_err());
}
