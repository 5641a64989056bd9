use std::sync::Arc;

use lpbm::bodies::{Body, Ellipsoid, GraphBody, Polytope, QuarticGauge, UnitVector};
use lpbm::io::{body_file_from_json, body_file_to_json, fixture_to_file, fixture_from_file, BodyFile};
use lpbm::lp_transforms::LpParams;
use lpbm::quadrature::sphere_rule;
use lpbm::steiner::steiner_compose_check;
use lpbm::verifier::fixtures::{random_directions, random_symmetric_polytope};
use lpbm::verifier::report::Settings;
use lpbm::verifier::{fixed_point_probe, run_suite, standard_fixtures, write_csv, Fixture, Overrides, Status, Suite};
use lpbm::{M3, V3};

fn small() -> Overrides {
    Overrides { sphere_order: Some(256), planar_res: Some(64), ..Overrides::default() }
}

fn ellipse_fixture() -> Fixture {
    Fixture::new("ellipse", Body::Ellipsoid(Ellipsoid::from_rows(2, &[1.0, 0.3, 0.0, 1.5]).unwrap()), 2.0, 7).unwrap()
}

fn quartic_fixture() -> Fixture {
    let q = QuarticGauge::new(2, M3::identity(), vec![(V3::new(1.0, 0.0, 0.0), 0.5)]).unwrap();
    let gb = GraphBody::from_quartic(q, &UnitVector::axis(2, 1).unwrap()).unwrap();
    Fixture::new("quartic", Body::Graph(gb), 2.5, 7).unwrap()
}

#[test]
fn standard_fixture_set_has_twelve_smooth_bodies() {
    let f = standard_fixtures(7).unwrap();
    assert_eq!(f.len(), 12);
    assert!(f.iter().all(|f| f.smooth && f.axes.len() == 4));
}

#[test]
fn inclusion_and_convexity_pass_on_an_ellipse() {
    let r = run_suite(Suite::Inclusion, &[ellipse_fixture()], &small(), 7).unwrap();
    assert_eq!(r.len(), 2 * 4 * 4);
    assert!(r.iter().all(|r| r.status == Status::Pass), "{}", write_csv(&r));
    let r = run_suite(Suite::Convexity, &[ellipse_fixture()], &small(), 7).unwrap();
    assert!(r.iter().all(|r| r.status == Status::Pass), "{}", write_csv(&r));
}

#[test]
fn monotone_sections_on_a_quartic() {
    let r = run_suite(Suite::Monotone, &[quartic_fixture()], &small(), 7).unwrap();
    assert!(!r.is_empty());
    assert!(r.iter().all(|r| r.status == Status::Pass), "{}", write_csv(&r));
}

#[test]
fn variation_of_a_ball_vanishes() {
    let f = Fixture::new("disk", Body::ball(2, 1.0).unwrap(), 2.0, 7).unwrap();
    let r = run_suite(Suite::Variation, &[f], &small(), 7).unwrap();
    assert_eq!(r.len(), 12);
    for row in &r {
        assert_eq!(row.status, Status::Pass);
        assert!(row.detail.contains("zero case"));
    }
}

#[test]
fn polytopes_are_not_applicable_to_graph_route_checks() {
    let f = Fixture::new("square", Body::Polytope(Polytope::cube(2, 1.0).unwrap()), 2.0, 7).unwrap();
    for suite in [Suite::Inclusion, Suite::Monotone, Suite::Convexity, Suite::Variation] {
        let r = run_suite(suite, std::slice::from_ref(&f), &small(), 7).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].status, Status::NotApplicable);
        assert!(r[0].passed());
    }
}

#[test]
fn steiner_suite_on_square_and_ellipse() {
    let fs = [ellipse_fixture(), Fixture::new("square", Body::Polytope(Polytope::cube(2, 1.0).unwrap()), 2.0, 7).unwrap()];
    let r = run_suite(Suite::Steiner, &fs, &small(), 7).unwrap();
    assert!(r.iter().all(|r| r.status == Status::Pass), "{}", write_csv(&r));
}

#[test]
fn composition_identity_on_an_ellipsoid() {
    let body = Body::Ellipsoid(Ellipsoid::from_rows(3, &[1.0, 0.2, 0.0, 0.0, 1.3, 0.1, 0.0, 0.0, 0.8]).unwrap());
    let xi = UnitVector::new(3, V3::new(1.0, 1.0, 1.0)).unwrap();
    let dirs = random_directions(3, 12, 3);
    let settings = Settings { sphere_order: 8, planar_res: 32, grading: 2.0, seed: 3 };
    let r = steiner_compose_check(&body, &xi, 0.25, 0.75, &dirs, settings, "ellipsoid").unwrap();
    assert!(r.passed() && r.worst < 1e-9, "{}", r.worst);
}

#[test]
fn suite_output_is_deterministic() {
    let a = write_csv(&run_suite(Suite::Convexity, &[quartic_fixture()], &small(), 11).unwrap());
    let b = write_csv(&run_suite(Suite::Convexity, &[quartic_fixture()], &small(), 11).unwrap());
    assert_eq!(a, b);
    assert!(a.starts_with("# lpbm verification report v1\n"));
}

#[test]
fn probe_keeps_a_disk_fixed() {
    let params = LpParams::new(2, 3.0).unwrap();
    let rule = Arc::new(sphere_rule(2, 512).unwrap());
    let trace = fixed_point_probe(&Body::ball(2, 1.0).unwrap(), &params, 5, &rule).unwrap();
    assert!(trace.aborted.is_none());
    assert_eq!(trace.rows.len(), 5);
    assert!(trace.max_dilation_defect() < 1e-6);
    assert!(trace.max_ellipsoid_defect() < 1e-6);
}

#[test]
fn probe_trace_of_random_polytope_is_reproducible() {
    let params = LpParams::new(2, 1.5).unwrap();
    let rule = Arc::new(sphere_rule(2, 256).unwrap());
    let run = || {
        let poly = random_symmetric_polytope(2, 7, 42).unwrap();
        fixed_point_probe(&Body::Polytope(poly), &params, 5, &rule).unwrap().to_csv("# seed 42")
    };
    let a = run();
    assert_eq!(a, run());
    assert!(a.starts_with("# lpbm probe trace v1\n"));
}

#[test]
fn random_polytope_depends_only_on_seed() {
    let a = random_symmetric_polytope(3, 9, 5).unwrap();
    let b = random_symmetric_polytope(3, 9, 5).unwrap();
    let c = random_symmetric_polytope(3, 9, 6).unwrap();
    assert_eq!(a.vertices, b.vertices);
    assert_ne!(a.vertices, c.vertices);
    assert!(a.is_origin_symmetric());
}

#[test]
fn fixture_files_round_trip() {
    for f in standard_fixtures(7).unwrap() {
        let s = body_file_to_json(&fixture_to_file(&f)).unwrap();
        let back = fixture_from_file(&body_file_from_json(&s).unwrap(), "x", 7).unwrap();
        assert_eq!(back.name, f.name);
        assert_eq!(back.p, f.p);
        assert_eq!(s, body_file_to_json(&fixture_to_file(&back)).unwrap());
        for u in random_directions(f.dim(), 8, 1) {
            assert!((back.body.support(&u).unwrap() - f.body.support(&u).unwrap()).abs() < 1e-12);
        }
    }
}

#[test]
fn malformed_files_are_format_errors() {
    for s in ["", "{}", "{\"schema\": 9, \"body\": {}}", "{\"schema\": 1, \"body\": {\"kind\": \"torus\"}}"] {
        assert!(matches!(body_file_from_json(s), Err(lpbm::Error::Format(_))), "{s}");
    }
    let ok = body_file_to_json(&BodyFile::new(Body::ball(3, 2.0).unwrap())).unwrap();
    assert!(body_file_from_json(&ok).is_ok());
}
