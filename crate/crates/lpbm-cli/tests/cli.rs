use std::path::Path;
use std::process::{Command, Output};

use lpbm::io::read_body_file;
use lpbm::V3;

fn lpbm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpbm")).args(args).output().expect("spawn lpbm")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_ball_and_ellipsoid() {
    let dir = tempfile::tempdir().unwrap();
    let ball = dir.path().join("ball.json");
    let out = lpbm(&["gen", "ball", "--dim", "3", "--radius", "2", "--out", path(&ball)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let b = read_body_file(&ball).unwrap();
    assert_eq!(b.body.dim(), 3);
    assert!((b.body.support(&V3::new(0.0, 0.6, 0.8)).unwrap() - 2.0).abs() < 1e-15);
    assert!(b.config.is_some());

    let ell = dir.path().join("ell.json");
    let out = lpbm(&["gen", "ellipsoid", "--matrix", "1,0;0,2", "--out", path(&ell)]);
    assert!(out.status.success());
    let e = read_body_file(&ell).unwrap().body;
    assert!((e.support(&V3::new(0.0, 1.0, 0.0)).unwrap() - 2.0).abs() < 1e-15);
    assert!((e.support(&V3::new(1.0, 0.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn random_polytope_is_byte_identical_for_a_seed() {
    let run = |seed: &str| lpbm(&["gen", "random-symmetric-polytope", "--dim", "3", "--count", "10", "--seed", seed]).stdout;
    let a = run("19");
    assert!(!a.is_empty());
    assert_eq!(a, run("19"));
    assert_ne!(a, run("20"));
}

#[test]
fn bad_arguments_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(lpbm(&["gen", "ball", "--dim", "4"]).status.code(), Some(2));
    assert_eq!(lpbm(&["gen", "ellipsoid"]).status.code(), Some(2));
    assert_eq!(lpbm(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
    let missing = dir.path().join("absent");
    assert_eq!(lpbm(&["verify", "--fixtures", path(&missing)]).status.code(), Some(2));

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\"schema\": 1, \"kind\": \"ellipsoid\"").unwrap();
    assert_eq!(lpbm(&["verify", "--fixtures", path(dir.path())]).status.code(), Some(2));
    assert_eq!(lpbm(&["op", "pi", "--body", path(&broken)]).status.code(), Some(2));
    assert_eq!(lpbm(&["probe", "--body", path(&broken)]).status.code(), Some(2));
}

#[test]
fn verify_report_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let fx = dir.path().join("fx");
    std::fs::create_dir(&fx).unwrap();
    let out = lpbm(&["gen", "ellipsoid", "--matrix", "1,0.2;0,1.5", "--out", path(&fx.join("e.json"))]);
    assert!(out.status.success());
    let report = dir.path().join("report.csv");
    let run = || {
        let out = lpbm(&[
            "verify", "--suite", "convexity", "--fixtures", path(&fx), "--planar-res", "64", "--report", path(&report),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read_to_string(&report).unwrap()
    };
    let a = run();
    assert_eq!(a, run());
    let mut lines = a.lines();
    assert_eq!(lines.next(), Some("# lpbm verification report v1"));
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert!(a.lines().skip(3).all(|l| l.starts_with("convexity,") || l.starts_with("reflection_symmetry,")));
}

#[test]
fn op_table_on_a_disk() {
    let dir = tempfile::tempdir().unwrap();
    let ball = dir.path().join("ball.json");
    assert!(lpbm(&["gen", "ball", "--out", path(&ball)]).status.success());
    let out = lpbm(&["op", "gamma", "--body", path(&ball), "--p", "3", "--sphere-order", "128"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 128);
    for r in rows {
        let cols: Vec<f64> = r.split(',').skip(1).map(|c| c.parse().unwrap()).collect();
        assert!((cols[2] - 1.0).abs() < 1e-6 && (cols[3] - 1.0).abs() < 1e-6, "{r}");
    }
}

#[test]
fn probe_on_a_ball_stays_fixed() {
    let dir = tempfile::tempdir().unwrap();
    let ball = dir.path().join("ball.json");
    let trace = dir.path().join("trace.csv");
    assert!(lpbm(&["gen", "ball", "--radius", "1.5", "--out", path(&ball)]).status.success());
    let out = lpbm(&["probe", "--body", path(&ball), "--iters", "5", "--sphere-order", "512", "--trace", path(&trace)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(trace).unwrap();
    assert!(text.starts_with("# lpbm probe trace v1\n"));
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("iterate"))
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r[1] <= 1e-6 && r[2] <= 1e-6));
}

#[test]
fn symmetrize_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let ell = dir.path().join("ell.json");
    assert!(lpbm(&["gen", "ellipsoid", "--matrix", "1,0.5;0,1", "--out", path(&ell)]).status.success());
    let sym = dir.path().join("sym.json");
    let out = lpbm(&["symmetrize", "--body", path(&ell), "--xi", "0,1", "--t", "1", "--out", path(&sym)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = read_body_file(&sym).unwrap().body;
    let u = V3::new(0.6, 0.8, 0.0);
    let mirrored = V3::new(0.6, -0.8, 0.0);
    assert!((s.support(&u).unwrap() - s.support(&mirrored).unwrap()).abs() < 1e-9);
    assert_eq!(lpbm(&["symmetrize", "--body", path(&ell), "--xi", "0,1", "--t", "3"]).status.code(), Some(2));
}
