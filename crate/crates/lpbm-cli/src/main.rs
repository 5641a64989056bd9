//! `lpbm`: body generation, operators, symmetrization, verification suites
//! and the fixed-point probe.
//!
//! Exit codes: 0 pass, 1 check failure, 2 usage or fixture error, 3 runtime abort.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lpbm::bodies::{Body, Ellipsoid, GraphBody, LensParams, Polytope, QuarticGauge, UnitVector};
use lpbm::io::{body_file_to_json, fixture_to_file, load_fixture_dir, read_body_file, BodyFile};
use lpbm::lp_transforms::{
    compose_gamma_pi_polar, dilation_defect, gamma_body, pi_body, pi_polar_body, Discretization, LpParams,
    TransformedBody,
};
use lpbm::quadrature::{default_order, sphere_rule, DEFAULT_GRADING};
use lpbm::verifier::fixtures::random_symmetric_polytope;
use lpbm::verifier::probe::TRACE_VERSION_LINE;
use lpbm::verifier::{fixed_point_probe, probe_order, run_suite, standard_fixtures, write_csv, Overrides, Status, Suite};
use lpbm::{Error, M3, V3};

const DEFAULT_SEED: u64 = 7;
const DEFAULT_P: f64 = 2.0;
const DEFAULT_DIM: usize = 2;

#[derive(Parser, Debug)]
#[command(name = "lpbm", version, about = "L^p projection and centroid bodies: operators, symmetrization and checks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Dimension, 2 or 3 [default: 2, or the body's dimension]
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Exponent p in (1, 10] [default: 2, or the fixture's exponent]
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Sphere rule order [default: 2048 in the plane, 128 in space]
    #[arg(long, global = true)]
    sphere_order: Option<usize>,
    /// Resolution of the planar rule on the base [default: 256 in the plane, 64 in space]
    #[arg(long, global = true)]
    planar_res: Option<usize>,
    /// Rim grading exponent of the planar rule
    #[arg(long, global = true)]
    grading: Option<f64>,
    /// Absolute tolerance floor for the checks
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for random bodies and sampled directions
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output file (or directory for `gen fixture-set`); stdout when absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report file for `verify`; stdout when absent
    #[arg(long, global = true)]
    report: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a body file
    Gen(GenArgs),
    /// Apply an operator and tabulate the result at the sphere nodes
    Op(OpArgs),
    /// Continuous Steiner symmetral S^t in direction xi
    Symmetrize(SymArgs),
    /// Run verification suites
    Verify(VerifyArgs),
    /// Iterate K -> s Γ_p Π_p° K at fixed volume
    Probe(ProbeArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum GenKind {
    Ball,
    Ellipsoid,
    Cube,
    RandomSymmetricPolytope,
    Lens,
    Quartic,
    FixtureSet,
}

#[derive(Args, Debug)]
struct GenArgs {
    kind: GenKind,
    /// Ball radius
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Matrix rows separated by ';', entries by ',' (ellipsoid A with body A·B, or quartic P)
    #[arg(long)]
    matrix: Option<String>,
    /// Cube half-width
    #[arg(long, default_value_t = 1.0)]
    half_width: f64,
    /// Number of random points before symmetrization
    #[arg(long, default_value_t = 12)]
    count: usize,
    /// Lens: radius of the lower cap
    #[arg(long, default_value_t = 2.0)]
    big_radius: f64,
    /// Lens: downward offset of the lower cap
    #[arg(long, default_value_t = 1.2)]
    offset: f64,
    /// Quartic terms `a1,a2[,a3]:w;...` adding w·(a·x)^4 to (xᵀPx)^2
    #[arg(long)]
    terms: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum OpKind {
    Pi,
    Gamma,
    /// Π_p°
    Polar,
    /// Γ_p Π_p°
    Compose,
    /// Dilation defect of `--other` against `--body`
    Defect,
}

#[derive(Args, Debug)]
struct OpArgs {
    op: OpKind,
    #[arg(long)]
    body: PathBuf,
    /// Second body for `defect`
    #[arg(long)]
    other: Option<PathBuf>,
    /// Unnormalized operators (tilde forms)
    #[arg(long)]
    tilde: bool,
}

#[derive(Args, Debug)]
struct SymArgs {
    #[arg(long)]
    body: PathBuf,
    /// Direction, comma separated
    #[arg(long)]
    xi: String,
    /// Parameter in [0, 2]
    #[arg(long)]
    t: f64,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// inclusion, monotone, convexity, variation, steiner, fixedpoint or all
    #[arg(long, default_value = "all")]
    suite: String,
    /// Directory of body files; the built-in standard set when absent
    #[arg(long)]
    fixtures: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ProbeArgs {
    #[arg(long)]
    body: PathBuf,
    #[arg(long, default_value_t = 5)]
    iters: usize,
    /// Trace file; stdout when absent
    #[arg(long)]
    trace: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Argument(_) | Error::Format(_) | Error::Validation(_) | Error::Io(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

type CmdResult = std::result::Result<ExitCode, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => cmd_gen(&cli.global, a),
        Command::Op(a) => cmd_op(&cli.global, a),
        Command::Symmetrize(a) => cmd_symmetrize(&cli.global, a),
        Command::Verify(a) => cmd_verify(&cli.global, a),
        Command::Probe(a) => cmd_probe(&cli.global, a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("lpbm: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("lpbm: aborted: {m}");
            ExitCode::from(3)
        }
    }
}

/// Resolved run configuration, embedded in every output.
fn run_config(g: &Global, command: &str, dim: usize, p: f64, extra: Value) -> Value {
    json!({
        "command": command,
        "dim": (dim > 0).then_some(dim),
        "p": p,
        "sphere_order": g.sphere_order.or((dim > 0).then(|| default_order(dim))),
        "planar_res": g.planar_res,
        "grading": g.grading.unwrap_or(DEFAULT_GRADING),
        "tol": g.tol,
        "seed": g.seed,
        "out": g.out.as_ref().map(|p| p.display().to_string()),
        "report": g.report.as_ref().map(|p| p.display().to_string()),
        "args": extra,
    })
}

fn check_p(p: f64) -> std::result::Result<f64, Failure> {
    if p > 1.0 && p <= 10.0 {
        Ok(p)
    } else {
        Err(usage(format!("p = {p} outside the supported range (1, 10]")))
    }
}

fn check_dim(dim: usize) -> std::result::Result<usize, Failure> {
    if dim == 2 || dim == 3 {
        Ok(dim)
    } else {
        Err(usage(format!("dimension {dim} unsupported, expected 2 or 3")))
    }
}

fn emit(path: Option<&Path>, text: &str) -> std::result::Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_body(path: &Path) -> std::result::Result<BodyFile, Failure> {
    read_body_file(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn parse_numbers(s: &str) -> std::result::Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| usage(format!("cannot parse {x:?} as a number"))))
        .collect()
}

fn parse_vector(s: &str, dim: usize) -> std::result::Result<V3, Failure> {
    let c = parse_numbers(s)?;
    if c.len() != dim {
        return Err(usage(format!("expected {dim} components in {s:?}")));
    }
    let mut v = V3::zeros();
    v.as_mut_slice()[..dim].copy_from_slice(&c);
    Ok(v)
}

/// `"1,0;0,2"` as an `n×n` matrix; `n` is taken from the number of rows.
fn parse_matrix(s: &str) -> std::result::Result<(usize, M3), Failure> {
    let rows: Vec<Vec<f64>> = s.split(';').map(parse_numbers).collect::<std::result::Result<_, _>>()?;
    let n = check_dim(rows.len())?;
    let mut m = M3::zeros();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(usage(format!("matrix {s:?} is not square")));
        }
        for (j, x) in r.iter().enumerate() {
            m[(i, j)] = *x;
        }
    }
    Ok((n, m))
}

fn parse_terms(s: &str, dim: usize) -> std::result::Result<Vec<(V3, f64)>, Failure> {
    s.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let (a, w) = t.split_once(':').ok_or_else(|| usage(format!("term {t:?} needs the form a1,a2:w")))?;
            let w = w.trim().parse::<f64>().map_err(|_| usage(format!("bad weight in {t:?}")))?;
            let a = parse_vector(a, dim)?;
            if a.norm() == 0.0 {
                return Err(usage("quartic term direction is zero"));
            }
            Ok((a.normalize(), w))
        })
        .collect()
}

fn cmd_gen(g: &Global, a: &GenArgs) -> CmdResult {
    let dim = check_dim(g.dim.unwrap_or(DEFAULT_DIM))?;
    let extra = json!({
        "kind": format!("{:?}", a.kind),
        "radius": a.radius,
        "matrix": a.matrix,
        "half_width": a.half_width,
        "count": a.count,
        "big_radius": a.big_radius,
        "offset": a.offset,
        "terms": a.terms,
    });
    if a.kind == GenKind::FixtureSet {
        return gen_fixture_set(g, extra);
    }
    let (dim, body) = match a.kind {
        GenKind::Ball => (dim, Body::ball(dim, a.radius)?),
        GenKind::Ellipsoid => {
            let (n, m) = parse_matrix(a.matrix.as_deref().ok_or_else(|| usage("ellipsoid needs --matrix"))?)?;
            (n, Body::Ellipsoid(Ellipsoid::new(n, m)?))
        }
        GenKind::Cube => (dim, Body::Polytope(Polytope::cube(dim, a.half_width)?)),
        GenKind::RandomSymmetricPolytope => {
            if a.count == 0 {
                return Err(usage("--count must be positive"));
            }
            (dim, Body::Polytope(random_symmetric_polytope(dim, a.count, g.seed)?))
        }
        GenKind::Lens => (dim, Body::Graph(GraphBody::lens(LensParams::new(dim, a.big_radius, a.offset)?)?)),
        GenKind::Quartic => {
            let (n, m) = match &a.matrix {
                Some(s) => parse_matrix(s)?,
                None => (dim, M3::identity()),
            };
            let terms = parse_terms(a.terms.as_deref().unwrap_or(""), n)?;
            let q = QuarticGauge::new(n, m, terms)?;
            (n, Body::Graph(GraphBody::from_quartic(q, &UnitVector::axis(n, n - 1)?)?))
        }
        GenKind::FixtureSet => unreachable!(),
    };
    let file = BodyFile { body, fixture: None, config: Some(run_config(g, "gen", dim, g.p.unwrap_or(DEFAULT_P), extra)) };
    emit(g.out.as_deref(), &body_file_to_json(&file)?)?;
    Ok(ExitCode::SUCCESS)
}

/// The twelve standard fixtures plus a cube and a seeded random polytope.
fn gen_fixture_set(g: &Global, extra: Value) -> CmdResult {
    let dir = g.out.as_deref().ok_or_else(|| usage("fixture-set needs --out DIR"))?;
    std::fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    let mut fixtures = standard_fixtures(g.seed)?;
    let extra_bodies = [
        ("cube2", Body::Polytope(Polytope::cube(2, 1.0)?)),
        ("random_polytope2", Body::Polytope(random_symmetric_polytope(2, 12, g.seed)?)),
        ("random_polytope3", Body::Polytope(random_symmetric_polytope(3, 12, g.seed)?)),
    ];
    let k0 = fixtures.len() as u64;
    for (k, (name, body)) in extra_bodies.into_iter().enumerate() {
        fixtures.push(lpbm::verifier::Fixture::new(name, body, DEFAULT_P, g.seed.wrapping_add(k0 + k as u64))?);
    }
    for (k, f) in fixtures.iter().enumerate() {
        let mut file = fixture_to_file(f);
        file.config = Some(run_config(g, "gen", f.dim(), f.p, extra.clone()));
        let path = dir.join(format!("{:02}_{}.json", k, f.name));
        std::fs::write(&path, body_file_to_json(&file)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn table_csv(kind: &str, config: &Value, t: &TransformedBody) -> String {
    let dim = t.rule.dim;
    let mut s = format!("# lpbm operator table v1\n# operator: {kind}\n# config: {config}\nnode");
    for i in 1..=dim {
        s.push_str(&format!(",u{i}"));
    }
    s.push_str(",support,radial\n");
    let (h, r) = (t.support_values(), t.radial_values());
    for (k, u) in t.rule.nodes.iter().enumerate() {
        s.push_str(&k.to_string());
        for c in &u.as_slice()[..dim] {
            s.push_str(&format!(",{c:.15e}"));
        }
        s.push_str(&format!(",{:.15e},{:.15e}\n", h[k], r[k]));
    }
    s
}

fn cmd_op(g: &Global, a: &OpArgs) -> CmdResult {
    let file = read_body(&a.body)?;
    let body = file.body;
    let dim = body.dim();
    if let Some(d) = g.dim {
        if d != dim {
            return Err(usage(format!("--dim {d} does not match the body's dimension {dim}")));
        }
    }
    let p = check_p(g.p.or(file.fixture.as_ref().and_then(|f| f.p)).unwrap_or(DEFAULT_P))?;
    let params = LpParams::new(dim, p)?;
    let order = g.sphere_order.unwrap_or_else(|| default_order(dim));
    let rule = Arc::new(sphere_rule(dim, order)?);
    let res = g.planar_res.unwrap_or(if dim == 2 { 256 } else { 64 });
    let disc = Discretization::shared(rule.clone()).with_planar(res, g.grading.unwrap_or(DEFAULT_GRADING));
    let normalized = !a.tilde;
    let config = run_config(
        g,
        "op",
        dim,
        p,
        json!({"op": format!("{:?}", a.op), "body": a.body.display().to_string(), "other": a.other.as_ref().map(|p| p.display().to_string()), "tilde": a.tilde, "planar_res": res}),
    );
    let name = format!("{:?}", a.op).to_lowercase();
    let text = match a.op {
        OpKind::Pi => table_csv(&name, &config, &pi_body(&body, &params, &disc, normalized)?),
        OpKind::Gamma => table_csv(&name, &config, &gamma_body(&body, &params, &rule, normalized)?),
        OpKind::Polar => table_csv(&name, &config, &pi_polar_body(&body, &params, &disc, normalized)?),
        OpKind::Compose => table_csv(&name, &config, &compose_gamma_pi_polar(&body, &params, &disc, normalized)?),
        OpKind::Defect => {
            let other = read_body(a.other.as_deref().ok_or_else(|| usage("defect needs --other"))?)?.body;
            if other.dim() != dim {
                return Err(usage("bodies differ in dimension"));
            }
            let (d, c) = dilation_defect(&body, &other, &rule)?;
            format!("# lpbm dilation defect v1\n# config: {config}\ndefect,factor\n{d:.12e},{c:.15e}\n")
        }
    };
    emit(g.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_symmetrize(g: &Global, a: &SymArgs) -> CmdResult {
    let file = read_body(&a.body)?;
    let dim = file.body.dim();
    let xi = UnitVector::new(dim, parse_vector(&a.xi, dim)?).map_err(|e| usage(e.to_string()))?;
    if !(0.0..=2.0).contains(&a.t) {
        return Err(usage(format!("t = {} outside [0, 2]", a.t)));
    }
    let gb = GraphBody::decompose(&file.body, &xi)?.steiner(a.t)?;
    let extra = json!({"body": a.body.display().to_string(), "xi": a.xi, "t": a.t});
    let p = file.fixture.as_ref().and_then(|f| f.p).or(g.p).unwrap_or(DEFAULT_P);
    let out = BodyFile { body: Body::Graph(gb), fixture: None, config: Some(run_config(g, "symmetrize", dim, p, extra)) };
    emit(g.out.as_deref(), &body_file_to_json(&out)?)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(g: &Global, a: &VerifyArgs) -> CmdResult {
    let suite: Suite = a.suite.parse().map_err(|e: Error| usage(e.to_string()))?;
    if let Some(p) = g.p {
        check_p(p)?;
    }
    let mut fixtures = match &a.fixtures {
        Some(dir) => {
            if !dir.is_dir() {
                return Err(usage(format!("fixture directory {} not found", dir.display())));
            }
            load_fixture_dir(dir, g.seed).map_err(|e| usage(e.to_string()))?
        }
        None => standard_fixtures(g.seed)?,
    };
    if let Some(d) = g.dim {
        fixtures.retain(|f| f.dim() == d);
    }
    fixtures.sort_by(|x, y| x.name.cmp(&y.name));
    let overrides = Overrides { sphere_order: g.sphere_order, planar_res: g.planar_res, grading: g.grading, tol: g.tol, p: g.p };
    let reports = run_suite(suite, &fixtures, &overrides, g.seed)?;
    let config = run_config(
        g,
        "verify",
        g.dim.unwrap_or(0),
        g.p.unwrap_or(f64::NAN),
        json!({"suite": a.suite, "fixtures": a.fixtures.as_ref().map(|p| p.display().to_string())}),
    );
    let csv = write_csv(&reports);
    let (head, rest) = csv.split_once('\n').unwrap_or((&csv, ""));
    emit(g.report.as_deref().or(g.out.as_deref()), &format!("{head}\n# config: {config}\n{rest}"))?;
    let failed = reports.iter().filter(|r| r.status == Status::Fail).count();
    let na = reports.iter().filter(|r| r.status == Status::NotApplicable).count();
    eprintln!("{} checks: {} passed, {failed} failed, {na} not applicable", reports.len(), reports.len() - failed - na);
    for r in reports.iter().filter(|r| r.status == Status::Fail) {
        eprintln!("FAIL {}", r.csv_row());
    }
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_probe(g: &Global, a: &ProbeArgs) -> CmdResult {
    let file = read_body(&a.body)?;
    let dim = file.body.dim();
    let p = check_p(g.p.or(file.fixture.as_ref().and_then(|f| f.p)).unwrap_or(DEFAULT_P))?;
    let params = LpParams::new(dim, p)?;
    let order = g.sphere_order.unwrap_or_else(|| probe_order(dim));
    let rule = Arc::new(sphere_rule(dim, order)?);
    let mut config = run_config(g, "probe", dim, p, json!({"body": a.body.display().to_string(), "iters": a.iters}));
    config["sphere_order"] = json!(order);
    let trace = fixed_point_probe(&file.body, &params, a.iters, &rule)?;
    let text = trace.to_csv(&format!("config: {config}"));
    debug_assert!(text.starts_with(TRACE_VERSION_LINE));
    emit(a.trace.as_deref().or(g.out.as_deref()), &text)?;
    match &trace.aborted {
        Some(why) => Err(Failure::Runtime(format!("probe stopped after {} iterates: {why}", trace.rows.len()))),
        None => Ok(ExitCode::SUCCESS),
    }
}
