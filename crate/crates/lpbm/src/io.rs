//! JSON body files (`"schema": 1`) and fixture directories.
//!
//! ```json
//! {"schema": 1, "kind": "ellipsoid", "dim": 2, "matrix": [1, 0, 0, 2]}
//! ```
//!
//! Kinds: `ball` (`radius`), `ellipsoid` (row-major `matrix`, the body is
//! `A·Bⁿ`), `polytope` (`vertices`), `sampled` (support `values` at the nodes
//! of the sphere rule of `order`) and `graph` (`axis`, `steiner_c` and a
//! `source` of type `body`, `quartic`, `lens` or `table`). Optional keys:
//! `fixture` (`name`, `p`, `axes`) and `config`, an arbitrary object recording
//! how the file was produced.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bodies::{Body, Ellipsoid, GraphBody, GraphOrigin, LensParams, Polytope, QuarticGauge, SupportSampled, UnitVector};
use crate::error::{check_dim, Error, Result};
use crate::quadrature::{sphere_rule, Interpolation};
use crate::verifier::fixtures::{standard_axes, Fixture};
use crate::{M3, V3};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum BodyDoc {
    Ball { dim: usize, radius: f64 },
    Ellipsoid { dim: usize, matrix: Vec<f64> },
    Polytope { dim: usize, vertices: Vec<Vec<f64>> },
    Sampled { dim: usize, order: usize, values: Vec<f64>, interpolation: String, symmetric: bool },
    Graph { dim: usize, axis: Vec<f64>, steiner_c: f64, source: SourceDoc },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
enum SourceDoc {
    Body { body: Box<BodyDoc> },
    Quartic { matrix: Vec<f64>, terms: Vec<TermDoc> },
    Lens { big_radius: f64, offset: f64 },
    Table { a: f64, b: f64, f: Vec<f64>, g: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TermDoc {
    direction: Vec<f64>,
    weight: f64,
}

/// Optional fixture metadata stored next to a body.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FixtureMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axes: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FileDoc {
    schema: u32,
    #[serde(flatten)]
    body: BodyDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fixture: Option<FixtureMeta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config: Option<Value>,
}

/// A body with its optional metadata.
#[derive(Debug, Clone)]
pub struct BodyFile {
    pub body: Body,
    pub fixture: Option<FixtureMeta>,
    pub config: Option<Value>,
}

impl BodyFile {
    pub fn new(body: Body) -> Self {
        Self { body, fixture: None, config: None }
    }
}

fn coords(v: &V3, dim: usize) -> Vec<f64> {
    v.as_slice()[..dim].to_vec()
}

fn vector(c: &[f64], dim: usize) -> Result<V3> {
    if c.len() != dim {
        return Err(Error::Format(format!("expected {dim} coordinates, got {}", c.len())));
    }
    let mut v = V3::zeros();
    v.as_mut_slice()[..dim].copy_from_slice(c);
    Ok(v)
}

fn matrix(c: &[f64], dim: usize) -> Result<M3> {
    if c.len() != dim * dim {
        return Err(Error::Format(format!("expected {} matrix entries, got {}", dim * dim, c.len())));
    }
    let mut m = M3::zeros();
    for k in 0..c.len() {
        m[(k / dim, k % dim)] = c[k];
    }
    Ok(m)
}

fn interpolation_name(i: Interpolation) -> &'static str {
    match i {
        Interpolation::Nearest => "nearest",
        Interpolation::FirstOrder => "first-order",
    }
}

fn to_doc(body: &Body) -> Result<BodyDoc> {
    let dim = body.dim();
    Ok(match body {
        Body::Ellipsoid(e) => BodyDoc::Ellipsoid { dim, matrix: e.rows() },
        Body::Polytope(p) => BodyDoc::Polytope { dim, vertices: p.vertices.iter().map(|v| coords(v, dim)).collect() },
        Body::Sampled(s) => BodyDoc::Sampled {
            dim,
            order: s.rule().order,
            values: s.values.clone(),
            interpolation: interpolation_name(s.interpolation).into(),
            symmetric: s.symmetric,
        },
        Body::Graph(g) => {
            let source = match g.origin() {
                GraphOrigin::Body(b) => SourceDoc::Body { body: Box::new(to_doc(b)?) },
                GraphOrigin::Quartic(q) => SourceDoc::Quartic {
                    matrix: (0..dim * dim).map(|k| q.p[(k / dim, k % dim)]).collect(),
                    terms: q.terms.iter().map(|(a, w)| TermDoc { direction: coords(a, dim), weight: *w }).collect(),
                },
                GraphOrigin::Lens(l) => SourceDoc::Lens { big_radius: l.big_radius, offset: l.offset },
                GraphOrigin::Table { a, b, f, g } => SourceDoc::Table { a: *a, b: *b, f: f.clone(), g: g.clone() },
                GraphOrigin::Gauge(_) => {
                    return Err(Error::Representation(
                        "graph body over a computed gauge has no file form; tabulate it first".into(),
                    ))
                }
            };
            BodyDoc::Graph { dim, axis: coords(&g.frame.xi, dim), steiner_c: g.steiner_c(), source }
        }
    })
}

fn from_doc(doc: &BodyDoc) -> Result<Body> {
    match doc {
        BodyDoc::Ball { dim, radius } => {
            check_dim(*dim)?;
            Body::ball(*dim, *radius)
        }
        BodyDoc::Ellipsoid { dim, matrix } => Ok(Body::Ellipsoid(Ellipsoid::from_rows(*dim, matrix)?)),
        BodyDoc::Polytope { dim, vertices } => {
            check_dim(*dim)?;
            let v = vertices.iter().map(|c| vector(c, *dim)).collect::<Result<Vec<_>>>()?;
            Ok(Body::Polytope(Polytope::from_vertices(*dim, &v)?))
        }
        BodyDoc::Sampled { dim, order, values, interpolation, symmetric } => {
            let interp = match interpolation.as_str() {
                "nearest" => Interpolation::Nearest,
                "first-order" => Interpolation::FirstOrder,
                other => return Err(Error::Format(format!("unknown interpolation {other:?}"))),
            };
            let rule = Arc::new(sphere_rule(*dim, *order)?);
            Ok(Body::Sampled(SupportSampled::new(rule, values.clone(), interp, *symmetric)?))
        }
        BodyDoc::Graph { dim, axis, steiner_c, source } => {
            check_dim(*dim)?;
            let xi = UnitVector::new(*dim, vector(axis, *dim)?)?;
            if !(-1.0..=1.0).contains(steiner_c) {
                return Err(Error::Format(format!("steiner_c = {steiner_c} outside [−1, 1]")));
            }
            let g = match source {
                SourceDoc::Body { body } => GraphBody::decompose(&from_doc(body)?, &xi)?,
                SourceDoc::Quartic { matrix: m, terms } => {
                    let terms = terms
                        .iter()
                        .map(|t| Ok((vector(&t.direction, *dim)?, t.weight)))
                        .collect::<Result<Vec<_>>>()?;
                    GraphBody::from_quartic(QuarticGauge::new(*dim, matrix(m, *dim)?, terms)?, &xi)?
                }
                SourceDoc::Lens { big_radius, offset } => {
                    let g = GraphBody::lens(LensParams::new(*dim, *big_radius, *offset)?)?;
                    if (g.frame.xi - xi.v()).norm() > 1e-15 {
                        return Err(Error::Format("lens bodies have axis e1".into()));
                    }
                    g
                }
                SourceDoc::Table { a, b, f, g } => GraphBody::from_tables(&xi, *a, *b, f.clone(), g.clone())?,
            };
            Ok(Body::Graph(g.with_steiner_c(*steiner_c)))
        }
    }
}

pub fn body_file_to_json(file: &BodyFile) -> Result<String> {
    let doc = FileDoc { schema: SCHEMA, body: to_doc(&file.body)?, fixture: file.fixture.clone(), config: file.config.clone() };
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Format(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn body_file_from_json(s: &str) -> Result<BodyFile> {
    let v: Value = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
    match v.get("schema").and_then(Value::as_u64) {
        Some(1) => {}
        Some(k) => return Err(Error::Format(format!("unsupported schema {k}"))),
        None => return Err(Error::Format("missing \"schema\" field".into())),
    }
    let doc: FileDoc = serde_json::from_value(v).map_err(|e| Error::Format(e.to_string()))?;
    Ok(BodyFile { body: from_doc(&doc.body)?, fixture: doc.fixture, config: doc.config })
}

pub fn body_to_json(body: &Body) -> Result<String> {
    body_file_to_json(&BodyFile::new(body.clone()))
}

pub fn body_from_json(s: &str) -> Result<Body> {
    Ok(body_file_from_json(s)?.body)
}

pub fn read_body_file(path: &Path) -> Result<BodyFile> {
    body_file_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_body_file(path: &Path, file: &BodyFile) -> Result<()> {
    std::fs::write(path, body_file_to_json(file)?)?;
    Ok(())
}

/// Converts a body file to a fixture. Defaults: the file stem as name,
/// `p = 2` and the standard axes for `seed`.
pub fn fixture_from_file(file: &BodyFile, stem: &str, seed: u64) -> Result<Fixture> {
    let meta = file.fixture.clone().unwrap_or_default();
    let dim = file.body.dim();
    let name = meta.name.unwrap_or_else(|| stem.to_string());
    let mut f = Fixture::new(&name, file.body.clone(), meta.p.unwrap_or(2.0), seed)?;
    if let Some(axes) = meta.axes {
        f.axes = axes.iter().map(|a| UnitVector::new(dim, vector(a, dim)?)).collect::<Result<_>>()?;
    } else {
        f.axes = standard_axes(dim, seed)?;
    }
    Ok(f)
}

/// Every `*.json` file in `dir`, in file-name order.
pub fn load_fixture_dir(dir: &Path, seed: u64) -> Result<Vec<Fixture>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Format(format!("no fixture files in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| {
            let file = read_body_file(p).map_err(|e| Error::Format(format!("{}: {e}", p.display())))?;
            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("fixture");
            fixture_from_file(&file, stem, seed)
        })
        .collect()
}

/// Body file carrying the fixture's name, exponent and axes.
pub fn fixture_to_file(f: &Fixture) -> BodyFile {
    let dim = f.dim();
    BodyFile {
        body: f.body.clone(),
        fixture: Some(FixtureMeta {
            name: Some(f.name.clone()),
            p: Some(f.p),
            axes: Some(f.axes.iter().map(|a| coords(a.v(), dim)).collect()),
        }),
        config: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip(b: &Body) -> Body {
        body_from_json(&body_to_json(b).unwrap()).unwrap()
    }

    #[test]
    fn ellipsoid_and_polytope_round_trip() {
        let e = Body::Ellipsoid(Ellipsoid::from_rows(2, &[1.0, 0.3, 0.0, 2.0]).unwrap());
        let c = Body::Polytope(Polytope::cube(3, 0.7).unwrap());
        for b in [e, c] {
            let r = round_trip(&b);
            for u in [V3::new(0.6, 0.8, 0.0), V3::new(-0.2, 0.1, 0.0)] {
                let u = if b.dim() == 3 { u + V3::new(0.0, 0.0, 0.5) } else { u };
                assert!((r.support(&u).unwrap() - b.support(&u).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ball_kind_reads() {
        let b = body_from_json(r#"{"schema": 1, "kind": "ball", "dim": 3, "radius": 2.0}"#).unwrap();
        assert!((b.support(&V3::new(0.0, 0.0, 1.0)).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn graph_keeps_axis_and_factor() {
        let q = QuarticGauge::new(2, M3::identity(), vec![(V3::new(1.0, 0.0, 0.0), 1.0)]).unwrap();
        let xi = UnitVector::new(2, V3::new(1.0, 1.0, 0.0)).unwrap();
        let g = Body::Graph(GraphBody::from_quartic(q, &xi).unwrap().steiner(0.4).unwrap());
        let r = round_trip(&g);
        let rg = r.as_graph().unwrap();
        assert_eq!(rg.steiner_c(), g.as_graph().unwrap().steiner_c());
        let u = V3::new(0.3, -0.9, 0.0);
        assert!((r.radial(&u).unwrap() - g.radial(&u).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_schema_and_garbage() {
        assert!(body_from_json(r#"{"schema": 2, "kind": "ball", "dim": 2, "radius": 1}"#).is_err());
        assert!(body_from_json(r#"{"kind": "ball", "dim": 2, "radius": 1}"#).is_err());
        assert!(body_from_json("not json").is_err());
        assert!(body_from_json(r#"{"schema": 1, "kind": "ellipsoid", "dim": 2, "matrix": [1, 0, 0]}"#).is_err());
    }
}
