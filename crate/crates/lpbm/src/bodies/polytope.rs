use std::f64::consts::PI;

use super::hull::{hull2, hull3};
use crate::error::{check_dim, Error, Result};
use crate::{V2, V3};

/// Facet with outer unit normal, support number and (n−1)-measure.
#[derive(Debug, Clone)]
pub struct Facet {
    pub normal: V3,
    pub offset: f64,
    pub area: f64,
    /// Indices into [`Polytope::vertices`].
    pub vertices: Vec<usize>,
}

/// Convex polytope with the origin strictly inside.
#[derive(Debug, Clone)]
pub struct Polytope {
    pub dim: usize,
    pub vertices: Vec<V3>,
    pub facets: Vec<Facet>,
}

const COPLANAR_TOL: f64 = 1e-9;

impl Polytope {
    /// Convex hull of a point set; coplanar (n = 3) or collinear (n = 2)
    /// inputs are rejected.
    pub fn from_vertices(dim: usize, points: &[V3]) -> Result<Self> {
        check_dim(dim)?;
        if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::Validation("non-finite vertex".into()));
        }
        let p = if dim == 2 {
            let flat: Vec<V2> = points.iter().map(|p| V2::new(p[0], p[1])).collect();
            let h = hull2(&flat);
            if h.len() < 3 {
                return Err(Error::Validation("degenerate planar vertex set".into()));
            }
            let vertices: Vec<V3> = h.iter().map(|&i| V3::new(points[i][0], points[i][1], 0.0)).collect();
            let m = vertices.len();
            let facets = (0..m)
                .map(|i| {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % m];
                    let e = b - a;
                    let len = e.norm();
                    let normal = V3::new(e[1], -e[0], 0.0) / len;
                    Facet { normal, offset: normal.dot(&a), area: len, vertices: vec![i, (i + 1) % m] }
                })
                .collect();
            Polytope { dim, vertices, facets }
        } else {
            let tris = hull3(points)?;
            Self::from_triangles(points, &tris)?
        };
        p.validate()?;
        Ok(p)
    }

    fn from_triangles(points: &[V3], tris: &[[usize; 3]]) -> Result<Self> {
        // Merge coplanar neighbours into facets with a union-find over shared edges.
        let normals: Vec<V3> = tris
            .iter()
            .map(|t| {
                let n = (points[t[1]] - points[t[0]]).cross(&(points[t[2]] - points[t[0]]));
                n / n.norm()
            })
            .collect();
        let mut parent: Vec<usize> = (0..tris.len()).collect();
        fn find(p: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            let mut k = i;
            while p[k] != r {
                let nx = p[k];
                p[k] = r;
                k = nx;
            }
            r
        }
        let mut edges: std::collections::HashMap<(usize, usize), usize> = Default::default();
        for (ti, t) in tris.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                if let Some(&tj) = edges.get(&key) {
                    if (normals[ti] - normals[tj]).norm() < COPLANAR_TOL {
                        let (ra, rb) = (find(&mut parent, ti), find(&mut parent, tj));
                        parent[ra] = rb;
                    }
                } else {
                    edges.insert(key, ti);
                }
            }
        }
        let mut used: Vec<usize> = tris.iter().flat_map(|t| t.iter().copied()).collect();
        used.sort_unstable();
        used.dedup();
        let mut remap = std::collections::HashMap::new();
        for (k, &i) in used.iter().enumerate() {
            remap.insert(i, k);
        }
        let vertices: Vec<V3> = used.iter().map(|&i| points[i]).collect();
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for ti in 0..tris.len() {
            let r = find(&mut parent, ti);
            groups.entry(r).or_default().push(ti);
        }
        let mut facets = Vec::new();
        for (_, ts) in groups {
            let mut nsum = V3::zeros();
            let mut area = 0.0;
            let mut vs: Vec<usize> = Vec::new();
            for &ti in &ts {
                let t = tris[ti];
                let cr = (points[t[1]] - points[t[0]]).cross(&(points[t[2]] - points[t[0]]));
                nsum += cr;
                area += 0.5 * cr.norm();
                vs.extend(t.iter().map(|i| remap[i]));
            }
            vs.sort_unstable();
            vs.dedup();
            let normal = nsum / nsum.norm();
            let offset = vs.iter().map(|&i| normal.dot(&vertices[i])).sum::<f64>() / vs.len() as f64;
            facets.push(Facet { normal, offset, area, vertices: vs });
        }
        let p = Polytope { dim: 3, vertices, facets };
        let vol = p.volume();
        let scale = p.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if !(vol > 1e-12 * scale.powi(3)) {
            return Err(Error::Validation("degenerate (coplanar) vertex set".into()));
        }
        Ok(p)
    }

    /// The body `{x : νᵢ·x ≤ hᵢ}` for unit normals with positive offsets,
    /// built by dualizing the hull of `νᵢ/hᵢ`. Redundant halfspaces get no facet.
    pub fn from_halfspaces(dim: usize, normals: &[V3], offsets: &[f64]) -> Result<Self> {
        check_dim(dim)?;
        if normals.len() != offsets.len() {
            return Err(Error::Argument("normal/offset length mismatch".into()));
        }
        if offsets.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
            return Err(Error::Domain("origin not interior: nonpositive support number".into()));
        }
        let dual: Vec<V3> = normals.iter().zip(offsets).map(|(n, h)| n / (n.norm() * h)).collect();
        let unit: Vec<V3> = normals.iter().map(|n| n / n.norm()).collect();
        if dim == 2 {
            let flat: Vec<V2> = dual.iter().map(|p| V2::new(p[0], p[1])).collect();
            let h = hull2(&flat);
            if h.len() < 3 {
                return Err(Error::Domain("halfspaces do not bound a body".into()));
            }
            let m = h.len();
            let mut corner = Vec::with_capacity(m);
            for k in 0..m {
                let (a, b) = (flat[h[k]], flat[h[(k + 1) % m]]);
                let e = b - a;
                let nrm = V2::new(e[1], -e[0]) / e.norm();
                let d = nrm.dot(&a);
                if !(d > 0.0) {
                    return Err(Error::Domain("halfspaces do not bound a body".into()));
                }
                corner.push(V3::new(nrm[0] / d, nrm[1] / d, 0.0));
            }
            let facets = (0..m)
                .map(|k| {
                    let prev = (k + m - 1) % m;
                    let i = h[k];
                    Facet {
                        normal: unit[i],
                        offset: offsets[i],
                        area: (corner[k] - corner[prev]).norm(),
                        vertices: vec![prev, k],
                    }
                })
                .collect();
            return Ok(Polytope { dim, vertices: corner, facets });
        }
        let tris = hull3(&dual)?;
        let mut corner = Vec::with_capacity(tris.len());
        let mut incident: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for (ti, t) in tris.iter().enumerate() {
            let n = (dual[t[1]] - dual[t[0]]).cross(&(dual[t[2]] - dual[t[0]]));
            let n = n / n.norm();
            let d = n.dot(&dual[t[0]]);
            if !(d > 0.0) {
                return Err(Error::Domain("halfspaces do not bound a body".into()));
            }
            corner.push(n / d);
            for &i in t {
                incident.entry(i).or_default().push(ti);
            }
        }
        let mut facets = Vec::with_capacity(incident.len());
        for (i, ts) in incident {
            let nu = unit[i];
            let (a, b) = orthonormal_pair(&nu);
            let c = ts.iter().fold(V3::zeros(), |acc, &t| acc + corner[t]) / ts.len() as f64;
            let mut ring: Vec<(f64, usize)> = ts
                .iter()
                .map(|&t| {
                    let d = corner[t] - c;
                    (d.dot(&b).atan2(d.dot(&a)), t)
                })
                .collect();
            ring.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            let pts: Vec<V2> = ring
                .iter()
                .map(|&(_, t)| {
                    let d = corner[t] - c;
                    V2::new(d.dot(&a), d.dot(&b))
                })
                .collect();
            let area = crate::quadrature::polygon_area(&pts).abs();
            facets.push(Facet {
                normal: nu,
                offset: offsets[i],
                area,
                vertices: ring.iter().map(|r| r.1).collect(),
            });
        }
        Ok(Polytope { dim, vertices: corner, facets })
    }

    /// Checks positive offsets and that each facet's support number matches
    /// the vertex maximum within 1e-9.
    pub fn validate(&self) -> Result<()> {
        for (k, f) in self.facets.iter().enumerate() {
            if !(f.offset > 0.0) {
                return Err(Error::Validation(format!(
                    "origin not strictly interior: facet {k} has offset {:e}",
                    f.offset
                )));
            }
        }
        let full = self.facets.len() * self.vertices.len() <= 4_000_000;
        for (k, f) in self.facets.iter().enumerate() {
            let m = if full {
                self.vertices.iter().map(|v| f.normal.dot(v)).fold(f64::NEG_INFINITY, f64::max)
            } else {
                f.vertices.iter().map(|&i| f.normal.dot(&self.vertices[i])).fold(f64::NEG_INFINITY, f64::max)
            };
            if (m - f.offset).abs() > 1e-9 * f.offset.max(1.0) {
                return Err(Error::Validation(format!(
                    "facet {k} inconsistent with vertices: max {m} vs offset {}",
                    f.offset
                )));
            }
        }
        Ok(())
    }

    pub fn support(&self, u: &V3) -> f64 {
        self.vertices.iter().map(|v| v.dot(u)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn gauge(&self, x: &V3) -> f64 {
        self.facets.iter().map(|f| f.normal.dot(x) / f.offset).fold(0.0, f64::max)
    }

    /// `(1/n)Σ hᵢ·areaᵢ`.
    pub fn volume(&self) -> f64 {
        self.facets.iter().map(|f| f.offset * f.area).sum::<f64>() / self.dim as f64
    }

    /// Vertex/facet duality: facets of the polar are the vertex directions.
    pub fn polar(&self) -> Result<Self> {
        let normals: Vec<V3> = self.vertices.iter().map(|v| v / v.norm()).collect();
        let offsets: Vec<f64> = self.vertices.iter().map(|v| 1.0 / v.norm()).collect();
        Self::from_halfspaces(self.dim, &normals, &offsets)
    }

    pub fn is_origin_symmetric(&self) -> bool {
        let scale = self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max);
        (0..64).all(|k| {
            let a = 2.0 * PI * (k as f64 + 0.37) / 64.0;
            let u = if self.dim == 2 {
                V3::new(a.cos(), a.sin(), 0.0)
            } else {
                let z = ((k as f64 + 0.5) / 64.0) * 2.0 - 1.0;
                let s = (1.0 - z * z).sqrt();
                V3::new(s * (a * 7.0).cos(), s * (a * 7.0).sin(), z)
            };
            (self.support(&u) - self.support(&-u)).abs() <= 1e-9 * scale.max(1.0)
        })
    }

    /// `[−1, 1]ⁿ` scaled by `s`.
    pub fn cube(dim: usize, s: f64) -> Result<Self> {
        check_dim(dim)?;
        let pts: Vec<V3> = (0..(1 << dim))
            .map(|k| {
                let mut v = V3::zeros();
                for i in 0..dim {
                    v[i] = if k & (1 << i) == 0 { -s } else { s };
                }
                v
            })
            .collect();
        Self::from_vertices(dim, &pts)
    }
}

/// Two unit vectors completing `n` to an orthonormal basis.
pub(crate) fn orthonormal_pair(n: &V3) -> (V3, V3) {
    let c = if n[0].abs() < 0.6 { V3::x() } else if n[1].abs() < 0.6 { V3::y() } else { V3::z() };
    let a = (c - n * n.dot(&c)).normalize();
    let b = n.cross(&a);
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_facets() {
        let c = Polytope::cube(3, 1.0).unwrap();
        assert_eq!(c.facets.len(), 6);
        for f in &c.facets {
            assert!((f.area - 4.0).abs() < 1e-12);
            assert!((f.offset - 1.0).abs() < 1e-12);
        }
        assert!((c.volume() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn square_polar_is_cross_polytope() {
        let c = Polytope::cube(2, 1.0).unwrap();
        let p = c.polar().unwrap();
        assert_eq!(p.vertices.len(), 4);
        for v in &p.vertices {
            assert!((v.norm() - 1.0).abs() < 1e-12);
            assert!(v[0].abs() < 1e-12 || v[1].abs() < 1e-12);
        }
    }

    #[test]
    fn octahedron_polar_is_cube() {
        let mut pts = Vec::new();
        for i in 0..3 {
            for s in [-1.0, 1.0] {
                let mut v = V3::zeros();
                v[i] = s;
                pts.push(v);
            }
        }
        let o = Polytope::from_vertices(3, &pts).unwrap();
        assert_eq!(o.facets.len(), 8);
        let c = o.polar().unwrap();
        assert_eq!(c.facets.len(), 6);
        assert!((c.volume() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn coplanar_points_rejected() {
        let pts = vec![V3::new(1.0, 0.0, 0.0), V3::new(0.0, 1.0, 0.0), V3::new(-1.0, -1.0, 0.0), V3::new(0.3, 0.2, 0.0)];
        assert!(Polytope::from_vertices(3, &pts).is_err());
    }

    #[test]
    fn origin_outside_rejected() {
        let pts = vec![V3::new(1.0, 1.0, 0.0), V3::new(2.0, 1.0, 0.0), V3::new(1.0, 2.0, 0.0)];
        assert!(Polytope::from_vertices(2, &pts).is_err());
    }
}
