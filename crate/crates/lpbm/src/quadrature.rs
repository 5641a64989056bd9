//! Deterministic quadrature on `S^{n-1}` and on planar base domains.
//!
//! Sphere rules are the equally spaced trapezoid rule (n = 2) and a
//! Gauss–Legendre × trapezoid product rule (n = 3). Base rules are built from
//! Gauss–Legendre panels in a graded variable `s` with distance to the
//! boundary `d = s^q`, which turns the `d^{-1/2}` blow-up of graph integrands
//! at `∂(K|ξ⊥)` into a smooth integrand for `q = 2`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::numerics::{gauss_legendre, CompensatedSum};
use crate::{V2, V3};

pub const DEFAULT_ORDER_2D: usize = 2048;
pub const DEFAULT_ORDER_3D: usize = 128;
pub const DEFAULT_PLANAR_RES: usize = 512;
pub const DEFAULT_GRADING: f64 = 2.0;

/// Gauss points per panel in graded base rules.
const PANEL: usize = 8;

pub fn default_order(n: usize) -> usize {
    if n == 2 {
        DEFAULT_ORDER_2D
    } else {
        DEFAULT_ORDER_3D
    }
}

/// Quadrature on the unit sphere. For n = 3, `order` is the number of
/// Gauss–Legendre rings in `z`; each ring carries `2·order` azimuths.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub dim: usize,
    pub order: usize,
    pub nodes: Vec<V3>,
    pub weights: Vec<f64>,
    rings: Vec<f64>,
    azimuths: usize,
}

pub fn sphere_rule(n: usize, order: usize) -> Result<SphereRule> {
    check_dim(n)?;
    if order < 4 {
        return Err(Error::Argument(format!("sphere order {order} below minimum 4")));
    }
    if n == 2 {
        if order % 2 != 0 {
            return Err(Error::Argument("planar sphere order must be even".into()));
        }
        let w = 2.0 * PI / order as f64;
        let nodes = (0..order)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / order as f64;
                V3::new(a.cos(), a.sin(), 0.0)
            })
            .collect();
        Ok(SphereRule {
            dim: 2,
            order,
            nodes,
            weights: vec![w; order],
            rings: Vec::new(),
            azimuths: order,
        })
    } else {
        let (z, wz) = gauss_legendre(order);
        let na = 2 * order;
        let wa = 2.0 * PI / na as f64;
        let mut nodes = Vec::with_capacity(order * na);
        let mut weights = Vec::with_capacity(order * na);
        for (zi, wi) in z.iter().zip(&wz) {
            let s = (1.0 - zi * zi).sqrt();
            for j in 0..na {
                let a = 2.0 * PI * j as f64 / na as f64;
                nodes.push(V3::new(s * a.cos(), s * a.sin(), *zi));
                weights.push(wi * wa);
            }
        }
        Ok(SphereRule { dim: 3, order, nodes, weights, rings: z, azimuths: na })
    }
}

/// How sampled values are read between rule nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    Nearest,
    FirstOrder,
}

impl SphereRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Index of the antipodal node.
    pub fn antipode(&self, k: usize) -> usize {
        if self.dim == 2 {
            (k + self.order / 2) % self.order
        } else {
            let na = self.azimuths;
            let (i, j) = (k / na, k % na);
            (self.order - 1 - i) * na + (j + na / 2) % na
        }
    }

    /// `Σ wᵢ f(nodeᵢ)` in node order with compensated summation.
    pub fn integrate<F: FnMut(&V3) -> f64>(&self, mut f: F) -> Result<f64> {
        let mut s = CompensatedSum::new();
        for (k, (x, w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::Evaluation(format!(
                    "non-finite integrand {v} at node {k} ({:.6}, {:.6}, {:.6})",
                    x[0], x[1], x[2]
                )));
            }
            s.add(w * v);
        }
        Ok(s.value())
    }

    /// Same as [`integrate`](Self::integrate) for values already tabulated at the nodes.
    pub fn integrate_values(&self, values: &[f64]) -> Result<f64> {
        let mut k = 0;
        self.integrate(|_| {
            let v = values[k];
            k += 1;
            v
        })
    }

    /// Reads node samples at an arbitrary direction.
    pub fn interpolate(&self, values: &[f64], u: &V3, interp: Interpolation) -> f64 {
        let r = u.norm();
        let u = u / r;
        if self.dim == 2 {
            let m = self.order;
            let mut a = u[1].atan2(u[0]);
            if a < 0.0 {
                a += 2.0 * PI;
            }
            let s = a / (2.0 * PI) * m as f64;
            match interp {
                Interpolation::Nearest => values[(s.round() as usize) % m],
                Interpolation::FirstOrder => {
                    let k = s.floor();
                    let fr = s - k;
                    let k = k as usize % m;
                    (1.0 - fr) * values[k] + fr * values[(k + 1) % m]
                }
            }
        } else {
            let na = self.azimuths;
            let mut a = u[1].atan2(u[0]);
            if a < 0.0 {
                a += 2.0 * PI;
            }
            let s = a / (2.0 * PI) * na as f64;
            let z = u[2].clamp(-1.0, 1.0);
            let rings = &self.rings;
            let ring_value = |i: usize| -> f64 {
                match interp {
                    Interpolation::Nearest => values[i * na + (s.round() as usize) % na],
                    Interpolation::FirstOrder => {
                        let k = s.floor();
                        let fr = s - k;
                        let k = k as usize % na;
                        (1.0 - fr) * values[i * na + k] + fr * values[i * na + (k + 1) % na]
                    }
                }
            };
            let last = rings.len() - 1;
            if z <= rings[0] {
                return ring_value(0);
            }
            if z >= rings[last] {
                return ring_value(last);
            }
            let i = rings.partition_point(|&zi| zi <= z) - 1;
            match interp {
                Interpolation::Nearest => {
                    if z - rings[i] < rings[i + 1] - z {
                        ring_value(i)
                    } else {
                        ring_value(i + 1)
                    }
                }
                Interpolation::FirstOrder => {
                    let fr = (z - rings[i]) / (rings[i + 1] - rings[i]);
                    (1.0 - fr) * ring_value(i) + fr * ring_value(i + 1)
                }
            }
        }
    }
}

/// A base domain `K|ξ⊥` in frame coordinates. All domains contain the origin
/// in their interior.
#[derive(Clone)]
pub enum BaseDomain {
    /// `[a, b]` for n = 2; `breaks` are interior kinks of the graph functions.
    Interval { a: f64, b: f64, breaks: Vec<f64> },
    /// Star-shaped planar domain given by its boundary distance as a function of angle.
    Star { radius: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
    /// Convex polygon, counter-clockwise.
    Polygon { vertices: Vec<V2> },
}

impl fmt::Debug for BaseDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseDomain::Interval { a, b, breaks } => f
                .debug_struct("Interval")
                .field("a", a)
                .field("b", b)
                .field("breaks", &breaks.len())
                .finish(),
            BaseDomain::Star { .. } => f.write_str("Star"),
            BaseDomain::Polygon { vertices } => {
                f.debug_struct("Polygon").field("vertices", &vertices.len()).finish()
            }
        }
    }
}

impl BaseDomain {
    pub fn ellipse(m: nalgebra::Matrix2<f64>) -> Self {
        // Boundary of M·B²: radius in direction w is 1/|M⁻¹w|.
        let inv = m.try_inverse().expect("singular base ellipse");
        BaseDomain::Star {
            radius: Arc::new(move |phi: f64| {
                let w = V2::new(phi.cos(), phi.sin());
                1.0 / (inv * w).norm()
            }),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            BaseDomain::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Distance from the origin to the boundary along the unit direction `w`.
    pub fn extent(&self, w: &V2) -> f64 {
        match self {
            BaseDomain::Interval { a, b, .. } => {
                if w[0] >= 0.0 {
                    *b
                } else {
                    -*a
                }
            }
            BaseDomain::Star { radius } => radius(w[1].atan2(w[0])),
            BaseDomain::Polygon { vertices } => {
                let mut best = f64::INFINITY;
                let n = vertices.len();
                for i in 0..n {
                    let p = vertices[i];
                    let q = vertices[(i + 1) % n];
                    let e = q - p;
                    let nrm = V2::new(e[1], -e[0]);
                    let den = nrm.dot(w);
                    if den > 1e-300 {
                        let t = nrm.dot(&p) / den;
                        if t > 0.0 && t < best {
                            best = t;
                        }
                    }
                }
                best
            }
        }
    }

    /// Whether `y` lies strictly inside.
    pub fn contains(&self, y: &V2) -> bool {
        match self {
            BaseDomain::Interval { a, b, .. } => y[0] > *a && y[0] < *b,
            BaseDomain::Polygon { vertices } => {
                let n = vertices.len();
                (0..n).all(|i| {
                    let p = vertices[i];
                    let e = vertices[(i + 1) % n] - p;
                    let d = y - p;
                    e[0] * d[1] - e[1] * d[0] > 0.0
                })
            }
            BaseDomain::Star { .. } => {
                let r = y.norm();
                if r == 0.0 {
                    return true;
                }
                r < self.extent(&(y / r))
            }
        }
    }

    /// Length (n = 2) or area (n = 3) of the domain.
    pub fn measure(&self) -> f64 {
        match self {
            BaseDomain::Interval { a, b, .. } => b - a,
            BaseDomain::Polygon { vertices } => polygon_area(vertices),
            BaseDomain::Star { radius } => {
                let m = 4096;
                (0..m)
                    .map(|j| {
                        let r = radius(2.0 * PI * j as f64 / m as f64);
                        0.5 * r * r
                    })
                    .sum::<f64>()
                    * (2.0 * PI / m as f64)
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            BaseDomain::Interval { a, b, .. } => b - a,
            BaseDomain::Polygon { vertices } => {
                let mut d: f64 = 0.0;
                for p in vertices {
                    for q in vertices {
                        d = d.max((p - q).norm());
                    }
                }
                d
            }
            BaseDomain::Star { radius } => {
                let m = 256;
                (0..m / 2)
                    .map(|j| {
                        let a = 2.0 * PI * j as f64 / m as f64;
                        radius(a) + radius(a + PI)
                    })
                    .fold(0.0, f64::max)
            }
        }
    }
}

pub fn polygon_area(v: &[V2]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let p = v[i];
            let q = v[(i + 1) % n];
            p[0] * q[1] - p[1] * q[0]
        })
        .sum::<f64>()
}

/// Quadrature nodes strictly inside a base domain.
#[derive(Debug, Clone)]
pub struct PlanarRule {
    pub base_dim: usize,
    pub resolution: usize,
    pub grading: f64,
    pub nodes: Vec<V2>,
    pub weights: Vec<f64>,
}

impl PlanarRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(&V2) -> f64>(&self, mut f: F) -> Result<f64> {
        let mut s = CompensatedSum::new();
        for (k, (x, w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::Evaluation(format!(
                    "non-finite integrand {v} at base node {k} ({:.6}, {:.6})",
                    x[0], x[1]
                )));
            }
            s.add(w * v);
        }
        Ok(s.value())
    }
}

/// Rule for `∫₀¹ φ(d) dd` using panels in `s` with `d = s^q`; panel weights
/// are rescaled so that constants are integrated exactly for any real `q`.
fn graded_unit_rule(panels: usize, q: f64) -> Vec<(f64, f64)> {
    let (gx, gw) = gauss_legendre(PANEL);
    let mut out = Vec::with_capacity(panels * PANEL);
    for k in 0..panels {
        let s0 = k as f64 / panels as f64;
        let s1 = (k + 1) as f64 / panels as f64;
        let half = 0.5 * (s1 - s0);
        let mid = 0.5 * (s1 + s0);
        let mut pts: Vec<(f64, f64)> = gx
            .iter()
            .zip(&gw)
            .map(|(x, w)| {
                let s = mid + half * x;
                (s.powf(q), w * half * q * s.powf(q - 1.0))
            })
            .collect();
        let exact = s1.powf(q) - s0.powf(q);
        let approx: f64 = pts.iter().map(|p| p.1).sum();
        if approx > 0.0 {
            let scale = exact / approx;
            for p in &mut pts {
                p.1 *= scale;
            }
        }
        out.extend(pts);
    }
    out
}

fn panels_for(nodes: usize) -> usize {
    (nodes / PANEL).max(1)
}

/// Builds a base rule. For intervals, `resolution` is the total node count;
/// for planar domains it sets `resolution/8` radial and `resolution/4`
/// angular nodes (per fan triangle, `resolution/8 × resolution/32`).
pub fn planar_rule(base: &BaseDomain, resolution: usize, grading: f64) -> Result<PlanarRule> {
    if !(1.0..=4.0).contains(&grading) {
        return Err(Error::Argument(format!("grading {grading} outside [1, 4]")));
    }
    if resolution < 16 {
        return Err(Error::Argument(format!("planar resolution {resolution} below 16")));
    }
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    match base {
        BaseDomain::Interval { a, b, breaks } => {
            if !(b > a) {
                return Err(Error::Argument("empty base interval".into()));
            }
            let mut cuts = vec![*a];
            let mut inner: Vec<f64> = breaks
                .iter()
                .copied()
                .filter(|x| *x > a + 1e-12 * (b - a) && *x < b - 1e-12 * (b - a))
                .collect();
            inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
            inner.dedup_by(|x, y| (*x - *y).abs() < 1e-12 * (b - a));
            cuts.extend(inner);
            cuts.push(*b);
            let pieces = cuts.len() - 1;
            for w in cuts.windows(2) {
                let (lo, hi) = (w[0], w[1]);
                let share = ((resolution as f64) * (hi - lo) / (b - a)).round() as usize;
                let per_half = (share / 2).max(2 * PANEL).max(resolution / (2 * pieces) / 4);
                let rule = graded_unit_rule(panels_for(per_half), grading);
                let hl = 0.5 * (hi - lo);
                for &(d, wt) in &rule {
                    nodes.push(V2::new(lo + hl * d, 0.0));
                    weights.push(wt * hl);
                }
                for &(d, wt) in rule.iter().rev() {
                    nodes.push(V2::new(hi - hl * d, 0.0));
                    weights.push(wt * hl);
                }
            }
            Ok(PlanarRule { base_dim: 1, resolution, grading, nodes, weights })
        }
        BaseDomain::Star { radius } => {
            let nr = panels_for((resolution / 8).max(PANEL));
            let nphi = (resolution / 4).max(8);
            let rule = graded_unit_rule(nr, grading);
            for j in 0..nphi {
                let phi = 2.0 * PI * (j as f64 + 0.5) / nphi as f64;
                let big_r = radius(phi);
                if !(big_r > 0.0) {
                    return Err(Error::Argument("empty star base".into()));
                }
                let (c, s) = (phi.cos(), phi.sin());
                for &(d, wt) in &rule {
                    let r = big_r * (1.0 - d);
                    nodes.push(V2::new(r * c, r * s));
                    weights.push(wt * big_r * r * 2.0 * PI / nphi as f64);
                }
            }
            Ok(PlanarRule { base_dim: 2, resolution, grading, nodes, weights })
        }
        BaseDomain::Polygon { vertices } => {
            if vertices.len() < 3 || polygon_area(vertices) <= 0.0 {
                return Err(Error::Argument("empty base polygon".into()));
            }
            let nv = vertices.len();
            let c = vertices.iter().fold(V2::zeros(), |acc, v| acc + v) / nv as f64;
            let nr = panels_for((resolution / 8).max(PANEL));
            let nt = (resolution / 32).max(4);
            let rule = graded_unit_rule(nr, grading);
            let (tx, tw) = gauss_legendre(nt);
            for i in 0..nv {
                let p = vertices[i];
                let q = vertices[(i + 1) % nv];
                let e0 = p - c;
                let e1 = q - p;
                let jac = (e0[0] * e1[1] - e0[1] * e1[0]).abs();
                for (x, wx) in tx.iter().zip(&tw) {
                    let tau = 0.5 * (x + 1.0);
                    let edge = p + e1 * tau;
                    for &(d, wt) in &rule {
                        let r = 1.0 - d;
                        nodes.push(c + (edge - c) * r);
                        weights.push(wt * r * jac * 0.5 * wx);
                    }
                }
            }
            Ok(PlanarRule { base_dim: 2, resolution, grading, nodes, weights })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_weights_sum_to_area() {
        let r2 = sphere_rule(2, 64).unwrap();
        assert!((r2.weights.iter().sum::<f64>() - 2.0 * PI).abs() < 1e-12);
        let r3 = sphere_rule(3, 16).unwrap();
        assert!((r3.weights.iter().sum::<f64>() - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn antipodes_are_antipodal() {
        for r in [sphere_rule(2, 10).unwrap(), sphere_rule(3, 6).unwrap()] {
            for k in 0..r.len() {
                let a = r.antipode(k);
                assert!((r.nodes[k] + r.nodes[a]).norm() < 1e-14);
                assert_eq!(r.weights[k], r.weights[a]);
            }
        }
    }

    #[test]
    fn rejects_bad_orders() {
        assert!(sphere_rule(4, 16).is_err());
        assert!(sphere_rule(2, 2).is_err());
        assert!(sphere_rule(2, 7).is_err());
    }

    #[test]
    fn first_order_interpolation_is_exact_at_nodes() {
        let r = sphere_rule(3, 8).unwrap();
        let vals: Vec<f64> = r.nodes.iter().map(|x| 1.0 + x[0] + 2.0 * x[2]).collect();
        for k in [0, 5, 37, 100] {
            let v = r.interpolate(&vals, &r.nodes[k], Interpolation::FirstOrder);
            assert!((v - vals[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn interval_rule_weights() {
        let base = BaseDomain::Interval { a: -1.0, b: 2.0, breaks: vec![0.5] };
        let r = planar_rule(&base, 64, 2.5).unwrap();
        assert!((r.weights.iter().sum::<f64>() - 3.0).abs() < 1e-12);
        assert!(r.nodes.iter().all(|x| x[0] > -1.0 && x[0] < 2.0));
    }

    #[test]
    fn polygon_rule_area() {
        let sq = vec![
            V2::new(-1.0, -1.0),
            V2::new(1.0, -1.0),
            V2::new(1.0, 1.0),
            V2::new(-1.0, 1.0),
        ];
        let r = planar_rule(&BaseDomain::Polygon { vertices: sq }, 128, 2.0).unwrap();
        assert!((r.weights.iter().sum::<f64>() - 4.0).abs() < 1e-12);
        let m = r.integrate(|y| y[0] * y[0]).unwrap();
        assert!((m - 4.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn grading_range_enforced() {
        let base = BaseDomain::Interval { a: -1.0, b: 1.0, breaks: vec![] };
        assert!(planar_rule(&base, 64, 0.5).is_err());
        assert!(planar_rule(&base, 64, 4.5).is_err());
    }
}
