//! The standard fixture set and seeded direction samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bodies::{Body, Ellipsoid, GraphBody, GraphOrigin, Polytope, QuarticGauge, UnitVector};
use crate::error::{Error, Result};
use crate::quadrature::sphere_rule;
use crate::{M3, V3};

/// A body with the exponent and axes it is verified against.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub body: Body,
    pub p: f64,
    pub axes: Vec<UnitVector>,
    /// Smooth with positive curvature (ellipsoids and quartic gauges).
    pub smooth: bool,
}

impl Fixture {
    pub fn new(name: &str, body: Body, p: f64, seed: u64) -> Result<Self> {
        let axes = standard_axes(body.dim(), seed)?;
        let smooth = match &body {
            Body::Ellipsoid(_) => true,
            Body::Graph(g) => matches!(g.origin(), GraphOrigin::Quartic(_) | GraphOrigin::Gauge(_)),
            _ => false,
        };
        Ok(Self { name: name.into(), body, p, axes, smooth })
    }

    pub fn dim(&self) -> usize {
        self.body.dim()
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform random unit vector by rejection from the cube.
fn random_unit(dim: usize, r: &mut ChaCha8Rng) -> V3 {
    loop {
        let mut v = V3::zeros();
        for i in 0..dim {
            v[i] = r.gen_range(-1.0..1.0);
        }
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// n = 2: angles 0, π/2, π/4 and one seeded angle. n = 3: e₁, e₃,
/// (1,1,1)/√3 and one seeded direction.
pub fn standard_axes(dim: usize, seed: u64) -> Result<Vec<UnitVector>> {
    let mut r = rng(seed ^ 0xa5a5);
    if dim == 2 {
        let a = r.gen_range(0.0..std::f64::consts::PI);
        [0.0, std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_4, a]
            .iter()
            .map(|t: &f64| UnitVector::new(2, V3::new(t.cos(), t.sin(), 0.0)))
            .collect()
    } else if dim == 3 {
        Ok(vec![
            UnitVector::axis(3, 0)?,
            UnitVector::axis(3, 2)?,
            UnitVector::new(3, V3::new(1.0, 1.0, 1.0))?,
            UnitVector::new(3, random_unit(3, &mut r))?,
        ])
    } else {
        Err(Error::Argument(format!("dimension {dim} is not supported")))
    }
}

/// All nodes of a sphere rule of the given order followed by `extra`
/// seeded random directions.
pub fn sample_directions(dim: usize, order: usize, extra: usize, seed: u64) -> Result<Vec<V3>> {
    let mut dirs = sphere_rule(dim, order)?.nodes;
    let mut r = rng(seed);
    dirs.extend((0..extra).map(|_| random_unit(dim, &mut r)));
    Ok(dirs)
}

/// `count` seeded random unit vectors.
pub fn random_directions(dim: usize, count: usize, seed: u64) -> Vec<V3> {
    let mut r = rng(seed);
    (0..count).map(|_| random_unit(dim, &mut r)).collect()
}

/// Convex hull of `±v` for `count` seeded points with coordinates in `[−1, 1]`.
pub fn random_symmetric_polytope(dim: usize, count: usize, seed: u64) -> Result<Polytope> {
    let mut r = rng(seed);
    let mut pts = Vec::with_capacity(2 * count);
    for _ in 0..count {
        let mut v = V3::zeros();
        for i in 0..dim {
            v[i] = r.gen_range(-1.0..1.0);
        }
        pts.push(v);
        pts.push(-v);
    }
    // keep the origin well inside
    for i in 0..dim {
        let mut e = V3::zeros();
        e[i] = 0.25;
        pts.push(e);
        pts.push(-e);
    }
    Polytope::from_vertices(dim, &pts)
}

fn quartic(dim: usize, p: M3, terms: &[([f64; 3], f64)]) -> Result<Body> {
    let terms = terms.iter().map(|(a, w)| (V3::new(a[0], a[1], a[2]).normalize(), *w)).collect();
    let q = QuarticGauge::new(dim, p, terms)?;
    Ok(Body::Graph(GraphBody::from_quartic(q, &UnitVector::axis(dim, dim - 1)?)?))
}

fn rotation2(a: f64) -> M3 {
    M3::new(a.cos(), -a.sin(), 0.0, a.sin(), a.cos(), 0.0, 0.0, 0.0, 1.0)
}

/// Twelve origin-symmetric smooth fixtures: eight planar, four spatial.
pub fn standard_fixtures(seed: u64) -> Result<Vec<Fixture>> {
    let e2 = |m: M3| -> Result<Body> { Ok(Body::Ellipsoid(Ellipsoid::new(2, m)?)) };
    let e3 = |m: M3| -> Result<Body> { Ok(Body::Ellipsoid(Ellipsoid::new(3, m)?)) };
    let d = |a: f64, b: f64, c: f64| M3::from_diagonal(&V3::new(a, b, c));
    let specs: Vec<(&str, Body, f64)> = vec![
        ("ball2", Body::ball(2, 1.0)?, 1.5),
        ("ellipse_1_2", e2(d(1.0, 2.0, 1.0))?, 2.0),
        ("ellipse_1_3_rot", e2(rotation2(0.5) * d(1.0, 3.0, 1.0))?, 3.0),
        ("sheared_ellipse", e2(M3::new(1.0, 0.8, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0) * d(1.0, 1.5, 1.0))?, 2.0),
        ("quartic_a", quartic(2, d(1.0, 1.5, 0.0), &[([1.0, 1.0, 0.0], 2.0)])?, 1.5),
        (
            "quartic_b",
            quartic(2, M3::new(1.0, 0.3, 0.0, 0.3, 2.0, 0.0, 0.0, 0.0, 0.0), &[([1.0, 0.0, 0.0], 1.0), ([0.6, 0.8, 0.0], 0.5)])?,
            2.0,
        ),
        ("quartic_c", quartic(2, d(1.2, 1.0, 0.0), &[([1.0, -2.0, 0.0], 3.0)])?, 3.0),
        ("quartic_d", quartic(2, d(1.0, 1.0, 0.0), &[([1.0, 0.0, 0.0], 1.0), ([0.0, 1.0, 0.0], 1.0)])?, 2.5),
        ("ball3", Body::ball(3, 1.0)?, 2.0),
        ("ellipsoid_1_1.5_2", e3(d(1.0, 1.5, 2.0))?, 2.0),
        ("sheared_ellipsoid", e3(M3::new(1.0, 0.5, 0.3, 0.0, 1.0, 0.4, 0.0, 0.0, 1.0) * d(1.0, 1.2, 0.9))?, 2.0),
        ("quartic3", quartic(3, d(1.0, 1.3, 1.6), &[([1.0, 1.0, 1.0], 1.5)])?, 2.0),
    ];
    specs
        .into_iter()
        .enumerate()
        .map(|(k, (name, body, p))| Fixture::new(name, body, p, seed.wrapping_add(k as u64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_symmetric() {
        let rule2 = sphere_rule(2, 64).unwrap();
        let rule3 = sphere_rule(3, 8).unwrap();
        let fx = standard_fixtures(7).unwrap();
        assert_eq!(fx.len(), 12);
        for f in &fx {
            let r = if f.dim() == 2 { &rule2 } else { &rule3 };
            assert!(f.body.is_origin_symmetric(r).unwrap(), "{}", f.name);
            assert_eq!(f.axes.len(), 4);
        }
    }

    #[test]
    fn seeded_samples_repeat() {
        assert_eq!(sample_directions(3, 8, 64, 11).unwrap(), sample_directions(3, 8, 64, 11).unwrap());
        let a = random_symmetric_polytope(2, 8, 7).unwrap();
        let b = random_symmetric_polytope(2, 8, 7).unwrap();
        assert_eq!(a.vertices, b.vertices);
        assert!(a.is_origin_symmetric());
    }
}
