//! Convex hulls in the plane (monotone chain) and in space (parry).

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::{V2, V3};

/// Indices of the strict hull vertices in counter-clockwise order.
pub fn hull2(points: &[V2]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&i, &j| {
        points[i][0]
            .partial_cmp(&points[j][0])
            .unwrap()
            .then(points[i][1].partial_cmp(&points[j][1]).unwrap())
    });
    idx.dedup_by(|a, b| points[*a] == points[*b]);
    if idx.len() < 3 {
        return idx;
    }
    let cross = |o: usize, a: usize, b: usize| {
        let (o, a, b) = (points[o], points[a], points[b]);
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], i) <= 0.0 {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], i) <= 0.0 {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Triangulated hull with outward-oriented triangles, as indices into `points`.
pub fn hull3(points: &[V3]) -> Result<Vec<[usize; 3]>> {
    if points.len() < 4 {
        return Err(Error::Validation("fewer than four points for a 3-d hull".into()));
    }
    use parry3d_f64::math::Vector;
    let pts: Vec<Vector> = points.iter().map(|p| Vector::new(p[0], p[1], p[2])).collect();
    let (hv, tris) = parry3d_f64::transformation::convex_hull(&pts);
    let mut lookup: HashMap<[u64; 3], usize> = HashMap::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        lookup.entry([p[0].to_bits(), p[1].to_bits(), p[2].to_bits()]).or_insert(i);
    }
    let map: Vec<usize> = hv
        .iter()
        .map(|v| {
            lookup
                .get(&[v.x.to_bits(), v.y.to_bits(), v.z.to_bits()])
                .copied()
                .ok_or_else(|| Error::Validation("hull returned an unknown vertex".into()))
        })
        .collect::<Result<_>>()?;
    let centroid = map.iter().fold(V3::zeros(), |acc, &i| acc + points[i]) / map.len().max(1) as f64;
    let mut out = Vec::with_capacity(tris.len());
    for t in tris {
        let mut tri = [map[t[0] as usize], map[t[1] as usize], map[t[2] as usize]];
        let (a, b, c) = (points[tri[0]], points[tri[1]], points[tri[2]]);
        let n = (b - a).cross(&(c - a));
        if n.dot(&(a - centroid)) < 0.0 {
            tri.swap(1, 2);
        }
        out.push(tri);
    }
    if out.len() < 4 {
        return Err(Error::Validation("degenerate (coplanar) point set".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_with_interior_and_collinear_points() {
        let p = vec![
            V2::new(0.0, 0.0),
            V2::new(1.0, 0.0),
            V2::new(1.0, 1.0),
            V2::new(0.0, 1.0),
            V2::new(0.5, 0.5),
            V2::new(0.5, 0.0),
        ];
        let h = hull2(&p);
        assert_eq!(h, vec![0, 1, 2, 3]);
    }

    #[test]
    fn cube_hull_has_twelve_outward_triangles() {
        let pts: Vec<V3> = (0..8)
            .map(|k| {
                V3::new(
                    if k & 1 == 0 { -1.0 } else { 1.0 },
                    if k & 2 == 0 { -1.0 } else { 1.0 },
                    if k & 4 == 0 { -1.0 } else { 1.0 },
                )
            })
            .collect();
        let t = hull3(&pts).unwrap();
        assert_eq!(t.len(), 12);
        for tri in t {
            let (a, b, c) = (pts[tri[0]], pts[tri[1]], pts[tri[2]]);
            assert!((b - a).cross(&(c - a)).dot(&a) > 0.0);
        }
    }
}
