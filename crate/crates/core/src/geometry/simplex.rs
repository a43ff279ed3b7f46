use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{dd, dist, dot, factorial, norm, simplex_dim, sub, GeometryError};
use crate::geometry::ball::min_containment_ball;

/// A simplex is degenerate when `|K| < DEGENERACY_TOLERANCE * diam(K)^d`.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

/// Edge vectors `p_i - p_base` for every `i != base`, as rows.
fn edge_rows<P: AsRef<[f64]>>(points: &[P], base: usize) -> Vec<Vec<f64>> {
    let b = points[base].as_ref();
    points
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != base)
        .map(|(_, p)| sub(p.as_ref(), b))
        .collect()
}

/// Signed volume `det([p_1 - p_0, ..., p_d - p_0]) / d!`.
pub fn signed_volume<P: AsRef<[f64]>>(points: &[P]) -> Result<f64, GeometryError> {
    let d = simplex_dim(points)?;
    Ok(dd::determinant(&edge_rows(points, 0)) / factorial(d))
}

/// d-dimensional hypervolume `|det([q_1, ..., q_d])| / d!`.
pub fn simplex_volume<P: AsRef<[f64]>>(points: &[P]) -> Result<f64, GeometryError> {
    signed_volume(points).map(f64::abs)
}

/// Longest edge length.
pub fn diameter<P: AsRef<[f64]>>(points: &[P]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..points.len() {
        for j in 0..i {
            best = best.max(dist(points[i].as_ref(), points[j].as_ref()));
        }
    }
    best
}

/// `sum_{i>j} |p_j - p_i|^2`.
pub fn edge_length_squared_sum<P: AsRef<[f64]>>(points: &[P]) -> f64 {
    let mut s = 0.0;
    for i in 0..points.len() {
        for j in 0..i {
            let e = sub(points[i].as_ref(), points[j].as_ref());
            s += dot(&e, &e);
        }
    }
    s
}

pub fn is_degenerate(volume: f64, diameter: f64, dim: usize) -> bool {
    !(volume >= DEGENERACY_TOLERANCE * diameter.powi(dim as i32)) || diameter == 0.0
}

fn nondegenerate_volume<P: AsRef<[f64]>>(points: &[P]) -> Result<(usize, f64), GeometryError> {
    let d = simplex_dim(points)?;
    let volume = simplex_volume(points)?;
    let diameter = diameter(points);
    if is_degenerate(volume, diameter, d) {
        return Err(GeometryError::Degenerate { volume, diameter });
    }
    Ok((d, volume))
}

/// Generalized cross product of `d - 1` row vectors in R^d: the vector `n`
/// with `n . w = det([v_1; ...; v_{d-1}; w])` for every `w`.
fn cross_product(rows: &[Vec<f64>], d: usize) -> Vec<f64> {
    (0..d)
        .map(|m| {
            let minor: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|&(c, _)| c != m)
                        .map(|(_, &x)| x)
                        .collect()
                })
                .collect();
            let sign = if (d - 1 + m) % 2 == 0 { 1.0 } else { -1.0 };
            sign * dd::determinant(&minor)
        })
        .collect()
}

/// Outward normal `n(r)` of the facet opposite vertex `r`, scaled so that
/// `|n(r)| = (d-1)! |F_r|`, together with the facet volume `|F_r|`.
pub fn facet_normal_and_volume<P: AsRef<[f64]>>(
    points: &[P],
    r: usize,
) -> Result<(Vec<f64>, f64), GeometryError> {
    let (d, _) = nondegenerate_volume(points)?;
    if r > d {
        return Err(GeometryError::VertexIndex { index: r, count: d + 1 });
    }
    let base = if r == 0 { 1 } else { 0 };
    let b = points[base].as_ref();
    let rows: Vec<Vec<f64>> = points
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != r && i != base)
        .map(|(_, p)| sub(p.as_ref(), b))
        .collect();
    let mut n = cross_product(&rows, d);
    let toward_r = sub(points[r].as_ref(), b);
    if dot(&n, &toward_r) > 0.0 {
        n.iter_mut().for_each(|c| *c = -*c);
    }
    let volume = norm(&n) / factorial(d - 1);
    Ok((n, volume))
}

/// Distance from vertex `s` to the affine hull of its opposite facet,
/// `d |K| / |F_s|`.
pub fn elevation<P: AsRef<[f64]>>(points: &[P], s: usize) -> Result<f64, GeometryError> {
    let (d, volume) = nondegenerate_volume(points)?;
    let (_, facet) = facet_normal_and_volume(points, s)?;
    Ok(d as f64 * volume / facet)
}

/// Thickness of a simplex, with a flag raised for degenerate input (value 0).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thickness {
    pub value: f64,
    pub degenerate: bool,
}

/// `min_s elevation(s) / (d * diam(K))`; 0 with `degenerate = true` when the
/// simplex is flat.
pub fn thickness<P: AsRef<[f64]>>(points: &[P]) -> Result<Thickness, GeometryError> {
    match SimplexGeometry::compute(points) {
        Ok(g) => Ok(Thickness {
            value: g.thickness,
            degenerate: false,
        }),
        Err(GeometryError::Degenerate { .. }) => Ok(Thickness {
            value: 0.0,
            degenerate: true,
        }),
        Err(e) => Err(e),
    }
}

/// Center and radius of the sphere through all `d + 1` vertices.
pub fn circumsphere<P: AsRef<[f64]>>(points: &[P]) -> Result<(Vec<f64>, f64), GeometryError> {
    let (d, _) = nondegenerate_volume(points)?;
    let p0 = points[0].as_ref();
    let rows = edge_rows(points, 0);
    let a = DMatrix::from_fn(d, d, |i, j| 2.0 * rows[i][j]);
    let b = DVector::from_fn(d, |i, _| dot(&rows[i], &rows[i]));
    let volume = simplex_volume(points)?;
    let diameter = diameter(points);
    let sol = a
        .lu()
        .solve(&b)
        .ok_or(GeometryError::Degenerate { volume, diameter })?;
    let center: Vec<f64> = p0.iter().zip(sol.iter()).map(|(x, c)| x + c).collect();
    let radius = points
        .iter()
        .map(|p| dist(p.as_ref(), &center))
        .fold(0.0, f64::max);
    Ok((center, radius))
}

/// Derived per-simplex quantities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexGeometry {
    pub dim: usize,
    pub volume: f64,
    pub diameter: f64,
    pub elevations: Vec<f64>,
    pub thickness: f64,
    pub circumcenter: Vec<f64>,
    pub circumradius: f64,
    pub mcc_center: Vec<f64>,
    pub mcc_radius: f64,
    pub facet_volumes: Vec<f64>,
}

impl SimplexGeometry {
    pub fn compute<P: AsRef<[f64]>>(points: &[P]) -> Result<Self, GeometryError> {
        let (d, volume) = nondegenerate_volume(points)?;
        let diameter = diameter(points);
        let mut facet_volumes = Vec::with_capacity(d + 1);
        for r in 0..=d {
            facet_volumes.push(facet_normal_and_volume(points, r)?.1);
        }
        let elevations: Vec<f64> = facet_volumes
            .iter()
            .map(|f| d as f64 * volume / f)
            .collect();
        let min_elevation = elevations.iter().copied().fold(f64::INFINITY, f64::min);
        let (circumcenter, circumradius) = circumsphere(points)?;
        let mcc = min_containment_ball(points)?;
        Ok(Self {
            dim: d,
            volume,
            diameter,
            thickness: min_elevation / (d as f64 * diameter),
            elevations,
            circumcenter,
            circumradius,
            mcc_radius: mcc.radius.min(circumradius),
            mcc_center: mcc.center,
            facet_volumes,
        })
    }

    pub fn min_elevation(&self) -> f64 {
        self.elevations.iter().copied().fold(f64::INFINITY, f64::min)
    }
}
