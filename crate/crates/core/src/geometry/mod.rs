//! Single-simplex geometry: points, volumes, facet normals, elevations,
//! thickness, circumspheres, enclosing balls and simplex quadrature.

mod ball;
pub(crate) mod dd;
mod quadrature;
mod simplex;

use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ball::{brute_force_ball, min_containment_ball, Ball};
pub use quadrature::{
    compositions, monomial_integral, simplex_quadrature, QuadratureFamily, QuadratureRule, MAX_QUADRATURE_DEGREE,
};
pub use simplex::{
    circumsphere, diameter, edge_length_squared_sum, elevation, facet_normal_and_volume,
    is_degenerate, signed_volume, simplex_volume, thickness, SimplexGeometry, Thickness,
    DEGENERACY_TOLERANCE,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point has dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("a {dim}-simplex needs {expected} vertices, got {found}")]
    VertexCount { dim: usize, expected: usize, found: usize },
    #[error("non-finite coordinate {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("degenerate simplex (volume {volume:e}, diameter {diameter:e})")]
    Degenerate { volume: f64, diameter: f64 },
    #[error("vertex index {index} out of range for a simplex with {count} vertices")]
    VertexIndex { index: usize, count: usize },
    #[error("empty point set")]
    Empty,
    #[error("quadrature degree {degree} exceeds the supported maximum {max}")]
    UnsupportedDegree { degree: usize, max: usize },
}

/// A point in R^d with finite coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self, GeometryError> {
        if coords.is_empty() {
            return Err(GeometryError::ZeroDimension);
        }
        if let Some((index, &value)) = coords.iter().enumerate().find(|(_, c)| !c.is_finite()) {
            return Err(GeometryError::NonFinite { index, value });
        }
        Ok(Self(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Componentwise absolute value.
    pub fn abs(&self) -> Point {
        Point(self.0.iter().map(|c| c.abs()).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = GeometryError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

impl<const N: usize> From<[f64; N]> for Point {
    /// Panics on non-finite input or `N == 0`; intended for literals.
    fn from(c: [f64; N]) -> Self {
        Point::new(c.to_vec()).expect("finite literal coordinates")
    }
}

/// Vertex indices of a d-simplex into a point store.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Simplex(pub Vec<usize>);

impl Simplex {
    pub fn new(vertices: Vec<usize>) -> Self {
        Self(vertices)
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    /// True when all vertex ids are distinct.
    pub fn has_distinct_vertices(&self) -> bool {
        let mut v = self.0.clone();
        v.sort_unstable();
        v.windows(2).all(|w| w[0] != w[1])
    }

    /// The `d(d+1)/2` vertex pairs `(i, j)` with `j < i`, in local indices.
    pub fn edge_pairs(dim: usize) -> impl Iterator<Item = (usize, usize)> {
        (0..=dim).flat_map(|i| (0..i).map(move |j| (i, j)))
    }
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Checks that `points` are `d+1` points of a common dimension `d` and
/// returns `d`.
pub(crate) fn simplex_dim<P: AsRef<[f64]>>(points: &[P]) -> Result<usize, GeometryError> {
    let first = points.first().ok_or(GeometryError::Empty)?;
    let d = first.as_ref().len();
    if d == 0 {
        return Err(GeometryError::ZeroDimension);
    }
    for p in points {
        if p.as_ref().len() != d {
            return Err(GeometryError::DimensionMismatch {
                expected: d,
                found: p.as_ref().len(),
            });
        }
    }
    if points.len() != d + 1 {
        return Err(GeometryError::VertexCount {
            dim: d,
            expected: d + 1,
            found: points.len(),
        });
    }
    Ok(d)
}

/// Converts barycentric coordinates on a simplex into a physical point.
pub fn barycentric_to_point<P: AsRef<[f64]>>(vertices: &[P], bary: &[f64]) -> Vec<f64> {
    let d = vertices[0].as_ref().len();
    let mut x = vec![0.0; d];
    for (v, &l) in vertices.iter().zip(bary) {
        for (xm, vm) in x.iter_mut().zip(v.as_ref()) {
            *xm += l * vm;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_rejects_non_finite() {
        assert!(matches!(
            Point::new(vec![0.0, f64::NAN]),
            Err(GeometryError::NonFinite { index: 1, .. })
        ));
        assert!(matches!(Point::new(vec![]), Err(GeometryError::ZeroDimension)));
    }

    #[test]
    fn point_abs_is_componentwise() {
        let p = Point::from([-1.0, 2.0, -3.5]);
        assert_eq!(p.abs().coords(), &[1.0, 2.0, 3.5]);
    }

    #[test]
    fn edge_pairs_count() {
        for d in 1..6 {
            assert_eq!(Simplex::edge_pairs(d).count(), d * (d + 1) / 2);
        }
    }

    #[test]
    fn simplex_distinctness() {
        assert!(Simplex::new(vec![0, 1, 2]).has_distinct_vertices());
        assert!(!Simplex::new(vec![0, 1, 1]).has_distinct_vertices());
    }
}
