//! Simplicial meshes: container, validation, Delaunay construction,
//! protection, point-net measurement and Coxeter triangulations.

mod coxeter;
mod delaunay;
pub(crate) mod grid;
pub mod io;
mod locate;
mod net;
pub mod predicates;
mod protection;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{
    simplex_volume, GeometryError, Point, Simplex, SimplexGeometry,
};

pub use coxeter::{coxeter_a_tilde, coxeter_diameter, COXETER_MAX_DIM};
pub use delaunay::{delaunay, empty_circumball_violations};
pub use locate::PointLocator;
pub use net::{sample_in_simplex, measure_net, measure_net_on_mesh, random_net, NetOptions, NetParams};
pub use protection::{protection, protection_brute_force, ProtectionReport};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("points[{index}]: expected {expected} coordinates, found {found}")]
    PointDimension {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("simplices[{index}]: expected {expected} vertex ids, found {found}")]
    SimplexArity {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("simplices[{index}]: vertex id {vertex} out of range ({count} points)")]
    VertexOutOfRange {
        index: usize,
        vertex: usize,
        count: usize,
    },
    #[error("simplices[{index}]: repeated vertex id")]
    RepeatedVertex { index: usize },
    #[error("need at least {needed} points, got {found}")]
    TooFewPoints { needed: usize, found: usize },
    #[error("points {first} and {second} coincide")]
    DuplicatePoint { first: usize, second: usize },
    #[error("all points lie on a common hyperplane")]
    Flat,
    #[error("unsupported dimension {dim} (supported: {min}..={max})")]
    UnsupportedDimension { dim: usize, min: usize, max: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("mesh has no simplices")]
    Empty,
    #[error("mesh file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A pure simplicial d-complex over a point store.
#[derive(Clone, Debug)]
pub struct Mesh {
    dim: usize,
    points: Vec<Point>,
    simplices: Vec<Simplex>,
    facet_adjacency: BTreeMap<Vec<usize>, Vec<usize>>,
}

/// Sorted vertex ids of the facet of `simplex` opposite local vertex `r`.
pub fn facet_key(simplex: &Simplex, r: usize) -> Vec<usize> {
    let mut f: Vec<usize> = simplex
        .vertices()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != r)
        .map(|(_, &v)| v)
        .collect();
    f.sort_unstable();
    f
}

impl Mesh {
    pub fn new(dim: usize, points: Vec<Point>, simplices: Vec<Simplex>) -> Result<Self, MeshError> {
        if dim == 0 {
            return Err(GeometryError::ZeroDimension.into());
        }
        for (index, p) in points.iter().enumerate() {
            if p.dim() != dim {
                return Err(MeshError::PointDimension {
                    index,
                    expected: dim,
                    found: p.dim(),
                });
            }
        }
        for (index, s) in simplices.iter().enumerate() {
            if s.vertices().len() != dim + 1 {
                return Err(MeshError::SimplexArity {
                    index,
                    expected: dim + 1,
                    found: s.vertices().len(),
                });
            }
            if let Some(&vertex) = s.vertices().iter().find(|&&v| v >= points.len()) {
                return Err(MeshError::VertexOutOfRange {
                    index,
                    vertex,
                    count: points.len(),
                });
            }
            if !s.has_distinct_vertices() {
                return Err(MeshError::RepeatedVertex { index });
            }
        }
        let mut facet_adjacency: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for (k, s) in simplices.iter().enumerate() {
            for r in 0..=dim {
                facet_adjacency.entry(facet_key(s, r)).or_default().push(k);
            }
        }
        Ok(Self {
            dim,
            points,
            simplices,
            facet_adjacency,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn num_points(&self) -> usize {
        self.points.len()
    }

    pub fn num_simplices(&self) -> usize {
        self.simplices.len()
    }

    /// Map from each sorted (d-1)-face to its incident simplices.
    pub fn facet_adjacency(&self) -> &BTreeMap<Vec<usize>, Vec<usize>> {
        &self.facet_adjacency
    }

    /// Vertex coordinates of simplex `k`.
    pub fn simplex_points(&self, k: usize) -> Vec<&[f64]> {
        self.simplices[k]
            .vertices()
            .iter()
            .map(|&v| self.points[v].coords())
            .collect()
    }

    pub fn simplex_geometry(&self, k: usize) -> Result<SimplexGeometry, GeometryError> {
        SimplexGeometry::compute(&self.simplex_points(k))
    }

    pub fn simplex_volume(&self, k: usize) -> f64 {
        simplex_volume(&self.simplex_points(k)).expect("validated simplex")
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.simplices.len()).map(|k| self.simplex_volume(k)).sum()
    }

    /// Uniformly scaled copy `x -> factor * x`.
    pub fn scaled(&self, factor: f64) -> Mesh {
        let points = self
            .points
            .iter()
            .map(|p| Point::new(p.iter().map(|c| c * factor).collect()).expect("finite"))
            .collect();
        Mesh::new(self.dim, points, self.simplices.clone()).expect("same topology")
    }

    /// Disjoint union; the second mesh's vertex ids are offset.
    pub fn disjoint_union(&self, other: &Mesh) -> Result<Mesh, MeshError> {
        let offset = self.points.len();
        let mut points = self.points.clone();
        points.extend(other.points.iter().cloned());
        let mut simplices = self.simplices.clone();
        simplices.extend(
            other
                .simplices
                .iter()
                .map(|s| Simplex::new(s.vertices().iter().map(|v| v + offset).collect())),
        );
        Mesh::new(self.dim, points, simplices)
    }

    /// Reports every facet whose incidence count is not 1 or 2.
    pub fn validate_pseudo_manifold(&self) -> PseudoManifoldReport {
        let bad_facets: Vec<BadFacet> = self
            .facet_adjacency
            .iter()
            .filter(|(_, inc)| !(1..=2).contains(&inc.len()))
            .map(|(f, inc)| BadFacet {
                facet: f.clone(),
                incident: inc.clone(),
            })
            .collect();
        let boundary_facets = self
            .facet_adjacency
            .values()
            .filter(|inc| inc.len() == 1)
            .count();
        PseudoManifoldReport {
            passed: bad_facets.is_empty() && !self.simplices.is_empty(),
            bad_facets,
            boundary_facets,
            interior_facets: self
                .facet_adjacency
                .values()
                .filter(|inc| inc.len() == 2)
                .count(),
        }
    }

    /// Full structural check: pseudo-manifold facets, degenerate simplices,
    /// pairwise overlap by barycenter containment, and coverage of the convex
    /// hull of the vertices. The overlap scan is quadratic in the number of
    /// simplices.
    pub fn validate(&self) -> Result<MeshValidation, MeshError> {
        let pm = self.validate_pseudo_manifold();
        let mut degenerate = Vec::new();
        for k in 0..self.simplices.len() {
            if self.simplex_geometry(k).is_err() {
                degenerate.push(k);
            }
        }
        let overlapping = self.overlapping_pairs();
        let mesh_volume = self.total_volume();
        let used: Vec<Point> = {
            let mut ids: Vec<usize> = self
                .simplices
                .iter()
                .flat_map(|s| s.vertices().iter().copied())
                .collect();
            ids.sort_unstable();
            ids.dedup();
            ids.into_iter().map(|i| self.points[i].clone()).collect()
        };
        let hull_volume = delaunay(&used)?.total_volume();
        let hull_ok = (mesh_volume - hull_volume).abs() <= 1e-8 * hull_volume;
        Ok(MeshValidation {
            passed: pm.passed && degenerate.is_empty() && overlapping.is_empty() && hull_ok,
            pseudo_manifold: pm,
            degenerate_simplices: degenerate,
            overlapping_pairs: overlapping,
            mesh_volume,
            hull_volume,
            covers_hull: hull_ok,
        })
    }

    fn overlapping_pairs(&self) -> Vec<(usize, usize)> {
        let d = self.dim;
        let boxes: Vec<(Vec<f64>, Vec<f64>)> = (0..self.simplices.len())
            .map(|k| {
                let pts = self.simplex_points(k);
                let lo = (0..d)
                    .map(|m| pts.iter().map(|p| p[m]).fold(f64::INFINITY, f64::min))
                    .collect();
                let hi = (0..d)
                    .map(|m| pts.iter().map(|p| p[m]).fold(f64::NEG_INFINITY, f64::max))
                    .collect();
                (lo, hi)
            })
            .collect();
        let mut out = Vec::new();
        for a in 0..self.simplices.len() {
            let pa = self.simplex_points(a);
            let bary: Vec<f64> = (0..d)
                .map(|m| pa.iter().map(|p| p[m]).sum::<f64>() / (d + 1) as f64)
                .collect();
            for (b, (lo, hi)) in boxes.iter().enumerate() {
                if a == b || (0..d).any(|m| bary[m] < lo[m] || bary[m] > hi[m]) {
                    continue;
                }
                if let Some(l) = barycentric_coordinates(&self.simplex_points(b), &bary) {
                    if l.iter().all(|&x| x > 1e-10) {
                        out.push((a.min(b), a.max(b)));
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Barycentric coordinates of `x` in a nondegenerate simplex.
pub fn barycentric_coordinates<P: AsRef<[f64]>>(simplex: &[P], x: &[f64]) -> Option<Vec<f64>> {
    let d = x.len();
    let p0 = simplex[0].as_ref();
    let a = nalgebra::DMatrix::from_fn(d, d, |i, j| simplex[j + 1].as_ref()[i] - p0[i]);
    let b = nalgebra::DVector::from_fn(d, |i, _| x[i] - p0[i]);
    let sol = a.lu().solve(&b)?;
    let mut l = Vec::with_capacity(d + 1);
    l.push(1.0 - sol.iter().sum::<f64>());
    l.extend(sol.iter());
    Some(l)
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct BadFacet {
    pub facet: Vec<usize>,
    pub incident: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct PseudoManifoldReport {
    pub passed: bool,
    pub bad_facets: Vec<BadFacet>,
    pub boundary_facets: usize,
    pub interior_facets: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeshValidation {
    pub passed: bool,
    pub pseudo_manifold: PseudoManifoldReport,
    pub degenerate_simplices: Vec<usize>,
    pub overlapping_pairs: Vec<(usize, usize)>,
    pub mesh_volume: f64,
    pub hull_volume: f64,
    pub covers_hull: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(c: &[[f64; 2]]) -> Vec<Point> {
        c.iter().map(|&p| Point::from(p)).collect()
    }

    #[test]
    fn square_is_a_pseudo_manifold() {
        let m = Mesh::new(
            2,
            pts(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
            vec![Simplex::new(vec![0, 1, 2]), Simplex::new(vec![0, 2, 3])],
        )
        .unwrap();
        let r = m.validate_pseudo_manifold();
        assert!(r.passed);
        assert_eq!(r.interior_facets, 1);
        assert_eq!(r.boundary_facets, 4);
        let v = m.validate().unwrap();
        assert!(v.passed, "{v:?}");
    }

    #[test]
    fn three_triangles_on_one_edge_fail() {
        let m = Mesh::new(
            2,
            pts(&[[0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [0.5, -1.0], [0.5, 2.0]]),
            vec![
                Simplex::new(vec![0, 1, 2]),
                Simplex::new(vec![0, 1, 3]),
                Simplex::new(vec![0, 1, 4]),
            ],
        )
        .unwrap();
        let r = m.validate_pseudo_manifold();
        assert!(!r.passed);
        assert_eq!(r.bad_facets.len(), 1);
        assert_eq!(r.bad_facets[0].facet, vec![0, 1]);
        assert_eq!(r.bad_facets[0].incident.len(), 3);
        assert!(!m.validate().unwrap().overlapping_pairs.is_empty());
    }

    #[test]
    fn single_simplex_passes() {
        let m = Mesh::new(
            2,
            pts(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
            vec![Simplex::new(vec![0, 1, 2])],
        )
        .unwrap();
        let r = m.validate_pseudo_manifold();
        assert!(r.passed);
        assert_eq!(r.boundary_facets, 3);
    }

    #[test]
    fn non_convex_union_does_not_cover_hull() {
        // An L-shaped pair of triangles leaves part of the hull uncovered.
        let m = Mesh::new(
            2,
            pts(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 0.0]]),
            vec![Simplex::new(vec![0, 1, 2]), Simplex::new(vec![1, 4, 3])],
        )
        .unwrap();
        let v = m.validate().unwrap();
        assert!(!v.covers_hull);
        assert!(!v.passed);
    }

    #[test]
    fn constructor_rejects_bad_input() {
        let p = pts(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!(matches!(
            Mesh::new(2, p.clone(), vec![Simplex::new(vec![0, 1])]),
            Err(MeshError::SimplexArity { index: 0, .. })
        ));
        assert!(matches!(
            Mesh::new(2, p.clone(), vec![Simplex::new(vec![0, 1, 7])]),
            Err(MeshError::VertexOutOfRange { vertex: 7, .. })
        ));
        assert!(matches!(
            Mesh::new(2, p.clone(), vec![Simplex::new(vec![0, 1, 1])]),
            Err(MeshError::RepeatedVertex { .. })
        ));
        assert!(matches!(
            Mesh::new(3, p, vec![]),
            Err(MeshError::PointDimension { index: 0, .. })
        ));
    }
}
