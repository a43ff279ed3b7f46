use rayon::prelude::*;
use serde::Serialize;

use super::grid::PointGrid;
use super::Mesh;
use crate::geometry::{circumsphere, dist, GeometryError};

/// Slack below zero tolerated before a simplex is reported as non-Delaunay.
pub const PROTECTION_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ProtectionReport {
    /// `min_K delta_K`; `None` when no simplex has a non-vertex point to
    /// measure against (e.g. a mesh of one simplex).
    pub delta: Option<f64>,
    /// `(simplex id, delta_K)`; `delta_K` is `None` when every point is a
    /// vertex of the simplex.
    pub per_simplex: Vec<(usize, Option<f64>)>,
    /// Simplices whose circumball contains another point by more than the
    /// slack, i.e. evidence the input is not Delaunay.
    pub non_delaunay: Vec<usize>,
}

impl ProtectionReport {
    fn assemble(per_simplex: Vec<(usize, Option<f64>)>, scale: f64) -> Self {
        let delta = per_simplex
            .iter()
            .filter_map(|(_, d)| *d)
            .reduce(f64::min);
        let non_delaunay = per_simplex
            .iter()
            .filter(|(_, d)| d.is_some_and(|d| d < -PROTECTION_SLACK * scale.max(1.0)))
            .map(|(k, _)| *k)
            .collect();
        Self {
            delta,
            per_simplex,
            non_delaunay,
        }
    }

    pub fn is_delaunay(&self) -> bool {
        self.non_delaunay.is_empty()
    }
}

fn mesh_scale(mesh: &Mesh) -> f64 {
    let p0 = mesh.points()[0].coords();
    mesh.points()
        .iter()
        .map(|p| dist(p, p0))
        .fold(0.0, f64::max)
}

/// Protection `delta_K = min_{p not in K} |p - c_K| - R_K` for every simplex
/// and its minimum over the mesh. Uses a bucket grid for the nearest
/// non-vertex point; per-simplex values are gathered in index order.
pub fn protection(mesh: &Mesh) -> Result<ProtectionReport, GeometryError> {
    let grid = PointGrid::new(mesh.points());
    let per: Result<Vec<(usize, Option<f64>)>, GeometryError> = (0..mesh.num_simplices())
        .into_par_iter()
        .map(|k| {
            let (c, r) = circumsphere(&mesh.simplex_points(k))?;
            let nearest = grid.nearest_excluding(&c, mesh.simplices()[k].vertices());
            Ok((k, nearest.map(|(_, d)| d - r)))
        })
        .collect();
    Ok(ProtectionReport::assemble(per?, mesh_scale(mesh)))
}

/// Exhaustive point-versus-circumsphere scan; the oracle for [`protection`].
pub fn protection_brute_force(mesh: &Mesh) -> Result<ProtectionReport, GeometryError> {
    let mut per = Vec::with_capacity(mesh.num_simplices());
    for (k, s) in mesh.simplices().iter().enumerate() {
        let (c, r) = circumsphere(&mesh.simplex_points(k))?;
        let best = mesh
            .points()
            .iter()
            .enumerate()
            .filter(|(i, _)| !s.vertices().contains(i))
            .map(|(_, p)| dist(p, &c) - r)
            .reduce(f64::min);
        per.push((k, best));
    }
    Ok(ProtectionReport::assemble(per, mesh_scale(mesh)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, Simplex};
    use crate::mesh::delaunay;

    #[test]
    fn cocircular_square_has_zero_protection() {
        let p: Vec<Point> = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
            .iter()
            .map(|&c| Point::from(c))
            .collect();
        let m = delaunay(&p).unwrap();
        let r = protection(&m).unwrap();
        assert!(r.delta.unwrap().abs() <= 1e-12);
        assert!(r.is_delaunay());
    }

    #[test]
    fn perturbed_square_is_protected() {
        let p: Vec<Point> = [[0.0, 0.0], [1.1, 0.0], [1.0, 1.0], [0.0, 1.0]]
            .iter()
            .map(|&c| Point::from(c))
            .collect();
        let m = delaunay(&p).unwrap();
        let r = protection(&m).unwrap();
        let oracle = protection_brute_force(&m).unwrap();
        assert!(r.delta.unwrap() > 0.0);
        assert_eq!(r, oracle);
    }

    #[test]
    fn non_delaunay_input_is_reported() {
        // The flipped diagonal of a kite: the far vertex sits inside.
        let p: Vec<Point> = [[0.0, 0.0], [2.0, 0.0], [1.0, 0.2], [1.0, -0.2]]
            .iter()
            .map(|&c| Point::from(c))
            .collect();
        let m = Mesh::new(
            2,
            p,
            vec![Simplex::new(vec![0, 1, 2]), Simplex::new(vec![0, 3, 1])],
        )
        .unwrap();
        let r = protection(&m).unwrap();
        assert!(r.delta.unwrap() < 0.0);
        assert_eq!(r.non_delaunay, vec![0, 1]);
    }

    #[test]
    fn lone_simplex_has_no_protection_value() {
        let p: Vec<Point> = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]
            .iter()
            .map(|&c| Point::from(c))
            .collect();
        let m = Mesh::new(2, p, vec![Simplex::new(vec![0, 1, 2])]).unwrap();
        let r = protection(&m).unwrap();
        assert_eq!(r.delta, None);
    }
}
