use nalgebra::{DMatrix, DVector};

use super::Mesh;

/// Point location by brute force over precomputed inverse affine maps,
/// with a bounding-box prefilter.
pub struct PointLocator {
    dim: usize,
    cells: Vec<Cell>,
}

struct Cell {
    origin: Vec<f64>,
    inverse: DMatrix<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl PointLocator {
    /// Degenerate simplices are skipped.
    pub fn new(mesh: &Mesh) -> Self {
        let d = mesh.dim();
        let cells = (0..mesh.num_simplices())
            .map(|k| {
                let p = mesh.simplex_points(k);
                let origin = p[0].to_vec();
                let a = DMatrix::from_fn(d, d, |i, j| p[j + 1][i] - origin[i]);
                let inverse = a.try_inverse().unwrap_or_else(|| DMatrix::zeros(0, 0));
                let lo = (0..d).map(|i| p.iter().map(|q| q[i]).fold(f64::INFINITY, f64::min)).collect();
                let hi = (0..d).map(|i| p.iter().map(|q| q[i]).fold(f64::NEG_INFINITY, f64::max)).collect();
                Cell { origin, inverse, lo, hi }
            })
            .collect();
        Self { dim: d, cells }
    }

    /// Barycentric coordinates of `x` in simplex `k`.
    pub fn barycentric(&self, k: usize, x: &[f64]) -> Option<Vec<f64>> {
        let c = &self.cells[k];
        if c.inverse.nrows() != self.dim {
            return None;
        }
        let b = DVector::from_fn(self.dim, |i, _| x[i] - c.origin[i]);
        let s = &c.inverse * b;
        let mut l = Vec::with_capacity(self.dim + 1);
        l.push(1.0 - s.sum());
        l.extend(s.iter());
        Some(l)
    }

    /// First simplex containing `x` with every barycentric coordinate at
    /// least `-tol`.
    pub fn locate(&self, x: &[f64], tol: f64) -> Option<usize> {
        (0..self.cells.len()).find(|&k| {
            let c = &self.cells[k];
            let pad = tol * (0..self.dim).map(|i| c.hi[i] - c.lo[i]).fold(0.0, f64::max);
            (0..self.dim).all(|i| x[i] >= c.lo[i] - pad && x[i] <= c.hi[i] + pad)
                && self
                    .barycentric(k, x)
                    .is_some_and(|l| l.iter().all(|&v| v >= -tol))
        })
    }
}
