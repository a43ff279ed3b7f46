//! Coxeter triangulations of type Ã_d.
//!
//! Vertices are the points of the lattice spanned by the projections
//! `u_i = e_i - (1/(d+1)) * 1` of the standard basis of R^{d+1} onto the
//! hyperplane `sum x = 0`, expressed in an orthonormal frame of that
//! hyperplane. Every unit cube of integer coordinates `z` is split into the
//! `d!` Kuhn simplices `z, z + u_{pi(1)}, z + u_{pi(1)} + u_{pi(2)}, ...`,
//! one per permutation `pi`. Under this lattice map the Kuhn simplices are
//! the congruent Ã_d alcoves, and their union is a parallelotope.

use nalgebra::DMatrix;

use super::{Mesh, MeshError};
use crate::geometry::{Point, Simplex};

pub const COXETER_MAX_DIM: usize = 6;

/// Rows are the lattice generators `u_i` in R^d, scaled so that the
/// shortest edge has length `scale`.
fn generators(dim: usize, scale: f64) -> Vec<Vec<f64>> {
    let n = (dim + 1) as f64;
    let gram = DMatrix::from_fn(dim, dim, |i, j| if i == j { 1.0 } else { 0.0 } - 1.0 / n);
    let l = gram
        .cholesky()
        .expect("the projected basis Gram matrix is positive definite")
        .unpack();
    let shortest = (dim as f64 / n).sqrt();
    (0..dim)
        .map(|i| (0..dim).map(|j| l[(i, j)] * scale / shortest).collect())
        .collect()
}

/// Longest edge of an Ã_d simplex whose shortest edge is `scale`.
pub fn coxeter_diameter(dim: usize, scale: f64) -> f64 {
    let n = (dim + 1) as f64;
    let m = ((dim + 1) / 2) as f64;
    scale * (m * (n - m) / n).sqrt() / (dim as f64 / n).sqrt()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(rest: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            cur.push(v);
            rec(rest, cur, out);
            cur.pop();
            rest.insert(i, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut (0..n).collect(), &mut Vec::new(), &mut out);
    out
}

/// A patch of `layers^d` lattice cells (`d! * layers^d` simplices) of the
/// Ã_d Coxeter triangulation with shortest edge `scale`.
pub fn coxeter_a_tilde(dim: usize, layers: usize, scale: f64) -> Result<Mesh, MeshError> {
    if !(2..=COXETER_MAX_DIM).contains(&dim) {
        return Err(MeshError::UnsupportedDimension {
            dim,
            min: 2,
            max: COXETER_MAX_DIM,
        });
    }
    if layers == 0 {
        return Err(MeshError::InvalidParameter("layers must be at least 1".into()));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(MeshError::InvalidParameter(format!(
            "scale must be positive and finite, got {scale}"
        )));
    }
    let gens = generators(dim, scale);
    let side = layers + 1;
    let index = |z: &[usize]| z.iter().fold(0, |acc, &c| acc * side + c);

    let total = side.pow(dim as u32);
    let mut points = Vec::with_capacity(total);
    let mut z = vec![0usize; dim];
    for _ in 0..total {
        let mut x = vec![0.0; dim];
        for (zi, g) in z.iter().zip(&gens) {
            for (xm, gm) in x.iter_mut().zip(g) {
                *xm += *zi as f64 * gm;
            }
        }
        points.push(Point::new(x)?);
        for slot in z.iter_mut().rev() {
            *slot += 1;
            if *slot < side {
                break;
            }
            *slot = 0;
        }
    }

    let perms = permutations(dim);
    let mut simplices = Vec::with_capacity(layers.pow(dim as u32) * perms.len());
    let mut cube = vec![0usize; dim];
    for _ in 0..layers.pow(dim as u32) {
        for perm in &perms {
            let mut v = cube.clone();
            let mut ids = Vec::with_capacity(dim + 1);
            ids.push(index(&v));
            for &axis in perm {
                v[axis] += 1;
                ids.push(index(&v));
            }
            simplices.push(Simplex::new(ids));
        }
        for slot in cube.iter_mut().rev() {
            *slot += 1;
            if *slot < layers {
                break;
            }
            *slot = 0;
        }
    }
    Mesh::new(dim, points, simplices)
}
