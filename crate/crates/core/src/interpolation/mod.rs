//! Lagrange interpolation of degree `k` on simplices: point sets, the
//! nodal basis, Lebesgue constants, mesh interpolants of gradients and
//! vector fields, and a minimax surrogate for the best approximation.

mod basis;
mod best;
mod lebesgue;

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{PiecewiseField, ScalarField, VectorField};
use crate::geometry::{barycentric_to_point, compositions, factorial};
use crate::mesh::Mesh;
use basis::OrthoBasis;

pub use best::{best_approx_surrogate, BestApprox, BestApproxOptions};
pub use lebesgue::{lebesgue_constant, LebesgueEstimate};

/// Largest accepted condition number of the basis matrix at the nodes.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Error)]
pub enum InterpolationError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("degree must be at least 1")]
    ZeroDegree,
    #[error("degree {0} is above the supported maximum of 14")]
    DegreeTooHigh(usize),
    #[error("expected {expected} interpolation points, found {found}")]
    PointCount { expected: usize, found: usize },
    #[error("interpolation point {index}: {reason}")]
    BadPoint { index: usize, reason: String },
    #[error("point set is not unisolvent (condition number {condition:.3e})")]
    NotUnisolvent { condition: f64 },
    #[error("field evaluation failed in element {element} at node {node}")]
    Evaluation { element: usize, node: usize },
    #[error("element {element} is degenerate")]
    Degenerate { element: usize },
    #[error("point set file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Number of degree-`k` Lagrange nodes on a `d`-simplex, `(k+d)!/(k! d!)`.
pub fn num_nodes(dim: usize, degree: usize) -> usize {
    ((degree + 1)..=(degree + dim)).product::<usize>() / factorial(dim) as usize
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointSet {
    /// The principal lattice `{ i/k : |i| = k }` in barycentric coordinates.
    Equispaced,
    /// Barycentric tuples supplied by the caller.
    User(Vec<Vec<f64>>),
}

#[derive(Clone, Debug)]
pub struct InterpolationScheme {
    dim: usize,
    degree: usize,
    ref_points: Vec<Vec<f64>>,
    basis: OrthoBasis,
    /// Column `j` holds `L_j` in the orthonormal basis.
    coeffs: DMatrix<f64>,
    condition: f64,
    user_points: bool,
    lebesgue: LebesgueEstimate,
}

/// Builds the degree-`k` nodal basis on the reference `d`-simplex.
pub fn build_scheme(dim: usize, degree: usize, points: PointSet) -> Result<InterpolationScheme, InterpolationError> {
    if dim == 0 {
        return Err(InterpolationError::ZeroDimension);
    }
    if degree == 0 {
        return Err(InterpolationError::ZeroDegree);
    }
    if degree > 14 {
        return Err(InterpolationError::DegreeTooHigh(degree));
    }
    let n = num_nodes(dim, degree);
    let user_points = matches!(points, PointSet::User(_));
    let ref_points = match points {
        PointSet::Equispaced => compositions(degree, dim + 1)
            .into_iter()
            .map(|c| c.iter().map(|&i| i as f64 / degree as f64).collect())
            .collect(),
        PointSet::User(p) => {
            if p.len() != n {
                return Err(InterpolationError::PointCount { expected: n, found: p.len() });
            }
            for (index, b) in p.iter().enumerate() {
                let bad = |reason: String| InterpolationError::BadPoint { index, reason };
                if b.len() != dim + 1 {
                    return Err(bad(format!("expected {} barycentric coordinates", dim + 1)));
                }
                if b.iter().any(|v| !v.is_finite() || *v < -1e-12) {
                    return Err(bad("coordinates must be finite and nonnegative".into()));
                }
                if (b.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                    return Err(bad("coordinates must sum to 1".into()));
                }
            }
            p
        }
    };
    let basis = OrthoBasis::new(dim, degree);
    let mut vandermonde = DMatrix::zeros(n, n);
    for (i, b) in ref_points.iter().enumerate() {
        vandermonde.set_row(i, &basis.values(&b[1..]).transpose());
    }
    let sv = vandermonde.clone().singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(InterpolationError::NotUnisolvent { condition });
    }
    let coeffs = vandermonde
        .try_inverse()
        .ok_or(InterpolationError::NotUnisolvent { condition })?;
    let mut scheme = InterpolationScheme {
        dim,
        degree,
        ref_points,
        basis,
        coeffs,
        condition,
        user_points,
        lebesgue: LebesgueEstimate::default(),
    };
    scheme.lebesgue = lebesgue_constant(&scheme, lebesgue::default_density(dim, degree));
    Ok(scheme)
}

impl InterpolationScheme {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_points(&self) -> usize {
        self.ref_points.len()
    }

    /// Interpolation nodes as barycentric tuples.
    pub fn ref_points(&self) -> &[Vec<f64>] {
        &self.ref_points
    }

    /// Condition number of the basis matrix at the nodes.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn has_user_points(&self) -> bool {
        self.user_points
    }

    /// Lebesgue constant estimated at construction.
    pub fn lebesgue(&self) -> &LebesgueEstimate {
        &self.lebesgue
    }

    /// `L_j` in the orthonormal basis, one column per node.
    pub fn basis_coeffs(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    /// Orthonormal basis values at barycentric coordinates.
    pub(crate) fn ortho_values(&self, bary: &[f64]) -> DVector<f64> {
        self.basis.values(&bary[1..])
    }

    /// `L_j(bary)` for every node `j`.
    pub fn lagrange_values(&self, bary: &[f64]) -> DVector<f64> {
        self.coeffs.tr_mul(&self.ortho_values(bary))
    }

    /// `sum_j |L_j(bary)|`.
    pub fn lebesgue_function(&self, bary: &[f64]) -> f64 {
        self.lagrange_values(bary).iter().map(|v| v.abs()).sum()
    }
}

/// `x(xi) = p_0 + J xi` for a physical simplex, with `xi` the reference
/// coordinates `(lambda_1, ..., lambda_d)`.
#[derive(Clone, Debug)]
pub struct AffineMap {
    origin: DVector<f64>,
    jacobian: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl AffineMap {
    pub fn new<P: AsRef<[f64]>>(vertices: &[P]) -> Option<Self> {
        let d = vertices[0].as_ref().len();
        let origin = DVector::from_column_slice(vertices[0].as_ref());
        let jacobian = DMatrix::from_fn(d, d, |i, j| vertices[j + 1].as_ref()[i] - origin[i]);
        let inverse = jacobian.clone().try_inverse()?;
        Some(Self { origin, jacobian, inverse })
    }

    pub fn forward(&self, xi: &[f64]) -> Vec<f64> {
        (&self.origin + &self.jacobian * DVector::from_column_slice(xi)).as_slice().to_vec()
    }

    pub fn inverse(&self, x: &[f64]) -> Vec<f64> {
        (&self.inverse * (DVector::from_column_slice(x) - &self.origin)).as_slice().to_vec()
    }

    /// `det J = +-d! |K|`.
    pub fn determinant(&self) -> f64 {
        self.jacobian.determinant()
    }
}

/// Per-element degree-`k` interpolant of a vector field.
#[derive(Clone, Debug)]
pub struct FieldInterpolant {
    scheme: InterpolationScheme,
    components: usize,
    /// `values[(k * n_points + j) * components + c]`.
    values: Vec<f64>,
}

impl FieldInterpolant {
    pub(crate) fn from_node_values(scheme: &InterpolationScheme, components: usize, values: Vec<f64>) -> Self {
        Self {
            scheme: scheme.clone(),
            components,
            values,
        }
    }

    pub fn scheme(&self) -> &InterpolationScheme {
        &self.scheme
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn num_elements(&self) -> usize {
        self.values.len() / (self.components * self.scheme.n_points()).max(1)
    }

    /// Stored values at the nodes of element `k`, node-major.
    pub fn node_values(&self, k: usize) -> &[f64] {
        let w = self.scheme.n_points() * self.components;
        &self.values[k * w..(k + 1) * w]
    }

    /// Interpolant on element `k` at barycentric coordinates `bary`.
    pub fn eval_in(&self, k: usize, bary: &[f64]) -> Vec<f64> {
        let l = self.scheme.lagrange_values(bary);
        let vals = self.node_values(k);
        let c = self.components;
        let mut out = vec![0.0; c];
        for (j, lj) in l.iter().enumerate() {
            for (i, o) in out.iter_mut().enumerate() {
                *o += lj * vals[j * c + i];
            }
        }
        out
    }
}

impl PiecewiseField for FieldInterpolant {
    fn eval_in(&self, k: usize, bary: &[f64], _x: &[f64]) -> Vec<f64> {
        FieldInterpolant::eval_in(self, k, bary)
    }
}

/// `target - approx`, element by element.
pub struct Residual<'a> {
    pub target: &'a VectorField,
    pub approx: &'a FieldInterpolant,
}

impl PiecewiseField for Residual<'_> {
    fn eval_in(&self, k: usize, bary: &[f64], x: &[f64]) -> Vec<f64> {
        let a = self.approx.eval_in(k, bary);
        self.target.eval(x).iter().zip(a).map(|(t, a)| t - a).collect()
    }
}

/// Interpolates `f` at the mapped nodes of every element. Elements are
/// processed in parallel and gathered in index order.
pub fn interpolate(
    mesh: &Mesh,
    scheme: &InterpolationScheme,
    f: &(dyn Fn(&[f64]) -> Vec<f64> + Sync),
) -> Result<FieldInterpolant, InterpolationError> {
    let per: Result<Vec<Vec<Vec<f64>>>, InterpolationError> = (0..mesh.num_simplices())
        .into_par_iter()
        .map(|k| {
            let p = mesh.simplex_points(k);
            scheme
                .ref_points
                .iter()
                .enumerate()
                .map(|(node, b)| {
                    let v = f(&barycentric_to_point(&p, b));
                    if v.len() != mesh.dim() || v.iter().any(|c| !c.is_finite()) {
                        Err(InterpolationError::Evaluation { element: k, node })
                    } else {
                        Ok(v)
                    }
                })
                .collect()
        })
        .collect();
    let values = per?.into_iter().flatten().flatten().collect();
    Ok(FieldInterpolant::from_node_values(scheme, mesh.dim(), values))
}

/// `(grad v)_h`.
pub fn interpolate_gradient(
    mesh: &Mesh,
    scheme: &InterpolationScheme,
    v: &ScalarField,
) -> Result<FieldInterpolant, InterpolationError> {
    interpolate(mesh, scheme, &|x: &[f64]| v.gradient(x))
}

/// `f_h`.
pub fn interpolate_vector(
    mesh: &Mesh,
    scheme: &InterpolationScheme,
    f: &VectorField,
) -> Result<FieldInterpolant, InterpolationError> {
    interpolate(mesh, scheme, &|x: &[f64]| f.eval(x))
}

/// Barycentric sample points used for sampled sup norms: the lattice of
/// the given density for `d <= 3`, otherwise `mc_samples` seeded uniform
/// points. The simplex vertices are always included.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupSampling {
    pub lattice_density: usize,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for SupSampling {
    fn default() -> Self {
        Self {
            lattice_density: 20,
            mc_samples: 10_000,
            seed: 0,
        }
    }
}

impl SupSampling {
    pub fn points(&self, dim: usize) -> Vec<Vec<f64>> {
        use rand::{Rng, SeedableRng};
        let to_bary = |c: Vec<usize>, n: usize| c.iter().map(|&i| i as f64 / n as f64).collect();
        if dim <= 3 {
            return compositions(self.lattice_density, dim + 1)
                .into_iter()
                .map(|c| to_bary(c, self.lattice_density))
                .collect();
        }
        let mut out: Vec<Vec<f64>> = compositions(1, dim + 1).into_iter().map(|c| to_bary(c, 1)).collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..self.mc_samples {
            let mut b: Vec<f64> = (0..=dim).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
            let s: f64 = b.iter().sum();
            b.iter_mut().for_each(|v| *v /= s);
            out.push(b);
        }
        out
    }
}

/// Largest Euclidean norm of `w` over the sample points of every element
/// (not inflated).
pub fn sampled_sup(mesh: &Mesh, w: &dyn PiecewiseField, points: &[Vec<f64>]) -> f64 {
    (0..mesh.num_simplices())
        .into_par_iter()
        .map(|k| {
            let p = mesh.simplex_points(k);
            points
                .iter()
                .map(|b| {
                    let x = barycentric_to_point(&p, b);
                    w.eval_in(k, b, &x).iter().map(|v| v * v).sum::<f64>().sqrt()
                })
                .fold(0.0, f64::max)
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max)
}

#[derive(Serialize, Deserialize)]
struct RawPointSet {
    #[serde(default)]
    format: Option<String>,
    dim: usize,
    barycentric: Vec<Vec<f64>>,
}

pub const POINT_SET_FORMAT: &str = "meshcert-points";

/// Parses a sidecar interpolation point set:
/// `{"format": "meshcert-points", "dim": d, "barycentric": [[...], ...]}`.
pub fn parse_point_set(text: &str) -> Result<(usize, Vec<Vec<f64>>), InterpolationError> {
    let raw: RawPointSet = serde_json::from_str(text).map_err(|e| {
        InterpolationError::Format(format!("line {}, column {}: {e}", e.line(), e.column()))
    })?;
    if raw.format.as_deref().is_some_and(|f| f != POINT_SET_FORMAT) {
        return Err(InterpolationError::Format(format!(
            "field `format`: expected \"{POINT_SET_FORMAT}\""
        )));
    }
    if let Some(index) = raw.barycentric.iter().position(|b| b.len() != raw.dim + 1) {
        return Err(InterpolationError::Format(format!(
            "barycentric[{index}]: expected {} coordinates",
            raw.dim + 1
        )));
    }
    Ok((raw.dim, raw.barycentric))
}

pub fn read_point_set(path: impl AsRef<Path>) -> Result<(usize, Vec<Vec<f64>>), InterpolationError> {
    parse_point_set(&std::fs::read_to_string(path)?)
}
