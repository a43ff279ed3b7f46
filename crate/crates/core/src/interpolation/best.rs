//! Computable stand-in for the best piecewise polynomial approximation in
//! the sup norm.
//!
//! On each element the vector polynomial minimizing the largest Euclidean
//! residual over a sample set is approximated by Lawson's iteratively
//! reweighted least squares. Every weighted least-squares residual is a
//! lower bound on the discrete minimax error, so the gap is known. The
//! reported bound is the sampled error of the fit, taken over the fit
//! samples and a denser check set, times a safety factor.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::{FieldInterpolant, InterpolationError, InterpolationScheme, SupSampling};
use crate::fields::VectorField;
use crate::geometry::{barycentric_to_point, compositions, QuadratureRule};
use crate::mesh::Mesh;

#[derive(Clone, Debug, Serialize)]
pub struct BestApproxOptions {
    pub safety_factor: f64,
    pub max_iterations: usize,
    /// Stop once `sampled <= (1 + tolerance) * lower bound`.
    pub tolerance: f64,
    /// Lattice density of the fit samples; defaults to a small multiple
    /// of the degree.
    pub fit_density: Option<usize>,
    /// Degree of the quadrature rule whose nodes join the fit samples.
    pub quadrature_degree: Option<usize>,
    /// Dense check set for the final sampled error.
    pub check: SupSampling,
}

impl Default for BestApproxOptions {
    fn default() -> Self {
        Self {
            safety_factor: 1.05,
            max_iterations: 200,
            tolerance: 1e-3,
            fit_density: None,
            quadrature_degree: None,
            check: SupSampling::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BestApprox {
    pub surrogate: FieldInterpolant,
    /// `safety_factor * sampled_sup_error`: the bound used in place of the
    /// true best-approximation error.
    pub certified_sup_error: f64,
    pub sampled_sup_error: f64,
    /// Largest per-element weighted least-squares lower bound on the
    /// discrete minimax error over the fit samples.
    pub lower_bound: f64,
    /// All elements reached the tolerance.
    pub converged: bool,
    /// Elements where the iteration stopped early (least-squares or
    /// best-so-far fit kept).
    pub unconverged_elements: Vec<usize>,
}

struct ElementFit {
    node_values: Vec<f64>,
    fit_error: f64,
    check_error: f64,
    lower: f64,
    converged: bool,
}

fn fit_samples(scheme: &InterpolationScheme, opts: &BestApproxOptions) -> Vec<Vec<f64>> {
    let (d, k) = (scheme.dim(), scheme.degree());
    let base: usize = match d {
        1 => 40,
        2 => 12,
        3 => 6,
        _ => 4,
    }
    .max(k + 1);
    let density = opts.fit_density.unwrap_or(base.div_ceil(k) * k);
    let mut pts: Vec<Vec<f64>> = compositions(density, d + 1)
        .into_iter()
        .map(|c| c.iter().map(|&i| i as f64 / density as f64).collect())
        .collect();
    pts.extend(scheme.ref_points().iter().cloned());
    let qdeg = opts.quadrature_degree.unwrap_or(2 * k + 2);
    if let Ok(rule) = QuadratureRule::new(d, qdeg, Default::default()) {
        pts.extend(rule.nodes);
    }
    pts
}

fn basis_matrix(scheme: &InterpolationScheme, pts: &[Vec<f64>]) -> DMatrix<f64> {
    let n = scheme.n_points();
    let mut a = DMatrix::zeros(pts.len(), n);
    for (s, b) in pts.iter().enumerate() {
        a.set_row(s, &scheme.ortho_values(b).transpose());
    }
    a
}

fn max_residual(a: &DMatrix<f64>, c: &DMatrix<f64>, g: &DMatrix<f64>) -> (f64, Vec<f64>) {
    let r = a * c - g;
    let norms: Vec<f64> = r.row_iter().map(|row| row.norm()).collect();
    (norms.iter().copied().fold(0.0, f64::max), norms)
}

/// Weighted least squares `min sum_s w_s |A_s c - g_s|^2`.
fn weighted_fit(a: &DMatrix<f64>, g: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let sw = DVector::from_iterator(w.len(), w.iter().map(|v| v.sqrt()));
    let mut b = a.clone();
    let mut rhs = g.clone();
    for (s, f) in sw.iter().enumerate() {
        b.row_mut(s).scale_mut(*f);
        rhs.row_mut(s).scale_mut(*f);
    }
    let normal = b.tr_mul(&b);
    let atb = b.tr_mul(&rhs);
    match normal.cholesky() {
        Some(ch) => ch.solve(&atb),
        None => b.svd(true, true).solve(&rhs, 1e-14).expect("SVD computed with U and V"),
    }
}

#[allow(clippy::too_many_arguments)]
fn fit_element(
    mesh: &Mesh,
    k: usize,
    scheme: &InterpolationScheme,
    target: &VectorField,
    fit_pts: &[Vec<f64>],
    a: &DMatrix<f64>,
    check_pts: &[Vec<f64>],
    a_check: &DMatrix<f64>,
    opts: &BestApproxOptions,
) -> Result<ElementFit, InterpolationError> {
    let verts = mesh.simplex_points(k);
    let comps = mesh.dim();
    let sample = |pts: &[Vec<f64>]| -> Result<DMatrix<f64>, InterpolationError> {
        let mut g = DMatrix::zeros(pts.len(), comps);
        for (s, b) in pts.iter().enumerate() {
            let v = target.eval(&barycentric_to_point(&verts, b));
            if v.len() != comps || v.iter().any(|x| !x.is_finite()) {
                return Err(InterpolationError::Evaluation { element: k, node: s });
            }
            g.set_row(s, &DVector::from_vec(v).transpose());
        }
        Ok(g)
    };
    let g = sample(fit_pts)?;

    // Interpolant as the first candidate: node values straight from the
    // target.
    let nodes = scheme.ref_points();
    let g_nodes = sample(nodes)?;
    let mut best_c = scheme.basis_coeffs() * &g_nodes;
    let (mut best_err, _) = max_residual(a, &best_c, &g);

    let scale = g.abs().max().max(1.0);
    let mut lower: f64 = 0.0;
    let mut converged = best_err <= 1e-13 * scale;
    let mut w = vec![1.0 / fit_pts.len() as f64; fit_pts.len()];
    let mut iterations = 0;
    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let c = weighted_fit(a, &g, &w);
        let (err, norms) = max_residual(a, &c, &g);
        let weighted: f64 = w.iter().zip(&norms).map(|(wi, r)| wi * r * r).sum::<f64>().sqrt();
        lower = lower.max(weighted);
        if err < best_err {
            best_err = err;
            best_c = c;
        }
        if best_err <= (1.0 + opts.tolerance) * lower || best_err <= 1e-13 * scale {
            converged = true;
            break;
        }
        let total: f64 = w.iter().zip(&norms).map(|(wi, r)| wi * r).sum();
        if !(total > 0.0) {
            break;
        }
        for (wi, r) in w.iter_mut().zip(&norms) {
            *wi = (*wi * r / total).max(1e-300);
        }
    }

    let g_check = sample(check_pts)?;
    let (check_error, _) = max_residual(a_check, &best_c, &g_check);
    let node_values = {
        let vals = basis_matrix(scheme, nodes) * &best_c;
        let mut out = Vec::with_capacity(nodes.len() * comps);
        for row in vals.row_iter() {
            out.extend(row.iter());
        }
        out
    };
    Ok(ElementFit {
        node_values,
        fit_error: best_err,
        check_error,
        lower,
        converged,
    })
}

/// Per-element minimax surrogate of `target` in the degree-`k` space and
/// the bound `safety_factor * sampled error`, maximized over elements.
pub fn best_approx_surrogate(
    mesh: &Mesh,
    scheme: &InterpolationScheme,
    target: &VectorField,
    opts: &BestApproxOptions,
) -> Result<BestApprox, InterpolationError> {
    let fit_pts = fit_samples(scheme, opts);
    let a = basis_matrix(scheme, &fit_pts);
    let check_pts = opts.check.points(scheme.dim());
    let a_check = basis_matrix(scheme, &check_pts);
    let fits: Result<Vec<ElementFit>, InterpolationError> = (0..mesh.num_simplices())
        .into_par_iter()
        .map(|k| fit_element(mesh, k, scheme, target, &fit_pts, &a, &check_pts, &a_check, opts))
        .collect();
    let fits = fits?;
    let sampled = fits.iter().map(|f| f.fit_error.max(f.check_error)).fold(0.0, f64::max);
    let lower_bound = fits.iter().map(|f| f.lower).fold(0.0, f64::max);
    let unconverged_elements: Vec<usize> =
        fits.iter().enumerate().filter(|(_, f)| !f.converged).map(|(k, _)| k).collect();
    let values = fits.into_iter().flat_map(|f| f.node_values).collect();
    Ok(BestApprox {
        surrogate: FieldInterpolant::from_node_values(scheme, mesh.dim(), values),
        certified_sup_error: opts.safety_factor * sampled,
        sampled_sup_error: sampled,
        lower_bound,
        converged: unconverged_elements.is_empty(),
        unconverged_elements,
    })
}
