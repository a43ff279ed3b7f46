//! Quadrature on the reference d-simplex.
//!
//! Two families are generated on demand for any dimension and degree:
//!
//! * the conical (collapsed-coordinate) product of Gauss–Jacobi rules, whose
//!   weights are all positive, and
//! * Grundmann–Möller rules, which use far fewer nodes at high dimension but
//!   carry negative weights.
//!
//! Nodes are stored as barycentric tuples and the weights are normalized to
//! sum to one, so `integral_K f ~= |K| * sum_q w_q f(x_q)`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{factorial, GeometryError};

/// Highest polynomial degree for which rules are generated.
pub const MAX_QUADRATURE_DEGREE: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum QuadratureFamily {
    #[default]
    ConicalProduct,
    GrundmannMoller,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub dim: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
    pub family: QuadratureFamily,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Integral over the reference simplex (volume `1/d!`) of a function of
    /// the reference coordinates `xi = (lambda_1, ..., lambda_d)`.
    pub fn integrate_reference(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(b, w)| w * f(&b[1..]))
            .sum();
        sum / factorial(self.dim)
    }

    pub fn has_positive_weights(&self) -> bool {
        self.weights.iter().all(|&w| w > 0.0)
    }
}

/// Rule exact for all polynomials of total degree `<= degree`, from the
/// positive-weight conical product family.
pub fn simplex_quadrature(dim: usize, degree: usize) -> Result<QuadratureRule, GeometryError> {
    QuadratureRule::new(dim, degree, QuadratureFamily::ConicalProduct)
}

impl QuadratureRule {
    pub fn new(
        dim: usize,
        degree: usize,
        family: QuadratureFamily,
    ) -> Result<QuadratureRule, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::ZeroDimension);
        }
        if degree > MAX_QUADRATURE_DEGREE {
            return Err(GeometryError::UnsupportedDegree {
                degree,
                max: MAX_QUADRATURE_DEGREE,
            });
        }
        Ok(match family {
            QuadratureFamily::ConicalProduct => conical_product(dim, degree),
            QuadratureFamily::GrundmannMoller => grundmann_moller(dim, degree),
        })
    }
}

/// Gauss–Jacobi nodes on [0, 1] for the weight `(1 - t)^alpha`, with
/// weights normalized to sum to one (Golub–Welsch).
fn gauss_jacobi_unit(n: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let beta = 0.0;
    let ab = alpha + beta;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let k = i as f64;
        let diag = if i == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * k + ab) * (2.0 * k + ab + 2.0))
        };
        jac[(i, i)] = diag;
        if i + 1 < n {
            let k = k + 1.0;
            let num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab);
            let den = (2.0 * k + ab).powi(2) * (2.0 * k + ab + 1.0) * (2.0 * k + ab - 1.0);
            let off = (num / den).sqrt();
            jac[(i, i + 1)] = off;
            jac[(i + 1, i)] = off;
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            ((1.0 + eig.eigenvalues[i]) / 2.0, v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    (
        pairs.iter().map(|p| p.0).collect(),
        pairs.iter().map(|p| p.1 / total).collect(),
    )
}

fn conical_product(dim: usize, degree: usize) -> QuadratureRule {
    let n = degree / 2 + 1;
    let rules: Vec<(Vec<f64>, Vec<f64>)> = (1..=dim)
        .map(|i| gauss_jacobi_unit(n, (dim - i) as f64))
        .collect();
    let total = n.pow(dim as u32);
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; dim];
    for _ in 0..total {
        let mut xi = vec![0.0; dim];
        let mut remaining = 1.0;
        let mut w = 1.0;
        for (i, &j) in idx.iter().enumerate() {
            let t = rules[i].0[j];
            xi[i] = remaining * t;
            remaining *= 1.0 - t;
            w *= rules[i].1[j];
        }
        let mut bary = Vec::with_capacity(dim + 1);
        bary.push(1.0 - xi.iter().sum::<f64>());
        bary.extend_from_slice(&xi);
        nodes.push(bary);
        weights.push(w);
        for slot in idx.iter_mut().rev() {
            *slot += 1;
            if *slot < n {
                break;
            }
            *slot = 0;
        }
    }
    QuadratureRule {
        dim,
        nodes,
        weights,
        exact_degree: 2 * n - 1,
        family: QuadratureFamily::ConicalProduct,
    }
}

/// All multi-indices of length `len` summing to `total`, in lexicographic
/// order (descending first entry). With `len = d + 1` these are the
/// barycentric lattice points of a simplex scaled by `total`.
pub fn compositions(total: usize, len: usize) -> Vec<Vec<usize>> {
    fn rec(total: usize, len: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if len == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=total).rev() {
            prefix.push(first);
            rec(total - first, len - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if len == 0 {
        return out;
    }
    rec(total, len, &mut Vec::with_capacity(len), &mut out);
    out
}

fn grundmann_moller(dim: usize, degree: usize) -> QuadratureRule {
    let s = degree / 2;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for i in 0..=s {
        let denom = (dim + 2 * s + 1 - 2 * i) as f64;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let w = sign * denom.powi(2 * s as i32 + 1)
            / (factorial(i) * factorial(dim + 2 * s + 1 - i))
            / 4f64.powi(s as i32);
        for beta in compositions(s - i, dim + 1) {
            nodes.push(beta.iter().map(|&b| (2 * b + 1) as f64 / denom).collect());
            weights.push(w);
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    QuadratureRule {
        dim,
        nodes,
        weights,
        exact_degree: 2 * s + 1,
        family: QuadratureFamily::GrundmannMoller,
    }
}

/// Closed form `int_{ref simplex} prod xi_i^{a_i} = prod a_i! / (d + |a|)!`.
pub fn monomial_integral(exponents: &[usize]) -> f64 {
    let d = exponents.len();
    let total: usize = exponents.iter().sum();
    // Evaluate as a product of ratios to stay in range for large degrees.
    let mut value = 1.0;
    let mut k = d + total;
    for &a in exponents {
        for j in 1..=a {
            value *= j as f64 / k as f64;
            k -= 1;
        }
    }
    while k > 0 {
        value /= k as f64;
        k -= 1;
    }
    value
}
