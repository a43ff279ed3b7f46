//! Degree-graded orthonormal polynomial basis on the reference simplex,
//! obtained by Gram–Schmidt on monomials.

use nalgebra::{DMatrix, DVector};

use crate::geometry::{compositions, QuadratureRule};

#[derive(Clone, Debug)]
pub(crate) struct OrthoBasis {
    exponents: Vec<Vec<usize>>,
    /// Row `m` holds the monomial coefficients of basis function `m`.
    transform: DMatrix<f64>,
}

impl OrthoBasis {
    pub fn new(dim: usize, degree: usize) -> Self {
        let exponents: Vec<Vec<usize>> =
            (0..=degree).flat_map(|t| compositions(t, dim)).collect();
        let n = exponents.len();
        let rule = QuadratureRule::new(dim, 2 * degree, Default::default())
            .expect("degree within quadrature range");
        let sqrt_w: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
        let columns: Vec<DVector<f64>> = (0..n)
            .map(|a| {
                DVector::from_iterator(
                    rule.len(),
                    rule.nodes.iter().zip(&sqrt_w).map(|(b, w)| w * monomial(&b[1..], &exponents[a])),
                )
            })
            .collect();
        let mut q: Vec<DVector<f64>> = Vec::with_capacity(n);
        let mut transform = DMatrix::zeros(n, n);
        for a in 0..n {
            let mut u = columns[a].clone();
            let mut t = DVector::zeros(n);
            t[a] = 1.0;
            for _pass in 0..2 {
                for b in 0..a {
                    let r = q[b].dot(&u);
                    u.axpy(-r, &q[b], 1.0);
                    t -= transform.row(b).transpose() * r;
                }
            }
            let norm = u.norm();
            q.push(u / norm);
            transform.set_row(a, &(t / norm).transpose());
        }
        Self { exponents, transform }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    /// Basis values at reference coordinates `xi`.
    pub fn values(&self, xi: &[f64]) -> DVector<f64> {
        let m = DVector::from_iterator(self.len(), self.exponents.iter().map(|e| monomial(xi, e)));
        &self.transform * m
    }
}

fn monomial(xi: &[f64], e: &[usize]) -> f64 {
    xi.iter().zip(e).map(|(x, &p)| x.powi(p as i32)).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormal_under_quadrature() {
        for (d, k) in [(1, 6), (2, 5), (3, 4), (4, 2)] {
            let basis = OrthoBasis::new(d, k);
            let rule = QuadratureRule::new(d, 2 * k, Default::default()).unwrap();
            let n = basis.len();
            let mut gram = DMatrix::<f64>::zeros(n, n);
            for (b, w) in rule.nodes.iter().zip(&rule.weights) {
                let v = basis.values(&b[1..]);
                gram += &v * v.transpose() * *w;
            }
            let err = (gram - DMatrix::identity(n, n)).abs().max();
            assert!(err < 1e-9, "d={d} k={k}: {err}");
        }
    }
}
