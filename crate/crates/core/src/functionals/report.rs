use std::collections::BTreeMap;

use serde::Serialize;

use super::verify::MeshConstants;
use super::FunctionalError;
use crate::interpolation::{build_scheme, LebesgueEstimate, PointSet};
use crate::mesh::{protection, Mesh, MeshValidation, NetOptions};
use crate::sizing::{C3Options, SizingField, C3};

/// Report field -> name of the definition or inequality it comes from.
pub const ANCHORS: &[(&str, &str)] = &[
    ("c1", "sliver_constant"),
    ("c2", "coarse_constant"),
    ("c3", "iso_upper_bound"),
    ("theta", "rajan_functional"),
    ("theta_hat", "rajan_functional"),
    ("lambda", "lebesgue_constant"),
    ("xi_min", "thickness"),
    ("delta", "protection"),
    ("epsilon", "density_condition"),
    ("eta", "separation_condition"),
    ("bound_chain", "functional_equivalence, iso_upper_bound, gradient_norm_upper_bound, functional_error_estimate, norm_error_estimate, vector_norm_error_estimate"),
];

#[derive(Clone, Debug)]
pub struct ReportOptions {
    /// Interpolation degree used for `Lambda` and the error bound
    /// coefficients.
    pub degree: usize,
    pub points: PointSet,
    pub sizing: SizingField,
    pub net: NetOptions,
    pub c3: C3Options,
}

/// Coefficients multiplying the field norm on the right of each bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundChain {
    /// `C1`: lower bound of `Psi / ||w||`.
    pub functional_equivalence_lower: f64,
    /// `C2`: upper bound of `Psi / ||w||`.
    pub functional_equivalence_upper: f64,
    /// `C3 sqrt(Theta)`, multiplies `||w||_inf`.
    pub iso_upper_bound: f64,
    /// `C3 sqrt(Theta) / C1`, multiplies `||w||_inf`.
    pub gradient_norm_upper_bound: f64,
    /// `(1 + Lambda) C3 sqrt(Theta)`, multiplies the best-approximation
    /// error.
    pub functional_error_estimate: f64,
    /// `(1 + Lambda) C3 sqrt(Theta) / C1`; the same coefficient serves
    /// gradients and vector fields.
    pub norm_error_estimate: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct QualityReport {
    pub dim: usize,
    pub num_points: usize,
    pub num_simplices: usize,
    pub degree: usize,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c3_detail: C3,
    pub theta: f64,
    pub theta_hat: f64,
    pub lambda: f64,
    pub lambda_detail: LebesgueEstimate,
    pub xi_min: f64,
    /// `None` when no simplex has a non-vertex point to measure against.
    pub delta: Option<f64>,
    pub delta_over_epsilon: Option<f64>,
    /// Simplices whose circumball holds another point: the mesh is not
    /// Delaunay and `delta` is negative.
    pub non_delaunay_simplices: Vec<usize>,
    pub epsilon: f64,
    pub epsilon_lower: f64,
    pub eta: f64,
    pub eta_bar: f64,
    pub validation: MeshValidation,
    pub bound_chain: BoundChain,
    pub anchors: BTreeMap<String, String>,
}

pub fn quality_report(mesh: &Mesh, opts: &ReportOptions) -> Result<QualityReport, FunctionalError> {
    let constants = MeshConstants::compute(mesh, &opts.sizing, &opts.net, &opts.c3)?;
    let scheme = build_scheme(mesh.dim(), opts.degree, opts.points.clone())?;
    let prot = protection(mesh)?;
    let validation = mesh.validate()?;
    let lambda = scheme.lebesgue().value;
    let base = constants.c3.value * constants.theta.sqrt();
    Ok(QualityReport {
        dim: mesh.dim(),
        num_points: mesh.num_points(),
        num_simplices: mesh.num_simplices(),
        degree: opts.degree,
        c1: constants.c1,
        c2: constants.c2,
        c3: constants.c3.value,
        c3_detail: constants.c3.clone(),
        theta: constants.theta,
        theta_hat: constants.theta_hat,
        lambda,
        lambda_detail: scheme.lebesgue().clone(),
        xi_min: constants.xi_min,
        delta: prot.delta,
        delta_over_epsilon: prot.delta.map(|d| d / constants.net.epsilon),
        non_delaunay_simplices: prot.non_delaunay,
        epsilon: constants.net.epsilon,
        epsilon_lower: constants.net.epsilon_lower,
        eta: constants.net.eta,
        eta_bar: constants.net.eta_bar,
        validation,
        bound_chain: BoundChain {
            functional_equivalence_lower: constants.c1,
            functional_equivalence_upper: constants.c2,
            iso_upper_bound: base,
            gradient_norm_upper_bound: base / constants.c1,
            functional_error_estimate: (1.0 + lambda) * base,
            norm_error_estimate: (1.0 + lambda) * base / constants.c1,
        },
        anchors: ANCHORS.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests_support::equilateral;
    use super::*;
    use approx::assert_relative_eq;

    fn opts() -> ReportOptions {
        ReportOptions {
            degree: 1,
            points: PointSet::Equispaced,
            sizing: SizingField::constant(1.0),
            net: NetOptions { samples: 1000, seed: 0 },
            c3: C3Options::default(),
        }
    }

    #[test]
    fn equilateral_report() {
        let r = quality_report(&equilateral(), &opts()).unwrap();
        assert_relative_eq!(r.c1, 0.75, epsilon = 1e-12);
        assert_relative_eq!(r.c2, 1.732051, epsilon = 1e-6);
        assert_relative_eq!(r.theta, 1.299038, epsilon = 1e-6);
        assert_relative_eq!(r.theta_hat * 12.0, r.theta, epsilon = 1e-15);
        assert_relative_eq!(r.c1, 3f64.sqrt() * r.xi_min, epsilon = 1e-12);
        assert!(r.c1 <= r.c2);
        assert_eq!(r.delta, None);
        assert!(r.validation.passed);
        assert_eq!(r.anchors["c1"], "sliver_constant");
    }

    #[test]
    fn square_corners_have_zero_protection() {
        let m = crate::mesh::delaunay(
            &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]].map(crate::geometry::Point::from),
        )
        .unwrap();
        let r = quality_report(&m, &opts()).unwrap();
        assert!(r.delta.unwrap().abs() <= 1e-12);
        assert!(r.non_delaunay_simplices.is_empty());
    }
}
