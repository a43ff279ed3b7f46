//! Numerical checks of the inequalities between the functionals.

use serde::Serialize;

use super::{
    constant_c1, constant_c2, gradient_norm, min_thickness, rajan_theta, roughness_functional,
    FunctionalError,
};
use crate::fields::{FieldSpec, PiecewiseField};
use crate::geometry::QuadratureRule;
use crate::interpolation::{
    best_approx_surrogate, interpolate, sampled_sup, BestApproxOptions, InterpolationScheme, Residual,
    SupSampling,
};
use crate::mesh::{measure_net_on_mesh, Mesh, NetOptions, NetParams};
use crate::sizing::{constant_c3, C3Options, SizingField, C3, SAMPLE_SAFETY_FACTOR};

/// Relative slack of every inequality check.
pub const RELATIVE_SLACK: f64 = 1e-9;
/// Absolute slack, multiplied by the coefficient of the right-hand side
/// and the magnitude of the field, so that roundoff-level residuals of
/// exactly reproduced fields compare as equal.
pub const ABSOLUTE_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub check_id: String,
    /// Name of the inequality being checked.
    pub anchor: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    /// `lhs / rhs`; `None` when `rhs` is zero.
    pub tightness: Option<f64>,
}

impl Check {
    pub fn new(check_id: impl Into<String>, anchor: &str, lhs: f64, rhs: f64, slack: f64) -> Self {
        Self {
            check_id: check_id.into(),
            anchor: anchor.to_string(),
            lhs,
            rhs,
            pass: lhs <= rhs * (1.0 + RELATIVE_SLACK) + slack,
            tightness: (rhs > 0.0).then(|| lhs / rhs),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn new(checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.pass);
        Self { checks, passed }
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        self.checks.extend(checks);
        self.passed = self.checks.iter().all(|c| c.pass);
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Mesh-dependent constants shared by the checks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeshConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: C3,
    pub theta: f64,
    pub theta_hat: f64,
    pub xi_min: f64,
    pub net: NetParams,
}

impl MeshConstants {
    pub fn compute(
        mesh: &Mesh,
        sizing: &SizingField,
        net: &NetOptions,
        c3: &C3Options,
    ) -> Result<Self, FunctionalError> {
        let (theta, theta_hat) = rajan_theta(mesh)?;
        let net = measure_net_on_mesh(mesh, net)?;
        Ok(Self {
            c1: constant_c1(mesh)?,
            c2: constant_c2(mesh)?,
            c3: constant_c3(mesh, sizing, Some(&net), c3)?,
            theta,
            theta_hat,
            xi_min: min_thickness(mesh)?,
            net,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupNorm {
    /// `SAMPLE_SAFETY_FACTOR * sampled`.
    pub value: f64,
    pub sampled: f64,
    pub samples_per_element: usize,
}

/// Sampled `sup |w|` (Euclidean) over the lattice or Monte Carlo points
/// and the quadrature nodes of every element, inflated by the safety
/// factor.
pub fn sup_norm(mesh: &Mesh, w: &dyn PiecewiseField, sampling: &SupSampling, quad: &QuadratureRule) -> SupNorm {
    let mut pts = sampling.points(mesh.dim());
    pts.extend(quad.nodes.iter().cloned());
    let sampled = sampled_sup(mesh, w, &pts);
    SupNorm {
        value: SAMPLE_SAFETY_FACTOR * sampled,
        sampled,
        samples_per_element: pts.len(),
    }
}

/// `C1 ||w|| <= Psi(w) <= C2 ||w||` for each named field.
pub fn verify_equivalence(
    mesh: &Mesh,
    constants: &MeshConstants,
    fields: &[(&str, &dyn PiecewiseField)],
    quad: &QuadratureRule,
) -> Result<Vec<Check>, FunctionalError> {
    let mut out = Vec::new();
    for (name, w) in fields {
        let psi = roughness_functional(mesh, *w, quad)?;
        let norm = gradient_norm(mesh, *w, quad)?;
        out.push(Check::new(format!("equivalence_lower[{name}]"), "functional_equivalence", constants.c1 * norm, psi, 0.0));
        out.push(Check::new(format!("equivalence_upper[{name}]"), "functional_equivalence", psi, constants.c2 * norm, 0.0));
    }
    Ok(out)
}

/// `Psi(w) <= C3 sqrt(Theta) ||w||_inf` and
/// `||w|| <= C3 sqrt(Theta) / C1 ||w||_inf`.
pub fn verify_upper_bound(
    mesh: &Mesh,
    constants: &MeshConstants,
    name: &str,
    w: &dyn PiecewiseField,
    quad: &QuadratureRule,
    sampling: &SupSampling,
) -> Result<Vec<Check>, FunctionalError> {
    let psi = roughness_functional(mesh, w, quad)?;
    let norm = gradient_norm(mesh, w, quad)?;
    let sup = sup_norm(mesh, w, sampling, quad).value;
    let coef = constants.c3.value * constants.theta.sqrt();
    Ok(vec![
        Check::new(format!("upper_bound[{name}]"), "iso_upper_bound", psi, coef * sup, 0.0),
        Check::new(
            format!("norm_upper_bound[{name}]"),
            "gradient_norm_upper_bound",
            norm,
            coef / constants.c1 * sup,
            0.0,
        ),
    ])
}

/// Interpolation errors, the best-approximation bound, and the checks of
/// the two error estimates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorEstimateOutcome {
    pub checks: Vec<Check>,
    pub psi_error: f64,
    pub l2_error: f64,
    /// Sampled sup of the interpolation error, not inflated.
    pub sup_error: f64,
    /// Certified best-approximation bound.
    pub e_hat: f64,
    pub best_approx_lower_bound: f64,
    pub best_approx_converged: bool,
    pub lambda: f64,
    /// `(1 + Lambda) C3 sqrt(Theta) e_hat`.
    pub functional_bound: f64,
    /// `(1 + Lambda) C3 sqrt(Theta) / C1 e_hat`.
    pub norm_bound: f64,
}

/// Interpolates the field (`grad v` for a scalar spec, `f` for a vector
/// spec) and checks
/// `Psi(e) <= (1 + Lambda) C3 sqrt(Theta) E` and
/// `||e|| <= (1 + Lambda) C3 sqrt(Theta) / C1 E`,
/// where `e` is the interpolation error and `E` the certified
/// best-approximation bound.
pub fn verify_error_estimates(
    mesh: &Mesh,
    constants: &MeshConstants,
    scheme: &InterpolationScheme,
    field: &FieldSpec,
    quad: &QuadratureRule,
    best: &BestApproxOptions,
) -> Result<ErrorEstimateOutcome, FunctionalError> {
    let target = field.target();
    let interp = interpolate(mesh, scheme, &|x: &[f64]| target.eval(x))?;
    let residual = Residual { target: &target, approx: &interp };
    let psi_error = roughness_functional(mesh, &residual, quad)?;
    let l2_error = gradient_norm(mesh, &residual, quad)?;
    let sup_error = sup_norm(mesh, &residual, &best.check, quad).sampled;
    let mut opts = best.clone();
    opts.quadrature_degree = Some(quad.exact_degree);
    let b = best_approx_surrogate(mesh, scheme, &target, &opts)?;
    let lambda = scheme.lebesgue().value;
    let coef = (1.0 + lambda) * constants.c3.value * constants.theta.sqrt();
    let magnitude = sampled_sup(mesh, &target, &best.check.points(mesh.dim())).max(1.0);
    let (id, norm_anchor) = match field {
        FieldSpec::Scalar(_) => ("gradient", "norm_error_estimate"),
        FieldSpec::Vector(_) => ("vector", "vector_norm_error_estimate"),
    };
    let name = field.name();
    let functional_bound = coef * b.certified_sup_error;
    let norm_bound = coef / constants.c1 * b.certified_sup_error;
    let checks = vec![
        Check::new(
            format!("{id}_functional_error[{name}]"),
            "functional_error_estimate",
            psi_error,
            functional_bound,
            ABSOLUTE_SLACK * coef * magnitude,
        ),
        Check::new(
            format!("{id}_norm_error[{name}]"),
            norm_anchor,
            l2_error,
            norm_bound,
            ABSOLUTE_SLACK * coef / constants.c1 * magnitude,
        ),
    ];
    Ok(ErrorEstimateOutcome {
        checks,
        psi_error,
        l2_error,
        sup_error,
        e_hat: b.certified_sup_error,
        best_approx_lower_bound: b.lower_bound,
        best_approx_converged: b.converged,
        lambda,
        functional_bound,
        norm_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests_support::*;
    use super::*;
    use crate::fields::{ScalarField, VectorField};
    use crate::interpolation::{build_scheme, PointSet};
    use approx::assert_relative_eq;

    #[test]
    fn equilateral_sandwich_triple() {
        let m = equilateral();
        let consts = MeshConstants::compute(&m, &SizingField::constant(1.0), &NetOptions::default(), &C3Options::default()).unwrap();
        let f = VectorField::constant(vec![1.0, 0.0]);
        let quad = crate::geometry::simplex_quadrature(2, 4).unwrap();
        let checks = verify_equivalence(&m, &consts, &[("x", &f)], &quad).unwrap();
        assert_relative_eq!(checks[0].lhs, 0.493528, epsilon = 1e-6);
        assert_relative_eq!(checks[0].rhs, 0.805927, epsilon = 1e-6);
        // C2 ||w|| = sqrt(3) (sqrt(3)/4)^(1/2)
        assert_relative_eq!(checks[1].rhs, 3f64.sqrt() * (3f64.sqrt() / 4.0).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(checks[1].rhs, 1.139754, epsilon = 1e-6);
        assert!(checks.iter().all(|c| c.pass));
    }

    #[test]
    fn constant_and_zero_fields_satisfy_upper_bounds() {
        let m = crate::interpolation::tests::square_grid(3);
        let consts = MeshConstants::compute(&m, &SizingField::constant(0.5), &NetOptions::default(), &C3Options::default()).unwrap();
        let quad = crate::geometry::simplex_quadrature(2, 4).unwrap();
        let f = VectorField::constant(vec![0.3, -1.2]);
        let checks = verify_upper_bound(&m, &consts, "c", &f, &quad, &SupSampling::default()).unwrap();
        assert!(checks.iter().all(|c| c.pass && c.tightness.unwrap() < 1.0));
        let z = VectorField::constant(vec![0.0, 0.0]);
        let checks = verify_upper_bound(&m, &consts, "z", &z, &quad, &SupSampling::default()).unwrap();
        assert!(checks.iter().all(|c| c.pass && c.lhs == 0.0 && c.rhs == 0.0));
    }

    #[test]
    fn error_estimates_hold_and_vanish_for_polynomials() {
        let m = crate::interpolation::tests::square_grid(3);
        let consts = MeshConstants::compute(&m, &SizingField::constant(0.5), &NetOptions::default(), &C3Options::default()).unwrap();
        for k in 1..=2 {
            let scheme = build_scheme(2, k, PointSet::Equispaced).unwrap();
            let quad = super::super::default_quadrature(2, k).unwrap();
            let opts = BestApproxOptions::default();
            let exact = FieldSpec::Scalar(ScalarField::quadratic());
            let out = verify_error_estimates(&m, &consts, &scheme, &exact, &quad, &opts).unwrap();
            assert!(out.checks.iter().all(|c| c.pass));
            assert!(out.psi_error <= 1e-10 && out.e_hat <= 1e-10);
            for field in [FieldSpec::Scalar(ScalarField::trig()), FieldSpec::Vector(VectorField::trig())] {
                let out = verify_error_estimates(&m, &consts, &scheme, &field, &quad, &opts).unwrap();
                assert!(out.checks.iter().all(|c| c.pass), "{:?}", out.checks);
                assert!(out.psi_error > 0.0);
            }
        }
    }

    #[test]
    fn report_collects_failures() {
        let r = VerificationReport::new(vec![
            Check::new("a", "x", 1.0, 2.0, 0.0),
            Check::new("b", "y", 3.0, 2.0, 0.0),
        ]);
        assert!(!r.passed);
        assert_eq!(r.failures().map(|c| c.anchor.as_str()).collect::<Vec<_>>(), ["y"]);
    }
}
