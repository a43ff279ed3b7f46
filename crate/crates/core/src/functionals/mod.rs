//! Mesh functionals and constants: the roughness/edge functional, the L2
//! norm, Rajan's functional, `C1`, `C2`, the roughness energy and the
//! energy `J`, plus checks of the inequalities that tie them together.

mod report;
mod verify;

use rayon::prelude::*;
use thiserror::Error;

use crate::fields::{PiecewiseField, ScalarField};
use crate::geometry::{
    barycentric_to_point, diameter, edge_length_squared_sum, simplex_quadrature, GeometryError,
    QuadratureRule, Simplex, SimplexGeometry,
};
use crate::interpolation::InterpolationError;
use crate::mesh::{Mesh, MeshError};
use crate::sizing::SizingError;

pub use report::{quality_report, QualityReport, ReportOptions, ANCHORS};
pub use verify::{
    sup_norm, verify_equivalence, verify_error_estimates, verify_upper_bound, Check,
    ErrorEstimateOutcome, MeshConstants, SupNorm, VerificationReport, ABSOLUTE_SLACK,
    RELATIVE_SLACK,
};

#[derive(Debug, Error)]
pub enum FunctionalError {
    #[error("element {element} is degenerate")]
    Degenerate { element: usize },
    #[error("mesh has no simplices")]
    Empty,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Sizing(#[from] SizingError),
    #[error(transparent)]
    Interpolation(#[from] InterpolationError),
}

/// Quadrature degree used for degree-`k` interpolants.
pub fn default_quadrature_degree(k: usize) -> usize {
    2 * k + 2
}

pub fn default_quadrature(dim: usize, k: usize) -> Result<QuadratureRule, FunctionalError> {
    Ok(simplex_quadrature(dim, default_quadrature_degree(k))?)
}

/// Maps `f(k)` over the elements in parallel, keeping index order.
fn per_element<T: Send>(
    mesh: &Mesh,
    f: impl Fn(usize) -> Result<T, FunctionalError> + Sync + Send,
) -> Result<Vec<T>, FunctionalError> {
    (0..mesh.num_simplices()).into_par_iter().map(f).collect()
}

fn nonempty(mesh: &Mesh) -> Result<(), FunctionalError> {
    if mesh.num_simplices() == 0 {
        Err(FunctionalError::Empty)
    } else {
        Ok(())
    }
}

/// `|K| * sum_q w_q g(k, bary_q, x_q)`.
fn integrate_element(
    mesh: &Mesh,
    k: usize,
    quad: &QuadratureRule,
    g: impl Fn(&[f64], &[f64]) -> f64,
) -> Result<f64, FunctionalError> {
    let p = mesh.simplex_points(k);
    let vol = mesh.simplex_volume(k);
    if crate::geometry::is_degenerate(vol, diameter(&p), mesh.dim()) {
        return Err(FunctionalError::Degenerate { element: k });
    }
    let s: f64 = quad
        .nodes
        .iter()
        .zip(&quad.weights)
        .map(|(b, w)| w * g(b, &barycentric_to_point(&p, b)))
        .sum();
    Ok(vol * s)
}

/// Edge vectors `p_j - p_i`, `i < j`, of element `k`.
fn edges(mesh: &Mesh, k: usize) -> Vec<Vec<f64>> {
    let p = mesh.simplex_points(k);
    Simplex::edge_pairs(mesh.dim())
        .map(|(i, j)| p[j].iter().zip(p[i]).map(|(a, b)| a - b).collect())
        .collect()
}

/// Per-element squared contributions to the roughness functional.
fn roughness_terms(mesh: &Mesh, w: &dyn PiecewiseField, quad: &QuadratureRule) -> Result<Vec<f64>, FunctionalError> {
    per_element(mesh, |k| {
        let e = edges(mesh, k);
        let delta = diameter(&mesh.simplex_points(k));
        let integral = integrate_element(mesh, k, quad, |b, x| {
            let v = w.eval_in(k, b, x);
            e.iter()
                .map(|edge| {
                    let s: f64 = v.iter().zip(edge).map(|(a, p)| a.abs() * p.abs()).sum();
                    s * s
                })
                .sum()
        })?;
        Ok(integral / (delta * delta))
    })
}

/// Roughness functional `Psi(w)` with `h_K = diam(K)`:
/// `sqrt( sum_K diam(K)^-2 int_K sum_{i>j} (abs(w) . abs(p_ij))^2 )`.
pub fn roughness_functional(mesh: &Mesh, w: &dyn PiecewiseField, quad: &QuadratureRule) -> Result<f64, FunctionalError> {
    nonempty(mesh)?;
    Ok(roughness_terms(mesh, w, quad)?.iter().sum::<f64>().sqrt())
}

/// The edge functional of a vector field. It has the same form as the
/// roughness functional, so this delegates to it.
pub fn edge_functional(mesh: &Mesh, f: &dyn PiecewiseField, quad: &QuadratureRule) -> Result<f64, FunctionalError> {
    roughness_functional(mesh, f, quad)
}

/// `||w||_{L2}`.
pub fn gradient_norm(mesh: &Mesh, w: &dyn PiecewiseField, quad: &QuadratureRule) -> Result<f64, FunctionalError> {
    nonempty(mesh)?;
    let terms = per_element(mesh, |k| {
        integrate_element(mesh, k, quad, |b, x| w.eval_in(k, b, x).iter().map(|a| a * a).sum())
    })?;
    Ok(terms.iter().sum::<f64>().sqrt())
}

/// Rajan's functional `Theta = sum_K |K| sum_{i>j} |p_ij|^2` and
/// `Theta / ((d+1)(d+2))`.
pub fn rajan_theta(mesh: &Mesh) -> Result<(f64, f64), FunctionalError> {
    nonempty(mesh)?;
    let d = mesh.dim() as f64;
    let theta: f64 = (0..mesh.num_simplices())
        .map(|k| mesh.simplex_volume(k) * edge_length_squared_sum(&mesh.simplex_points(k)))
        .sum();
    Ok((theta, theta / ((d + 1.0) * (d + 2.0))))
}

fn geometries(mesh: &Mesh) -> Result<Vec<SimplexGeometry>, FunctionalError> {
    nonempty(mesh)?;
    per_element(mesh, |k| {
        mesh.simplex_geometry(k)
            .map_err(|_| FunctionalError::Degenerate { element: k })
    })
}

/// `C1 = sqrt((d+1)/(2d)) min_K (min_s elevation_s / diam(K))`.
pub fn constant_c1(mesh: &Mesh) -> Result<f64, FunctionalError> {
    let d = mesh.dim() as f64;
    let m = geometries(mesh)?
        .iter()
        .map(|g| g.min_elevation() / g.diameter)
        .fold(f64::INFINITY, f64::min);
    Ok(((d + 1.0) / (2.0 * d)).sqrt() * m)
}

/// Smallest thickness over the mesh.
pub fn min_thickness(mesh: &Mesh) -> Result<f64, FunctionalError> {
    Ok(geometries(mesh)?.iter().map(|g| g.thickness).fold(f64::INFINITY, f64::min))
}

/// `C2 = max_K sqrt(sum_{i>j} |p_ij|^2) / diam(K)`.
pub fn constant_c2(mesh: &Mesh) -> Result<f64, FunctionalError> {
    nonempty(mesh)?;
    let mut c2: f64 = 0.0;
    for k in 0..mesh.num_simplices() {
        let p = mesh.simplex_points(k);
        if crate::geometry::is_degenerate(mesh.simplex_volume(k), diameter(&p), mesh.dim()) {
            return Err(FunctionalError::Degenerate { element: k });
        }
        c2 = c2.max(edge_length_squared_sum(&p).sqrt() / diameter(&p));
    }
    Ok(c2)
}

/// `a(v, v) = int |grad v|^2`.
pub fn roughness_energy(mesh: &Mesh, v: &ScalarField, quad: &QuadratureRule) -> Result<f64, FunctionalError> {
    let g = v.gradient_field();
    Ok(gradient_norm(mesh, &g, quad)?.powi(2))
}

/// `J(v) = a(v, v) - 2 int f v`.
pub fn energy_j(
    mesh: &Mesh,
    v: &ScalarField,
    forcing: &(dyn Fn(&[f64]) -> f64 + Sync),
    quad: &QuadratureRule,
) -> Result<f64, FunctionalError> {
    let a = roughness_energy(mesh, v, quad)?;
    let load: f64 = per_element(mesh, |k| integrate_element(mesh, k, quad, |_, x| forcing(x) * v.value(x)))?
        .iter()
        .sum();
    Ok(a - 2.0 * load)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Global, VectorField};
    use crate::geometry::Point;
    use approx::assert_relative_eq;

    fn equilateral() -> Mesh {
        Mesh::new(
            2,
            vec![Point::from([0.0, 0.0]), Point::from([1.0, 0.0]), Point::from([0.5, 0.75f64.sqrt()])],
            vec![Simplex::new(vec![0, 1, 2])],
        )
        .unwrap()
    }

    fn right_triangle() -> Mesh {
        Mesh::new(
            2,
            vec![Point::from([0.0, 0.0]), Point::from([1.0, 0.0]), Point::from([0.0, 1.0])],
            vec![Simplex::new(vec![0, 1, 2])],
        )
        .unwrap()
    }

    fn square() -> Mesh {
        crate::interpolation::tests::square_grid(1)
    }

    fn q(d: usize) -> QuadratureRule {
        simplex_quadrature(d, 6).unwrap()
    }

    #[test]
    fn equilateral_values() {
        let m = equilateral();
        let f = VectorField::constant(vec![1.0, 0.0]);
        assert_relative_eq!(roughness_functional(&m, &f, &q(2)).unwrap(), 0.805927, epsilon = 1e-6);
        assert_relative_eq!(edge_functional(&m, &f, &q(2)).unwrap(), 0.805927, epsilon = 1e-6);
        assert_relative_eq!(gradient_norm(&m, &f, &q(2)).unwrap(), 0.658037, epsilon = 1e-6);
        assert_relative_eq!(constant_c1(&m).unwrap(), 0.75, epsilon = 1e-12);
        assert_relative_eq!(constant_c2(&m).unwrap(), 3f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(rajan_theta(&m).unwrap().0, 1.299038, epsilon = 1e-6);
        let zero = VectorField::constant(vec![0.0, 0.0]);
        assert_eq!(roughness_functional(&m, &zero, &q(2)).unwrap(), 0.0);
        assert_eq!(gradient_norm(&m, &zero, &q(2)).unwrap(), 0.0);
    }

    #[test]
    fn right_triangle_values() {
        let m = right_triangle();
        assert_relative_eq!(constant_c1(&m).unwrap(), 0.433013, epsilon = 1e-6);
        assert_relative_eq!(constant_c2(&m).unwrap(), 2f64.sqrt(), epsilon = 1e-12);
        let (t, th) = rajan_theta(&m).unwrap();
        assert_relative_eq!(t, 2.0, epsilon = 1e-15);
        assert_relative_eq!(th, 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn c1_thickness_identity() {
        for m in [equilateral(), right_triangle(), square()] {
            let d = m.dim() as f64;
            let lhs = constant_c1(&m).unwrap();
            let rhs = (d * (d + 1.0) / 2.0).sqrt() * min_thickness(&m).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * lhs);
        }
    }

    #[test]
    fn square_energies() {
        let m = square();
        let quad = q(2);
        let half = ScalarField::quadratic();
        assert_relative_eq!(gradient_norm(&m, &half.gradient_field(), &quad).unwrap(), (2.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(roughness_energy(&m, &half, &quad).unwrap(), 2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(roughness_energy(&m, &ScalarField::linear(2), &quad).unwrap(), 1.0, epsilon = 1e-12);
        let c = ScalarField::new("c", |_| 3.0, |_| vec![0.0, 0.0], Some(0));
        assert_eq!(roughness_energy(&m, &c, &quad).unwrap(), 0.0);
        assert_eq!(energy_j(&m, &ScalarField::zero(2), &|_| 1.0, &quad).unwrap(), 0.0);
        let a = roughness_energy(&m, &ScalarField::trig(), &quad).unwrap();
        assert_eq!(energy_j(&m, &ScalarField::trig(), &|_| 0.0, &quad).unwrap(), a);
    }

    #[test]
    fn energy_is_minimized_by_the_solution() {
        // -u'' = 2 on a strip, u = 0 at x = 0, 1: u = x(1 - x)
        let strip = Mesh::new(
            2,
            vec![Point::from([0.0, 0.0]), Point::from([1.0, 0.0]), Point::from([1.0, 0.2]), Point::from([0.0, 0.2])],
            vec![Simplex::new(vec![0, 1, 2]), Simplex::new(vec![0, 2, 3])],
        )
        .unwrap();
        let quad = q(2);
        let j = |t: f64| {
            let v = ScalarField::new("tx(1-x)", move |x| t * x[0] * (1.0 - x[0]), move |x| vec![t * (1.0 - 2.0 * x[0]), 0.0], Some(1));
            energy_j(&strip, &v, &|_| 2.0, &quad).unwrap()
        };
        let ts: Vec<f64> = (0..=40).map(|i| 0.5 + i as f64 * 0.025).collect();
        let best = ts.iter().copied().min_by(|a, b| j(*a).total_cmp(&j(*b))).unwrap();
        assert!((best - 1.0).abs() < 1e-12);
        // J decreases towards the minimizer
        for w in ts.windows(2).filter(|w| w[1] <= 1.0) {
            assert!(j(w[1]) < j(w[0]));
        }
    }

    #[test]
    fn monte_carlo_oracle() {
        use rand::{Rng, SeedableRng};
        let mesh = crate::mesh::delaunay(&crate::mesh::random_net(2, 12, 4).unwrap()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let f = VectorField::constant(vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
        let psi = roughness_functional(&mesh, &f, &q(2)).unwrap();
        let n = 1_000_000 / mesh.num_simplices();
        let mut total = 0.0;
        for k in 0..mesh.num_simplices() {
            let p = mesh.simplex_points(k);
            let dlt = diameter(&p);
            let mut acc = 0.0;
            for _ in 0..n {
                let v = f.eval(&crate::mesh::sample_in_simplex(&mesh, k, &mut rng));
                for (i, j) in Simplex::edge_pairs(2) {
                    let s: f64 = (0..2).map(|m| v[m].abs() * (p[j][m] - p[i][m]).abs()).sum();
                    acc += s * s;
                }
            }
            total += mesh.simplex_volume(k) * acc / n as f64 / (dlt * dlt);
        }
        assert!((psi - total.sqrt()).abs() < 1e-3 * psi);
    }

    #[test]
    fn quadrature_converges_for_smooth_fields() {
        let mesh = crate::mesh::delaunay(&crate::mesh::random_net(2, 12, 4).unwrap()).unwrap();
        let f = VectorField::trig();
        let reference = roughness_functional(&mesh, &f, &simplex_quadrature(2, 24).unwrap()).unwrap();
        let coarse = roughness_functional(&mesh, &f, &simplex_quadrature(2, 10).unwrap()).unwrap();
        assert!((coarse - reference).abs() < 1e-9 * reference);
    }

    #[test]
    fn scaling_laws() {
        let m = crate::mesh::delaunay(&crate::mesh::random_net(3, 10, 2).unwrap()).unwrap();
        let s = m.scaled(2.5);
        let (t, _) = rajan_theta(&m).unwrap();
        let (ts, _) = rajan_theta(&s).unwrap();
        assert!((ts - 2.5f64.powi(5) * t).abs() < 1e-10 * ts);
        assert!((constant_c1(&m).unwrap() - constant_c1(&s).unwrap()).abs() < 1e-10);
        assert!((constant_c2(&m).unwrap() - constant_c2(&s).unwrap()).abs() < 1e-10);
        assert!((min_thickness(&m).unwrap() - min_thickness(&s).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn theta_is_additive() {
        let a = right_triangle();
        let b = equilateral().scaled(1.7);
        let u = a.disjoint_union(&b).unwrap();
        assert!((rajan_theta(&u).unwrap().0 - rajan_theta(&a).unwrap().0 - rajan_theta(&b).unwrap().0).abs() < 1e-12);
    }

    #[test]
    fn roughness_equals_edge_functional_of_gradient() {
        let m = square();
        let v = ScalarField::trig();
        let g = v.gradient_field();
        let a = roughness_functional(&m, &g, &q(2)).unwrap();
        let b = edge_functional(&m, &Global(|x: &[f64]| v.gradient(x)), &q(2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_and_empty_meshes_are_rejected() {
        let flat = Mesh::new(
            2,
            vec![Point::from([0.0, 0.0]), Point::from([1.0, 0.0]), Point::from([2.0, 0.0])],
            vec![Simplex::new(vec![0, 1, 2])],
        )
        .unwrap();
        let f = VectorField::constant(vec![1.0, 0.0]);
        assert!(matches!(roughness_functional(&flat, &f, &q(2)), Err(FunctionalError::Degenerate { element: 0 })));
        assert!(matches!(constant_c2(&flat), Err(FunctionalError::Degenerate { element: 0 })));
        let empty = Mesh::new(2, vec![], vec![]).unwrap();
        assert!(matches!(rajan_theta(&empty), Err(FunctionalError::Empty)));
    }
}

#[cfg(test)]
pub(crate) mod tests_support {
    use crate::geometry::{Point, Simplex};
    use crate::mesh::Mesh;

    pub fn equilateral() -> Mesh {
        Mesh::new(
            2,
            vec![Point::from([0.0, 0.0]), Point::from([1.0, 0.0]), Point::from([0.5, 0.75f64.sqrt()])],
            vec![Simplex::new(vec![0, 1, 2])],
        )
        .unwrap()
    }
}
