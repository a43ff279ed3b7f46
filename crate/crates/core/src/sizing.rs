//! Sizing fields `1/D(x)^2`, the per-element mismatch `zeta_K`, and the
//! constant `C3` that bounds `1/diam(K)^2` across the mesh.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{barycentric_to_point, compositions, min_containment_ball, Point};
use crate::mesh::{sample_in_simplex, Mesh, MeshError, NetParams, PointLocator};

/// Safety factor applied to sampled suprema.
pub const SAMPLE_SAFETY_FACTOR: f64 = 1.05;

#[derive(Debug, Error)]
pub enum SizingError {
    #[error("sizing field is not positive at vertex {vertex} (1/D^2 = {value})")]
    NonPositive { vertex: usize, value: f64 },
    #[error("probe {index} lies outside the mesh")]
    ProbeOutsideHull { index: usize },
    #[error("net parameters are required for C3")]
    MissingNet,
    #[error("bad sizing spec `{spec}`: {reason}")]
    Parse { spec: String, reason: String },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
enum Shape {
    /// Convex on the whole space, so its maximum over a polytope is
    /// attained at a vertex.
    Convex,
    General,
}

/// Evaluator for `1/D(x)^2` plus whatever is known analytically about it.
#[derive(Clone)]
pub struct SizingField {
    name: String,
    inv_d2: Evaluator,
    hessian_bound: Option<f64>,
    shape: Shape,
}

impl fmt::Debug for SizingField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SizingField")
            .field("name", &self.name)
            .field("hessian_bound", &self.hessian_bound)
            .finish_non_exhaustive()
    }
}

impl SizingField {
    /// `D(x) = h0` everywhere.
    pub fn constant(h0: f64) -> Self {
        let v = 1.0 / (h0 * h0);
        Self {
            name: format!("constant:{h0}"),
            inv_d2: Arc::new(move |_| v),
            hessian_bound: Some(0.0),
            shape: Shape::Convex,
        }
    }

    /// `1/D^2 = c0 + g . x`.
    pub fn affine(c0: f64, gradient: Vec<f64>) -> Self {
        let name = format!(
            "affine:{}",
            std::iter::once(c0)
                .chain(gradient.iter().copied())
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        Self {
            name,
            inv_d2: Arc::new(move |x| c0 + x.iter().zip(&gradient).map(|(a, b)| a * b).sum::<f64>()),
            hessian_bound: Some(0.0),
            shape: Shape::Convex,
        }
    }

    /// `1/D^2 = a + b |x - center|^2`.
    pub fn radial_quadratic(a: f64, b: f64, center: Vec<f64>) -> Self {
        let name = format!(
            "radial:{}",
            [a, b]
                .into_iter()
                .chain(center.iter().copied())
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        Self {
            name,
            inv_d2: Arc::new(move |x| {
                a + b * x.iter().zip(&center).map(|(p, c)| (p - c) * (p - c)).sum::<f64>()
            }),
            hessian_bound: Some(2.0 * b.abs()),
            shape: if b >= 0.0 { Shape::Convex } else { Shape::General },
        }
    }

    /// A user evaluator for `1/D^2`. Nothing is assumed about it: the
    /// Hessian and sup norms are estimated by sampling.
    pub fn from_fn(name: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            inv_d2: Arc::new(f),
            hessian_bound: None,
            shape: Shape::General,
        }
    }

    /// Supplies an analytic bound on the Hessian spectral norm.
    pub fn with_hessian_bound(mut self, bound: f64) -> Self {
        self.hessian_bound = Some(bound);
        self
    }

    /// Parses `constant:H`, `affine:C0,G1,..,Gd`, `radial:A,B[,C1,..,Cd]`
    /// or `auto` (constant spacing equal to the largest element diameter).
    pub fn parse(spec: &str, mesh: &Mesh) -> Result<Self, SizingError> {
        let err = |reason: &str| SizingError::Parse {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let (kind, args) = spec.split_once(':').unwrap_or((spec, ""));
        let nums: Vec<f64> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| err("arguments must be comma-separated reals"))?
        };
        if nums.iter().any(|v| !v.is_finite()) {
            return Err(err("arguments must be finite"));
        }
        let d = mesh.dim();
        match kind {
            "auto" => {
                let h = (0..mesh.num_simplices())
                    .map(|k| crate::geometry::diameter(&mesh.simplex_points(k)))
                    .fold(0.0, f64::max);
                if h <= 0.0 {
                    return Err(err("mesh has no simplices"));
                }
                Ok(Self::constant(h))
            }
            "constant" => match nums[..] {
                [h] if h > 0.0 => Ok(Self::constant(h)),
                _ => Err(err("expected one positive spacing")),
            },
            "affine" if nums.len() == d + 1 => Ok(Self::affine(nums[0], nums[1..].to_vec())),
            "affine" => Err(err(&format!("expected {} numbers", d + 1))),
            "radial" if nums.len() == 2 => Ok(Self::radial_quadratic(nums[0], nums[1], vec![0.0; d])),
            "radial" if nums.len() == d + 2 => {
                Ok(Self::radial_quadratic(nums[0], nums[1], nums[2..].to_vec()))
            }
            "radial" => Err(err(&format!("expected 2 or {} numbers", d + 2))),
            _ => Err(err("unknown kind (constant, affine, radial, auto)")),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.inv_d2)(x)
    }

    pub fn analytic_hessian_bound(&self) -> Option<f64> {
        self.hessian_bound
    }

    /// `1/D^2` at every mesh vertex.
    pub fn vertex_values(&self, mesh: &Mesh) -> Vec<f64> {
        mesh.points().iter().map(|p| self.eval(p)).collect()
    }
}

/// `zeta_K` and the quantities it was chosen from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ElementSizing {
    pub zeta: f64,
    pub min_vertex_value: f64,
    pub max_vertex_value: f64,
    pub inv_diam2: f64,
}

/// For every element, the value of smallest magnitude in
/// `[min_i 1/D^2(p_i) - 1/diam^2, max_i 1/D^2(p_i) - 1/diam^2]`.
pub fn compute_zeta(mesh: &Mesh, field: &SizingField) -> Result<Vec<ElementSizing>, SizingError> {
    let values = field.vertex_values(mesh);
    if let Some((vertex, &value)) = values.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(SizingError::NonPositive { vertex, value });
    }
    Ok(mesh
        .simplices()
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let (lo, hi) = s
                .vertices()
                .iter()
                .map(|&v| values[v])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            let diam = crate::geometry::diameter(&mesh.simplex_points(k));
            let inv_diam2 = 1.0 / (diam * diam);
            let zeta = if lo - inv_diam2 > 0.0 {
                lo - inv_diam2
            } else if hi - inv_diam2 < 0.0 {
                hi - inv_diam2
            } else {
                0.0
            };
            ElementSizing {
                zeta,
                min_vertex_value: lo,
                max_vertex_value: hi,
                inv_diam2,
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HessianEstimate {
    /// Largest spectral norm seen (or the analytic bound).
    pub value: f64,
    /// `true` when the value comes from finite differences.
    pub estimate: bool,
    pub probes: usize,
    pub step: f64,
}

fn hull_diameter(mesh: &Mesh) -> f64 {
    let d = mesh.dim();
    let (mut lo, mut hi) = (vec![f64::INFINITY; d], vec![f64::NEG_INFINITY; d]);
    for p in mesh.points() {
        for i in 0..d {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
}

/// Central-difference Hessian of `f` at `x`.
pub fn finite_difference_hessian(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> DMatrix<f64> {
    let d = x.len();
    let at = |shifts: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(i, s) in shifts {
            y[i] += s;
        }
        f(&y)
    };
    let f0 = f(x);
    let mut hess = DMatrix::zeros(d, d);
    for i in 0..d {
        hess[(i, i)] = (at(&[(i, h)]) - 2.0 * f0 + at(&[(i, -h)])) / (h * h);
        for j in 0..i {
            let v = (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)])
                + at(&[(i, -h), (j, -h)]))
                / (4.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess
}

/// Uniform probes inside the mesh, seeded.
pub fn default_probes(mesh: &Mesh, count: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = mesh.num_simplices();
    if n == 0 {
        return Vec::new();
    }
    let volumes: Vec<f64> = (0..n).map(|k| mesh.simplex_volume(k)).collect();
    let total: f64 = volumes.iter().sum();
    let mut cumulative = Vec::with_capacity(n);
    let mut acc = 0.0;
    for v in &volumes {
        acc += v;
        cumulative.push(acc);
    }
    (0..count)
        .map(|_| {
            let t = rand::Rng::gen::<f64>(&mut rng) * total;
            let k = cumulative.partition_point(|&c| c < t).min(n - 1);
            Point::new(sample_in_simplex(mesh, k, &mut rng)).expect("finite sample")
        })
        .collect()
}

/// `sup_x ||Hess(1/D^2)(x)||_2`. Returns the analytic bound when the field
/// has one; otherwise the maximum finite-difference spectral norm over the
/// probes (step `1e-4 * diam(hull)`), flagged as an estimate. Probes must
/// lie in the mesh.
pub fn estimate_hessian_sup(
    field: &SizingField,
    mesh: &Mesh,
    probes: &[Point],
) -> Result<HessianEstimate, SizingError> {
    let step = 1e-4 * hull_diameter(mesh);
    if let Some(value) = field.hessian_bound {
        return Ok(HessianEstimate {
            value,
            estimate: false,
            probes: 0,
            step,
        });
    }
    let locator = PointLocator::new(mesh);
    let mut value: f64 = 0.0;
    for (index, x) in probes.iter().enumerate() {
        if locator.locate(x, 1e-9).is_none() {
            return Err(SizingError::ProbeOutsideHull { index });
        }
        let h = finite_difference_hessian(|y| field.eval(y), x, step);
        let eig = SymmetricEigen::new(h).eigenvalues;
        value = value.max(eig.iter().fold(0.0, |m: f64, l| m.max(l.abs())));
    }
    Ok(HessianEstimate {
        value,
        estimate: true,
        probes: probes.len(),
        step,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupEstimate {
    pub value: f64,
    pub estimate: bool,
}

/// `sup |1/D^2|` over the mesh. Exact from the vertices for convex
/// fields; otherwise a lattice sample per element inflated by
/// [`SAMPLE_SAFETY_FACTOR`].
pub fn sup_norm(field: &SizingField, mesh: &Mesh) -> SupEstimate {
    let vertex_max = field
        .vertex_values(mesh)
        .into_iter()
        .fold(0.0, |m: f64, v| m.max(v.abs()));
    if field.shape == Shape::Convex {
        return SupEstimate {
            value: vertex_max,
            estimate: false,
        };
    }
    let density = 6;
    let lattice: Vec<Vec<f64>> = compositions(density, mesh.dim() + 1)
        .into_iter()
        .map(|c| c.iter().map(|&n| n as f64 / density as f64).collect())
        .collect();
    let mut m = vertex_max;
    for k in 0..mesh.num_simplices() {
        let p = mesh.simplex_points(k);
        for b in &lattice {
            m = m.max(field.eval(&barycentric_to_point(&p, b)).abs());
        }
    }
    SupEstimate {
        value: m * SAMPLE_SAFETY_FACTOR,
        estimate: true,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum C3Branch {
    /// `1/2 max R_min^2 ||1/D^2||_{2,inf} + ||1/D^2||_inf + max|zeta|`
    Sizing,
    /// `1/eta^2`
    Separation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct C3 {
    pub value: f64,
    pub branch: C3Branch,
    pub sizing_term: f64,
    pub separation_term: f64,
    pub max_r_min: f64,
    pub hessian_sup: f64,
    pub hessian_estimated: bool,
    pub sup_inv_d2: f64,
    pub sup_estimated: bool,
    pub max_abs_zeta: f64,
}

/// `sqrt(min(1/2 r^2 hess + sup + zeta, 1/eta^2))` and the active branch
/// (ties go to the separation branch).
pub fn c3_from_parts(max_r_min: f64, hessian_sup: f64, sup_inv_d2: f64, max_abs_zeta: f64, eta: f64) -> (f64, C3Branch, f64, f64) {
    let sizing = 0.5 * max_r_min * max_r_min * hessian_sup + sup_inv_d2 + max_abs_zeta;
    let separation = 1.0 / (eta * eta);
    if sizing < separation {
        (sizing.sqrt(), C3Branch::Sizing, sizing, separation)
    } else {
        (separation.sqrt(), C3Branch::Separation, sizing, separation)
    }
}

/// Options for the Hessian probe set when the field has no analytic bound.
#[derive(Clone, Debug)]
pub struct C3Options {
    pub probes: usize,
    pub seed: u64,
}

impl Default for C3Options {
    fn default() -> Self {
        Self { probes: 1000, seed: 0 }
    }
}

pub fn constant_c3(
    mesh: &Mesh,
    field: &SizingField,
    net: Option<&NetParams>,
    opts: &C3Options,
) -> Result<C3, SizingError> {
    let net = net.ok_or(SizingError::MissingNet)?;
    let zeta = compute_zeta(mesh, field)?;
    let max_abs_zeta = zeta.iter().fold(0.0, |m: f64, e| m.max(e.zeta.abs()));
    let mut max_r_min: f64 = 0.0;
    for k in 0..mesh.num_simplices() {
        max_r_min = max_r_min.max(
            min_containment_ball(&mesh.simplex_points(k))
                .map_err(MeshError::from)?
                .radius,
        );
    }
    let probes = if field.hessian_bound.is_some() {
        Vec::new()
    } else {
        default_probes(mesh, opts.probes, opts.seed)
    };
    let hess = estimate_hessian_sup(field, mesh, &probes)?;
    let sup = sup_norm(field, mesh);
    let (value, branch, sizing_term, separation_term) =
        c3_from_parts(max_r_min, hess.value, sup.value, max_abs_zeta, net.eta);
    Ok(C3 {
        value,
        branch,
        sizing_term,
        separation_term,
        max_r_min,
        hessian_sup: hess.value,
        hessian_estimated: hess.estimate,
        sup_inv_d2: sup.value,
        sup_estimated: sup.estimate,
        max_abs_zeta,
    })
}
