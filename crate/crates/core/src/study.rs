//! Refinement studies of the interpolation error against its bound on
//! Coxeter meshes of a fixed patch.

use std::fmt::Write as _;

use serde::Serialize;

use crate::fields::{FieldSpec, PiecewiseField};
use crate::functionals::{
    default_quadrature, gradient_norm, roughness_functional, sup_norm, verify_error_estimates,
    FunctionalError, MeshConstants,
};
use crate::interpolation::{build_scheme, interpolate, BestApproxOptions, PointSet, Residual};
use crate::mesh::{coxeter_a_tilde, coxeter_diameter, io::fmt17, NetOptions};
use crate::sizing::{C3Options, SizingField};

#[derive(Clone, Debug)]
pub struct StudyOptions {
    pub dim: usize,
    pub degree: usize,
    /// Layers of the Coxeter patch at each level; the patch keeps the
    /// same extent, so the element size is `extent / layers`.
    pub layers: Vec<usize>,
    pub extent: f64,
    pub field: FieldSpec,
    /// Sizing spec parsed against each level's mesh (`auto` follows the
    /// element size).
    pub sizing: String,
    pub points: PointSet,
    pub seed: u64,
    /// Net sampling per level.
    pub net_samples: usize,
    pub best: BestApproxOptions,
    /// Compute the bound columns (needs the best-approximation fit).
    pub with_bounds: bool,
}

impl StudyOptions {
    pub fn new(dim: usize, degree: usize, layers: Vec<usize>, field: FieldSpec) -> Self {
        Self {
            dim,
            degree,
            layers,
            extent: 1.0,
            field,
            sizing: "auto".into(),
            points: PointSet::Equispaced,
            seed: 0,
            net_samples: 10_000,
            best: BestApproxOptions::default(),
            with_bounds: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyRow {
    pub level: usize,
    /// Largest element diameter.
    pub h: f64,
    pub l2_error: f64,
    pub sup_error: f64,
    pub psi_error: f64,
    /// `(1 + Lambda) C3 sqrt(Theta) / C1 * E`, bound on `l2_error`;
    /// NaN when bounds were not requested.
    pub bound_rhs: f64,
    pub lambda: f64,
    pub theta: f64,
    pub c1: f64,
    pub c3: f64,
    pub checks_passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Study {
    pub rows: Vec<StudyRow>,
    /// Least-squares slopes of log(error) against log(h); `None` for a
    /// single level.
    pub slope_l2: Option<f64>,
    pub slope_sup: Option<f64>,
    pub slope_psi: Option<f64>,
}

/// Least-squares slope of `log y` against `log x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn convergence_study(opts: &StudyOptions) -> Result<Study, FunctionalError> {
    let scheme = build_scheme(opts.dim, opts.degree, opts.points.clone())?;
    let quad = default_quadrature(opts.dim, opts.degree)?;
    let target = opts.field.target();
    let mut rows = Vec::new();
    for (level, &layers) in opts.layers.iter().enumerate() {
        let scale = opts.extent / layers.max(1) as f64;
        let mesh = coxeter_a_tilde(opts.dim, layers, scale)?;
        let h = coxeter_diameter(opts.dim, scale);
        let row = if opts.with_bounds {
            let sizing = SizingField::parse(&opts.sizing, &mesh)?;
            let constants = MeshConstants::compute(
                &mesh,
                &sizing,
                &NetOptions { samples: opts.net_samples, seed: opts.seed },
                &C3Options { probes: 1000, seed: opts.seed },
            )?;
            let out = verify_error_estimates(&mesh, &constants, &scheme, &opts.field, &quad, &opts.best)?;
            StudyRow {
                level,
                h,
                l2_error: out.l2_error,
                sup_error: out.sup_error,
                psi_error: out.psi_error,
                bound_rhs: out.norm_bound,
                lambda: out.lambda,
                theta: constants.theta,
                c1: constants.c1,
                c3: constants.c3.value,
                checks_passed: out.checks.iter().all(|c| c.pass),
            }
        } else {
            let interp = interpolate(&mesh, &scheme, &|x: &[f64]| target.eval(x))?;
            let residual = Residual { target: &target, approx: &interp };
            let r: &dyn PiecewiseField = &residual;
            StudyRow {
                level,
                h,
                l2_error: gradient_norm(&mesh, r, &quad)?,
                sup_error: sup_norm(&mesh, r, &opts.best.check, &quad).sampled,
                psi_error: roughness_functional(&mesh, r, &quad)?,
                bound_rhs: f64::NAN,
                lambda: scheme.lebesgue().value,
                theta: crate::functionals::rajan_theta(&mesh)?.0,
                c1: crate::functionals::constant_c1(&mesh)?,
                c3: f64::NAN,
                checks_passed: true,
            }
        };
        rows.push(row);
    }
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let col = |f: fn(&StudyRow) -> f64| fit_slope(&hs, &rows.iter().map(f).collect::<Vec<_>>());
    Ok(Study {
        slope_l2: col(|r| r.l2_error),
        slope_sup: col(|r| r.sup_error),
        slope_psi: col(|r| r.psi_error),
        rows,
    })
}

pub const CSV_COLUMNS: &str = "level,h,l2_error,sup_error,psi_error,bound_rhs,lambda,theta,c1,c3";

/// CSV with a commented header, one row per level, and the observed
/// slopes as trailing comment lines. Reals carry 17 significant digits;
/// lines end in LF.
pub fn render_csv(study: &Study, header: &[(String, String)]) -> String {
    let mut s = String::new();
    for (k, v) in header {
        let _ = writeln!(s, "# {k}={v}");
    }
    let _ = writeln!(s, "{CSV_COLUMNS}");
    for r in &study.rows {
        let vals = [r.h, r.l2_error, r.sup_error, r.psi_error, r.bound_rhs, r.lambda, r.theta, r.c1, r.c3];
        let _ = writeln!(
            s,
            "{},{}",
            r.level,
            vals.iter().map(|v| fmt17(*v)).collect::<Vec<_>>().join(",")
        );
    }
    for (name, slope) in [("l2_error", study.slope_l2), ("sup_error", study.slope_sup), ("psi_error", study.slope_psi)] {
        if let Some(v) = slope {
            let _ = writeln!(s, "# observed_slope_{name}={}", fmt17(v));
        }
    }
    s
}
