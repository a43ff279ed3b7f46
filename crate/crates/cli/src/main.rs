//! `meshcert`: mesh generation, quality reports, bound verification and
//! interpolation convergence studies.
//!
//! Exit codes: 0 on success, 1 when `verify` finds a failing inequality,
//! 2 for unreadable or malformed input and invalid settings.

mod config;

use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use meshcert::fields::{FieldSpec, PiecewiseField};
use meshcert::functionals::{
    default_quadrature, quality_report, verify_equivalence, verify_error_estimates, verify_upper_bound,
    Check, MeshConstants, ReportOptions,
};
use meshcert::interpolation::{build_scheme, interpolate, read_point_set, BestApproxOptions, PointSet, Residual};
use meshcert::mesh::{coxeter_a_tilde, delaunay, io, random_net, Mesh, NetOptions};
use meshcert::sizing::{C3Options, SizingField};
use meshcert::study::{convergence_study, render_csv, StudyOptions};

use config::{Effective, Settings};

#[derive(Parser)]
#[command(name = "meshcert", version, about = "Certified quality constants and interpolation bounds for simplicial meshes")]
struct Cli {
    /// JSON config file; keys are the long flag names with underscores.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a Coxeter A~_d patch (--dim, --layers, --scale).
    GenCoxeter(Settings),
    /// Write a random point net: cube corners plus dart throwing (--dim, --count, --seed).
    GenRandomNet(Settings),
    /// Triangulate the points of a mesh file (--mesh).
    Delaunay(Settings),
    /// Write the quality report of a mesh (--mesh, or a Coxeter patch).
    Report(Settings),
    /// Check every inequality of the bound chain for a field on a mesh.
    Verify {
        #[command(flatten)]
        settings: Settings,
        /// Multiplies C1 before checking; exercises the failure path.
        #[arg(long, hide = true)]
        corrupt_c1: Option<f64>,
    },
    /// Convergence study on refined Coxeter patches, written as CSV.
    InterpStudy(Settings),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = cli.config.as_deref();
    let (name, out, settings, corrupt) = match &cli.command {
        Command::GenCoxeter(s) => ("gen-coxeter", "coxeter.json", s, None),
        Command::GenRandomNet(s) => ("gen-random-net", "points.json", s, None),
        Command::Delaunay(s) => ("delaunay", "delaunay.json", s, None),
        Command::Report(s) => ("report", "report.json", s, None),
        Command::Verify { settings, corrupt_c1 } => ("verify", "verify.json", settings, *corrupt_c1),
        Command::InterpStudy(s) => ("interp-study", "study.csv", s, None),
    };
    let eff = config::resolve(name, out, settings, cfg)?;
    if let Some(n) = eff.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("building the worker pool")?;
    }
    match name {
        "gen-coxeter" => gen_coxeter(&eff),
        "gen-random-net" => gen_random_net(&eff),
        "delaunay" => cmd_delaunay(&eff),
        "report" => cmd_report(&eff),
        "verify" => cmd_verify(&eff, corrupt),
        _ => cmd_interp_study(&eff),
    }
}

fn load_mesh(path: &Path) -> Result<Mesh> {
    if !path.exists() {
        bail!("mesh file `{}` does not exist", path.display());
    }
    io::read_mesh(path).with_context(|| format!("reading mesh `{}`", path.display()))
}

/// The `--mesh` file, or a Coxeter patch from `--dim/--layers/--scale`.
fn input_mesh(eff: &Effective) -> Result<Mesh> {
    match &eff.mesh {
        Some(p) => load_mesh(p),
        None => Ok(coxeter_a_tilde(eff.dim, eff.layers, eff.scale)?),
    }
}

fn point_set(eff: &Effective, dim: usize) -> Result<PointSet> {
    let Some(path) = &eff.points else { return Ok(PointSet::Equispaced) };
    if !path.exists() {
        bail!("point set file `{}` does not exist", path.display());
    }
    let (d, pts) = read_point_set(path).with_context(|| format!("reading point set `{}`", path.display()))?;
    if d != dim {
        bail!("point set `{}` has dimension {d}, mesh has {dim}", path.display());
    }
    Ok(PointSet::User(pts))
}

fn write_out(eff: &Effective, text: &str) -> Result<()> {
    if let Some(dir) = eff.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating `{}`", dir.display()))?;
    }
    std::fs::write(&eff.out, text).with_context(|| format!("writing `{}`", eff.out.display()))?;
    println!("wrote {}", eff.out.display());
    Ok(())
}

fn write_json(eff: &Effective, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_out(eff, &text)
}

fn gen_coxeter(eff: &Effective) -> Result<ExitCode> {
    let mesh = coxeter_a_tilde(eff.dim, eff.layers, eff.scale)?;
    write_out(eff, &io::write_mesh_string(&mesh))?;
    Ok(ExitCode::SUCCESS)
}

fn gen_random_net(eff: &Effective) -> Result<ExitCode> {
    let points = random_net(eff.dim, eff.count, eff.seed)?;
    let mesh = Mesh::new(eff.dim, points, Vec::new())?;
    write_out(eff, &io::write_mesh_string(&mesh))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_delaunay(eff: &Effective) -> Result<ExitCode> {
    let Some(path) = &eff.mesh else { bail!("delaunay needs --mesh") };
    let input = load_mesh(path)?;
    let mesh = delaunay(input.points())?;
    write_out(eff, &io::write_mesh_string(&mesh))?;
    Ok(ExitCode::SUCCESS)
}

fn sizing(eff: &Effective, mesh: &Mesh) -> Result<SizingField> {
    Ok(SizingField::parse(&eff.sizing, mesh)?)
}

fn net_options(eff: &Effective) -> NetOptions {
    NetOptions { samples: eff.net_samples, seed: eff.seed }
}

fn c3_options(eff: &Effective) -> C3Options {
    C3Options { seed: eff.seed, ..C3Options::default() }
}

fn cmd_report(eff: &Effective) -> Result<ExitCode> {
    let mesh = input_mesh(eff)?;
    let opts = ReportOptions {
        degree: eff.degree,
        points: point_set(eff, mesh.dim())?,
        sizing: sizing(eff, &mesh)?,
        net: net_options(eff),
        c3: c3_options(eff),
    };
    let report = quality_report(&mesh, &opts)?;
    write_json(eff, &json!({ "config": eff, "report": report }))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(eff: &Effective, corrupt_c1: Option<f64>) -> Result<ExitCode> {
    let mesh = input_mesh(eff)?;
    let dim = mesh.dim();
    let field = FieldSpec::parse(&eff.field, dim)?;
    let scheme = build_scheme(dim, eff.degree, point_set(eff, dim)?)?;
    let quad = default_quadrature(dim, eff.degree)?;
    let mut constants = MeshConstants::compute(&mesh, &sizing(eff, &mesh)?, &net_options(eff), &c3_options(eff))?;
    if let Some(f) = corrupt_c1 {
        constants.c1 *= f;
    }
    let best = BestApproxOptions::default();

    let target = field.target();
    let interp = interpolate(&mesh, &scheme, &|x: &[f64]| target.eval(x))?;
    let residual = Residual { target: &target, approx: &interp };
    let error_name = format!("error:{}", field.name());
    let fields: [(&str, &dyn PiecewiseField); 2] = [(field.name(), &target), (&error_name, &residual)];

    let mut checks: Vec<Check> = verify_equivalence(&mesh, &constants, &fields, &quad)?;
    for (name, w) in fields {
        checks.extend(verify_upper_bound(&mesh, &constants, name, w, &quad, &best.check)?);
    }
    let errors = verify_error_estimates(&mesh, &constants, &scheme, &field, &quad, &best)?;
    checks.extend(errors.checks.iter().cloned());
    let passed = checks.iter().all(|c| c.pass);

    write_json(
        eff,
        &json!({
            "config": eff,
            "constants": constants,
            "interpolation": {
                "lambda": errors.lambda,
                "psi_error": errors.psi_error,
                "l2_error": errors.l2_error,
                "sup_error": errors.sup_error,
                "e_hat": errors.e_hat,
                "best_approx_lower_bound": errors.best_approx_lower_bound,
                "best_approx_converged": errors.best_approx_converged,
            },
            "checks": checks,
            "passed": passed,
        }),
    )?;
    println!("{} of {} checks passed", checks.iter().filter(|c| c.pass).count(), checks.len());
    if passed {
        return Ok(ExitCode::SUCCESS);
    }
    for c in checks.iter().filter(|c| !c.pass) {
        eprintln!("FAILED {} ({}): lhs {:e} > rhs {:e}", c.anchor, c.check_id, c.lhs, c.rhs);
    }
    Ok(ExitCode::from(1))
}

/// Layers of level `i`: doubling from 2 in the plane and on the line,
/// from 1 above (where element counts grow faster).
fn study_layers(dim: usize, levels: usize) -> Vec<usize> {
    let start = if dim <= 2 { 2 } else { 1 };
    (0..levels).map(|i| start << i).collect()
}

fn cmd_interp_study(eff: &Effective) -> Result<ExitCode> {
    if eff.levels == 0 {
        bail!("--levels must be at least 1");
    }
    if eff.mesh.is_some() {
        eprintln!("warning: interp-study refines Coxeter patches; --mesh is ignored");
    }
    let field = FieldSpec::parse(&eff.field, eff.dim)?;
    let mut opts = StudyOptions::new(eff.dim, eff.degree, study_layers(eff.dim, eff.levels), field);
    opts.sizing = eff.sizing.clone();
    opts.points = point_set(eff, eff.dim)?;
    opts.seed = eff.seed;
    opts.net_samples = eff.net_samples;
    let study = convergence_study(&opts)?;
    if eff.levels < 2 {
        eprintln!("warning: a single level gives no convergence slope");
    }
    let header = header_pairs(eff)?;
    write_out(eff, &render_csv(&study, &header))?;
    Ok(ExitCode::SUCCESS)
}

/// The effective config as `key=value` pairs in declaration order.
fn header_pairs(eff: &Effective) -> Result<Vec<(String, String)>> {
    let value = serde_json::to_value(eff)?;
    let serde_json::Value::Object(map) = value else { unreachable!() };
    Ok(map
        .into_iter()
        .map(|(k, v)| {
            let v = match v {
                serde_json::Value::String(s) => s,
                other => other.to_string(),
            };
            (k, v)
        })
        .collect())
}
