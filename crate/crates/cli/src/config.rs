//! Effective run configuration: flags override the config file, which
//! overrides the defaults.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "MESHCERT_OUT_DIR";

#[derive(Args, Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Settings {
    /// Input mesh (or point set) file.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Ambient dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Interpolation degree k.
    #[arg(long)]
    pub degree: Option<usize>,
    /// Number of refinement levels (interp-study).
    #[arg(long)]
    pub levels: Option<usize>,
    /// Test field: zero, linear, quadratic, trig, radial,
    /// poly:C@E1,..,Ed;..., vec-trig, vec-const:C1,..,Cd.
    #[arg(long)]
    pub field: Option<String>,
    /// Sizing field: auto, constant:H, affine:C0,G1,..,Gd, radial:A,B[,C1,..,Cd].
    #[arg(long)]
    pub sizing: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file (defaults to a per-command name in $MESHCERT_OUT_DIR or
    /// the working directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Layers of the Coxeter patch (gen-coxeter).
    #[arg(long)]
    pub layers: Option<usize>,
    /// Shortest edge length of the Coxeter patch (gen-coxeter).
    #[arg(long)]
    pub scale: Option<f64>,
    /// Number of interior points (gen-random-net).
    #[arg(long)]
    pub count: Option<usize>,
    /// Interpolation point set file (barycentric tuples).
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// Monte Carlo samples for the covering radius.
    #[arg(long)]
    pub net_samples: Option<usize>,
}

/// Fully resolved settings, echoed into every output.
#[derive(Clone, Debug, Serialize)]
pub struct Effective {
    pub command: String,
    pub mesh: Option<PathBuf>,
    pub dim: usize,
    pub degree: usize,
    pub levels: usize,
    pub field: String,
    pub sizing: String,
    pub seed: u64,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub layers: usize,
    pub scale: f64,
    pub count: usize,
    pub points: Option<PathBuf>,
    pub net_samples: usize,
    pub config_file: Option<PathBuf>,
}

fn merge(flags: &Settings, file: &Settings) -> Settings {
    macro_rules! pick {
        ($($f:ident),*) => { Settings { $($f: flags.$f.clone().or_else(|| file.$f.clone()),)* } };
    }
    pick!(mesh, dim, degree, levels, field, sizing, seed, out, threads, layers, scale, count, points, net_samples)
}

pub fn load_file(path: &Path) -> Result<Settings> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file `{}`", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("config file `{}`", path.display()))
}

pub fn resolve(command: &str, default_out: &str, flags: &Settings, config: Option<&Path>) -> Result<Effective> {
    let file = match config {
        Some(p) => load_file(p)?,
        None => Settings::default(),
    };
    let s = merge(flags, &file);
    let layers = s.layers.unwrap_or(4);
    let out = s.out.unwrap_or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."))
            .join(default_out)
    });
    Ok(Effective {
        command: command.to_string(),
        mesh: s.mesh,
        dim: s.dim.unwrap_or(2),
        degree: s.degree.unwrap_or(2),
        levels: s.levels.unwrap_or(4),
        field: s.field.unwrap_or_else(|| "trig".into()),
        sizing: s.sizing.unwrap_or_else(|| "auto".into()),
        seed: s.seed.unwrap_or(0),
        out,
        threads: s.threads,
        layers,
        scale: s.scale.unwrap_or(1.0 / layers.max(1) as f64),
        count: s.count.unwrap_or(100),
        points: s.points,
        net_samples: s.net_samples.unwrap_or(100_000),
        config_file: config.map(Path::to_path_buf),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_override_defaults() {
        let flags = Settings { degree: Some(3), ..Default::default() };
        let file = Settings { degree: Some(1), dim: Some(3), ..Default::default() };
        let m = merge(&flags, &file);
        assert_eq!((m.degree, m.dim, m.levels), (Some(3), Some(3), None));
    }
}
