use serde::{Deserialize, Serialize};

use super::InterpolationScheme;
use crate::geometry::compositions;

/// A lower-bound estimate of `max_xi sum_j |L_j(xi)|`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LebesgueEstimate {
    /// Best value found (lattice maximum improved by local search).
    pub value: f64,
    /// Maximum over the sampling lattice alone.
    pub lattice_value: f64,
    /// Barycentric coordinates of the best point.
    pub maximizer: Vec<f64>,
    /// Lattice density `n`: points `i/n` with `|i| = n`.
    pub density: usize,
    pub samples: usize,
}

/// Density keeping the lattice at a few thousand points.
pub(crate) fn default_density(dim: usize, degree: usize) -> usize {
    let base: usize = match dim {
        1 => 2000,
        2 => 120,
        3 => 40,
        4 => 20,
        5 => 12,
        _ => 10,
    };
    // a multiple of the degree, so the lattice contains the equispaced nodes
    base.div_ceil(degree) * degree
}

/// Samples the Lebesgue function on the barycentric lattice of the given
/// density, then runs a compass search (mass moved between pairs of
/// barycentric coordinates, step halved on failure) from the best lattice
/// points.
pub fn lebesgue_constant(scheme: &InterpolationScheme, density: usize) -> LebesgueEstimate {
    let density = density.max(1);
    let d = scheme.dim();
    let mut samples: Vec<(f64, Vec<f64>)> = compositions(density, d + 1)
        .into_iter()
        .map(|c| {
            let b: Vec<f64> = c.iter().map(|&i| i as f64 / density as f64).collect();
            (scheme.lebesgue_function(&b), b)
        })
        .collect();
    let count = samples.len();
    samples.sort_by(|a, b| b.0.total_cmp(&a.0));
    let lattice_value = samples[0].0;
    let mut best = samples[0].clone();
    for (start_value, start) in samples.into_iter().take(8) {
        let refined = compass_search(scheme, start, start_value, 1.0 / density as f64);
        if refined.0 > best.0 {
            best = refined;
        }
    }
    LebesgueEstimate {
        value: best.0,
        lattice_value,
        maximizer: best.1,
        density,
        samples: count,
    }
}

fn compass_search(scheme: &InterpolationScheme, mut b: Vec<f64>, mut value: f64, mut step: f64) -> (f64, Vec<f64>) {
    let n = b.len();
    let mut evaluations = 0;
    while step > 1e-12 && evaluations < 20_000 {
        let mut improved = false;
        for i in 0..n {
            for j in 0..n {
                if i == j || b[j] < step {
                    continue;
                }
                let mut trial = b.clone();
                trial[i] += step;
                trial[j] -= step;
                evaluations += 1;
                let v = scheme.lebesgue_function(&trial);
                if v > value {
                    value = v;
                    b = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (value, b)
}
