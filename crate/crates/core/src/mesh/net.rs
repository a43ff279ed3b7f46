//! (epsilon, eta-bar)-net parameters of a point set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::grid::PointGrid;
use super::{delaunay, Mesh, MeshError};
use crate::geometry::{barycentric_to_point, min_containment_ball, Point};

#[derive(Clone, Debug)]
pub struct NetOptions {
    /// Monte Carlo samples for the covering-radius lower bound.
    pub samples: usize,
    pub seed: u64,
}

impl Default for NetOptions {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct NetParams {
    /// Certified covering radius upper bound: the largest min-containment
    /// radius over a triangulation of the hull.
    pub epsilon: f64,
    /// Sampled covering radius (a lower bound on the true value).
    pub epsilon_lower: f64,
    /// Exact minimum pairwise distance.
    pub eta: f64,
    pub eta_bar: f64,
    pub samples: usize,
    /// `epsilon_lower <= epsilon`, as it must be for a triangulation that
    /// covers the hull.
    pub bracketed: bool,
}

/// Uniform random point in simplex `k` of `mesh`.
pub fn sample_in_simplex(mesh: &Mesh, k: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut bary: Vec<f64> = (0..=mesh.dim())
        .map(|_| -(1.0 - rng.gen::<f64>()).ln())
        .collect();
    let s: f64 = bary.iter().sum();
    bary.iter_mut().for_each(|b| *b /= s);
    barycentric_to_point(&mesh.simplex_points(k), &bary)
}

/// Net parameters measured on an existing triangulation of the point set's
/// convex hull (the caller is responsible for the hull coverage).
pub fn measure_net_on_mesh(mesh: &Mesh, opts: &NetOptions) -> Result<NetParams, MeshError> {
    if mesh.num_simplices() == 0 {
        return Err(MeshError::Empty);
    }
    let grid = PointGrid::new(mesh.points());
    let eta = (0..mesh.num_points())
        .filter_map(|i| grid.nearest_excluding(&mesh.points()[i], &[i]))
        .map(|(_, d)| d)
        .fold(f64::INFINITY, f64::min);
    let mut epsilon: f64 = 0.0;
    for k in 0..mesh.num_simplices() {
        epsilon = epsilon.max(min_containment_ball(&mesh.simplex_points(k))?.radius);
    }

    let mut cumulative = Vec::with_capacity(mesh.num_simplices());
    let mut acc = 0.0;
    for k in 0..mesh.num_simplices() {
        acc += mesh.simplex_volume(k);
        cumulative.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut epsilon_lower: f64 = 0.0;
    for _ in 0..opts.samples {
        let t = rng.gen::<f64>() * acc;
        let k = cumulative.partition_point(|&c| c < t).min(cumulative.len() - 1);
        let x = sample_in_simplex(mesh, k, &mut rng);
        if let Some((_, d)) = grid.nearest_excluding(&x, &[]) {
            epsilon_lower = epsilon_lower.max(d);
        }
    }
    Ok(NetParams {
        epsilon,
        epsilon_lower,
        eta,
        eta_bar: eta / epsilon,
        samples: opts.samples,
        bracketed: epsilon_lower <= epsilon * (1.0 + 1e-12),
    })
}

/// Net parameters of a point set, triangulating its hull with [`delaunay`].
/// Coincident points are rejected (separation `eta = 0`).
pub fn measure_net(points: &[Point], opts: &NetOptions) -> Result<NetParams, MeshError> {
    let dim = points.first().map(Point::dim).unwrap_or(0);
    if points.len() < dim + 1 || points.is_empty() {
        return Err(MeshError::TooFewPoints {
            needed: dim + 1,
            found: points.len(),
        });
    }
    measure_net_on_mesh(&delaunay(points)?, opts)
}

/// A random point net in the unit cube: the `2^d` corners plus up to `count`
/// dart-thrown points kept at least `0.5 * count^(-1/d)` apart.
pub fn random_net(dim: usize, count: usize, seed: u64) -> Result<Vec<Point>, MeshError> {
    if dim == 0 {
        return Err(MeshError::InvalidParameter("dimension must be positive".into()));
    }
    let mut points = Vec::new();
    for mask in 0..(1usize << dim) {
        points.push(Point::new(
            (0..dim).map(|m| ((mask >> m) & 1) as f64).collect(),
        )?);
    }
    let separation = 0.5 * (count.max(1) as f64).powf(-1.0 / dim as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempts = 0;
    while points.len() < count + (1 << dim) && attempts < 200 * count.max(1) {
        attempts += 1;
        let x: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
        if points
            .iter()
            .all(|p| crate::geometry::dist(p, &x) >= separation)
        {
            points.push(Point::new(x)?);
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn square() -> Vec<Point> {
        [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
            .iter()
            .map(|&c| Point::from(c))
            .collect()
    }

    #[test]
    fn unit_square_net() {
        let n = measure_net(
            &square(),
            &NetOptions {
                samples: 20_000,
                seed: 1,
            },
        )
        .unwrap();
        assert_eq!(n.eta, 1.0);
        assert_relative_eq!(n.epsilon, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-6);
        assert!(n.bracketed);
        // the true covering radius is attained at the centre
        assert!(n.epsilon_lower > 0.68);
        assert!(n.eta <= 2.0 * n.epsilon);
    }

    #[test]
    fn coincident_points_are_rejected() {
        let mut p = square();
        p.push(Point::from([1.0, 0.0]));
        assert!(matches!(
            measure_net(&p, &NetOptions::default()),
            Err(MeshError::DuplicatePoint { .. })
        ));
    }

    #[test]
    fn random_net_respects_separation() {
        let pts = random_net(2, 40, 9).unwrap();
        assert!(pts.len() > 20);
        let n = measure_net(&pts, &NetOptions { samples: 5000, seed: 2 }).unwrap();
        assert!(n.eta >= 0.5 * 40f64.powf(-0.5) - 1e-15);
        assert!(n.bracketed);
    }
}
