//! Smallest enclosing balls.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{dist, dot, sub, GeometryError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    fn contains(&self, p: &[f64]) -> bool {
        dist(&self.center, p) <= self.radius * (1.0 + 1e-12) + 1e-15
    }
}

/// The smallest ball having every point of `support` on its boundary, taken
/// within the affine hull of `support`. `None` when the support is affinely
/// dependent.
fn circumball(support: &[&[f64]]) -> Option<Ball> {
    let first = support.first()?;
    let m = support.len() - 1;
    if m == 0 {
        return Some(Ball {
            center: first.to_vec(),
            radius: 0.0,
        });
    }
    let edges: Vec<Vec<f64>> = support[1..].iter().map(|p| sub(p, first)).collect();
    let gram = DMatrix::from_fn(m, m, |i, j| dot(&edges[i], &edges[j]));
    let rhs = DVector::from_fn(m, |i, _| 0.5 * dot(&edges[i], &edges[i]));
    // Relative pivot check: the Gram determinant vanishes for dependent support.
    let scale: f64 = (0..m).map(|i| gram[(i, i)]).product();
    let det = gram.determinant();
    if !(det.abs() > 1e-20 * scale) {
        return None;
    }
    let coef = gram.lu().solve(&rhs)?;
    let mut center = first.to_vec();
    for (e, c) in edges.iter().zip(coef.iter()) {
        for (x, ei) in center.iter_mut().zip(e) {
            *x += c * ei;
        }
    }
    let radius = support.iter().map(|p| dist(p, &center)).fold(0.0, f64::max);
    Some(Ball { center, radius })
}

/// Exhaustive search over every affinely independent subset: the minimum
/// radius circumball that contains all points. Exponential in the input
/// size; intended for at most `d + 2` points and as a test oracle.
pub fn brute_force_ball<P: AsRef<[f64]>>(points: &[P]) -> Result<Ball, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::Empty);
    }
    let pts: Vec<&[f64]> = points.iter().map(|p| p.as_ref()).collect();
    let n = pts.len();
    assert!(n < 24, "brute-force enclosing ball limited to small inputs");
    let mut best: Option<Ball> = None;
    for mask in 1u32..(1u32 << n) {
        let support: Vec<&[f64]> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| pts[i])
            .collect();
        if support.len() > pts[0].len() + 1 {
            continue;
        }
        if let Some(b) = circumball(&support) {
            if best.as_ref().is_some_and(|cur| cur.radius <= b.radius) {
                continue;
            }
            if pts.iter().all(|p| b.contains(p)) {
                best = Some(b);
            }
        }
    }
    Ok(best.expect("the ball of the farthest pair or full hull always qualifies"))
}

/// `Ok(None)` is the empty ball; `Err(())` signals an affinely dependent
/// support set.
fn welzl(
    pts: &[&[f64]],
    n: usize,
    support: &mut Vec<usize>,
    dim: usize,
) -> Result<Option<Ball>, ()> {
    let mut ball = if support.is_empty() {
        None
    } else {
        let supp: Vec<&[f64]> = support.iter().map(|&i| pts[i]).collect();
        Some(circumball(&supp).ok_or(())?)
    };
    if support.len() == dim + 1 {
        return Ok(ball);
    }
    for i in 0..n {
        if !ball.as_ref().is_some_and(|b| b.contains(pts[i])) {
            support.push(i);
            let next = welzl(pts, i, support, dim);
            support.pop();
            ball = next?;
        }
    }
    Ok(ball)
}

/// Smallest ball enclosing all points (the min-containment ball for the
/// vertices of a simplex).
///
/// Up to `d + 2` points are handled by exhaustive subset search; larger sets
/// use Welzl's randomized incremental algorithm with a fixed shuffle seed,
/// falling back to exhaustive search if a degenerate support is met.
pub fn min_containment_ball<P: AsRef<[f64]>>(points: &[P]) -> Result<Ball, GeometryError> {
    let first = points.first().ok_or(GeometryError::Empty)?;
    let dim = first.as_ref().len();
    for p in points {
        if p.as_ref().len() != dim {
            return Err(GeometryError::DimensionMismatch {
                expected: dim,
                found: p.as_ref().len(),
            });
        }
    }
    if points.len() <= dim + 2 {
        return brute_force_ball(points);
    }
    let mut pts: Vec<&[f64]> = points.iter().map(|p| p.as_ref()).collect();
    pts.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5eed));
    let mut support = Vec::with_capacity(dim + 1);
    match welzl(&pts, pts.len(), &mut support, dim) {
        Ok(Some(b)) => Ok(b),
        Ok(None) => unreachable!("non-empty input yields a ball"),
        Err(()) if points.len() < 24 => brute_force_ball(points),
        Err(()) => Err(GeometryError::Degenerate {
            volume: 0.0,
            diameter: f64::NAN,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn right_triangle_ball_spans_hypotenuse() {
        let b = min_containment_ball(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_relative_eq!(b.radius, 0.5f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(b.center[0], 0.5, epsilon = 1e-14);
        assert_relative_eq!(b.center[1], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn obtuse_triangle_ball() {
        let b = min_containment_ball(&[[0.0, 0.0], [1.0, 0.0], [0.5, 0.1]]).unwrap();
        assert_relative_eq!(b.radius, 0.5, max_relative = 1e-14);
        assert_relative_eq!(b.center[0], 0.5, epsilon = 1e-14);
        assert_relative_eq!(b.center[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn single_point_and_empty() {
        let b = min_containment_ball(&[[3.0, -1.0]]).unwrap();
        assert_eq!(b.radius, 0.0);
        assert_eq!(b.center, vec![3.0, -1.0]);
        let none: Vec<[f64; 2]> = vec![];
        assert_eq!(min_containment_ball(&none), Err(GeometryError::Empty));
    }

    proptest! {
        #[test]
        fn welzl_matches_brute_force(
            coords in prop::collection::vec(-1.0f64..1.0, 3 * 9)
        ) {
            let pts: Vec<Vec<f64>> = coords.chunks(3).map(|c| c.to_vec()).collect();
            let fast = min_containment_ball(&pts).unwrap();
            let slow = brute_force_ball(&pts).unwrap();
            prop_assert!((fast.radius - slow.radius).abs() <= 1e-9 * slow.radius.max(1e-12));
            for p in &pts {
                prop_assert!(dist(p, &fast.center) <= fast.radius + 1e-10);
            }
        }
    }
}
