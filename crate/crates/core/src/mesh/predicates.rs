//! Orientation and insphere predicates with an exact fallback.
//!
//! Each predicate first evaluates its determinant in floating point and
//! accepts the sign when the magnitude clears a conservative error bound
//! (a fixed fraction of the Hadamard bound of the matrix). Otherwise the
//! coordinates are converted exactly to integers on a common binary scale
//! and the determinant is recomputed with fraction-free elimination.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Float, Signed, Zero};

/// Relative filter threshold against the Hadamard bound. Floating-point
/// elimination error for the matrix sizes used here (n <= 9) stays several
/// orders of magnitude below it.
const FILTER: f64 = 1e-9;

fn f64_det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for row in col + 1..n {
            let f = a[row][col] / p;
            for k in col + 1..n {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    det
}

fn hadamard(a: &[Vec<f64>]) -> f64 {
    a.iter()
        .map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt())
        .product()
}

/// Fraction-free (Bareiss) determinant sign.
fn bareiss_sign(mut a: Vec<Vec<BigInt>>) -> Ordering {
    let n = a.len();
    let mut negate = false;
    let mut prev = BigInt::from(1);
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    negate = !negate;
                }
                None => return Ordering::Equal,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let s = if a[n - 1][n - 1].is_positive() {
        Ordering::Greater
    } else if a[n - 1][n - 1].is_negative() {
        Ordering::Less
    } else {
        Ordering::Equal
    };
    if negate {
        s.reverse()
    } else {
        s
    }
}

/// Exact integer images of a set of floats on a common binary scale:
/// `x_i = n_i * 2^e` for the returned `n_i` and a shared `e`.
fn to_integers(values: &[f64]) -> Vec<BigInt> {
    let decoded: Vec<(u64, i16, i8)> = values.iter().map(|v| v.integer_decode()).collect();
    let min_exp = decoded
        .iter()
        .filter(|d| d.0 != 0)
        .map(|d| d.1)
        .min()
        .unwrap_or(0);
    decoded
        .iter()
        .map(|&(m, e, s)| {
            let v = BigInt::from(m) << ((e - min_exp) as usize);
            if s < 0 {
                -v
            } else {
                v
            }
        })
        .collect()
}

/// Sign of `det([p_1 - p_0; ...; p_d - p_0])`.
pub fn orient<P: AsRef<[f64]>>(points: &[P]) -> Ordering {
    let d = points.len() - 1;
    let p0 = points[0].as_ref();
    let rows: Vec<Vec<f64>> = points[1..]
        .iter()
        .map(|p| p.as_ref().iter().zip(p0).map(|(a, b)| a - b).collect())
        .collect();
    let det = f64_det(rows.clone());
    if det.abs() > FILTER * hadamard(&rows) {
        return det.partial_cmp(&0.0).unwrap();
    }
    let flat: Vec<f64> = points.iter().flat_map(|p| p.as_ref().iter().copied()).collect();
    let ints = to_integers(&flat);
    let base = &ints[..d];
    let m: Vec<Vec<BigInt>> = (1..=d)
        .map(|i| (0..d).map(|k| &ints[i * d + k] - &base[k]).collect())
        .collect();
    bareiss_sign(m)
}

/// Raw insphere determinant sign: rows `(p_i - q, |p_i - q|^2)`.
fn insphere_det<P: AsRef<[f64]>>(simplex: &[P], q: &[f64]) -> Ordering {
    let d = q.len();
    let rows: Vec<Vec<f64>> = simplex
        .iter()
        .map(|p| {
            let mut r: Vec<f64> = p.as_ref().iter().zip(q).map(|(a, b)| a - b).collect();
            let sq = r.iter().map(|x| x * x).sum();
            r.push(sq);
            r
        })
        .collect();
    let det = f64_det(rows.clone());
    if det.abs() > FILTER * hadamard(&rows) {
        return det.partial_cmp(&0.0).unwrap();
    }
    let mut flat: Vec<f64> = simplex
        .iter()
        .flat_map(|p| p.as_ref().iter().copied())
        .collect();
    flat.extend_from_slice(q);
    let ints = to_integers(&flat);
    let qi = &ints[(d + 1) * d..];
    let m: Vec<Vec<BigInt>> = (0..=d)
        .map(|i| {
            let mut r: Vec<BigInt> = (0..d).map(|k| &ints[i * d + k] - &qi[k]).collect();
            let sq = r.iter().fold(BigInt::zero(), |acc, x| acc + x * x);
            r.push(sq);
            r
        })
        .collect();
    bareiss_sign(m)
}

/// Position of `q` relative to the circumsphere of a nondegenerate simplex:
/// `Greater` strictly inside, `Equal` on the sphere, `Less` strictly outside.
pub fn insphere<P: AsRef<[f64]>>(simplex: &[P], q: &[f64]) -> Ordering {
    let o = orient(simplex);
    debug_assert!(o != Ordering::Equal, "insphere on a flat simplex");
    let s = insphere_det(simplex, q);
    // For a positively oriented simplex the raw determinant is positive
    // inside when d is even and negative inside when d is odd.
    let d = q.len();
    let s = if d % 2 == 1 { s.reverse() } else { s };
    if o == Ordering::Less {
        s.reverse()
    } else {
        s
    }
}
