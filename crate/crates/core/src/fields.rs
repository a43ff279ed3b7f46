//! Test fields: scalar fields with analytic gradients, vector fields, and
//! fields defined piecewise on a mesh.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Debug, Error)]
#[error("bad field spec `{spec}`: {reason}")]
pub struct FieldSpecError {
    pub spec: String,
    pub reason: String,
}

/// A scalar field `v` together with its gradient.
#[derive(Clone)]
pub struct ScalarField {
    name: String,
    value: ScalarFn,
    gradient: VectorFn,
    /// Polynomial degree of every gradient component, when known.
    gradient_degree: Option<usize>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({})", self.name)
    }
}

/// A vector field `f: R^d -> R^d`.
#[derive(Clone)]
pub struct VectorField {
    name: String,
    eval: VectorFn,
    degree: Option<usize>,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorField({})", self.name)
    }
}

impl ScalarField {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        gradient_degree: Option<usize>,
    ) -> Self {
        Self {
            name: name.into(),
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            gradient_degree,
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new("zero", |_| 0.0, move |_| vec![0.0; dim], Some(0))
    }

    /// `v = x_1`.
    pub fn linear(dim: usize) -> Self {
        Self::new(
            "linear",
            |x| x[0],
            move |_| {
                let mut g = vec![0.0; dim];
                g[0] = 1.0;
                g
            },
            Some(0),
        )
    }

    /// `v = |x|^2 / 2`.
    pub fn quadratic() -> Self {
        Self::new(
            "quadratic",
            |x| 0.5 * x.iter().map(|a| a * a).sum::<f64>(),
            |x| x.to_vec(),
            Some(1),
        )
    }

    /// `v = sin(x_1) cos(x_2) ... cos(x_d)`.
    pub fn trig() -> Self {
        Self::new(
            "trig",
            |x| x[0].sin() * x[1..].iter().map(|a| a.cos()).product::<f64>(),
            |x| {
                (0..x.len())
                    .map(|i| {
                        x.iter()
                            .enumerate()
                            .map(|(m, &a)| match (m == 0, m == i) {
                                (true, true) => a.cos(),
                                (true, false) => a.sin(),
                                (false, true) => -a.sin(),
                                (false, false) => a.cos(),
                            })
                            .product()
                    })
                    .collect()
            },
            None,
        )
    }

    /// `v = exp(-|x|^2)`.
    pub fn radial() -> Self {
        Self::new(
            "radial",
            |x| (-x.iter().map(|a| a * a).sum::<f64>()).exp(),
            |x| {
                let e = (-x.iter().map(|a| a * a).sum::<f64>()).exp();
                x.iter().map(|a| -2.0 * a * e).collect()
            },
            None,
        )
    }

    /// `v = sum_t c_t x^{e_t}`.
    pub fn polynomial(terms: Vec<(f64, Vec<u32>)>) -> Self {
        let name = format!(
            "poly:{}",
            terms
                .iter()
                .map(|(c, e)| format!(
                    "{c}@{}",
                    e.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
                ))
                .collect::<Vec<_>>()
                .join(";")
        );
        let degree = terms
            .iter()
            .filter(|(c, _)| *c != 0.0)
            .map(|(_, e)| e.iter().sum::<u32>() as usize)
            .max()
            .unwrap_or(0);
        let value_terms = terms.clone();
        Self::new(
            name,
            move |x| {
                value_terms
                    .iter()
                    .map(|(c, e)| c * x.iter().zip(e).map(|(a, &p)| a.powi(p as i32)).product::<f64>())
                    .sum()
            },
            move |x| {
                (0..x.len())
                    .map(|i| {
                        terms
                            .iter()
                            .filter(|(_, e)| e[i] > 0)
                            .map(|(c, e)| {
                                c * e[i] as f64
                                    * x.iter()
                                        .zip(e)
                                        .enumerate()
                                        .map(|(m, (a, &p))| a.powi(p as i32 - (m == i) as i32))
                                        .product::<f64>()
                            })
                            .sum()
                    })
                    .collect()
            },
            Some(degree.saturating_sub(1)),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.gradient)(x)
    }

    pub fn gradient_degree(&self) -> Option<usize> {
        self.gradient_degree
    }

    /// `grad v` as a vector field.
    pub fn gradient_field(&self) -> VectorField {
        VectorField {
            name: format!("grad {}", self.name),
            eval: self.gradient.clone(),
            degree: self.gradient_degree,
        }
    }
}

impl VectorField {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        degree: Option<usize>,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            degree,
        }
    }

    pub fn constant(c: Vec<f64>) -> Self {
        let name = format!(
            "vec-const:{}",
            c.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
        );
        Self::new(name, move |_| c.clone(), Some(0))
    }

    /// Component `i` is `sin(x_{i+1 mod d})` for even `i` and `cos(x_{i-1})`
    /// for odd `i`; in the plane this is `(sin y, cos x)`.
    pub fn trig() -> Self {
        Self::new(
            "vec-trig",
            |x| {
                let d = x.len();
                (0..d)
                    .map(|i| if i % 2 == 0 { x[(i + 1) % d].sin() } else { x[i - 1].cos() })
                    .collect()
            },
            None,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.eval)(x)
    }

    pub fn degree(&self) -> Option<usize> {
        self.degree
    }
}

/// A field named on the command line: either a scalar `v` (its gradient is
/// what gets interpolated) or a vector field `f`.
#[derive(Clone, Debug)]
pub enum FieldSpec {
    Scalar(ScalarField),
    Vector(VectorField),
}

impl FieldSpec {
    /// Parses `zero`, `linear`, `quadratic`, `trig`, `radial`,
    /// `poly:C@E1,..,Ed;...`, `vec-trig` or `vec-const:C1,..,Cd`.
    pub fn parse(spec: &str, dim: usize) -> Result<Self, FieldSpecError> {
        let err = |reason: String| FieldSpecError {
            spec: spec.to_string(),
            reason,
        };
        let (kind, args) = spec.split_once(':').unwrap_or((spec, ""));
        match kind {
            "zero" => Ok(Self::Scalar(ScalarField::zero(dim))),
            "linear" => Ok(Self::Scalar(ScalarField::linear(dim))),
            "quadratic" => Ok(Self::Scalar(ScalarField::quadratic())),
            "trig" => Ok(Self::Scalar(ScalarField::trig())),
            "radial" => Ok(Self::Scalar(ScalarField::radial())),
            "vec-trig" => Ok(Self::Vector(VectorField::trig())),
            "poly" => {
                let mut terms = Vec::new();
                for term in args.split(';').filter(|t| !t.trim().is_empty()) {
                    let (c, e) = term
                        .split_once('@')
                        .ok_or_else(|| err(format!("term `{term}` lacks `@`")))?;
                    let c: f64 = c.trim().parse().map_err(|_| err(format!("bad coefficient `{c}`")))?;
                    let e: Vec<u32> = e
                        .split(',')
                        .map(|p| p.trim().parse())
                        .collect::<Result<_, _>>()
                        .map_err(|_| err(format!("bad exponents `{e}`")))?;
                    if e.len() != dim {
                        return Err(err(format!("term `{term}` needs {dim} exponents")));
                    }
                    terms.push((c, e));
                }
                if terms.is_empty() {
                    return Err(err("no terms".into()));
                }
                Ok(Self::Scalar(ScalarField::polynomial(terms)))
            }
            "vec-const" => {
                let c: Vec<f64> = args
                    .split(',')
                    .map(|p| p.trim().parse())
                    .collect::<Result<_, _>>()
                    .map_err(|_| err("components must be reals".into()))?;
                if c.len() != dim {
                    return Err(err(format!("expected {dim} components")));
                }
                Ok(Self::Vector(VectorField::constant(c)))
            }
            _ => Err(err("unknown field".into())),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Self::Scalar(s) => s.name(),
            Self::Vector(v) => v.name(),
        }
    }

    /// The field whose interpolation is studied: `grad v` or `f`.
    pub fn target(&self) -> VectorField {
        match self {
            Self::Scalar(s) => s.gradient_field(),
            Self::Vector(v) => v.clone(),
        }
    }
}

/// A vector field that may depend on the element it is evaluated in
/// (interpolants and interpolation errors are only piecewise smooth).
pub trait PiecewiseField: Sync {
    /// Value at the point `x` with barycentric coordinates `bary` in
    /// simplex `k`.
    fn eval_in(&self, k: usize, bary: &[f64], x: &[f64]) -> Vec<f64>;
}

impl PiecewiseField for VectorField {
    fn eval_in(&self, _k: usize, _bary: &[f64], x: &[f64]) -> Vec<f64> {
        self.eval(x)
    }
}

/// Adapts a closure on `R^d` to [`PiecewiseField`].
pub struct Global<F>(pub F);

impl<F: Fn(&[f64]) -> Vec<f64> + Sync> PiecewiseField for Global<F> {
    fn eval_in(&self, _k: usize, _bary: &[f64], x: &[f64]) -> Vec<f64> {
        (self.0)(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fd_gradient(f: &ScalarField, x: &[f64]) -> Vec<f64> {
        let h = 1e-6;
        (0..x.len())
            .map(|i| {
                let mut a = x.to_vec();
                let mut b = x.to_vec();
                a[i] += h;
                b[i] -= h;
                (f.value(&a) - f.value(&b)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn gradients_match_finite_differences() {
        let x = [0.3, -0.7, 1.1];
        for spec in ["linear", "quadratic", "trig", "radial", "poly:2@1,2,0;-1@0,0,3;0.5@1,1,1"] {
            let FieldSpec::Scalar(f) = FieldSpec::parse(spec, 3).unwrap() else {
                panic!("{spec} should be scalar")
            };
            for (a, b) in f.gradient(&x).iter().zip(fd_gradient(&f, &x)) {
                assert_relative_eq!(*a, b, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn planar_vector_trig() {
        let f = VectorField::trig();
        let x = [0.4, 1.3];
        assert_eq!(f.eval(&x), vec![1.3f64.sin(), 0.4f64.cos()]);
    }

    #[test]
    fn polynomial_degree_is_tracked() {
        let FieldSpec::Scalar(f) = FieldSpec::parse("poly:1@2,1", 2).unwrap() else { panic!() };
        assert_eq!(f.gradient_degree(), Some(2));
        assert!(FieldSpec::parse("poly:1@2", 2).is_err());
        assert!(FieldSpec::parse("vec-const:1", 2).is_err());
        assert!(FieldSpec::parse("wobble", 2).is_err());
    }
}
