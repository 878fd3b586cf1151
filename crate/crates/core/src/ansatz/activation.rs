//! Built-in activation functions, their derivatives and the metadata the
//! builders check before relying on a given property.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::ScalarFunction;

/// Highest order for which log-derivatives use the exact recurrence;
/// beyond it one central difference per extra order is applied.
pub const MAX_LOG_DERIVATIVE_ORDER: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Activation {
    Sigmoid,
    Tanh,
    Cos,
    Exp,
    Relu,
    /// φ(x) = exp(P(x)) with P(x) = Σ_{i=1}^{degree} x^i / i!.
    ExpPoly { degree: u32 },
}

/// Which side of the sign-change point carries positive values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignOrientation {
    /// φ > 0 just below the point and φ < 0 just above it.
    PositiveBelow,
    /// φ < 0 just below the point and φ > 0 just above it.
    NegativeBelow,
}

/// A point x₀ where φ changes sign, with the half-width of an interval on
/// which the sign on each side is constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignChange {
    pub point: f64,
    pub orientation: SignOrientation,
    pub window: f64,
}

impl Activation {
    pub const BUILTIN: [Activation; 5] =
        [Activation::Sigmoid, Activation::Tanh, Activation::Cos, Activation::Exp, Activation::Relu];

    pub fn name(&self) -> String {
        match self {
            Activation::Sigmoid => "sigmoid".into(),
            Activation::Tanh => "tanh".into(),
            Activation::Cos => "cos".into(),
            Activation::Exp => "exp".into(),
            Activation::Relu => "relu".into(),
            Activation::ExpPoly { degree } => format!("exp-poly:{degree}"),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Activation::Sigmoid => sigmoid(x),
            Activation::Tanh => x.tanh(),
            Activation::Cos => x.cos(),
            Activation::Exp => x.exp(),
            Activation::Relu => x.max(0.0),
            Activation::ExpPoly { degree } => exp_poly_exponent(*degree, x).exp(),
        }
    }

    /// κ(x) = ln φ(x); NaN where φ(x) ≤ 0.
    pub fn log_eval(&self, x: f64) -> f64 {
        match self {
            // ln σ(x) = -ln(1 + e^{-x}), evaluated without overflow.
            Activation::Sigmoid => -softplus(-x),
            Activation::Exp => x,
            Activation::ExpPoly { degree } => exp_poly_exponent(*degree, x),
            _ => {
                let v = self.eval(x);
                if v > 0.0 {
                    v.ln()
                } else {
                    f64::NAN
                }
            }
        }
    }

    /// Exact derivatives of φ of any order, where they exist.
    pub fn derivative(&self, order: usize, x: f64) -> Option<f64> {
        if order == 0 {
            return Some(self.eval(x));
        }
        match self {
            Activation::Sigmoid => {
                let s = sigmoid(x);
                Some(logistic_chain(order, &[0.0, 1.0], |p| p.derivative().mul(&[0.0, 1.0, -1.0])).eval(s))
            }
            Activation::Tanh => {
                let t = x.tanh();
                Some(logistic_chain(order, &[0.0, 1.0], |p| p.derivative().mul(&[1.0, 0.0, -1.0])).eval(t))
            }
            Activation::Cos => Some(match order % 4 {
                0 => x.cos(),
                1 => -x.sin(),
                2 => -x.cos(),
                _ => x.sin(),
            }),
            Activation::Exp => Some(x.exp()),
            Activation::Relu => match (order, x) {
                (_, 0.0) => None,
                (1, x) => Some(if x > 0.0 { 1.0 } else { 0.0 }),
                _ => Some(0.0),
            },
            Activation::ExpPoly { degree } => {
                // φ = e^P, φ^{(m+1)} = Σ_k C(m,k) P^{(k+1)} φ^{(m-k)}.
                let poly = exp_poly_coefficients(*degree);
                let pd: Vec<f64> = (1..=order).map(|j| poly.nth_derivative(j).eval(x)).collect();
                let mut phi = vec![exp_poly_exponent(*degree, x).exp()];
                for m in 0..order {
                    let next = (0..=m).map(|k| binomial(m, k) * pd[k] * phi[m - k]).sum();
                    phi.push(next);
                }
                Some(phi[order])
            }
        }
    }

    /// Derivatives of κ = ln φ. Requires φ(x) > 0.
    pub fn log_derivative(&self, order: usize, x: f64) -> Option<f64> {
        if order == 0 {
            let v = self.log_eval(x);
            return v.is_finite().then_some(v);
        }
        match self {
            Activation::Exp => Some(if order == 1 { 1.0 } else { 0.0 }),
            Activation::ExpPoly { degree } => Some(exp_poly_coefficients(*degree).nth_derivative(order).eval(x)),
            _ if order > MAX_LOG_DERIVATIVE_ORDER => {
                let h = 1e-3 * x.abs().max(1.0);
                let hi = self.log_derivative(order - 1, x + h)?;
                let lo = self.log_derivative(order - 1, x - h)?;
                Some((hi - lo) / (2.0 * h))
            }
            _ => {
                // From φ = e^κ: φ^{(m+1)} = Σ_{k=0}^{m} C(m,k) κ^{(k+1)} φ^{(m-k)}.
                let phi: Vec<f64> = (0..=order).map(|j| self.derivative(j, x)).collect::<Option<_>>()?;
                if !(phi[0] > 0.0) {
                    return None;
                }
                let mut kappa = vec![0.0; order + 1];
                for m in 0..order {
                    let known: f64 = (0..m).map(|k| binomial(m, k) * kappa[k + 1] * phi[m - k]).sum();
                    kappa[m + 1] = (phi[m + 1] - known) / phi[0];
                }
                Some(kappa[order])
            }
        }
    }

    /// Limit of φ as x → +∞, when finite.
    pub fn limit_pos_inf(&self) -> Option<f64> {
        match self {
            Activation::Sigmoid | Activation::Tanh => Some(1.0),
            Activation::ExpPoly { degree: 0 } => Some(1.0),
            _ => None,
        }
    }

    /// Limit of φ as x → -∞, when finite.
    pub fn limit_neg_inf(&self) -> Option<f64> {
        match self {
            Activation::Sigmoid | Activation::Exp => Some(0.0),
            Activation::Tanh => Some(-1.0),
            Activation::Relu => Some(0.0),
            Activation::ExpPoly { degree: 0 } => Some(1.0),
            _ => None,
        }
    }

    /// φ ∈ (-1, 1) everywhere and φ → 1 at +∞.
    pub fn saturates_to_one(&self) -> bool {
        matches!(self, Activation::Sigmoid | Activation::Tanh)
    }

    /// σ → 0 at -∞ and σ → 1 at +∞.
    pub fn is_step_like(&self) -> bool {
        self.limit_neg_inf() == Some(0.0) && self.limit_pos_inf() == Some(1.0)
    }

    /// Strictly increasing on the whole real line.
    pub fn is_strictly_increasing(&self) -> bool {
        match self {
            Activation::Sigmoid | Activation::Tanh | Activation::Exp => true,
            Activation::ExpPoly { degree } => *degree == 1,
            _ => false,
        }
    }

    pub fn sign_change(&self) -> Option<SignChange> {
        match self {
            Activation::Cos => {
                Some(SignChange { point: FRAC_PI_2, orientation: SignOrientation::PositiveBelow, window: PI })
            }
            // tanh keeps its sign on each half-line; any window works.
            Activation::Tanh => Some(SignChange { point: 0.0, orientation: SignOrientation::NegativeBelow, window: 1.0 }),
            _ => None,
        }
    }

    /// Open interval containing the reference point of the positive branch
    /// of φ, on which κ = ln φ is analytic.
    pub fn positive_domain(&self) -> (f64, f64) {
        match self {
            Activation::Cos => (-FRAC_PI_2, FRAC_PI_2),
            Activation::Tanh | Activation::Relu => (0.0, f64::INFINITY),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Degree of κ = ln φ when κ is a polynomial.
    pub fn log_polynomial_degree(&self) -> Option<u32> {
        match self {
            Activation::Exp => Some(1),
            Activation::ExpPoly { degree } => Some(*degree),
            _ => None,
        }
    }

    /// The logarithm κ = ln φ as a function in its own right.
    pub fn log(&self) -> LogActivation<'_> {
        LogActivation(self)
    }
}

impl ScalarFunction for Activation {
    fn name(&self) -> String {
        Activation::name(self)
    }
    fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }
    fn derivative(&self, order: usize, x: f64) -> Option<f64> {
        Activation::derivative(self, order, x)
    }
}

/// κ = ln φ for an activation φ.
#[derive(Clone, Copy, Debug)]
pub struct LogActivation<'a>(pub &'a Activation);

impl ScalarFunction for LogActivation<'_> {
    fn name(&self) -> String {
        format!("ln∘{}", self.0.name())
    }
    fn value(&self, x: f64) -> f64 {
        self.0.log_eval(x)
    }
    fn derivative(&self, order: usize, x: f64) -> Option<f64> {
        self.0.log_derivative(order, x)
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Ok(match lower.as_str() {
            "sigmoid" => Activation::Sigmoid,
            "tanh" => Activation::Tanh,
            "cos" => Activation::Cos,
            "exp" => Activation::Exp,
            "relu" => Activation::Relu,
            other => match other.strip_prefix("exp-poly:") {
                Some(d) => Activation::ExpPoly {
                    degree: d.parse().map_err(|_| Error::InvalidArgument(format!("bad exp-poly degree {d:?}")))?,
                },
                None => return Err(Error::InvalidArgument(format!("unknown activation {s:?}"))),
            },
        })
    }
}

impl TryFrom<String> for Activation {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Activation> for String {
    fn from(a: Activation) -> Self {
        a.name()
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^x) without overflow.
#[inline]
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn exp_poly_exponent(degree: u32, x: f64) -> f64 {
    exp_poly_coefficients(degree).eval(x)
}

fn exp_poly_coefficients(degree: u32) -> Poly {
    let mut c = vec![0.0];
    let mut fact = 1.0;
    for i in 1..=degree {
        fact *= f64::from(i);
        c.push(1.0 / fact);
    }
    Poly(c)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Dense polynomial, coefficients in increasing degree.
#[derive(Clone, Debug)]
struct Poly(Vec<f64>);

impl Poly {
    fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly(vec![0.0]);
        }
        Poly(self.0.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect())
    }

    fn nth_derivative(&self, n: usize) -> Poly {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    fn mul(&self, other: &[f64]) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }
}

/// Repeatedly applies d/dx to P(s) where s' is itself a polynomial in s.
fn logistic_chain(order: usize, start: &[f64], step: impl Fn(&Poly) -> Poly) -> Poly {
    (0..order).fold(Poly(start.to_vec()), |p, _| step(&p))
}
