use serde::{Deserialize, Serialize};

use crate::ansatz::{Activation, NpsParams, SignOrientation};
use crate::error::{Error, Result};
use crate::fockspace::{sign_census, OccupationVector, WavefunctionTable};

/// Replaces exact zeros by ε/√M₀ and scales the rest by √(1-ε²).
/// For a normalized input the output is normalized and differs from the
/// input by less than ε everywhere.
pub fn regularize_zeros(psi: &WavefunctionTable, eps: f64) -> Result<WavefunctionTable> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps_zero must lie in (0,1), got {eps}")));
    }
    let zeros = sign_census(psi).zeros;
    if zeros == 0 {
        return Ok(psi.clone());
    }
    let fill = eps / (zeros as f64).sqrt();
    let keep = (1.0 - eps * eps).sqrt();
    Ok(psi.map(|a| if a == 0.0 { fill } else { a * keep }))
}

/// Product of one neuron per negative amplitude; negative exactly on the
/// covered configurations and positive elsewhere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignFactor {
    #[serde(rename = "K")]
    pub k: usize,
    pub activation: Activation,
    pub theta: f64,
    pub covered: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

impl SignFactor {
    pub fn len(&self) -> usize {
        self.covered.len()
    }

    pub fn is_empty(&self) -> bool {
        self.covered.is_empty()
    }

    pub fn as_nps(&self) -> NpsParams {
        NpsParams {
            k: self.k,
            activation: self.activation,
            weights: self.weights.clone(),
            biases: self.biases.clone(),
            multiplicities: vec![1; self.biases.len()],
            log_scale: 0.0,
        }
    }

    pub fn eval(&self, n: &OccupationVector) -> Result<f64> {
        self.as_nps().eval(n)
    }
}

/// Hyperplane u·n + c isolating n_i: u = 2n_i - e, c = ½ - |n_i|.
/// The value is ½ at n_i and ½ - d ≤ -½ at Hamming distance d ≥ 1.
pub fn isolating_hyperplane(n: &OccupationVector) -> (Vec<f64>, f64) {
    let u = n.bits().into_iter().map(|b| 2.0 * f64::from(b) - 1.0).collect();
    (u, 0.5 - n.electron_count() as f64)
}

/// Builds s(n) with sign(s) = sign(Ψ̃) on every configuration.
///
/// All affine arguments stay within `margin_shrink · window` of the sign
/// change point x₀, where `window` is the activation's sign-consistent
/// half-width.
pub fn build_sign_factor(psi_tilde: &WavefunctionTable, activation: Activation, margin_shrink: f64) -> Result<SignFactor> {
    if !(margin_shrink > 0.0 && margin_shrink < 1.0) {
        return Err(Error::InvalidArgument(format!("margin_shrink must lie in (0,1), got {margin_shrink}")));
    }
    let sc = activation
        .sign_change()
        .ok_or_else(|| Error::Contract(format!("activation `{activation}` never changes sign")))?;
    let census = sign_census(psi_tilde);
    if census.zeros > 0 {
        return Err(Error::Contract(format!("{} zero amplitudes; regularize first", census.zeros)));
    }
    let k = psi_tilde.orbitals();
    // M = ½ and m = max_j |½ - d_j| = K - ½.
    let reach = 0.5f64.max(k as f64 - 0.5);
    let theta = margin_shrink * sc.window / reach;
    let orient = match sc.orientation {
        SignOrientation::PositiveBelow => 1.0,
        SignOrientation::NegativeBelow => -1.0,
    };
    let mut weights = Vec::with_capacity(census.negatives);
    let mut biases = Vec::with_capacity(census.negatives);
    for &i in &census.negative_indices {
        let (u, c) = isolating_hyperplane(&OccupationVector::new(k, i)?);
        weights.push(u.into_iter().map(|v| orient * theta * v).collect());
        biases.push(orient * theta * c + sc.point);
    }
    Ok(SignFactor { k, activation, theta, covered: census.negative_indices, weights, biases })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::tabulate;
    use crate::exec::Execution;
    use crate::fockspace::enumerate_configs;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn no_zeros_is_identity() {
        let psi = WavefunctionTable::new(1, vec![0.6, -0.8]).unwrap();
        assert_eq!(regularize_zeros(&psi, 0.1).unwrap(), psi);
    }

    #[test]
    fn single_zero_arithmetic() {
        let psi = WavefunctionTable::new(1, vec![1.0, 0.0]).unwrap();
        let t = regularize_zeros(&psi, 0.1).unwrap();
        assert_eq!(t.get(1), 0.1);
        assert!((t.get(0) - 0.99f64.sqrt()).abs() < 1e-16);
        assert!(t.is_normalized());
        assert!(regularize_zeros(&psi, 1.0).is_err());
    }

    #[test]
    fn hyperplane_margins() {
        for n in enumerate_configs(4).unwrap() {
            let (u, c) = isolating_hyperplane(&n);
            for m in enumerate_configs(4).unwrap() {
                let v: f64 = u.iter().zip(m.as_reals()).map(|(a, b)| a * b).sum::<f64>() + c;
                if m == n {
                    assert_eq!(v, 0.5);
                } else {
                    assert!(v <= -0.5);
                    assert_eq!(v, 0.5 - n.hamming(&m) as f64);
                }
            }
        }
    }

    #[test]
    fn all_positive_gives_empty_factor() {
        let psi = WavefunctionTable::new(2, vec![0.5; 4]).unwrap();
        let s = build_sign_factor(&psi, Activation::Cos, 0.5).unwrap();
        assert!(s.is_empty());
        let t = tabulate(&s.as_nps(), Execution::Sequential).unwrap();
        assert!(t.amplitudes().iter().all(|&a| a == 1.0));
    }

    #[test]
    fn cos_window_margins() {
        let psi = WavefunctionTable::new(3, vec![0.1, 0.2, -0.3, 0.4, 0.5, 0.1, 0.2, 0.3]).unwrap();
        let s = build_sign_factor(&psi, Activation::Cos, 0.5).unwrap();
        assert_eq!(s.covered, vec![2]);
        let p = s.as_nps();
        for n in enumerate_configs(3).unwrap() {
            let l = p.arguments(&n).unwrap()[0];
            if n.index() == 2 {
                assert!(l > FRAC_PI_2 && l < FRAC_PI_2 + std::f64::consts::PI);
                assert!(p.eval(&n).unwrap() < 0.0);
            } else {
                assert!(l < FRAC_PI_2 && l > FRAC_PI_2 - std::f64::consts::PI);
                assert!(p.eval(&n).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn tanh_reversed_orientation() {
        let psi = WavefunctionTable::new(2, vec![-0.5, 0.5, 0.5, -0.5]).unwrap();
        let s = build_sign_factor(&psi, Activation::Tanh, 0.5).unwrap();
        for n in enumerate_configs(2).unwrap() {
            assert_eq!(s.eval(&n).unwrap().signum(), psi.get(n.index()).signum());
        }
    }

    #[test]
    fn errors() {
        let psi = WavefunctionTable::new(1, vec![0.5, -0.5]).unwrap();
        assert!(matches!(build_sign_factor(&psi, Activation::Relu, 0.5), Err(Error::Contract(_))));
        assert!(matches!(build_sign_factor(&psi, Activation::Sigmoid, 0.5), Err(Error::Contract(_))));
        let zero = WavefunctionTable::new(1, vec![0.0, -1.0]).unwrap();
        assert!(matches!(build_sign_factor(&zero, Activation::Cos, 0.5), Err(Error::Contract(_))));
    }
}
