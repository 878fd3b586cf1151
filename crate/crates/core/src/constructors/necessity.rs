use serde::{Deserialize, Serialize};

use crate::ansatz::Activation;
use crate::error::{Error, Result};
use crate::fockspace::{dimension, SpinConvention, WavefunctionTable};
use crate::fourier::{neuron_fourier, wht_forward};

/// Top-mode obstruction for an activation with ln φ a polynomial of
/// degree n < K.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NecessityResidual {
    pub degree: u32,
    /// ĝ^{1…1} of ln ψ₊.
    pub top_coefficient: f64,
    /// |ĝ^{1…1}|: no product of such neurons can reduce it.
    pub residual: f64,
    /// Largest |κ̂^{1…1}| seen over the probe neurons; zero up to rounding.
    pub probe_max: f64,
}

const PROBE_BIASES: [f64; 4] = [-1.0, 0.0, 0.5, 1.25];
const PROBE_WEIGHTS: [f64; 5] = [0.3, -0.7, 1.1, 0.45, -0.25];

/// The top Fourier coefficient of ln ψ, which stays untouched by every
/// neuron because the multilinear reduction of a degree-n polynomial in
/// b + ω·z has no monomial of degree above n.
pub fn necessity_residual(activation: Activation, psi: &WavefunctionTable) -> Result<NecessityResidual> {
    let k = psi.orbitals();
    let degree = activation
        .log_polynomial_degree()
        .ok_or_else(|| Error::Contract(format!("ln `{activation}` is not a polynomial")))?;
    if degree as usize >= k {
        return Err(Error::Contract(format!("degree {degree} must be below K = {k}")));
    }
    if let Some(i) = psi.amplitudes().iter().position(|&a| !(a > 0.0)) {
        return Err(Error::Domain(format!("amplitude {} at index {i} is not positive", psi.get(i))));
    }
    let ghat = wht_forward(&psi.map(f64::ln), SpinConvention::Appendix);
    let top = dimension(k) - 1;
    let support: Vec<usize> = (0..k).collect();
    let log = activation.log();
    let mut probe_max = 0.0f64;
    for (j, &b) in PROBE_BIASES.iter().enumerate() {
        let omega: Vec<f64> = (0..k).map(|p| PROBE_WEIGHTS[(p + j) % PROBE_WEIGHTS.len()]).collect();
        let table = neuron_fourier(&log, k, b, &support, &omega)?;
        probe_max = probe_max.max(table.get(top).abs());
    }
    let top_coefficient = ghat.get(top);
    Ok(NecessityResidual { degree, top_coefficient, residual: top_coefficient.abs(), probe_max })
}

/// ψ₊(z) ∝ exp(g z₁⋯z_K), normalized.
pub fn top_mode_target(k: usize, g: f64) -> Result<WavefunctionTable> {
    WavefunctionTable::from_fn(k, |n| {
        let parity = if n.electron_count() % 2 == 0 { 1.0 } else { -1.0 };
        (g * parity).exp()
    })?
    .normalized()
}
