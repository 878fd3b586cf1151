use super::fnn::check_theta;
use crate::ansatz::{Activation, NpsParams};
use crate::error::{Error, Result};
use crate::fockspace::{check_orbitals, dimension, OccupationVector, WavefunctionTable};

/// Half-width of the bisection bracket for φ(x₀) = Ψ(n_i).
pub const PREIMAGE_BRACKET: f64 = 50.0;
/// Bracket width at which bisection stops.
pub const PREIMAGE_TOLERANCE: f64 = 1e-12;
/// Largest |amplitude| kept after rescaling a table that reaches ±1.
pub const SATURATING_PRESCALE: f64 = 0.9;

/// u = e - 2n_i. Then u·(n_j - n_i) is the Hamming distance between n_j
/// and n_i, so it is at least 1 for every j ≠ i.
pub fn separating_vector(index: usize, k: usize) -> Result<Vec<f64>> {
    let n = OccupationVector::new(k, index)?;
    Ok(n.bits().into_iter().map(|b| 1.0 - 2.0 * f64::from(b)).collect())
}

/// u·(n_j - n_i) for every j ≠ i, in index order.
pub fn separating_margins(index: usize, k: usize) -> Result<Vec<f64>> {
    check_orbitals(k)?;
    let u = separating_vector(index, k)?;
    let ni = OccupationVector::new(k, index)?.as_reals();
    Ok((0..dimension(k))
        .filter(|&j| j != index)
        .map(|j| {
            let nj = OccupationVector::new(k, j).expect("index below 2^K").as_reals();
            u.iter().zip(nj.iter().zip(&ni)).map(|(u, (a, b))| u * (a - b)).sum()
        })
        .collect())
}

/// Solves φ(x) = target on [-B, B] by bisection; φ must be increasing.
pub fn solve_preimage(activation: Activation, target: f64) -> Option<f64> {
    let (mut lo, mut hi) = (-PREIMAGE_BRACKET, PREIMAGE_BRACKET);
    if !(activation.eval(lo) < target && target < activation.eval(hi)) {
        return None;
    }
    while hi - lo > PREIMAGE_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let v = activation.eval(mid);
        if v == target {
            return Some(mid);
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Product of 2^K neurons, each reproducing one amplitude at its own
/// configuration and tending to 1 elsewhere as θ grows.
pub fn build_nps_saturating(psi: &WavefunctionTable, activation: Activation, theta: f64) -> Result<NpsParams> {
    check_theta(theta)?;
    if !activation.saturates_to_one() {
        return Err(Error::Contract(format!("activation `{activation}` must lie in (-1,1) and tend to 1 at +inf")));
    }
    if !activation.is_strictly_increasing() {
        return Err(Error::Contract(format!("activation `{activation}` must be monotone for bisection")));
    }
    let k = psi.orbitals();
    let peak = psi.max_abs();
    let scale = if peak >= 1.0 { SATURATING_PRESCALE / peak } else { 1.0 };
    let mut params = NpsParams::empty(k, activation, -scale.ln());
    for i in 0..dimension(k) {
        let amplitude = psi.get(i) * scale;
        let x0 = solve_preimage(activation, amplitude).ok_or(Error::Range { index: i, amplitude })?;
        let n = OccupationVector::new(k, i)?.as_reals();
        let w: Vec<f64> = separating_vector(i, k)?.into_iter().map(|u| theta * u).collect();
        let b = x0 - w.iter().zip(&n).map(|(a, b)| a * b).sum::<f64>();
        params.push_neuron(w, b, 1);
    }
    Ok(params)
}
