use log::warn;

use super::fnn::{indicator_layer, require_step_like};
use crate::ansatz::{Activation, NnbfParams};
use crate::error::{Error, Result};
use crate::fockspace::{enumerate_configs, WavefunctionTable};

/// The electron count shared by every nonzero amplitude.
pub fn infer_electrons(psi: &WavefunctionTable) -> Result<usize> {
    let mut counts = enumerate_configs(psi.orbitals())?
        .into_iter()
        .filter(|n| psi.get(n.index()) != 0.0)
        .map(|n| n.electron_count());
    let first = counts.next().ok_or_else(|| Error::InvalidArgument("target is identically zero".into()))?;
    if counts.all(|c| c == first) && first > 0 {
        Ok(first)
    } else {
        Err(Error::InvalidArgument("target spans several electron sectors; pass the electron count".into()))
    }
}

/// Backflow state reusing the FNN indicator layer. Hidden unit i stores
/// the orbital block of configuration n_i: c_{p_1 1,i} = Ψ(n_i),
/// c_{p_m m,i} = 1 for m ≥ 2, zero elsewhere, so the determinant at n_i
/// tends to Ψ(n_i).
pub fn build_nnbf_exact(
    psi: &WavefunctionTable,
    electrons: usize,
    activation: Activation,
    theta: f64,
) -> Result<NnbfParams> {
    let k = psi.orbitals();
    if !(1..=k).contains(&electrons) {
        return Err(Error::InvalidArgument(format!("electron count {electrons} outside 1..={k}")));
    }
    require_step_like(activation)?;
    let (weights, biases) = indicator_layer(k, theta)?;
    let hidden = biases.len();
    let mut coeffs = vec![vec![vec![0.0; hidden]; electrons]; k];
    let mut ignored = 0usize;
    for n in enumerate_configs(k)? {
        let i = n.index();
        if n.electron_count() != electrons {
            if psi.get(i) != 0.0 {
                ignored += 1;
            }
            continue;
        }
        for (m, &p) in n.occupied().iter().enumerate() {
            coeffs[p][m][i] = if m == 0 { psi.get(i) } else { 1.0 };
        }
    }
    if ignored > 0 {
        warn!("{ignored} nonzero amplitudes outside the {electrons}-electron sector were ignored");
    }
    Ok(NnbfParams { k, electrons, activation, weights, biases, orbital_coefficients: coeffs })
}
