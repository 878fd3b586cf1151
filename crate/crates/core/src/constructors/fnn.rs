use crate::ansatz::{Activation, FnnParams};
use crate::error::{Error, Result};
use crate::fockspace::{enumerate_configs, to_spin, SpinConvention, WavefunctionTable};

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("theta must be positive and finite, got {theta}")))
    }
}

/// One hidden unit per configuration, w_i = 2θ z_i and
/// b_i = θ(-z_i·e - K + 1) with z = 2n - e. The argument is θ at n_i and
/// at most -θ at every other configuration.
pub fn indicator_layer(k: usize, theta: f64) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    check_theta(theta)?;
    let configs = enumerate_configs(k)?;
    let mut weights = Vec::with_capacity(configs.len());
    let mut biases = Vec::with_capacity(configs.len());
    for n in &configs {
        let z = to_spin(n, SpinConvention::Lemma1);
        let zsum: f64 = z.values().iter().map(|&v| f64::from(v)).sum();
        weights.push(z.values().iter().map(|&v| 2.0 * theta * f64::from(v)).collect());
        biases.push(theta * (-zsum - k as f64 + 1.0));
    }
    Ok((weights, biases))
}

pub(crate) fn require_step_like(activation: Activation) -> Result<()> {
    if activation.is_step_like() {
        Ok(())
    } else {
        Err(Error::Contract(format!(
            "activation `{activation}` must tend to 0 at -inf and 1 at +inf"
        )))
    }
}

/// FNN whose output weights store the target: c = Ψ.
pub fn build_fnn_exact(psi: &WavefunctionTable, activation: Activation, theta: f64) -> Result<FnnParams> {
    require_step_like(activation)?;
    let (weights, biases) = indicator_layer(psi.orbitals(), theta)?;
    Ok(FnnParams { k: psi.orbitals(), activation, output_weights: psi.amplitudes().to_vec(), weights, biases })
}
