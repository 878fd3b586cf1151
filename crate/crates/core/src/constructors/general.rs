use serde::{Deserialize, Serialize};

use super::sign::{build_sign_factor, regularize_zeros, SignFactor};
use crate::ansatz::{Activation, NpsParams};
use crate::error::{Error, Result};
use crate::fockspace::{check_orbitals, dimension, OccupationVector, SpinConvention, WavefunctionTable};
use crate::fourier::{enumerate_tiers, neuron_fourier, parity_flip, wht_forward, FourierTable, SubsetIndex};

/// Coefficients below this fraction of the largest |κ| sample are treated
/// as cancellation noise.
const NOISE_FLOOR: f64 = 1e-12;

/// Tuning knobs for [`build_nps_general`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneralNpsOptions {
    /// Per-coefficient target: every matched neuron has |κ̂| ≤ δ.
    pub delta: f64,
    /// Initial |ω_k| before halving.
    pub omega_scale: f64,
    pub eps_zero: f64,
    pub margin_shrink: f64,
    pub bias_grid: usize,
    pub bias_range: f64,
    pub max_halvings: u32,
    /// Tiers left unmatched on purpose.
    pub skip_tiers: Vec<usize>,
    /// Skip the activation conditions and leave degenerate subsets
    /// unmatched instead of failing.
    pub best_effort: bool,
}

impl Default for GeneralNpsOptions {
    fn default() -> Self {
        Self {
            delta: 1e-4,
            omega_scale: 0.5,
            eps_zero: 1e-3,
            margin_shrink: 0.5,
            bias_grid: 17,
            bias_range: 2.0,
            max_halvings: 60,
            skip_tiers: Vec::new(),
            best_effort: false,
        }
    }
}

impl GeneralNpsOptions {
    pub fn with_delta(delta: f64) -> Self {
        Self { delta, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(what.to_string()));
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad("delta must be positive");
        }
        if !(self.omega_scale > 0.0 && self.omega_scale.is_finite()) {
            return bad("omega_scale must be positive");
        }
        if self.bias_grid == 0 || !(self.bias_range > 0.0) {
            return bad("bias grid must be non-empty");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TierStatus {
    Matched,
    BelowThreshold,
    Skipped,
    Degenerate,
}

/// One subset of the tier recursion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TierRow {
    pub subset: String,
    pub tier: usize,
    pub rank: usize,
    pub status: TierStatus,
    /// ĝ_S before this subset was matched.
    pub target: f64,
    pub kappa_hat: f64,
    pub multiplicity: u64,
    pub bias: f64,
    pub omega: f64,
    /// ĝ_S after subtracting N·κ̂.
    pub residual: f64,
}

/// Output of [`build_nps_general`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralNps {
    /// Full state: sign neurons, matching neurons and ln𝒩.
    pub params: NpsParams,
    /// 𝒩Θ: matching neurons with ln𝒩, positive on every configuration.
    pub positive_part: NpsParams,
    pub sign_factor: SignFactor,
    pub regularized: WavefunctionTable,
    pub positive_target: WavefunctionTable,
    pub tiers: Vec<TierRow>,
    /// Fourier coefficients of ln Ψ̃₊ left after the recursion.
    pub residual: FourierTable,
}

impl GeneralNps {
    pub fn matched_neurons(&self) -> usize {
        self.positive_part.hidden()
    }

    pub fn max_nonconstant_residual(&self) -> f64 {
        self.residual.max_abs_nonconstant()
    }
}

/// Checks the two activation conditions for exact representability:
/// a sign change, and ln φ not a polynomial of degree below K.
pub fn check_activation_conditions(activation: Activation, k: usize) -> Result<()> {
    if activation.sign_change().is_none() {
        return Err(Error::Contract(format!("activation `{activation}` has no sign change")));
    }
    if let Some(d) = activation.log_polynomial_degree() {
        if (d as usize) < k {
            return Err(Error::Contract(format!(
                "ln `{activation}` is a polynomial of degree {d} < K = {k}; the top Fourier modes are unreachable"
            )));
        }
    }
    Ok(())
}

/// Candidate biases inside the positive branch of φ, most promising first.
fn bias_candidates(activation: Activation, order: usize, opts: &GeneralNpsOptions) -> Vec<f64> {
    let (lo, hi) = activation.positive_domain();
    let n = opts.bias_grid;
    let grid: Vec<f64> = (0..n)
        .map(|i| if n == 1 { 0.0 } else { -opts.bias_range + 2.0 * opts.bias_range * i as f64 / (n - 1) as f64 })
        .filter(|&b| b > lo && b < hi)
        .collect();
    let mut scored: Vec<(f64, f64)> = grid
        .into_iter()
        .map(|b| {
            let a = activation.log_derivative(order, b).filter(|v| v.is_finite()).map_or(0.0, f64::abs);
            (b, a)
        })
        .collect();
    scored.sort_by(|x, y| y.1.total_cmp(&x.1));
    scored.into_iter().map(|(b, _)| b).collect()
}

struct Matched {
    bias: f64,
    omega: Vec<f64>,
    table: FourierTable,
    kappa_hat: f64,
}

/// Shrinks a uniform ω at fixed b until |κ̂_S| ≤ δ. Returns None when κ̂_S
/// is indistinguishable from zero at this bias.
fn shrink_at_bias(activation: Activation, k: usize, s: &SubsetIndex, bias: f64, opts: &GeneralNpsOptions) -> Option<Matched> {
    let log = activation.log();
    let mut scale = opts.omega_scale;
    for _ in 0..=opts.max_halvings {
        let omega = vec![scale; s.tier()];
        let table = match neuron_fourier(&log, k, bias, s.members(), &omega) {
            Ok(t) => t,
            Err(Error::Domain(_)) => {
                scale *= 0.5;
                continue;
            }
            Err(_) => return None,
        };
        let kappa_hat = table.get(s.pattern());
        let floor = NOISE_FLOOR * table.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs())).max(log_sample_scale(activation, bias));
        if kappa_hat.abs() <= floor {
            return None;
        }
        if kappa_hat.abs() <= opts.delta {
            return Some(Matched { bias, omega, table, kappa_hat });
        }
        scale *= 0.5;
    }
    None
}

fn log_sample_scale(activation: Activation, bias: f64) -> f64 {
    let v = activation.log_eval(bias);
    if v.is_finite() {
        v.abs()
    } else {
        0.0
    }
}

fn find_neuron(activation: Activation, k: usize, s: &SubsetIndex, opts: &GeneralNpsOptions) -> Option<Matched> {
    bias_candidates(activation, s.tier(), opts)
        .into_iter()
        .find_map(|b| shrink_at_bias(activation, k, s, b, opts))
}

/// NPS approximating ψ with an activation that changes sign and whose
/// logarithm is not a low-degree polynomial.
///
/// The sign pattern is carried by a [`SignFactor`]; the positive remainder
/// is matched in the Fourier domain of its logarithm, tier K first, each
/// subset with a neuron of integer multiplicity N = round(ĝ_S/κ̂_S).
pub fn build_nps_general(psi: &WavefunctionTable, activation: Activation, opts: &GeneralNpsOptions) -> Result<GeneralNps> {
    opts.validate()?;
    let k = psi.orbitals();
    check_orbitals(k)?;
    if !opts.best_effort {
        check_activation_conditions(activation, k)?;
    }
    if !psi.is_normalized() {
        return Err(Error::Contract(format!("target must be normalized, norm = {}", psi.norm())));
    }

    let regularized = regularize_zeros(psi, opts.eps_zero)?;
    let sign_factor = if regularized.amplitudes().iter().all(|&a| a > 0.0) {
        SignFactor { k, activation, theta: 0.0, covered: vec![], weights: vec![], biases: vec![] }
    } else {
        build_sign_factor(&regularized, activation, opts.margin_shrink)?
    };
    let sign_nps = sign_factor.as_nps();
    let mut positive = Vec::with_capacity(dimension(k));
    for i in 0..dimension(k) {
        let s = sign_nps.eval(&OccupationVector::new(k, i)?)?;
        let p = regularized.get(i) / s;
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::ConstructionBug(format!("sign factor {s} leaves amplitude {p} at index {i}")));
        }
        positive.push(p);
    }
    let positive_target = WavefunctionTable::new(k, positive)?;
    let mut ghat = wht_forward(&positive_target.map(f64::ln), SpinConvention::Appendix);

    let mut matching = NpsParams::empty(k, activation, 0.0);
    let mut tiers = Vec::new();
    for s in enumerate_tiers(k)?.into_iter().filter(|s| s.tier() > 0) {
        let target = ghat.subset(&s);
        let mut row = TierRow {
            subset: s.to_string(),
            tier: s.tier(),
            rank: s.rank(),
            status: TierStatus::BelowThreshold,
            target,
            kappa_hat: 0.0,
            multiplicity: 0,
            bias: 0.0,
            omega: 0.0,
            residual: target,
        };
        if opts.skip_tiers.contains(&s.tier()) {
            row.status = TierStatus::Skipped;
            tiers.push(row);
            continue;
        }
        if target.abs() <= opts.delta / 2.0 {
            tiers.push(row);
            continue;
        }
        let Some(mut m) = find_neuron(activation, k, &s, opts) else {
            if opts.best_effort {
                row.status = TierStatus::Degenerate;
                tiers.push(row);
                continue;
            }
            return Err(Error::Degenerate { activation: activation.name(), subset: s.to_string() });
        };
        if m.kappa_hat.signum() != target.signum() {
            m.omega[0] = -m.omega[0];
            m.table = parity_flip(&m.table, s.members()[0])?;
            m.kappa_hat = m.table.get(s.pattern());
        }
        let ratio = (target / m.kappa_hat).round();
        if ratio >= 2f64.powi(63) {
            return Err(Error::MultiplicityOverflow { ratio, subset: s.to_string() });
        }
        let n = ratio as u64;
        ghat.sub_scaled(&m.table, n as f64)?;

        // z_k = 1 - 2n_k turns b + Σ ω_k z_k into (b + Σ ω_k) - 2 Σ ω_k n_k.
        let mut weights = vec![0.0; k];
        for (&p, &w) in s.members().iter().zip(&m.omega) {
            weights[p] = -2.0 * w;
        }
        matching.push_neuron(weights, m.bias + m.omega.iter().sum::<f64>(), n);

        row.status = TierStatus::Matched;
        row.kappa_hat = m.kappa_hat;
        row.multiplicity = n;
        row.bias = m.bias;
        row.omega = m.omega[0].abs();
        row.residual = ghat.subset(&s);
        tiers.push(row);
    }
    matching.log_scale = ghat.get(0);

    check_positive(&matching)?;
    let mut params = sign_nps;
    params.log_scale = matching.log_scale;
    for ((w, &b), &n) in matching.weights.iter().zip(&matching.biases).zip(&matching.multiplicities) {
        params.push_neuron(w.clone(), b, n);
    }
    Ok(GeneralNps {
        params,
        positive_part: matching,
        sign_factor,
        regularized,
        positive_target,
        tiers,
        residual: ghat,
    })
}

fn check_positive(params: &NpsParams) -> Result<()> {
    for i in 0..dimension(params.k) {
        let n = OccupationVector::new(params.k, i)?;
        for (alpha, f) in params.factors(&n)?.into_iter().enumerate() {
            if !(f > 0.0) {
                return Err(Error::ConstructionBug(format!("matching neuron {alpha} is {f} at index {i}")));
            }
        }
    }
    Ok(())
}
