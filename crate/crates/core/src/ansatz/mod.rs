//! Wavefunction ansätze over the occupation-number basis and their exact
//! evaluation at single configurations or over the whole table.

pub mod activation;
mod det;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use activation::{Activation, LogActivation, SignChange, SignOrientation};
pub use det::determinant;

use crate::error::{Error, Result};
use crate::exec::{try_map_range, Execution};
use crate::fockspace::{check_orbitals, dimension, OccupationVector, WavefunctionTable};

/// Anything that assigns an amplitude to every configuration of K orbitals.
pub trait Ansatz: Sync {
    fn orbitals(&self) -> usize;

    /// Amplitude at `n` as embedded in the full Fock space.
    fn amplitude(&self, n: &OccupationVector) -> Result<f64>;
}

/// Evaluates an ansatz at every configuration, lexicographic order.
pub fn tabulate<A: Ansatz + ?Sized>(ansatz: &A, exec: Execution) -> Result<WavefunctionTable> {
    let k = ansatz.orbitals();
    check_orbitals(k)?;
    let amplitudes = try_map_range(exec, dimension(k), |i| {
        ansatz.amplitude(&OccupationVector::new(k, i).expect("index below 2^K"))
    })?;
    WavefunctionTable::new(k, amplitudes)
}

fn check_config(k: usize, n: &OccupationVector) -> Result<()> {
    if n.orbitals() == k {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected: k, found: n.orbitals() })
    }
}

fn check_matrix(name: &str, m: &[Vec<f64>], rows: usize, cols: usize) -> Result<()> {
    if m.len() != rows {
        return Err(Error::Shape(format!("{name} has {} rows, expected {rows}", m.len())));
    }
    if let Some(r) = m.iter().position(|row| row.len() != cols) {
        return Err(Error::Shape(format!("{name} row {r} has {} entries, expected {cols}", m[r].len())));
    }
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Shape(format!("{name} has non-finite entries")));
    }
    Ok(())
}

fn check_vector(name: &str, v: &[f64], len: usize) -> Result<()> {
    if v.len() != len {
        return Err(Error::Shape(format!("{name} has {} entries, expected {len}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Shape(format!("{name} has non-finite entries")));
    }
    Ok(())
}

#[inline]
fn affine(bias: f64, weights: &[f64], occ: &[f64]) -> f64 {
    bias + weights.iter().zip(occ).map(|(w, n)| w * n).sum::<f64>()
}

/// Neuron product state: e^{ln 𝒩} Π_α φ(b_α + w_α·n)^{N_α}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NpsParams {
    #[serde(rename = "K")]
    pub k: usize,
    pub activation: Activation,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub multiplicities: Vec<u64>,
    #[serde(default)]
    pub log_scale: f64,
}

/// Sign and log-magnitude of an amplitude; `sign == 0` means exactly zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogAmplitude {
    pub sign: i8,
    pub log_magnitude: f64,
}

impl LogAmplitude {
    pub fn value(&self) -> f64 {
        f64::from(self.sign) * self.log_magnitude.exp()
    }
}

impl NpsParams {
    /// An NPS with no neurons, equal to 𝒩 everywhere.
    pub fn empty(k: usize, activation: Activation, log_scale: f64) -> Self {
        Self { k, activation, weights: vec![], biases: vec![], multiplicities: vec![], log_scale }
    }

    pub fn hidden(&self) -> usize {
        self.biases.len()
    }

    pub fn push_neuron(&mut self, weights: Vec<f64>, bias: f64, multiplicity: u64) {
        self.weights.push(weights);
        self.biases.push(bias);
        self.multiplicities.push(multiplicity);
    }

    pub fn validate(&self) -> Result<()> {
        check_orbitals(self.k)?;
        let h = self.biases.len();
        check_matrix("W", &self.weights, h, self.k)?;
        check_vector("b", &self.biases, h)?;
        if self.multiplicities.len() != h {
            return Err(Error::Shape(format!("{} multiplicities for {h} neurons", self.multiplicities.len())));
        }
        if self.multiplicities.contains(&0) {
            return Err(Error::Shape("multiplicities must be at least 1".into()));
        }
        if !self.log_scale.is_finite() {
            return Err(Error::Shape("log_scale is not finite".into()));
        }
        Ok(())
    }

    /// Neuron arguments b_α + w_α·n.
    pub fn arguments(&self, n: &OccupationVector) -> Result<Vec<f64>> {
        check_config(self.k, n)?;
        let occ = n.as_reals();
        Ok(self.weights.iter().zip(&self.biases).map(|(w, &b)| affine(b, w, &occ)).collect())
    }

    /// Neuron values φ(b_α + w_α·n).
    pub fn factors(&self, n: &OccupationVector) -> Result<Vec<f64>> {
        self.arguments(n)?
            .into_iter()
            .map(|x| {
                let v = self.activation.eval(x);
                if v.is_nan() {
                    Err(Error::Domain(format!("{}({x}) is NaN", self.activation)))
                } else {
                    Ok(v)
                }
            })
            .collect()
    }

    /// Direct product of the factors; falls back to the log form when the
    /// product leaves the normal floating-point range.
    pub fn eval(&self, n: &OccupationVector) -> Result<f64> {
        let factors = self.factors(n)?;
        if factors.contains(&0.0) {
            return Ok(0.0);
        }
        let mut acc = 1.0f64;
        let mut in_range = true;
        for (&f, &m) in factors.iter().zip(&self.multiplicities) {
            acc *= int_pow(f, m);
            if !acc.is_normal() {
                in_range = false;
                break;
            }
        }
        if in_range {
            let value = acc * self.log_scale.exp();
            if value.is_normal() {
                return Ok(value);
            }
        }
        Ok(self.eval_log(n)?.value())
    }

    /// Sign and ln|Ψ| = ln 𝒩 + Σ_α N_α ln|φ_α|.
    pub fn eval_log(&self, n: &OccupationVector) -> Result<LogAmplitude> {
        let factors = self.factors(n)?;
        let mut negative = false;
        let mut log_magnitude = self.log_scale;
        for (&f, &m) in factors.iter().zip(&self.multiplicities) {
            if f == 0.0 {
                return Ok(LogAmplitude { sign: 0, log_magnitude: f64::NEG_INFINITY });
            }
            if f < 0.0 && m % 2 == 1 {
                negative = !negative;
            }
            log_magnitude += m as f64 * f.abs().ln();
        }
        Ok(LogAmplitude { sign: if negative { -1 } else { 1 }, log_magnitude })
    }
}

fn int_pow(base: f64, exponent: u64) -> f64 {
    match i32::try_from(exponent) {
        Ok(e) => base.powi(e),
        Err(_) => base.powf(exponent as f64),
    }
}

impl Ansatz for NpsParams {
    fn orbitals(&self) -> usize {
        self.k
    }
    fn amplitude(&self, n: &OccupationVector) -> Result<f64> {
        self.eval(n)
    }
}

/// Restricted Boltzmann machine with hidden units traced out:
/// e^{a·n} Π_α (1 + e^{b_α + w_α·n}).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbmParams {
    #[serde(rename = "K")]
    pub k: usize,
    pub visible_biases: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
    pub hidden_biases: Vec<f64>,
}

impl RbmParams {
    pub fn validate(&self) -> Result<()> {
        check_orbitals(self.k)?;
        check_vector("a", &self.visible_biases, self.k)?;
        check_matrix("W", &self.weights, self.hidden_biases.len(), self.k)?;
        check_vector("b", &self.hidden_biases, self.hidden_biases.len())
    }

    pub fn eval(&self, n: &OccupationVector) -> Result<f64> {
        check_config(self.k, n)?;
        let occ = n.as_reals();
        let mut value = affine(0.0, &self.visible_biases, &occ).exp();
        for (w, &b) in self.weights.iter().zip(&self.hidden_biases) {
            value *= 1.0 + affine(b, w, &occ).exp();
        }
        Ok(value)
    }
}

impl Ansatz for RbmParams {
    fn orbitals(&self) -> usize {
        self.k
    }
    fn amplitude(&self, n: &OccupationVector) -> Result<f64> {
        self.eval(n)
    }
}

/// One-hidden-layer network c·σ(b + Wn).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FnnParams {
    #[serde(rename = "K")]
    pub k: usize,
    pub activation: Activation,
    pub output_weights: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

impl FnnParams {
    pub fn validate(&self) -> Result<()> {
        check_orbitals(self.k)?;
        let h = self.biases.len();
        check_vector("c", &self.output_weights, h)?;
        check_matrix("W", &self.weights, h, self.k)?;
        check_vector("b", &self.biases, h)
    }

    pub fn hidden(&self) -> usize {
        self.biases.len()
    }

    pub fn eval(&self, n: &OccupationVector) -> Result<f64> {
        check_config(self.k, n)?;
        let occ = n.as_reals();
        Ok(self
            .output_weights
            .iter()
            .zip(self.weights.iter().zip(&self.biases))
            .map(|(c, (w, &b))| c * self.activation.eval(affine(b, w, &occ)))
            .sum())
    }
}

impl Ansatz for FnnParams {
    fn orbitals(&self) -> usize {
        self.k
    }
    fn amplitude(&self, n: &OccupationVector) -> Result<f64> {
        self.eval(n)
    }
}

/// Neural-network backflow: det[φ_{p_k m}(n)] with configuration-dependent
/// orbitals φ_{pm}(n) = c_{pm}·σ(b + Wn).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NnbfParams {
    #[serde(rename = "K")]
    pub k: usize,
    pub electrons: usize,
    pub activation: Activation,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    /// `orbital_coefficients[p][m]` is the hidden-layer vector c_{pm}.
    pub orbital_coefficients: Vec<Vec<Vec<f64>>>,
}

impl NnbfParams {
    pub fn validate(&self) -> Result<()> {
        check_orbitals(self.k)?;
        if !(1..=self.k).contains(&self.electrons) {
            return Err(Error::Shape(format!("N = {} outside 1..={}", self.electrons, self.k)));
        }
        let h = self.biases.len();
        check_matrix("W", &self.weights, h, self.k)?;
        check_vector("b", &self.biases, h)?;
        if self.orbital_coefficients.len() != self.k {
            return Err(Error::Shape(format!("{} orbital rows, expected {}", self.orbital_coefficients.len(), self.k)));
        }
        for (p, row) in self.orbital_coefficients.iter().enumerate() {
            check_matrix(&format!("c[{p}]"), row, self.electrons, h)?;
        }
        Ok(())
    }

    pub fn hidden_layer(&self, n: &OccupationVector) -> Result<Vec<f64>> {
        check_config(self.k, n)?;
        let occ = n.as_reals();
        Ok(self.weights.iter().zip(&self.biases).map(|(w, &b)| self.activation.eval(affine(b, w, &occ))).collect())
    }

    /// The N×N matrix φ_{p_k m}(n) over the occupied rows.
    pub fn orbital_matrix(&self, n: &OccupationVector) -> Result<Vec<Vec<f64>>> {
        let found = n.electron_count();
        if found != self.electrons {
            return Err(Error::Sector { expected: self.electrons, found });
        }
        let hidden = self.hidden_layer(n)?;
        Ok(n.occupied()
            .into_iter()
            .map(|p| {
                self.orbital_coefficients[p]
                    .iter()
                    .map(|c| c.iter().zip(&hidden).map(|(a, h)| a * h).sum())
                    .collect()
            })
            .collect())
    }

    pub fn eval(&self, n: &OccupationVector) -> Result<f64> {
        Ok(determinant(self.orbital_matrix(n)?))
    }

    pub fn in_sector(&self, n: &OccupationVector) -> bool {
        n.electron_count() == self.electrons
    }
}

impl Ansatz for NnbfParams {
    fn orbitals(&self) -> usize {
        self.k
    }
    /// Zero outside the N-electron sector.
    fn amplitude(&self, n: &OccupationVector) -> Result<f64> {
        if self.in_sector(n) {
            self.eval(n)
        } else {
            Ok(0.0)
        }
    }
}

/// Two-site correlator product state Π_{i<j} C_{ij}^{n_i n_j}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CpsParams {
    #[serde(rename = "K")]
    pub k: usize,
    /// One 2×2 table per pair (0,1), (0,2), ..., (K-2,K-1).
    pub correlators: Vec<[[f64; 2]; 2]>,
}

impl CpsParams {
    pub fn pair_count(k: usize) -> usize {
        k * (k.saturating_sub(1)) / 2
    }

    pub fn uniform(k: usize, table: [[f64; 2]; 2]) -> Self {
        Self { k, correlators: vec![table; Self::pair_count(k)] }
    }

    pub fn validate(&self) -> Result<()> {
        check_orbitals(self.k)?;
        if self.correlators.len() != Self::pair_count(self.k) {
            return Err(Error::Shape(format!(
                "{} correlators, expected {}",
                self.correlators.len(),
                Self::pair_count(self.k)
            )));
        }
        if self.correlators.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Shape("correlator has non-finite entries".into()));
        }
        Ok(())
    }

    pub fn eval(&self, n: &OccupationVector) -> Result<f64> {
        check_config(self.k, n)?;
        let bits = n.bits();
        let mut value = 1.0;
        let mut pair = 0;
        for i in 0..self.k {
            for j in i + 1..self.k {
                value *= self.correlators[pair][bits[i] as usize][bits[j] as usize];
                pair += 1;
            }
        }
        Ok(value)
    }
}

impl Ansatz for CpsParams {
    fn orbitals(&self) -> usize {
        self.k
    }
    fn amplitude(&self, n: &OccupationVector) -> Result<f64> {
        self.eval(n)
    }
}

pub fn eval_nps(params: &NpsParams, n: &OccupationVector) -> Result<f64> {
    params.eval(n)
}

pub fn eval_nps_log(params: &NpsParams, n: &OccupationVector) -> Result<LogAmplitude> {
    params.eval_log(n)
}

pub fn eval_fnn(params: &FnnParams, n: &OccupationVector) -> Result<f64> {
    params.eval(n)
}

pub fn eval_nnbf(params: &NnbfParams, n: &OccupationVector) -> Result<f64> {
    params.eval(n)
}

pub fn eval_cps(params: &CpsParams, n: &OccupationVector) -> Result<f64> {
    params.eval(n)
}

pub fn eval_rbm(params: &RbmParams, n: &OccupationVector) -> Result<f64> {
    params.eval(n)
}

/// Parameter file contents, discriminated by `"ansatz"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "ansatz", rename_all = "lowercase")]
pub enum AnsatzParams {
    Nps(NpsParams),
    Rbm(RbmParams),
    Fnn(FnnParams),
    Nnbf(NnbfParams),
    Cps(CpsParams),
}

impl AnsatzParams {
    pub fn kind(&self) -> &'static str {
        match self {
            AnsatzParams::Nps(_) => "nps",
            AnsatzParams::Rbm(_) => "rbm",
            AnsatzParams::Fnn(_) => "fnn",
            AnsatzParams::Nnbf(_) => "nnbf",
            AnsatzParams::Cps(_) => "cps",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AnsatzParams::Nps(p) => p.validate(),
            AnsatzParams::Rbm(p) => p.validate(),
            AnsatzParams::Fnn(p) => p.validate(),
            AnsatzParams::Nnbf(p) => p.validate(),
            AnsatzParams::Cps(p) => p.validate(),
        }
    }

    fn as_ansatz(&self) -> &dyn Ansatz {
        match self {
            AnsatzParams::Nps(p) => p,
            AnsatzParams::Rbm(p) => p,
            AnsatzParams::Fnn(p) => p,
            AnsatzParams::Nnbf(p) => p,
            AnsatzParams::Cps(p) => p,
        }
    }

    /// Total number of real parameters (multiplicities counted as one each).
    pub fn parameter_count(&self) -> usize {
        match self {
            AnsatzParams::Nps(p) => p.hidden() * (p.k + 2) + 1,
            AnsatzParams::Rbm(p) => p.k + p.hidden_biases.len() * (p.k + 1),
            AnsatzParams::Fnn(p) => p.hidden() * (p.k + 2),
            AnsatzParams::Nnbf(p) => p.biases.len() * (p.k + 1 + p.k * p.electrons),
            AnsatzParams::Cps(p) => 4 * p.correlators.len(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and validates shapes.
    pub fn from_json(text: &str) -> Result<Self> {
        let params: Self = serde_json::from_str(text)?;
        params.validate()?;
        Ok(params)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

impl Ansatz for AnsatzParams {
    fn orbitals(&self) -> usize {
        self.as_ansatz().orbitals()
    }
    fn amplitude(&self, n: &OccupationVector) -> Result<f64> {
        self.as_ansatz().amplitude(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::enumerate_configs;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
        (0..rows).map(|_| (0..cols).map(|_| r.random_range(-1.0..1.0)).collect()).collect()
    }

    fn random_vec(r: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
        (0..len).map(|_| r.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn empty_nps_is_constant() {
        let p = NpsParams::empty(3, Activation::Cos, 0.25f64.ln());
        let t = tabulate(&p, Execution::Sequential).unwrap();
        assert!(t.amplitudes().iter().all(|&a| (a - 0.25).abs() < 1e-16));
    }

    #[test]
    fn zero_weight_cos_neuron() {
        let mut p = NpsParams::empty(2, Activation::Cos, 0.0);
        p.push_neuron(vec![0.0, 0.0], 0.7, 1);
        for n in enumerate_configs(2).unwrap() {
            assert_eq!(p.eval(&n).unwrap(), 0.7f64.cos());
        }
    }

    #[test]
    fn nps_matches_product_oracle() {
        let mut r = rng(5);
        let k = 4;
        let w = random_matrix(&mut r, 6, k);
        let b = random_vec(&mut r, 6);
        let m: Vec<u64> = (0..6).map(|_| r.random_range(1..4)).collect();
        let p = NpsParams { k, activation: Activation::Cos, weights: w.clone(), biases: b.clone(), multiplicities: m.clone(), log_scale: 0.3 };
        p.validate().unwrap();
        for n in enumerate_configs(k).unwrap() {
            let bits = n.bits();
            let mut want = 0.3f64.exp();
            for a in 0..6 {
                let x = b[a] + (0..k).map(|j| w[a][j] * f64::from(bits[j])).sum::<f64>();
                for _ in 0..m[a] {
                    want *= x.cos();
                }
            }
            let got = p.eval(&n).unwrap();
            assert!((got - want).abs() < 1e-12 * want.abs().max(1e-300), "{got} vs {want}");
        }
    }

    #[test]
    fn nps_log_signs() {
        let mut p = NpsParams::empty(1, Activation::Cos, 0.0);
        p.push_neuron(vec![0.0], 3.0, 3);
        let n = OccupationVector::new(1, 0).unwrap();
        let l = p.eval_log(&n).unwrap();
        assert_eq!(l.sign, -1);
        assert!((l.value() - 3f64.cos().powi(3)).abs() < 1e-15);

        let mut z = NpsParams::empty(1, Activation::Relu, 0.0);
        z.push_neuron(vec![1.0], -1.0, 2);
        assert_eq!(z.eval(&n).unwrap(), 0.0);
        assert_eq!(z.eval_log(&n).unwrap().sign, 0);
    }

    #[test]
    fn huge_multiplicity_falls_back_to_log_space() {
        // κ ≈ 1e-6 per factor, N = 10^6 twice: e^{2} overall.
        let x = (1e-6f64).exp().ln(); // argument for exp activation
        let mut p = NpsParams::empty(1, Activation::Exp, 0.0);
        p.push_neuron(vec![0.0], x, 1_000_000);
        p.push_neuron(vec![0.0], x, 1_000_000);
        let n = OccupationVector::new(1, 1).unwrap();
        assert!((p.eval(&n).unwrap() - 2f64.exp()).abs() < 1e-9);

        // Direct product overflows: ln Ψ = 10^6 · 1, rescaled by ln 𝒩 = -10^6 + 1.
        let mut q = NpsParams::empty(1, Activation::Exp, -1e6 + 1.0);
        q.push_neuron(vec![0.0], 1.0, 1_000_000);
        assert!(q.factors(&n).unwrap()[0].powi(1_000_000).is_infinite());
        let v = q.eval(&n).unwrap();
        assert!((v - 1f64.exp()).abs() < 1e-8, "{v}");
    }

    #[test]
    fn nps_domain_error() {
        let mut p = NpsParams::empty(1, Activation::Cos, 0.0);
        p.push_neuron(vec![f64::INFINITY], 0.0, 1);
        assert!(p.validate().is_err());
        let mut p = NpsParams::empty(1, Activation::Sigmoid, 0.0);
        p.push_neuron(vec![0.0], 0.0, 0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn fnn_cases() {
        let mut r = rng(2);
        let k = 3;
        let zero = FnnParams { k, activation: Activation::Sigmoid, output_weights: vec![0.0; 4], weights: random_matrix(&mut r, 4, k), biases: random_vec(&mut r, 4) };
        assert!(tabulate(&zero, Execution::Sequential).unwrap().amplitudes().iter().all(|&a| a == 0.0));

        let sat = FnnParams { k: 1, activation: Activation::Sigmoid, output_weights: vec![2.0], weights: vec![vec![0.0]], biases: vec![-800.0] };
        assert!(sat.eval(&OccupationVector::new(1, 0).unwrap()).unwrap().abs() < 1e-300);

        let c = random_vec(&mut r, 5);
        let w = random_matrix(&mut r, 5, k);
        let b = random_vec(&mut r, 5);
        let p = FnnParams { k, activation: Activation::Tanh, output_weights: c.clone(), weights: w.clone(), biases: b.clone() };
        for n in enumerate_configs(k).unwrap() {
            let bits = n.as_reals();
            let mut want = 0.0;
            for a in 0..5 {
                want += c[a] * (b[a] + w[a][0] * bits[0] + w[a][1] * bits[1] + w[a][2] * bits[2]).tanh();
            }
            assert!((p.eval(&n).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn rbm_cases() {
        let p = RbmParams { k: 3, visible_biases: vec![0.0; 3], weights: vec![vec![0.0; 3]; 4], hidden_biases: vec![0.0; 4] };
        p.validate().unwrap();
        for n in enumerate_configs(3).unwrap() {
            assert_eq!(p.eval(&n).unwrap(), 16.0);
        }
    }

    #[test]
    fn cps_cases() {
        let ones = CpsParams::uniform(4, [[1.0, 1.0], [1.0, 1.0]]);
        assert!(tabulate(&ones, Execution::Sequential).unwrap().amplitudes().iter().all(|&a| a == 1.0));

        let mut r = rng(9);
        let correlators: Vec<[[f64; 2]; 2]> = (0..6)
            .map(|_| [[r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)], [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)]])
            .collect();
        let p = CpsParams { k: 4, correlators: correlators.clone() };
        p.validate().unwrap();
        let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        for n in enumerate_configs(4).unwrap() {
            let bits = n.bits();
            let want: f64 = pairs.iter().enumerate().map(|(c, &(i, j))| correlators[c][bits[i] as usize][bits[j] as usize]).product();
            assert!((p.eval(&n).unwrap() - want).abs() < 1e-12);
        }
        assert!(CpsParams { k: 3, correlators: vec![[[1.0; 2]; 2]; 2] }.validate().is_err());
    }

    fn random_nnbf(r: &mut ChaCha8Rng, k: usize, electrons: usize, hidden: usize) -> NnbfParams {
        NnbfParams {
            k,
            electrons,
            activation: Activation::Tanh,
            weights: random_matrix(r, hidden, k),
            biases: random_vec(r, hidden),
            orbital_coefficients: (0..k).map(|_| random_matrix(r, electrons, hidden)).collect(),
        }
    }

    #[test]
    fn nnbf_single_electron_and_sector() {
        let mut r = rng(3);
        let p = random_nnbf(&mut r, 3, 1, 4);
        p.validate().unwrap();
        let n = OccupationVector::from_bits(&[0, 1, 0]).unwrap();
        let h = p.hidden_layer(&n).unwrap();
        let want: f64 = p.orbital_coefficients[1][0].iter().zip(&h).map(|(a, b)| a * b).sum();
        assert_eq!(p.eval(&n).unwrap(), want);
        let bad = OccupationVector::from_bits(&[1, 1, 0]).unwrap();
        assert!(matches!(p.eval(&bad), Err(Error::Sector { expected: 1, found: 2 })));
        assert_eq!(p.amplitude(&bad).unwrap(), 0.0);
    }

    #[test]
    fn nnbf_matches_cofactor_oracle() {
        let mut r = rng(4);
        let p = random_nnbf(&mut r, 6, 4, 5);
        for n in enumerate_configs(6).unwrap().into_iter().filter(|n| n.electron_count() == 4) {
            let m = p.orbital_matrix(&n).unwrap();
            let want = det::cofactor_determinant(&m);
            assert!((p.eval(&n).unwrap() - want).abs() < 1e-10 * want.abs().max(1.0));
        }
    }

    #[test]
    fn nnbf_identity_orbitals() {
        // Hidden unit saturated at 1; c_{p_k m} = δ_{km} on occupied rows.
        let mut coeffs = vec![vec![vec![0.0]; 2]; 3];
        coeffs[0][0][0] = 1.0;
        coeffs[2][1][0] = 1.0;
        let p = NnbfParams { k: 3, electrons: 2, activation: Activation::Sigmoid, weights: vec![vec![0.0; 3]], biases: vec![800.0], orbital_coefficients: coeffs };
        assert_eq!(p.eval(&OccupationVector::from_bits(&[1, 0, 1]).unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn params_json_round_trip_and_validation() {
        let mut p = NpsParams::empty(2, Activation::ExpPoly { degree: 2 }, 0.5);
        p.push_neuron(vec![0.25, -1.0], 0.1, 7);
        let wrapped = AnsatzParams::Nps(p);
        let text = wrapped.to_json().unwrap();
        assert!(text.contains(r#""ansatz": "nps""#));
        assert!(text.contains(r#""activation": "exp-poly:2""#));
        assert_eq!(AnsatzParams::from_json(&text).unwrap(), wrapped);

        let bad = r#"{"ansatz":"fnn","K":2,"activation":"sigmoid","output_weights":[1.0],"weights":[[1.0]],"biases":[0.0]}"#;
        assert!(matches!(AnsatzParams::from_json(bad), Err(Error::Shape(_))));
        let unknown = r#"{"ansatz":"fnn","K":1,"activation":"swish","output_weights":[1.0],"weights":[[1.0]],"biases":[0.0]}"#;
        assert!(AnsatzParams::from_json(unknown).is_err());
    }

    #[test]
    fn parallel_tabulation_matches_pointwise() {
        let mut r = rng(8);
        let k = 10;
        let p = NpsParams { k, activation: Activation::Tanh, weights: random_matrix(&mut r, 8, k), biases: random_vec(&mut r, 8), multiplicities: vec![1; 8], log_scale: 0.0 };
        let seq = tabulate(&p, Execution::Sequential).unwrap();
        let par = tabulate(&p, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
        for n in enumerate_configs(k).unwrap() {
            assert_eq!(seq.get(n.index()), p.eval(&n).unwrap());
        }
    }
}
