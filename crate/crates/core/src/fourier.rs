//! Multilinear ("Fourier") analysis of pseudo-Boolean functions.
//!
//! With z_k = 1 - 2 n_k every function on the hypercube has a unique
//! expansion Φ(z) = Σ_x Φ̂^x Π_k z_k^{x_k}. Coefficients are indexed by
//! the bit pattern x with x_1 as the most significant bit, the same layout
//! as configuration indices. The forward transform carries the 2^{-K}
//! factor so that evaluation uses unit monomials.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::{check_orbitals, dimension, orbital_bit, SpinConvention, WavefunctionTable};

/// A real function of one real variable with (possibly partial) access to
/// its derivatives. Implemented by activations and by their logarithms.
pub trait ScalarFunction: Sync {
    fn name(&self) -> String;

    fn value(&self, x: f64) -> f64;

    /// The `order`-th derivative at `x`, or `None` when unavailable there.
    fn derivative(&self, order: usize, x: f64) -> Option<f64>;
}

/// The 2^K multilinear coefficients of a function on the hypercube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFourier", into = "RawFourier")]
pub struct FourierTable {
    k: usize,
    coeffs: Vec<f64>,
    convention: SpinConvention,
}

#[derive(Serialize, Deserialize)]
struct RawFourier {
    #[serde(rename = "K")]
    k: usize,
    basis: String,
    #[serde(default)]
    convention: SpinConvention,
    amplitudes: Vec<f64>,
}

impl TryFrom<RawFourier> for FourierTable {
    type Error = Error;
    fn try_from(raw: RawFourier) -> Result<Self> {
        if raw.basis != "fourier" {
            return Err(Error::InvalidArgument(format!("expected basis \"fourier\", got {:?}", raw.basis)));
        }
        FourierTable::with_convention(raw.k, raw.amplitudes, raw.convention)
    }
}

impl From<FourierTable> for RawFourier {
    fn from(t: FourierTable) -> Self {
        RawFourier { k: t.k, basis: "fourier".into(), convention: t.convention, amplitudes: t.coeffs }
    }
}

impl FourierTable {
    pub fn new(k: usize, coeffs: Vec<f64>) -> Result<Self> {
        Self::with_convention(k, coeffs, SpinConvention::Appendix)
    }

    pub fn with_convention(k: usize, coeffs: Vec<f64>, convention: SpinConvention) -> Result<Self> {
        check_orbitals(k)?;
        if coeffs.len() != dimension(k) {
            return Err(Error::LengthMismatch { expected: dimension(k), found: coeffs.len() });
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("Fourier coefficient {} at pattern {i}", coeffs[i])));
        }
        Ok(Self { k, coeffs, convention })
    }

    pub fn zeros(k: usize) -> Result<Self> {
        check_orbitals(k)?;
        Ok(Self { k, coeffs: vec![0.0; dimension(k)], convention: SpinConvention::Appendix })
    }

    pub fn orbitals(&self) -> usize {
        self.k
    }

    pub fn convention(&self) -> SpinConvention {
        self.convention
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn get(&self, pattern: usize) -> f64 {
        self.coeffs[pattern]
    }

    pub fn subset(&self, s: &SubsetIndex) -> f64 {
        self.coeffs[s.pattern()]
    }

    /// `self - scale * other`, the coefficient update of one matching step.
    pub fn sub_scaled(&mut self, other: &FourierTable, scale: f64) -> Result<()> {
        if other.k != self.k || other.convention != self.convention {
            return Err(Error::Shape("Fourier tables differ in K or convention".into()));
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= scale * b;
        }
        Ok(())
    }

    pub fn max_abs_nonconstant(&self) -> f64 {
        self.coeffs[1..].iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Unnormalized in-place Walsh–Hadamard butterfly:
/// out[x] = Σ_n (-1)^{popcount(n & x)} in[n].
pub fn fwht_in_place(data: &mut [f64]) {
    let n = data.len();
    assert!(n.is_power_of_two(), "length {n} is not a power of two");
    let mut half = 1;
    while half < n {
        butterfly_stage(data, half);
        half <<= 1;
    }
}

// Blocks of one stage are independent; each output is computed identically
// in either mode, so parallel and sequential results are bit-identical.
const PARALLEL_STAGE_THRESHOLD: usize = 1 << 14;

fn butterfly_stage(data: &mut [f64], half: usize) {
    let block = |chunk: &mut [f64]| {
        let (lo, hi) = chunk.split_at_mut(half);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = x + y;
            *b = x - y;
        }
    };
    #[cfg(feature = "parallel")]
    if data.len() >= PARALLEL_STAGE_THRESHOLD {
        use rayon::prelude::*;
        data.par_chunks_mut(2 * half).for_each(block);
        return;
    }
    let _ = PARALLEL_STAGE_THRESHOLD;
    data.chunks_mut(2 * half).for_each(block);
}

#[inline]
fn pattern_sign(pattern: usize) -> f64 {
    if pattern.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Φ̂ = 2^{-K} Σ_z z^x Φ(z), in the requested spin convention.
pub fn wht_forward(phi: &WavefunctionTable, convention: SpinConvention) -> FourierTable {
    let k = phi.orbitals();
    let mut coeffs = phi.amplitudes().to_vec();
    fwht_in_place(&mut coeffs);
    let scale = (dimension(k) as f64).recip();
    for (x, c) in coeffs.iter_mut().enumerate() {
        *c *= scale;
        // Lemma-1 spins are the negation of appendix spins: z^x picks up (-1)^{|x|}.
        if convention == SpinConvention::Lemma1 {
            *c *= pattern_sign(x);
        }
    }
    FourierTable { k, coeffs, convention }
}

/// Evaluates Σ_x Φ̂^x Π z_k^{x_k} at every configuration.
pub fn wht_inverse(fhat: &FourierTable) -> WavefunctionTable {
    let mut values = fhat.coeffs.clone();
    if fhat.convention == SpinConvention::Lemma1 {
        for (x, c) in values.iter_mut().enumerate() {
            *c *= pattern_sign(x);
        }
    }
    fwht_in_place(&mut values);
    WavefunctionTable::new(fhat.k, values).expect("inverse transform of a finite table is finite")
}

/// Coefficients of the neuron f(b + Σ_{k∈S} ω_k z_k).
///
/// `support` lists the orbital positions of S (0-based, any order) and
/// `omega` the matching weights. Coefficients for patterns not contained
/// in S are exactly zero.
pub fn neuron_fourier<F: ScalarFunction + ?Sized>(
    f: &F,
    k: usize,
    bias: f64,
    support: &[usize],
    omega: &[f64],
) -> Result<FourierTable> {
    check_orbitals(k)?;
    if support.len() != omega.len() {
        return Err(Error::LengthMismatch { expected: support.len(), found: omega.len() });
    }
    if let Some(&p) = support.iter().find(|&&p| p >= k) {
        return Err(Error::OrbitalOutOfRange { orbital: p, k });
    }
    let s = support.len();
    let mut sub = neuron_values(f, bias, omega)?;
    fwht_in_place(&mut sub);
    let scale = (dimension(s) as f64).recip();
    let mut coeffs = vec![0.0; dimension(k)];
    for (local, value) in sub.into_iter().enumerate() {
        coeffs[scatter(local, s, support, k)] = value * scale;
    }
    Ok(FourierTable { k, coeffs, convention: SpinConvention::Appendix })
}

/// f(b + ω·z) over the 2^{|S|} sign patterns of the support, with bit j
/// (most significant first) set when z_j = -1.
pub(crate) fn neuron_values<F: ScalarFunction + ?Sized>(f: &F, bias: f64, omega: &[f64]) -> Result<Vec<f64>> {
    let s = omega.len();
    (0..dimension(s))
        .map(|local| {
            let arg = bias
                + omega
                    .iter()
                    .enumerate()
                    .map(|(j, w)| if local & (1 << (s - 1 - j)) != 0 { -w } else { *w })
                    .sum::<f64>();
            let v = f.value(arg);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Domain(format!("{}({arg}) = {v}", f.name())))
            }
        })
        .collect()
}

/// Maps a pattern over the support onto the full K-bit pattern.
fn scatter(local: usize, s: usize, support: &[usize], k: usize) -> usize {
    support
        .iter()
        .enumerate()
        .filter(|(j, _)| local & (1 << (s - 1 - j)) != 0)
        .fold(0, |acc, (_, &p)| acc | orbital_bit(k, p))
}

/// The leading small-ω coefficient A(b) = f^{(Σx)}(b).
pub fn leading_asymptotic<F: ScalarFunction + ?Sized>(f: &F, bias: f64, pattern: usize) -> Result<f64> {
    let order = pattern.count_ones() as usize;
    f.derivative(order, bias)
        .filter(|d| d.is_finite())
        .ok_or_else(|| Error::UnsupportedActivation { activation: f.name(), order, point: bias })
}

/// Coefficients of the neuron with ω_k negated: each multiplied by (-1)^{x_k}.
pub fn parity_flip(fhat: &FourierTable, orbital: usize) -> Result<FourierTable> {
    if orbital >= fhat.k {
        return Err(Error::OrbitalOutOfRange { orbital, k: fhat.k });
    }
    let bit = orbital_bit(fhat.k, orbital);
    let coeffs = fhat
        .coeffs
        .iter()
        .enumerate()
        .map(|(x, &c)| if x & bit != 0 { -c } else { c })
        .collect();
    Ok(FourierTable { k: fhat.k, coeffs, convention: fhat.convention })
}

/// One element of the power set of the orbitals, with its tier position.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubsetIndex {
    k: usize,
    members: Vec<usize>,
    rank: usize,
}

impl SubsetIndex {
    /// Orbital positions, 0-based and increasing.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// Orbital labels 1..=K as used in printed output.
    pub fn labels(&self) -> Vec<usize> {
        self.members.iter().map(|p| p + 1).collect()
    }

    pub fn tier(&self) -> usize {
        self.members.len()
    }

    /// 1-based position inside its tier.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn pattern(&self) -> usize {
        self.members.iter().fold(0, |acc, &p| acc | orbital_bit(self.k, p))
    }
}

impl fmt::Display for SubsetIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.labels().iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", labels.join(","))
    }
}

/// The power set of the orbitals, tier K first down to the empty set;
/// lexicographic by members inside a tier.
pub fn enumerate_tiers(k: usize) -> Result<Vec<SubsetIndex>> {
    check_orbitals(k)?;
    let mut all: Vec<Vec<usize>> = (0..dimension(k))
        .map(|mask| (0..k).filter(|&p| mask & orbital_bit(k, p) != 0).collect())
        .collect();
    all.sort_by(|a: &Vec<usize>, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    let mut out = Vec::with_capacity(all.len());
    let mut rank = 0;
    let mut tier = usize::MAX;
    for members in all {
        if members.len() != tier {
            tier = members.len();
            rank = 0;
        }
        rank += 1;
        out.push(SubsetIndex { k, members, rank });
    }
    Ok(out)
}
