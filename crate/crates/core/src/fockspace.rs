//! Occupation-number basis of K spin-orbitals and dense amplitude tables.
//!
//! A configuration n = (n_1, ..., n_K) is stored as an integer bitmask with
//! n_1 in the most significant of the K bits, so the mask *is* the
//! lexicographic index. Orbital positions in this API are 0-based:
//! position 0 is n_1.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest orbital count for which full tables are enumerated.
pub const MAX_ORBITALS: usize = 20;

pub(crate) fn check_orbitals(k: usize) -> Result<()> {
    if (1..=MAX_ORBITALS).contains(&k) {
        Ok(())
    } else {
        Err(Error::Capacity { k, max: MAX_ORBITALS })
    }
}

/// Number of configurations 2^K.
pub fn dimension(k: usize) -> usize {
    1usize << k
}

/// Bit of orbital `orbital` (0-based) inside a K-bit mask.
#[inline]
pub(crate) fn orbital_bit(k: usize, orbital: usize) -> usize {
    1usize << (k - 1 - orbital)
}

/// One basis configuration of K orbitals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationVector {
    k: usize,
    index: usize,
}

impl OccupationVector {
    pub fn new(k: usize, index: usize) -> Result<Self> {
        check_orbitals(k)?;
        if index >= dimension(k) {
            return Err(Error::IndexOutOfRange { index, k });
        }
        Ok(Self { k, index })
    }

    /// Builds a configuration from explicit occupations (n_1, ..., n_K).
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let k = bits.len();
        check_orbitals(k)?;
        let mut index = 0usize;
        for &b in bits {
            if b > 1 {
                return Err(Error::InvalidArgument(format!("occupation {b} is not 0 or 1")));
            }
            index = (index << 1) | b as usize;
        }
        Ok(Self { k, index })
    }

    pub fn orbitals(&self) -> usize {
        self.k
    }

    /// Lexicographic index, equal to the big-endian integer (n_1 ... n_K).
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn occupation(&self, orbital: usize) -> u8 {
        debug_assert!(orbital < self.k);
        u8::from(self.index & orbital_bit(self.k, orbital) != 0)
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.k).map(|p| self.occupation(p)).collect()
    }

    /// Occupations as reals, handy for affine neuron arguments.
    pub fn as_reals(&self) -> Vec<f64> {
        (0..self.k).map(|p| f64::from(self.occupation(p))).collect()
    }

    pub fn electron_count(&self) -> usize {
        self.index.count_ones() as usize
    }

    /// Occupied positions p_1 < ... < p_N (0-based).
    pub fn occupied(&self) -> Vec<usize> {
        (0..self.k).filter(|&p| self.occupation(p) == 1).collect()
    }

    /// Hamming distance to another configuration of the same K.
    pub fn hamming(&self, other: &Self) -> usize {
        debug_assert_eq!(self.k, other.k);
        (self.index ^ other.index).count_ones() as usize
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, b) in self.bits().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, ")")
    }
}

/// All 2^K configurations in lexicographic order; position equals index.
pub fn enumerate_configs(k: usize) -> Result<Vec<OccupationVector>> {
    check_orbitals(k)?;
    Ok((0..dimension(k)).map(|index| OccupationVector { k, index }).collect())
}

/// Which affine map takes occupations to spins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpinConvention {
    /// z = 2n - e: an occupied orbital maps to +1.
    Lemma1,
    /// z = 1 - 2n: an empty orbital maps to +1. Used for all Fourier work.
    #[default]
    Appendix,
}

impl SpinConvention {
    #[inline]
    pub fn spin(self, occupation: u8) -> i8 {
        match (self, occupation) {
            (SpinConvention::Lemma1, 1) | (SpinConvention::Appendix, 0) => 1,
            _ => -1,
        }
    }

    #[inline]
    pub fn occupation(self, spin: i8) -> u8 {
        match (self, spin) {
            (SpinConvention::Lemma1, 1) | (SpinConvention::Appendix, -1) => 1,
            _ => 0,
        }
    }
}

/// A configuration in ±1 variables, tagged with its convention.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinVector {
    values: Vec<i8>,
    convention: SpinConvention,
}

impl SpinVector {
    pub fn new(values: Vec<i8>, convention: SpinConvention) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| v.abs() != 1) {
            return Err(Error::InvalidArgument(format!("spin value {v} is not ±1")));
        }
        Ok(Self { values, convention })
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn convention(&self) -> SpinConvention {
        self.convention
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Applies the inverse affine map and recovers the configuration.
    pub fn to_occupation(&self) -> Result<OccupationVector> {
        let bits: Vec<u8> = self.values.iter().map(|&z| self.convention.occupation(z)).collect();
        OccupationVector::from_bits(&bits)
    }

    /// Elementwise negation, keeping the convention tag.
    pub fn negated(&self) -> Self {
        Self { values: self.values.iter().map(|z| -z).collect(), convention: self.convention }
    }
}

pub fn to_spin(n: &OccupationVector, convention: SpinConvention) -> SpinVector {
    SpinVector { values: n.bits().into_iter().map(|b| convention.spin(b)).collect(), convention }
}

/// z_i · z. Lies in {K, K-2, ..., -K}.
pub fn dot_statistics(zi: &SpinVector, z: &SpinVector) -> Result<i64> {
    if zi.len() != z.len() {
        return Err(Error::LengthMismatch { expected: zi.len(), found: z.len() });
    }
    if zi.convention != z.convention {
        return Err(Error::ConventionMismatch(zi.convention, z.convention));
    }
    Ok(zi.values.iter().zip(&z.values).map(|(a, b)| i64::from(a * b)).sum())
}

/// Dense real amplitudes over all 2^K configurations, lexicographic order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct WavefunctionTable {
    k: usize,
    amplitudes: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawTable {
    #[serde(rename = "K")]
    k: usize,
    amplitudes: Vec<f64>,
}

impl TryFrom<RawTable> for WavefunctionTable {
    type Error = Error;
    fn try_from(raw: RawTable) -> Result<Self> {
        WavefunctionTable::new(raw.k, raw.amplitudes)
    }
}

impl From<WavefunctionTable> for RawTable {
    fn from(t: WavefunctionTable) -> Self {
        RawTable { k: t.k, amplitudes: t.amplitudes }
    }
}

/// Tolerance on Σ|Ψ|² for a table to count as normalized.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

impl WavefunctionTable {
    pub fn new(k: usize, amplitudes: Vec<f64>) -> Result<Self> {
        check_orbitals(k)?;
        if amplitudes.len() != dimension(k) {
            return Err(Error::LengthMismatch { expected: dimension(k), found: amplitudes.len() });
        }
        if let Some(i) = amplitudes.iter().position(|a| !a.is_finite()) {
            return Err(Error::Domain(format!("amplitude {} at index {i}", amplitudes[i])));
        }
        Ok(Self { k, amplitudes })
    }

    pub fn zeros(k: usize) -> Result<Self> {
        check_orbitals(k)?;
        Ok(Self { k, amplitudes: vec![0.0; dimension(k)] })
    }

    /// Tabulates `f` over every configuration.
    pub fn from_fn(k: usize, mut f: impl FnMut(OccupationVector) -> f64) -> Result<Self> {
        let amplitudes = enumerate_configs(k)?.into_iter().map(&mut f).collect();
        Self::new(k, amplitudes)
    }

    pub fn orbitals(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<f64> {
        self.amplitudes
    }

    pub fn get(&self, index: usize) -> f64 {
        self.amplitudes[index]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.amplitudes.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    pub fn is_normalized(&self) -> bool {
        (self.amplitudes.iter().map(|a| a * a).sum::<f64>() - 1.0).abs() <= NORMALIZATION_TOLERANCE
    }

    /// Returns the table scaled to unit Euclidean norm.
    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::Domain("cannot normalize an all-zero table".into()));
        }
        Ok(self.map(|a| a / norm))
    }

    /// Elementwise map (the result must stay finite; checked in debug).
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let amplitudes: Vec<f64> = self.amplitudes.iter().map(|&a| f(a)).collect();
        debug_assert!(amplitudes.iter().all(|a| a.is_finite()));
        Self { k: self.k, amplitudes }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.map(|a| a * factor)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// Zero count, negative count and sorted indices of negative amplitudes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignCensus {
    pub zeros: usize,
    pub negatives: usize,
    pub negative_indices: Vec<usize>,
}

pub fn sign_census(psi: &WavefunctionTable) -> SignCensus {
    let mut zeros = 0;
    let mut negative_indices = Vec::new();
    for (i, &a) in psi.amplitudes.iter().enumerate() {
        if a == 0.0 {
            zeros += 1;
        } else if a < 0.0 {
            negative_indices.push(i);
        }
    }
    SignCensus { zeros, negatives: negative_indices.len(), negative_indices }
}
