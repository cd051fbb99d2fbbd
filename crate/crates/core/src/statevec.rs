//! Real-amplitude statevectors and amplitude encoding.
//!
//! An `n`-qubit register is modeled as a unit-norm vector of `2^n` real
//! amplitudes; measuring it yields basis index `i` with probability the
//! square of amplitude `i`. All pipeline data (pixels, frame differences) is
//! real, so complex amplitudes are not supported. This module is the
//! classical oracle that every sampled estimate elsewhere is validated
//! against.

use crate::error::{Error, Result};

/// Drift at or below this is accepted as-is.
const RENORM_THRESHOLD: f64 = 1e-12;
/// Drift above this is rejected; between the two thresholds the constructor
/// renormalizes.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// An arbitrary-length classical vector, not necessarily normalized.
///
/// The raw form of pixel frames, difference frames, and class averages
/// before amplitude encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct RawVector {
    values: Vec<f64>,
}

impl RawVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

impl From<Vec<f64>> for RawVector {
    fn from(values: Vec<f64>) -> Self {
        Self::new(values)
    }
}

impl std::ops::Index<usize> for RawVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// A quantum register: `2^n` real amplitudes of unit Euclidean norm.
///
/// Construction enforces the invariants; norm drift in
/// `(1e-12, 1e-10]` is silently repaired, anything beyond is rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    amplitudes: Vec<f64>,
    num_qubits: u32,
}

impl Statevector {
    pub fn new(amplitudes: Vec<f64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo { len });
        }
        let num_qubits = len.trailing_zeros();
        let norm = amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt();
        let drift = (norm - 1.0).abs();
        if drift <= RENORM_THRESHOLD {
            Ok(Self {
                amplitudes,
                num_qubits,
            })
        } else if drift <= NORM_TOLERANCE {
            let mut amplitudes = amplitudes;
            for a in &mut amplitudes {
                *a /= norm;
            }
            Ok(Self {
                amplitudes,
                num_qubits,
            })
        } else {
            Err(Error::NotNormalized { norm })
        }
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn num_qubits(&self) -> u32 {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Amplitude-encodes a classical vector: pads with trailing zeros to the next
/// power of two and divides by the Euclidean norm.
///
/// Trailing-zero padding keeps flat pixel index equal to amplitude index.
pub fn encode_amplitudes(v: &RawVector) -> Result<Statevector> {
    let norm = v.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let padded_len = v.len().next_power_of_two().max(1);
    let mut amplitudes = vec![0.0; padded_len];
    for (slot, value) in amplitudes.iter_mut().zip(v.values()) {
        *slot = value / norm;
    }
    Statevector::new(amplitudes)
}

/// Exact inner product `Σ a_i·b_i` of two equal-length registers.
///
/// The classical oracle for the ancilla-based estimator in `primitives`.
pub fn inner_product_exact(a: &Statevector, b: &Statevector) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x * y)
        .sum())
}

/// Measurement distribution over the computational basis: entry `i` is the
/// square of amplitude `i`.
pub fn measurement_probabilities(s: &Statevector) -> Vec<f64> {
    s.amplitudes().iter().map(|a| a * a).collect()
}
