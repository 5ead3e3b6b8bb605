use nalgebra::DVector;

use super::check_capacity;
use crate::error::{Error, Result};
use crate::linalg::Complex64;

/// Normalized pure state of `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    pub const NORM_TOL: f64 = 1e-12;

    /// `|0…0⟩`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_capacity(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::invalid(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = DVector::zeros(dim);
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Wraps amplitudes that are already normalized.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let num_qubits = qubits_for_len(amplitudes.len())?;
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            num_qubits,
            amplitudes: v,
        })
    }

    /// Normalizes arbitrary non-zero amplitudes.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let num_qubits = qubits_for_len(amplitudes.len())?;
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            num_qubits,
            amplitudes: v / Complex64::new(norm, 0.0),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut DVector<Complex64> {
        &mut self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                context: "state inner product",
                expected: self.num_qubits,
                found: other.num_qubits,
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|self⟩ ⊗ |other⟩`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let num_qubits = self.num_qubits + other.num_qubits;
        check_capacity(num_qubits)?;
        Ok(Self {
            num_qubits,
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        })
    }
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::invalid(format!(
            "amplitude count {len} is not a power of two >= 2"
        )));
    }
    let t = len.trailing_zeros() as usize;
    check_capacity(t)?;
    Ok(t)
}

/// `|⟨a|b⟩|²`, clamped into `[0, 1]` against rounding.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().clamp(0.0, 1.0))
}
