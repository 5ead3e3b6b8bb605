use super::{apply_program, GateProgram, StateVector};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Data-dependent circuit `x ↦ U(x)`.
pub trait Encoding: Send + Sync {
    /// Length of the input vectors.
    fn input_dim(&self) -> usize;

    fn num_qubits(&self) -> usize;

    fn program(&self, x: &[f64]) -> Result<GateProgram>;

    /// `U(x)|0…0⟩`.
    fn encode(&self, x: &[f64]) -> Result<StateVector> {
        apply_program(&self.program(x)?, &StateVector::zero(self.num_qubits())?)
    }

    fn unitary(&self, x: &[f64]) -> Result<ComplexMatrix> {
        self.program(x)?.unitary()
    }
}

fn check_input(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::DimensionMismatch {
            context: "encoding input",
            expected,
            found: x.len(),
        });
    }
    Ok(())
}

/// `⊗_j R_X(c·x_j)`, one qubit per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleEncoding {
    pub bandwidth: f64,
    pub dim: usize,
}

impl AngleEncoding {
    pub fn new(bandwidth: f64, dim: usize) -> Self {
        Self { bandwidth, dim }
    }
}

impl Encoding for AngleEncoding {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn num_qubits(&self) -> usize {
        self.dim
    }

    fn program(&self, x: &[f64]) -> Result<GateProgram> {
        check_input(self.dim, x)?;
        let mut p = GateProgram::new(self.dim)?;
        for (j, &xj) in x.iter().enumerate() {
            p.rx(j, self.bandwidth * xj)?;
        }
        Ok(p)
    }
}

/// `⊗_j exp(-i·c·x_j·D_s)·H^{⊗s}`, one `s`-qubit block per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierEncoding {
    pub bandwidth: f64,
    pub dim: usize,
    pub eigenvalues: Vec<f64>,
}

impl FourierEncoding {
    pub fn new(bandwidth: f64, dim: usize, eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.len() < 2 || !eigenvalues.len().is_power_of_two() {
            return Err(Error::invalid(format!(
                "Fourier encoding needs 2^s eigenvalues, got {}",
                eigenvalues.len()
            )));
        }
        Ok(Self {
            bandwidth,
            dim,
            eigenvalues,
        })
    }

    pub fn block_qubits(&self) -> usize {
        self.eigenvalues.len().trailing_zeros() as usize
    }
}

impl Encoding for FourierEncoding {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn num_qubits(&self) -> usize {
        self.dim * self.block_qubits()
    }

    fn program(&self, x: &[f64]) -> Result<GateProgram> {
        check_input(self.dim, x)?;
        let s = self.block_qubits();
        let mut p = GateProgram::new(self.num_qubits())?;
        for (j, &xj) in x.iter().enumerate() {
            for k in 0..s {
                p.hadamard(j * s + k)?;
            }
            p.diagonal_phase(j * s, self.bandwidth * xj, &self.eigenvalues)?;
        }
        Ok(p)
    }
}

/// `V(x)^{⊗q}`: `copies` identical blocks of an inner encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableEncoding<E> {
    pub block: E,
    pub copies: usize,
}

impl<E: Encoding> SeparableEncoding<E> {
    pub fn new(block: E, copies: usize) -> Result<Self> {
        if copies == 0 {
            return Err(Error::invalid("separable encoding needs at least one copy"));
        }
        Ok(Self { block, copies })
    }
}

impl<E: Encoding> Encoding for SeparableEncoding<E> {
    fn input_dim(&self) -> usize {
        self.block.input_dim()
    }

    fn num_qubits(&self) -> usize {
        self.block.num_qubits() * self.copies
    }

    fn program(&self, x: &[f64]) -> Result<GateProgram> {
        let block = self.block.program(x)?;
        let s = self.block.num_qubits();
        let mut p = GateProgram::new(self.num_qubits())?;
        for copy in 0..self.copies {
            p.append_shifted(&block, copy * s)?;
        }
        Ok(p)
    }
}
