use nalgebra::DMatrix;

use super::{check_capacity, StateVector};
use crate::error::{Error, Result};
use crate::linalg::{Complex64, ComplexMatrix};

/// A single gate application.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// `[[cos θ/2, i sin θ/2], [i sin θ/2, cos θ/2]]`.
    Rx { qubit: usize, theta: f64 },
    Hadamard { qubit: usize },
    /// `exp(-i·angle·D)` on qubits `first_qubit..first_qubit+s`, with
    /// `D = diag(eigenvalues)` and `eigenvalues.len() == 2^s`.
    DiagonalPhase {
        first_qubit: usize,
        angle: f64,
        eigenvalues: Vec<f64>,
    },
}

impl Gate {
    fn block_size(&self) -> usize {
        match self {
            Gate::DiagonalPhase { eigenvalues, .. } => eigenvalues.len().trailing_zeros() as usize,
            _ => 1,
        }
    }

    fn first_qubit(&self) -> usize {
        match self {
            Gate::Rx { qubit, .. } | Gate::Hadamard { qubit } => *qubit,
            Gate::DiagonalPhase { first_qubit, .. } => *first_qubit,
        }
    }

    fn shifted(&self, offset: usize) -> Gate {
        let mut g = self.clone();
        match &mut g {
            Gate::Rx { qubit, .. } | Gate::Hadamard { qubit } => *qubit += offset,
            Gate::DiagonalPhase { first_qubit, .. } => *first_qubit += offset,
        }
        g
    }
}

/// Ordered list of gates on a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct GateProgram {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl GateProgram {
    pub fn new(num_qubits: usize) -> Result<Self> {
        check_capacity(num_qubits)?;
        Ok(Self {
            num_qubits,
            gates: Vec::new(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        if let Gate::DiagonalPhase { eigenvalues, .. } = &gate {
            if eigenvalues.len() < 2 || !eigenvalues.len().is_power_of_two() {
                return Err(Error::invalid(format!(
                    "diagonal gate needs 2^s eigenvalues, got {}",
                    eigenvalues.len()
                )));
            }
        }
        let last = gate.first_qubit() + gate.block_size() - 1;
        if last >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: last,
                num_qubits: self.num_qubits,
            });
        }
        self.gates.push(gate);
        Ok(self)
    }

    pub fn rx(&mut self, qubit: usize, theta: f64) -> Result<&mut Self> {
        self.push(Gate::Rx { qubit, theta })
    }

    pub fn hadamard(&mut self, qubit: usize) -> Result<&mut Self> {
        self.push(Gate::Hadamard { qubit })
    }

    pub fn diagonal_phase(
        &mut self,
        first_qubit: usize,
        angle: f64,
        eigenvalues: &[f64],
    ) -> Result<&mut Self> {
        self.push(Gate::DiagonalPhase {
            first_qubit,
            angle,
            eigenvalues: eigenvalues.to_vec(),
        })
    }

    /// Appends every gate of `other`, moved up by `offset` qubits.
    pub fn append_shifted(&mut self, other: &GateProgram, offset: usize) -> Result<&mut Self> {
        for g in &other.gates {
            self.push(g.shifted(offset))?;
        }
        Ok(self)
    }

    /// Dense `2^t × 2^t` unitary, column `j` being the image of `|j⟩`.
    pub fn unitary(&self) -> Result<ComplexMatrix> {
        let dim = 1usize << self.num_qubits;
        let mut u = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            let col = apply_program(self, &StateVector::basis(self.num_qubits, j)?)?;
            u.set_column(j, col.amplitudes());
        }
        ComplexMatrix::new(u)
    }
}

/// Applies `p` to `init`, returning the transformed state.
pub fn apply_program(p: &GateProgram, init: &StateVector) -> Result<StateVector> {
    if p.num_qubits != init.num_qubits() {
        return Err(Error::DimensionMismatch {
            context: "gate program register",
            expected: p.num_qubits,
            found: init.num_qubits(),
        });
    }
    let mut state = init.clone();
    for gate in &p.gates {
        apply_gate(p.num_qubits, gate, &mut state);
    }
    Ok(state)
}

fn apply_gate(num_qubits: usize, gate: &Gate, state: &mut StateVector) {
    let amps = state.amplitudes_mut();
    match gate {
        Gate::Rx { qubit, theta } => {
            let c = Complex64::new((theta / 2.0).cos(), 0.0);
            let is = Complex64::new(0.0, (theta / 2.0).sin());
            apply_single(num_qubits, *qubit, [[c, is], [is, c]], amps.as_mut_slice());
        }
        Gate::Hadamard { qubit } => {
            let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            apply_single(num_qubits, *qubit, [[h, h], [h, -h]], amps.as_mut_slice());
        }
        Gate::DiagonalPhase {
            first_qubit,
            angle,
            eigenvalues,
        } => {
            let s = eigenvalues.len().trailing_zeros() as usize;
            let shift = num_qubits - first_qubit - s;
            let mask = eigenvalues.len() - 1;
            let phases: Vec<Complex64> = eigenvalues
                .iter()
                .map(|l| Complex64::from_polar(1.0, -angle * l))
                .collect();
            for (idx, a) in amps.iter_mut().enumerate() {
                *a *= phases[(idx >> shift) & mask];
            }
        }
    }
}

fn apply_single(num_qubits: usize, qubit: usize, m: [[Complex64; 2]; 2], amps: &mut [Complex64]) {
    let mask = 1usize << (num_qubits - 1 - qubit);
    for i0 in 0..amps.len() {
        if i0 & mask != 0 {
            continue;
        }
        let i1 = i0 | mask;
        let (a0, a1) = (amps[i0], amps[i1]);
        amps[i0] = m[0][0] * a0 + m[0][1] * a1;
        amps[i1] = m[1][0] * a0 + m[1][1] * a1;
    }
}
