use nalgebra::{DMatrix, SymmetricEigen};

use super::{check_capacity, StateVector};
use crate::error::{Error, Result};
use crate::linalg::{Complex64, ComplexMatrix};

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
/// Imaginary part of `Tr(ρO)` beyond which the operands are rejected.
const EXPECTATION_IMAG_TOL: f64 = 1e-8;

fn qubits_of(m: &ComplexMatrix) -> Result<usize> {
    let n = m.rows();
    if n != m.cols() {
        return Err(Error::NotSquare {
            rows: n,
            cols: m.cols(),
        });
    }
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::invalid(format!(
            "operator dimension {n} is not a power of two >= 2"
        )));
    }
    let t = n.trailing_zeros() as usize;
    check_capacity(t)?;
    Ok(t)
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NonHermitian { residue: defect });
    }
    Ok(())
}

/// Hermitian, unit-trace operator on `num_qubits` qubits.
///
/// Positivity is not checked on construction (it needs an
/// eigendecomposition); see [`DensityMatrix::min_eigenvalue`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let num_qubits = qubits_of(&matrix)?;
        check_hermitian(&matrix)?;
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::invalid(format!("density matrix trace {tr} != 1")));
        }
        Ok(Self { num_qubits, matrix })
    }

    /// `I / 2^t`.
    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        check_capacity(num_qubits)?;
        let dim = 1usize << num_qubits;
        Ok(Self {
            num_qubits,
            matrix: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        })
    }

    pub(crate) fn from_raw(num_qubits: usize, matrix: ComplexMatrix) -> Self {
        Self { num_qubits, matrix }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `ρ ⊗ σ`.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let t = self.num_qubits + other.num_qubits;
        check_capacity(t)?;
        Ok(Self::from_raw(t, self.matrix.kron(&other.matrix)))
    }

    /// `ρ^{⊗q}`.
    pub fn tensor_power(&self, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid("tensor power needs q >= 1"));
        }
        check_capacity(self.num_qubits * q)?;
        let mut out = self.clone();
        for _ in 1..q {
            out = out.kron(self)?;
        }
        Ok(out)
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self> {
        let m = u.matmul(&self.matrix)?.matmul(&u.adjoint())?;
        Ok(Self::from_raw(self.num_qubits, m))
    }

    /// `Tr(ρ σ)` for two density matrices; real for Hermitian operands.
    pub fn overlap(&self, other: &Self) -> Result<f64> {
        trace_of_product(&self.matrix, &other.matrix)
    }

    /// Smallest eigenvalue of the Hermitian matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let eig = SymmetricEigen::new(self.matrix.as_matrix().clone());
        eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Hermitian operator on `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    num_qubits: usize,
    matrix: ComplexMatrix,
}

impl Observable {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let num_qubits = qubits_of(&matrix)?;
        check_hermitian(&matrix)?;
        Ok(Self { num_qubits, matrix })
    }

    pub fn identity(num_qubits: usize) -> Result<Self> {
        check_capacity(num_qubits)?;
        Ok(Self {
            num_qubits,
            matrix: ComplexMatrix::identity(1 << num_qubits),
        })
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(state: &StateVector) -> Self {
        Self {
            num_qubits: state.num_qubits(),
            matrix: outer(state),
        }
    }

    /// `|0^t⟩⟨0^t|`.
    pub fn zero_projector(num_qubits: usize) -> Result<Self> {
        Ok(Self::projector(&StateVector::zero(num_qubits)?))
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        let t = self.num_qubits + other.num_qubits;
        check_capacity(t)?;
        Ok(Self {
            num_qubits: t,
            matrix: self.matrix.kron(&other.matrix),
        })
    }

    /// `a·self + b·other`.
    pub fn linear_combination(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                context: "observable sum",
                expected: self.num_qubits,
                found: other.num_qubits,
            });
        }
        Ok(Self {
            num_qubits: self.num_qubits,
            matrix: self.matrix.scale(a).add(&other.matrix.scale(b))?,
        })
    }
}

fn outer(state: &StateVector) -> ComplexMatrix {
    let a = state.amplitudes();
    ComplexMatrix::new(a * a.adjoint()).expect("normalized amplitudes are finite")
}

fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    if a.rows() != b.cols() || a.cols() != b.rows() {
        return Err(Error::DimensionMismatch {
            context: "trace of product",
            expected: a.rows(),
            found: b.cols(),
        });
    }
    let (am, bm) = (a.as_matrix(), b.as_matrix());
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..am.nrows() {
        for j in 0..am.ncols() {
            acc += am[(i, j)] * bm[(j, i)];
        }
    }
    if acc.im.abs() > EXPECTATION_IMAG_TOL {
        return Err(Error::NonHermitian { residue: acc.im.abs() });
    }
    Ok(acc.re)
}

/// `|a⟩⟨a|`.
pub fn density_from_state(a: &StateVector) -> DensityMatrix {
    DensityMatrix::from_raw(a.num_qubits(), outer(a))
}

/// Reduced state of the first `keep` qubits (trace over the rest).
pub fn partial_trace(rho: &DensityMatrix, keep: usize) -> Result<DensityMatrix> {
    let t = rho.num_qubits;
    if keep == 0 || keep >= t {
        return Err(Error::SubsystemOutOfRange {
            keep,
            num_qubits: t,
        });
    }
    let traced = t - keep;
    let kept_dim = 1usize << keep;
    let traced_dim = 1usize << traced;
    let m = rho.matrix.as_matrix();
    let reduced = DMatrix::from_fn(kept_dim, kept_dim, |i, j| {
        (0..traced_dim).fold(Complex64::new(0.0, 0.0), |acc, k| {
            acc + m[((i << traced) | k, (j << traced) | k)]
        })
    });
    Ok(DensityMatrix::from_raw(keep, ComplexMatrix::new(reduced)?))
}

/// `Tr(ρ O)`.
pub fn expectation(rho: &DensityMatrix, obs: &Observable) -> Result<f64> {
    if rho.num_qubits != obs.num_qubits {
        return Err(Error::DimensionMismatch {
            context: "expectation value",
            expected: rho.num_qubits,
            found: obs.num_qubits,
        });
    }
    trace_of_product(&rho.matrix, &obs.matrix)
}
