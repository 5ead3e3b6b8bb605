//! Density-matrix routes to the local, global and local-global kernels.
//!
//! These build every object as an explicit `2^t × 2^t` matrix and serve as
//! the reference the closed forms in [`crate::kernels`] are checked against.

use super::{
    apply_program, check_capacity, density_from_state, expectation, partial_trace, DensityMatrix,
    Encoding, Observable, StateVector,
};
use crate::error::{Error, Result};

fn local_reference(enc: &dyn Encoding, local: &StateVector) -> Result<DensityMatrix> {
    let t = enc.num_qubits();
    let s = local.num_qubits();
    if s >= t {
        return Err(Error::SubsystemOutOfRange { keep: s, num_qubits: t });
    }
    density_from_state(local).kron(&DensityMatrix::maximally_mixed(t - s)?)
}

/// `σ_{x,z} = U†(z) U(x) (L ⊗ I/2^{t-s}) U†(x) U(z)` with `L = |local⟩⟨local|`.
pub fn sigma_xz(
    enc: &dyn Encoding,
    x: &[f64],
    z: &[f64],
    local: &StateVector,
) -> Result<DensityMatrix> {
    let base = local_reference(enc, local)?;
    let w = enc.unitary(z)?.adjoint().matmul(&enc.unitary(x)?)?;
    base.conjugate(&w)
}

/// `Tr[ρ_x^L ρ_z^L]` from the full-register local states.
pub fn local_kernel_via_states(
    enc: &dyn Encoding,
    x: &[f64],
    z: &[f64],
    local: &StateVector,
) -> Result<f64> {
    let base = local_reference(enc, local)?;
    let rho_x = base.conjugate(&enc.unitary(x)?)?;
    let rho_z = base.conjugate(&enc.unitary(z)?)?;
    rho_x.overlap(&rho_z)
}

/// `Tr[Tr_{s+1:t}(σ_{x,z}) · L] / 2^{t-s}`.
pub fn local_kernel_via_partial_trace(
    enc: &dyn Encoding,
    x: &[f64],
    z: &[f64],
    local: &StateVector,
) -> Result<f64> {
    let s = local.num_qubits();
    let sigma = sigma_xz(enc, x, z, local)?;
    let reduced = partial_trace(&sigma, s)?;
    let scale = (1u64 << (enc.num_qubits() - s)) as f64;
    Ok(expectation(&reduced, &Observable::projector(local))? / scale)
}

/// `|⟨g|U†(x) U(z)|g⟩|²`, the fidelity kernel for the global reference `g`.
pub fn global_kernel(enc: &dyn Encoding, x: &[f64], z: &[f64], global: &StateVector) -> Result<f64> {
    let phi_x = apply_program(&enc.program(x)?, global)?;
    let phi_z = apply_program(&enc.program(z)?, global)?;
    let rho_x = density_from_state(&phi_x);
    let rho_z = density_from_state(&phi_z);
    rho_x.overlap(&rho_z)
}

/// `σ̃_{x,z} = V†(z) V(x) |0^s⟩⟨0^s| V†(x) V(z)` for an `s`-qubit block.
pub fn reduced_sigma(block: &dyn Encoding, x: &[f64], z: &[f64]) -> Result<DensityMatrix> {
    let zero = density_from_state(&StateVector::zero(block.num_qubits())?);
    let w = block.unitary(z)?.adjoint().matmul(&block.unitary(x)?)?;
    zero.conjugate(&w)
}

/// `O = λ_L·(|0^s⟩⟨0^s| ⊗ I^{⊗(q-1)}) + λ_G·(|0^s⟩⟨0^s|)^{⊗q}`.
pub fn local_global_observable(
    s: usize,
    q: usize,
    lambda_local: f64,
    lambda_global: f64,
) -> Result<Observable> {
    if q == 0 {
        return Err(Error::invalid("observable degree q must be >= 1"));
    }
    check_capacity(s * q)?;
    let p0 = Observable::zero_projector(s)?;
    let mut local = p0.clone();
    let mut global = p0.clone();
    for _ in 1..q {
        local = local.kron(&Observable::identity(s)?)?;
        global = global.kron(&p0)?;
    }
    local.linear_combination(lambda_local, &global, lambda_global)
}

/// `Tr[σ̃^{⊗q} O]`, the expectation measured by the `t = q·s` qubit circuit.
pub fn circuit_local_global_kernel(
    block: &dyn Encoding,
    x: &[f64],
    z: &[f64],
    q: usize,
    lambda_local: f64,
    lambda_global: f64,
) -> Result<f64> {
    let s = block.num_qubits();
    let sigma = reduced_sigma(block, x, z)?.tensor_power(q)?;
    let obs = local_global_observable(s, q, lambda_local, lambda_global)?;
    expectation(&sigma, &obs)
}
