//! Exact quantum simulator.
//!
//! Qubit 0 is the most significant bit of a basis-state index, so "the first
//! `s` qubits" are the leading `s` bits and `A ⊗ B` places `A` on the low
//! qubit indices. All dense paths are capped at [`MAX_QUBITS`].

mod density;
mod encoding;
mod local_global;
mod program;
mod shots;
mod state;

pub use density::{density_from_state, expectation, partial_trace, DensityMatrix, Observable};
pub use encoding::{AngleEncoding, Encoding, FourierEncoding, SeparableEncoding};
pub use local_global::{
    circuit_local_global_kernel, global_kernel, local_global_observable,
    local_kernel_via_partial_trace, local_kernel_via_states, reduced_sigma, sigma_xz,
};
pub use program::{apply_program, Gate, GateProgram};
pub use shots::{estimate_fidelity_shots, estimate_prob_shots};
pub use state::{fidelity, StateVector};

/// Largest register the dense simulator accepts (4096 amplitudes).
pub const MAX_QUBITS: usize = 12;

pub(crate) fn check_capacity(num_qubits: usize) -> crate::Result<()> {
    if num_qubits == 0 {
        return Err(crate::Error::invalid("register needs at least one qubit"));
    }
    if num_qubits > MAX_QUBITS {
        return Err(crate::Error::Capacity {
            num_qubits,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}
