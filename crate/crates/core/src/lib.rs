//! Local-global quantum kernels.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`] dense real/complex linear algebra (symmetric eigensolver,
//!   pseudo-inverse, shifted solves),
//! * [`qsim`] an exact statevector / density-matrix simulator used as the
//!   oracle for every closed-form kernel,
//! * [`kernels`] closed-form angle and Fourier fidelity kernels, the
//!   local-global combiner `λ_L·k + λ_G·k^q`, and Gram builders,
//! * [`learning`] kernel ridgeless / ridge regression and spectral
//!   diagnostics,
//! * [`harness`] dataset generators, the reproducible experiment runners and
//!   their CSV / PGM / manifest outputs.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(a < b)` deliberately rejects NaN

pub mod error;
pub mod harness;
pub mod kernels;
pub mod learning;
pub mod linalg;
pub mod provenance;
pub mod qsim;

pub use error::{Error, Result};

#[cfg(test)]
mod testutil;
