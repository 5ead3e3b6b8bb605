use rand::distr::{Bernoulli, Distribution};
use rand::Rng;

use super::{fidelity, StateVector};
use crate::error::{Error, Result};

/// Mean of `shots` Bernoulli(`p`) outcomes.
///
/// Models estimating a projective-measurement probability from a finite
/// number of circuit repetitions.
pub fn estimate_prob_shots<R: Rng + ?Sized>(p: f64, shots: usize, rng: &mut R) -> Result<f64> {
    if shots == 0 {
        return Err(Error::invalid("shot count must be >= 1"));
    }
    let dist = Bernoulli::new(p).map_err(|_| Error::InvalidProbability(p))?;
    let hits = (0..shots).filter(|_| dist.sample(rng)).count();
    Ok(hits as f64 / shots as f64)
}

/// Shot estimate of `|⟨a|b⟩|²`.
pub fn estimate_fidelity_shots<R: Rng + ?Sized>(
    a: &StateVector,
    b: &StateVector,
    shots: usize,
    rng: &mut R,
) -> Result<f64> {
    estimate_prob_shots(fidelity(a, b)?, shots, rng)
}
