use rand::Rng;

use crate::linalg::Complex64;
use crate::qsim::StateVector;

pub(crate) fn random_state(t: usize, rng: &mut impl Rng) -> StateVector {
    let amps = (0..1 << t)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    StateVector::normalized(amps).unwrap()
}

pub(crate) fn random_vec(d: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(lo..hi)).collect()
}
