//! Oracle-equivalence checks between the closed-form kernels and the
//! statevector / density-matrix simulator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::kernels::{angle_base_kernel, fourier_base_kernel, local_global_kernel, paper_eigenvalues, KernelSpec};
use crate::linalg::Complex64;
use crate::qsim::{
    circuit_local_global_kernel, estimate_prob_shots, fidelity, local_kernel_via_partial_trace,
    local_kernel_via_states, AngleEncoding, Encoding, FourierEncoding, StateVector,
};

/// Largest disagreement over a batch of random cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agreement {
    pub cases: usize,
    pub max_abs_error: f64,
}

impl Agreement {
    fn new() -> Self {
        Self {
            cases: 0,
            max_abs_error: 0.0,
        }
    }

    fn record(&mut self, a: f64, b: f64) {
        self.cases += 1;
        let e = (a - b).abs();
        self.max_abs_error = if e.is_nan() { f64::INFINITY } else { self.max_abs_error.max(e) };
    }
}

fn point(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()
}

/// Closed-form angle kernel against `|⟨ψ(x)|ψ(z)⟩|²`, `pairs` random
/// pairs with `d ∈ {1, 2, 3}`.
pub fn angle_vs_statevector(pairs: usize, seed: u64) -> Result<Agreement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agg = Agreement::new();
    for i in 0..pairs {
        let d = 1 + i % 3;
        let c = rng.random_range(0.1..3.0);
        let (x, z) = (point(d, &mut rng), point(d, &mut rng));
        let enc = AngleEncoding::new(c, d);
        let sim = fidelity(&enc.encode(&x)?, &enc.encode(&z)?)?;
        agg.record(angle_base_kernel(c, &x, &z)?, sim);
    }
    Ok(agg)
}

/// Closed-form Fourier kernel against the simulated encoding, `d ≤ 2`,
/// `s ≤ 3`.
pub fn fourier_vs_statevector(pairs: usize, seed: u64) -> Result<Agreement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agg = Agreement::new();
    for i in 0..pairs {
        let d = 1 + i % 2;
        let s = 1 + (i / 2) % 3;
        let c = rng.random_range(0.1..3.0);
        let (x, z) = (point(d, &mut rng), point(d, &mut rng));
        let enc = FourierEncoding::new(c, d, paper_eigenvalues(s as u32))?;
        let sim = fidelity(&enc.encode(&x)?, &enc.encode(&z)?)?;
        agg.record(fourier_base_kernel(&KernelSpec::fourier(c, s as u32), &x, &z)?, sim);
    }
    Ok(agg)
}

/// `Tr[σ̃^{⊗q} O]` against `λ_L k + λ_G k^q` for one-qubit angle blocks.
pub fn observable_vs_closed_form(
    pairs: usize,
    degrees: &[usize],
    lambda_local: f64,
    lambda_global: f64,
    seed: u64,
) -> Result<Agreement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agg = Agreement::new();
    for &q in degrees {
        for _ in 0..pairs {
            let c = rng.random_range(0.1..3.0);
            let (x, z) = (point(1, &mut rng), point(1, &mut rng));
            let block = AngleEncoding::new(c, 1);
            let circuit = circuit_local_global_kernel(&block, &x, &z, q, lambda_local, lambda_global)?;
            let spec = KernelSpec::angle(c)
                .with_weights(lambda_local, lambda_global)
                .with_degree(q as u32);
            agg.record(circuit, local_global_kernel(&spec, &x, &z)?);
        }
    }
    Ok(agg)
}

fn random_state(t: usize, rng: &mut ChaCha8Rng) -> Result<StateVector> {
    let amps = (0..1 << t)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    StateVector::normalized(amps)
}

/// Local kernel from the full-register states `Tr[ρ_x^L ρ_z^L]` against the
/// partial-trace form `Tr[Tr_{s+1:t}(σ) L] / 2^{t-s}`, for every `t ≤ 4`,
/// `s < t`. The encodings use random diagonal spectra so the register is
/// entangled across blocks, and `L` is a random `s`-qubit state.
pub fn partial_trace_identity(cases_per_shape: usize, seed: u64) -> Result<Agreement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agg = Agreement::new();
    for t in 2..=4usize {
        for s in 1..t {
            for _ in 0..cases_per_shape {
                let eigenvalues = (0..1 << t).map(|_| rng.random_range(-2.0..2.0)).collect();
                let enc = FourierEncoding::new(rng.random_range(0.3..2.0), 1, eigenvalues)?;
                let local = random_state(s, &mut rng)?;
                let (x, z) = (point(1, &mut rng), point(1, &mut rng));
                agg.record(
                    local_kernel_via_states(&enc, &x, &z, &local)?,
                    local_kernel_via_partial_trace(&enc, &x, &z, &local)?,
                );
            }
        }
    }
    Ok(agg)
}

/// Sample standard deviation of `reps` shot estimates of `p` at `shots`.
pub fn shot_estimate_std(p: f64, shots: usize, reps: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let est = (0..reps)
        .map(|_| estimate_prob_shots(p, shots, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let mean = est.iter().sum::<f64>() / reps as f64;
    let var = est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    Ok(var.sqrt())
}

/// One line of the `verify` report.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Runs every oracle comparison at its acceptance tolerance.
pub fn oracle_suite(seed: u64) -> Result<Vec<Check>> {
    let within = |name, a: Agreement, tol: f64| Check {
        name,
        passed: a.max_abs_error <= tol,
        detail: format!("{} cases, max |error| = {:e} (tol {tol:e})", a.cases, a.max_abs_error),
    };
    let ratio = shot_estimate_std(0.5, 100, 200, seed)? / shot_estimate_std(0.5, 10_000, 200, seed + 1)?;
    Ok(vec![
        within("angle closed form vs statevector", angle_vs_statevector(20, seed)?, 1e-10),
        within("fourier closed form vs statevector", fourier_vs_statevector(20, seed)?, 1e-10),
        within(
            "local-global observable vs closed form",
            observable_vs_closed_form(10, &[2, 3], 1.0, 0.1, seed)?,
            1e-10,
        ),
        within("partial-trace local kernel", partial_trace_identity(4, seed)?, 1e-12),
        Check {
            name: "shot estimator std scaling",
            passed: (5.0..=20.0).contains(&ratio),
            detail: format!("std(m=1e2)/std(m=1e4) = {ratio:.3} (expect 10, accept [5, 20])"),
        },
    ])
}
