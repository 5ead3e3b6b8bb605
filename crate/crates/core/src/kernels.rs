//! Closed-form fidelity kernels and the local-global combiner.
//!
//! Two base kernels are supported, both equal to `|⟨φ_x|φ_z⟩|²` for a
//! product encoding and therefore both translation invariant with
//! `k(x, x) = 1`:
//!
//! * angle: `∏_j cos²(c·(x_j - z_j)/2)`
//! * Fourier: `∏_j |2^{-s} Σ_a exp(-i·c·λ_a·(x_j - z_j))|²`
//!
//! The local-global kernel is `λ_L·k + λ_G·k^q` (see [`GlobalPower`] for the
//! two exponent conventions).

use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{check_len, RealSymMatrix};
use crate::provenance::digest_f64s;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Angle,
    Fourier,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Angle => "angle",
            Family::Fourier => "fourier",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "angle" => Ok(Family::Angle),
            "fourier" => Ok(Family::Fourier),
            other => Err(Error::invalid(format!("unknown kernel family '{other}'"))),
        }
    }
}

/// How the degree `q` turns the base kernel into the global term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GlobalPower {
    /// `k^q`: `q` copies of the encoding block.
    #[default]
    Degree,
    /// `k^{2^{q-1}}`, i.e. `cos^{2^q}` for the one-dimensional angle kernel.
    Dyadic,
}

impl GlobalPower {
    pub fn name(self) -> &'static str {
        match self {
            GlobalPower::Degree => "degree",
            GlobalPower::Dyadic => "dyadic",
        }
    }

    /// `k` raised to the global exponent for degree `q`.
    pub fn apply(self, k: f64, q: u32) -> f64 {
        match self {
            GlobalPower::Degree => k.powi(q as i32),
            GlobalPower::Dyadic => {
                let mut v = k;
                for _ in 1..q {
                    v *= v;
                }
                v
            }
        }
    }
}

impl std::str::FromStr for GlobalPower {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "degree" => Ok(GlobalPower::Degree),
            "dyadic" => Ok(GlobalPower::Dyadic),
            other => Err(Error::invalid(format!("unknown global power '{other}'"))),
        }
    }
}

/// Eigenvalues `(1, 1/2, …, 1/2^{s-1}, -1, -1/2, …, -1/2^{s-1})` of the
/// Fourier generator `D_s`.
pub fn paper_eigenvalues(s: u32) -> Vec<f64> {
    let half = 1usize << s.saturating_sub(1);
    let positive: Vec<f64> = (1..=half).map(|m| 1.0 / m as f64).collect();
    positive
        .iter()
        .copied()
        .chain(positive.iter().map(|v| -v))
        .collect()
}

/// Full description of a local-global kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub family: Family,
    pub bandwidth: f64,
    /// Qubits per input feature (Fourier only; the angle family uses 1).
    pub subsystem_size: u32,
    pub degree: u32,
    pub lambda_local: f64,
    pub lambda_global: f64,
    pub global_power: GlobalPower,
    pub fourier_eigenvalues: Option<Vec<f64>>,
}

impl KernelSpec {
    /// Angle kernel, local term only.
    pub fn angle(bandwidth: f64) -> Self {
        Self {
            family: Family::Angle,
            bandwidth,
            subsystem_size: 1,
            degree: 1,
            lambda_local: 1.0,
            lambda_global: 0.0,
            global_power: GlobalPower::Degree,
            fourier_eigenvalues: None,
        }
    }

    /// Fourier kernel on `s` qubits per feature with [`paper_eigenvalues`],
    /// local term only.
    pub fn fourier(bandwidth: f64, s: u32) -> Self {
        Self {
            family: Family::Fourier,
            bandwidth,
            subsystem_size: s,
            degree: 1,
            lambda_local: 1.0,
            lambda_global: 0.0,
            global_power: GlobalPower::Degree,
            fourier_eigenvalues: Some(paper_eigenvalues(s)),
        }
    }

    pub fn with_weights(mut self, lambda_local: f64, lambda_global: f64) -> Self {
        self.lambda_local = lambda_local;
        self.lambda_global = lambda_global;
        self
    }

    pub fn with_degree(mut self, q: u32) -> Self {
        self.degree = q;
        self
    }

    pub fn with_global_power(mut self, power: GlobalPower) -> Self {
        self.global_power = power;
        self
    }

    pub fn with_eigenvalues(mut self, eigenvalues: Vec<f64>) -> Self {
        self.fourier_eigenvalues = Some(eigenvalues);
        self
    }

    /// `λ_L·k + λ_G·k^q` with the given weights and degree.
    pub fn local_global(self, lambda_global: f64, q: u32) -> Self {
        self.with_weights(1.0, lambda_global).with_degree(q)
    }

    /// The base kernel alone: unit local weight, no global term.
    pub fn local_only(&self) -> Self {
        self.clone().with_weights(1.0, 0.0)
    }

    /// The same spec reduced to its global term with unit weight.
    pub fn global_only(&self) -> Self {
        self.clone().with_weights(0.0, 1.0)
    }

    /// `λ_L·k + λ_G·k^q` for a precomputed base value `k`.
    pub fn combine(&self, k: f64) -> f64 {
        let mut v = self.lambda_local * k;
        if self.lambda_global != 0.0 {
            v += self.lambda_global * self.global_power.apply(k, self.degree);
        }
        v
    }

    /// Value of `k(x, x)`.
    pub fn diagonal_value(&self) -> f64 {
        self.lambda_local + self.lambda_global
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth > 0.0) || !self.bandwidth.is_finite() {
            return Err(Error::invalid(format!(
                "bandwidth must be > 0, got {}",
                self.bandwidth
            )));
        }
        if self.degree == 0 {
            return Err(Error::invalid("degree q must be >= 1"));
        }
        if !(self.lambda_local >= 0.0) || !(self.lambda_global >= 0.0) {
            return Err(Error::invalid("kernel weights must be >= 0"));
        }
        if !(self.diagonal_value() > 0.0) || !self.diagonal_value().is_finite() {
            return Err(Error::invalid("lambda_local + lambda_global must be > 0"));
        }
        if self.family == Family::Fourier {
            if self.subsystem_size == 0 || self.subsystem_size > 20 {
                return Err(Error::invalid(format!(
                    "Fourier subsystem size must be in 1..=20, got {}",
                    self.subsystem_size
                )));
            }
            match &self.fourier_eigenvalues {
                None => return Err(Error::invalid("Fourier kernel needs an eigenvalue list")),
                Some(ev) if ev.len() != 1usize << self.subsystem_size => {
                    return Err(Error::invalid(format!(
                        "Fourier eigenvalue list has {} entries, expected 2^{} = {}",
                        ev.len(),
                        self.subsystem_size,
                        1usize << self.subsystem_size
                    )))
                }
                Some(ev) if ev.iter().any(|v| !v.is_finite()) => {
                    return Err(Error::NonFinite("Fourier eigenvalues"))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Validated evaluator for repeated kernel calls.
    pub fn evaluator(&self) -> Result<KernelEvaluator> {
        self.validate()?;
        let scaled = self
            .fourier_eigenvalues
            .as_ref()
            .map(|ev| ev.iter().map(|l| self.bandwidth * l).collect())
            .unwrap_or_default();
        Ok(KernelEvaluator {
            spec: self.clone(),
            scaled_eigenvalues: scaled,
        })
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} c={} s={} q={} ({}) lambda_local={} lambda_global={}",
            self.family.name(),
            self.bandwidth,
            self.subsystem_size,
            self.degree,
            self.global_power.name(),
            self.lambda_local,
            self.lambda_global
        )
    }
}

/// Pre-validated kernel; evaluation skips per-call checks.
#[derive(Debug, Clone)]
pub struct KernelEvaluator {
    spec: KernelSpec,
    /// `c·λ_a` for the Fourier family.
    scaled_eigenvalues: Vec<f64>,
}

impl KernelEvaluator {
    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    /// Base kernel `k(x, z)`; `x` and `z` must have equal length.
    pub fn base(&self, x: &[f64], z: &[f64]) -> f64 {
        match self.spec.family {
            Family::Angle => angle_product(self.spec.bandwidth, x, z),
            Family::Fourier => fourier_product(&self.scaled_eigenvalues, x, z),
        }
    }

    /// `k(x, z)^q` under the spec's [`GlobalPower`].
    pub fn global(&self, x: &[f64], z: &[f64]) -> f64 {
        self.spec
            .global_power
            .apply(self.base(x, z), self.spec.degree)
    }

    /// `λ_L·k + λ_G·k^q`.
    pub fn local_global(&self, x: &[f64], z: &[f64]) -> f64 {
        self.spec.combine(self.base(x, z))
    }
}

fn angle_product(c: f64, x: &[f64], z: &[f64]) -> f64 {
    x.iter()
        .zip(z)
        .map(|(a, b)| {
            let h = (0.5 * c * (a - b)).cos();
            h * h
        })
        .product()
}

fn fourier_product(scaled_eigenvalues: &[f64], x: &[f64], z: &[f64]) -> f64 {
    let norm = 1.0 / scaled_eigenvalues.len() as f64;
    x.iter()
        .zip(z)
        .map(|(a, b)| {
            let delta = a - b;
            let (mut re, mut im) = (0.0, 0.0);
            for l in scaled_eigenvalues {
                let (s, c) = (l * delta).sin_cos();
                re += c;
                im -= s;
            }
            (re * norm).powi(2) + (im * norm).powi(2)
        })
        .product()
}

/// `∏_j cos²(c·(x_j - z_j)/2)`.
pub fn angle_base_kernel(c: f64, x: &[f64], z: &[f64]) -> Result<f64> {
    check_len("angle kernel inputs", x.len(), z.len())?;
    Ok(angle_product(c, x, z))
}

/// `∏_j |2^{-s} Σ_a exp(-i·c·λ_a·(x_j - z_j))|²`.
pub fn fourier_base_kernel(spec: &KernelSpec, x: &[f64], z: &[f64]) -> Result<f64> {
    check_len("Fourier kernel inputs", x.len(), z.len())?;
    let ev = spec
        .fourier_eigenvalues
        .as_ref()
        .ok_or_else(|| Error::invalid("Fourier kernel needs an eigenvalue list"))?;
    let scaled: Vec<f64> = ev.iter().map(|l| spec.bandwidth * l).collect();
    Ok(fourier_product(&scaled, x, z))
}

/// The spec's base kernel `k(x, z)`.
pub fn base_kernel(spec: &KernelSpec, x: &[f64], z: &[f64]) -> Result<f64> {
    check_len("kernel inputs", x.len(), z.len())?;
    Ok(spec.evaluator()?.base(x, z))
}

/// `λ_L·k(x, z) + λ_G·k(x, z)^q`.
pub fn local_global_kernel(spec: &KernelSpec, x: &[f64], z: &[f64]) -> Result<f64> {
    check_len("kernel inputs", x.len(), z.len())?;
    Ok(spec.evaluator()?.local_global(x, z))
}

/// `k(x, z)^q`.
pub fn global_kernel_only(spec: &KernelSpec, x: &[f64], z: &[f64]) -> Result<f64> {
    check_len("kernel inputs", x.len(), z.len())?;
    Ok(spec.evaluator()?.global(x, z))
}

/// Kernel matrix with the spec and data it was built from.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub entries: RealSymMatrix,
    pub spec: KernelSpec,
    pub dataset_digest: String,
    pub seed: u64,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.entries.dim()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

fn rows_of(x: &DMatrix<f64>) -> Vec<Vec<f64>> {
    x.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Symmetric matrix `F(x_i, x_j)` evaluated on the upper triangle in
/// parallel, diagonal fixed to `diag`.
fn symmetric_fill(
    rows: &[Vec<f64>],
    diag: f64,
    f: impl Fn(&[f64], &[f64]) -> f64 + Sync,
) -> Result<RealSymMatrix> {
    let n = rows.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i + 1..n).map(|j| f(&rows[i], &rows[j])).collect())
        .collect();
    let mut m = DMatrix::from_element(n, n, diag);
    for (i, row) in upper.iter().enumerate() {
        for (offset, &v) in row.iter().enumerate() {
            let j = i + 1 + offset;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    RealSymMatrix::new(m)
}

/// `K_ij = k_LG(x_i, x_j)` over the rows of `x`.
pub fn gram(spec: &KernelSpec, x: &DMatrix<f64>) -> Result<GramMatrix> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::EmptyDataset);
    }
    let eval = spec.evaluator()?;
    let rows = rows_of(x);
    let entries = symmetric_fill(&rows, spec.diagonal_value(), |a, b| eval.local_global(a, b))?;
    Ok(GramMatrix {
        entries,
        spec: spec.clone(),
        dataset_digest: digest_f64s(x.iter()),
        seed: 0,
    })
}

/// Gram matrix of the global term alone, `k(x_i, x_j)^q`.
pub fn global_gram(spec: &KernelSpec, x: &DMatrix<f64>) -> Result<GramMatrix> {
    gram(&spec.global_only(), x)
}

/// Applies `spec` entrywise to a base-kernel Gram (one built from
/// `spec.local_only()`), avoiding a second pass over the data.
pub fn lift_gram(spec: &KernelSpec, base: &GramMatrix) -> Result<GramMatrix> {
    spec.validate()?;
    let entries = RealSymMatrix::new(base.entries.as_matrix().map(|k| spec.combine(k)))?;
    Ok(GramMatrix {
        entries,
        spec: spec.clone(),
        dataset_digest: base.dataset_digest.clone(),
        seed: base.seed,
    })
}

/// `K[i, j] = k_LG(train_i, test_j)`, shape `n_train × n_test`.
pub fn cross_gram(
    spec: &KernelSpec,
    train: &DMatrix<f64>,
    test: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    check_len("cross-Gram feature dimension", train.ncols(), test.ncols())?;
    if train.nrows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let eval = spec.evaluator()?;
    let tr = rows_of(train);
    let te = rows_of(test);
    let cols: Vec<Vec<f64>> = te
        .par_iter()
        .map(|z| tr.iter().map(|x| eval.local_global(x, z)).collect())
        .collect();
    Ok(DMatrix::from_fn(tr.len(), te.len(), |i, j| cols[j][i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{
        global_kernel, fidelity, AngleEncoding, Encoding, FourierEncoding, SeparableEncoding,
        StateVector,
    };
    use crate::testutil::random_vec;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn lifted_gram_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let x = DMatrix::from_fn(9, 2, |_, _| rng.random_range(-1.0..1.0));
        let spec = KernelSpec::fourier(0.8, 2).local_global(0.3, 6);
        let base = gram(&spec.local_only(), &x).unwrap();
        let lifted = lift_gram(&spec, &base).unwrap();
        assert_eq!(lifted.entries, gram(&spec, &x).unwrap().entries);
    }

    #[test]
    fn angle_examples() {
        assert_eq!(angle_base_kernel(1.3, &[0.2, -0.5], &[0.2, -0.5]).unwrap(), 1.0);
        assert!(angle_base_kernel(PI, &[0.0], &[1.0]).unwrap() < 1e-30);
        // statevector oracle: R_X(c·0)|0> vs R_X(c·1)|0>
        let enc = AngleEncoding::new(0.75 * PI, 1);
        let oracle = fidelity(&enc.encode(&[0.0]).unwrap(), &enc.encode(&[1.0]).unwrap()).unwrap();
        let k = angle_base_kernel(0.75 * PI, &[0.0], &[1.0]).unwrap();
        assert!((k - 0.146_446_609_406_726_3).abs() < 1e-12);
        assert!((k - oracle).abs() < 1e-12);
        let k = angle_base_kernel(PI / 2.0, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((k - 0.25).abs() < 1e-15);
        assert!(angle_base_kernel(1.0, &[0.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn fourier_examples() {
        let spec = KernelSpec::fourier(1.0, 1);
        assert_eq!(fourier_base_kernel(&spec, &[0.4], &[0.4]).unwrap(), 1.0);
        let k = fourier_base_kernel(&spec, &[0.0], &[1.0]).unwrap();
        assert!((k - 1f64.cos().powi(2)).abs() < 1e-15);
        assert!((k - 0.291_926_581_726_428_9).abs() < 1e-12);
        let enc = FourierEncoding::new(1.0, 1, vec![1.0, -1.0]).unwrap();
        let oracle = fidelity(&enc.encode(&[0.0]).unwrap(), &enc.encode(&[1.0]).unwrap()).unwrap();
        assert!((k - oracle).abs() < 1e-12);

        let mut missing = spec.clone();
        missing.fourier_eigenvalues = None;
        assert!(fourier_base_kernel(&missing, &[0.0], &[1.0]).is_err());
        assert!(fourier_base_kernel(&spec, &[0.0], &[1.0, 0.0]).is_err());
    }

    /// `(1/2^{2s}) Σ_{a,b} exp(-i·c·(λ_a - λ_b)·Δ)`, per coordinate.
    fn fourier_double_sum(c: f64, ev: &[f64], x: &[f64], z: &[f64]) -> f64 {
        let m = ev.len() as f64;
        x.iter()
            .zip(z)
            .map(|(a, b)| {
                let d = a - b;
                let mut re = 0.0;
                let mut im = 0.0;
                for la in ev {
                    for lb in ev {
                        let ph = -c * (la - lb) * d;
                        re += ph.cos();
                        im += ph.sin();
                    }
                }
                assert!(im.abs() < 1e-9);
                re / (m * m)
            })
            .product()
    }

    #[test]
    fn fourier_double_sum_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for s in [2u32, 3, 5] {
            let spec = KernelSpec::fourier(1.0, s);
            for _ in 0..10 {
                let x = random_vec(2, -1.0, 1.0, &mut rng);
                let z = random_vec(2, -1.0, 1.0, &mut rng);
                let fast = fourier_base_kernel(&spec, &x, &z).unwrap();
                let slow = fourier_double_sum(1.0, spec.fourier_eigenvalues.as_ref().unwrap(), &x, &z);
                assert!((fast - slow).abs() < 1e-12, "s={s}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn eigenvalue_lists() {
        assert_eq!(paper_eigenvalues(1), vec![1.0, -1.0]);
        assert_eq!(paper_eigenvalues(2), vec![1.0, 0.5, -1.0, -0.5]);
        let e5 = paper_eigenvalues(5);
        assert_eq!(e5.len(), 32);
        for i in 0..16 {
            assert_eq!(e5[i], -e5[i + 16]);
            assert!(e5[i] > 0.0 && e5[i] <= 1.0);
        }
    }

    #[test]
    fn local_global_examples() {
        let spec = KernelSpec::angle(0.75 * PI).with_weights(1.0, 0.1).with_degree(4);
        assert!((local_global_kernel(&spec, &[0.3], &[0.3]).unwrap() - 1.1).abs() < 1e-15);
        // base k = 0.5 at c·Δ/2 = π/4
        let k_half = local_global_kernel(&KernelSpec::angle(PI / 2.0).local_global(0.1, 4), &[0.0], &[1.0])
            .unwrap();
        assert!((k_half - 0.50625).abs() < 1e-15);
    }

    #[test]
    fn global_only_examples() {
        let spec = KernelSpec::angle(1.0).with_degree(7);
        assert_eq!(global_kernel_only(&spec, &[0.1, 0.2], &[0.1, 0.2]).unwrap(), 1.0);
        assert_eq!(GlobalPower::Degree.apply(0.9, 200), 0.9f64.powi(200));
        assert!((GlobalPower::Degree.apply(0.9, 200) - 7.055_079_108_655_367e-10).abs() < 1e-20);
        assert_eq!(GlobalPower::Degree.apply(0.0, 3), 0.0);
        assert_eq!(GlobalPower::Dyadic.apply(0.5, 1), 0.5);
        assert_eq!(GlobalPower::Dyadic.apply(0.5, 4), 0.5f64.powi(8));
    }

    #[test]
    fn spec_validation() {
        assert!(KernelSpec::angle(0.0).validate().is_err());
        assert!(KernelSpec::angle(1.0).with_weights(0.0, 0.0).validate().is_err());
        assert!(KernelSpec::angle(1.0).with_weights(-1.0, 2.0).validate().is_err());
        assert!(KernelSpec::angle(1.0).with_degree(0).validate().is_err());
        assert!(KernelSpec::fourier(1.0, 2).with_eigenvalues(vec![1.0]).validate().is_err());
        assert!(KernelSpec::fourier(1.0, 3).validate().is_ok());
    }

    #[test]
    fn gram_small_cases() {
        let spec = KernelSpec::angle(1.0).local_global(0.5, 3);
        let one = DMatrix::from_row_slice(1, 2, &[0.1, 0.2]);
        let g = gram(&spec, &one).unwrap();
        assert_eq!(g.entries.get(0, 0), 1.5);
        let twin = DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 0.1, 0.2]);
        let g = gram(&spec, &twin).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(g.entries.get(i, j), 1.5);
            }
        }
        assert!(matches!(
            gram(&spec, &DMatrix::zeros(0, 2)),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn gram_matches_scalar_calls_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = DMatrix::from_fn(5, 2, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
        for spec in [
            KernelSpec::angle(0.9).local_global(0.3, 5),
            KernelSpec::fourier(1.0, 3).local_global(0.2, 4),
        ] {
            let g = gram(&spec, &x).unwrap();
            for i in 0..5 {
                for j in 0..5 {
                    let xi: Vec<f64> = x.row(i).iter().copied().collect();
                    let xj: Vec<f64> = x.row(j).iter().copied().collect();
                    let v = local_global_kernel(&spec, &xi, &xj).unwrap();
                    assert_eq!(g.entries.get(i, j).to_bits(), v.to_bits());
                }
            }
        }
    }

    #[test]
    fn cross_gram_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = KernelSpec::fourier(1.0, 2).local_global(0.1, 3);
        let train = DMatrix::from_fn(6, 3, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
        let test = DMatrix::from_fn(4, 3, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
        let g = gram(&spec, &train).unwrap();
        let same = cross_gram(&spec, &train, &train).unwrap();
        assert_eq!(&same, g.entries.as_matrix());

        let single = DMatrix::from_fn(1, 3, |_, c| train[(2, c)]);
        let col = cross_gram(&spec, &train, &single).unwrap();
        for i in 0..6 {
            assert_eq!(col[(i, 0)], g.entries.get(i, 2));
        }

        let k = cross_gram(&spec, &train, &test).unwrap();
        for i in 0..6 {
            for j in 0..4 {
                let a: Vec<f64> = train.row(i).iter().copied().collect();
                let b: Vec<f64> = test.row(j).iter().copied().collect();
                assert_eq!(k[(i, j)].to_bits(), local_global_kernel(&spec, &a, &b).unwrap().to_bits());
            }
        }
        assert!(cross_gram(&spec, &train, &DMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn separable_encoding_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for q in 1..=3u32 {
            let spec = KernelSpec::angle(1.2).with_degree(q);
            let sep = SeparableEncoding::new(AngleEncoding::new(1.2, 1), q as usize).unwrap();
            let g = StateVector::zero(q as usize).unwrap();
            for _ in 0..5 {
                let x = random_vec(1, -1.0, 1.0, &mut rng);
                let z = random_vec(1, -1.0, 1.0, &mut rng);
                let closed = global_kernel_only(&spec, &x, &z).unwrap();
                let sim = global_kernel(&sep, &x, &z, &g).unwrap();
                assert!((closed - sim).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn concentration_with_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = KernelSpec::angle(0.75 * PI);
        let mut last = f64::INFINITY;
        for d in [1, 5, 20] {
            let x = DMatrix::from_fn(40, d, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
            let m = gram(&spec, &x).unwrap().entries.mean_abs_off_diagonal();
            assert!(m < last);
            last = m;
        }
        assert!(last < 0.01);
    }

    fn arb_pair(d: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (
            prop::collection::vec(-2.0f64..2.0, d),
            prop::collection::vec(-2.0f64..2.0, d),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn symmetric_and_bounded((x, z) in arb_pair(3), q in 1u32..20, lg in 0.0f64..2.0, fam in 0u8..2) {
            let base = if fam == 0 { KernelSpec::angle(1.7) } else { KernelSpec::fourier(1.3, 2) };
            let spec = base.local_global(lg, q);
            let k = base_kernel(&spec, &x, &z).unwrap();
            prop_assert!((0.0..=1.0 + 1e-15).contains(&k));
            let a = local_global_kernel(&spec, &x, &z).unwrap();
            let b = local_global_kernel(&spec, &z, &x).unwrap();
            prop_assert_eq!(a, b);
            prop_assert!(a >= 0.0 && a <= spec.diagonal_value() + 1e-12);
        }

        #[test]
        fn translation_invariant((x, z) in arb_pair(2), shift in -3.0f64..3.0, fam in 0u8..2) {
            let spec = if fam == 0 { KernelSpec::angle(2.1) } else { KernelSpec::fourier(0.8, 3) };
            let xs: Vec<f64> = x.iter().map(|v| v + shift).collect();
            let zs: Vec<f64> = z.iter().map(|v| v + shift).collect();
            let a = base_kernel(&spec, &x, &z).unwrap();
            let b = base_kernel(&spec, &xs, &zs).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
