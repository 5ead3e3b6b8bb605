//! Kernel ridgeless / ridge regression and Gram-matrix spectral diagnostics.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernels::{global_gram, gram, GramMatrix, KernelSpec};
use crate::linalg::{check_len, eigh_desc, pinv_apply_decomposed, solve_shifted, EigenDecomposition, PinvCutoff};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegressionMode {
    /// Minimum-norm interpolant `α = K⁺ y`.
    Ridgeless,
    /// `α = (K + ρI)⁻¹ y`, unscaled identity.
    Ridge(f64),
}

impl RegressionMode {
    /// Ridge parameter, 0 for ridgeless.
    pub fn rho(self) -> f64 {
        match self {
            RegressionMode::Ridgeless => 0.0,
            RegressionMode::Ridge(rho) => rho,
        }
    }
}

impl fmt::Display for RegressionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegressionMode::Ridgeless => write!(f, "ridgeless"),
            RegressionMode::Ridge(rho) => write!(f, "ridge({rho})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub alpha: Vec<f64>,
    pub mode: RegressionMode,
    pub train_mse: f64,
    pub spec: KernelSpec,
    pub dataset_digest: String,
}

impl FitResult {
    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha_norm(&self) -> f64 {
        self.alpha.iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

/// Fits `α` with the default pseudo-inverse cutoff.
pub fn fit(k: &GramMatrix, y: &[f64], mode: RegressionMode) -> Result<FitResult> {
    fit_with_cutoff(k, y, mode, PinvCutoff::default())
}

pub fn fit_with_cutoff(
    k: &GramMatrix,
    y: &[f64],
    mode: RegressionMode,
    cutoff: PinvCutoff,
) -> Result<FitResult> {
    check_len("regression targets", k.n(), y.len())?;
    match mode {
        RegressionMode::Ridgeless => fit_ridgeless_decomposed(k, &eigh_desc(&k.entries)?, y, cutoff),
        RegressionMode::Ridge(rho) => {
            let alpha = solve_shifted(&k.entries, rho, y)?;
            finish_fit(k, y, alpha, mode)
        }
    }
}

/// Ridgeless fit reusing an eigendecomposition of `k.entries`.
pub fn fit_ridgeless_decomposed(
    k: &GramMatrix,
    eig: &EigenDecomposition,
    y: &[f64],
    cutoff: PinvCutoff,
) -> Result<FitResult> {
    check_len("regression targets", k.n(), y.len())?;
    check_len("eigendecomposition", k.n(), eig.dim())?;
    let alpha = pinv_apply_decomposed(eig, y, cutoff)?;
    finish_fit(k, y, alpha, RegressionMode::Ridgeless)
}

fn finish_fit(k: &GramMatrix, y: &[f64], alpha: Vec<f64>, mode: RegressionMode) -> Result<FitResult> {
    let fitted = k.entries.mul_vec(&alpha)?;
    let train_mse = mse(&fitted, y)?;
    Ok(FitResult {
        alpha,
        mode,
        train_mse,
        spec: k.spec.clone(),
        dataset_digest: k.dataset_digest.clone(),
    })
}

/// `f(x_j) = Σ_i α_i K_cross[i, j]` for every test column `j`.
pub fn predict(fit: &FitResult, k_cross: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_len("cross-Gram rows", fit.n(), k_cross.nrows())?;
    let alpha = DVector::from_column_slice(&fit.alpha);
    Ok(k_cross.tr_mul(&alpha).as_slice().to_vec())
}

/// `(1/n) Σ (truth_i - pred_i)²`.
pub fn mse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_len("mean squared error", truth.len(), pred.len())?;
    if pred.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let sum: f64 = pred.iter().zip(truth).map(|(p, t)| (t - p) * (t - p)).sum();
    Ok(sum / pred.len() as f64)
}

/// Spectrum of a local-global Gram matrix together with the
/// "top-`l` components plus a flat tail" fit quality.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Eigenvalues of `K_LG`, descending.
    pub eigenvalues: Vec<f64>,
    /// Largest `|K_ij|`, `i ≠ j`, of the global-only Gram `k^q`.
    pub global_max_off_diagonal: f64,
    /// `flat_tail_residuals[l - 1] = ‖K − (K_top(l) + ρ̄_l I)‖_max` for
    /// `l = 1..n-1`, where `ρ̄_l` is the mean of the trailing `n - l`
    /// eigenvalues.
    pub flat_tail_residuals: Vec<f64>,
    pub rho_reference: f64,
}

impl SpectrumReport {
    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// `(l, residual)` with the smallest residual; ties go to the smaller `l`.
    pub fn best_flat_tail(&self) -> (usize, f64) {
        self.flat_tail_residuals
            .iter()
            .enumerate()
            .fold((1, f64::INFINITY), |best, (i, &r)| {
                if r < best.1 {
                    (i + 1, r)
                } else {
                    best
                }
            })
    }

    /// Mean of the trailing eigenvalues at the best split, to compare
    /// against `rho_reference`.
    pub fn tail_level(&self) -> f64 {
        let (l, _) = self.best_flat_tail();
        let tail = &self.eigenvalues[l..];
        tail.iter().sum::<f64>() / tail.len() as f64
    }
}

/// Residuals of the flat-tail approximation for every split `l = 1..n-1`.
///
/// The tail `Σ_{i≥l} λ_i v_i v_iᵀ` is accumulated from the smallest
/// eigenvalue upward, so small residuals do not suffer cancellation against
/// the leading components.
pub fn flat_tail_residuals(eig: &EigenDecomposition) -> Vec<f64> {
    let n = eig.dim();
    if n < 2 {
        return Vec::new();
    }
    let mut tail = vec![0.0f64; n * n]; // upper triangle used, column-major
    let mut out = vec![0.0; n - 1];
    let mut tail_sum = 0.0;
    for l in (1..n).rev() {
        let lambda = eig.eigenvalues[l];
        let v = eig.eigenvectors.column(l);
        tail_sum += lambda;
        for j in 0..n {
            let lv = lambda * v[j];
            let col = &mut tail[j * n..j * n + j + 1];
            for (i, t) in col.iter_mut().enumerate() {
                *t += lv * v[i];
            }
        }
        let level = tail_sum / (n - l) as f64;
        let mut worst = 0.0f64;
        for j in 0..n {
            let col = &tail[j * n..j * n + j + 1];
            for (i, &t) in col.iter().enumerate() {
                let r = if i == j { t - level } else { t };
                worst = worst.max(r.abs());
            }
        }
        out[l - 1] = worst;
    }
    out
}

pub fn spectrum_report(spec: &KernelSpec, x: &DMatrix<f64>, rho_reference: f64) -> Result<SpectrumReport> {
    if x.nrows() < 2 {
        return Err(Error::invalid("spectrum report needs at least two samples"));
    }
    let k = gram(spec, x)?;
    let eig = eigh_desc(&k.entries)?;
    let global = global_gram(spec, x)?;
    Ok(spectrum_from_parts(&eig, &global, rho_reference))
}

/// Assembles a report from an existing decomposition of `K_LG` and the
/// global-only Gram on the same data.
pub fn spectrum_from_parts(
    eig: &EigenDecomposition,
    global: &GramMatrix,
    rho_reference: f64,
) -> SpectrumReport {
    SpectrumReport {
        eigenvalues: eig.eigenvalues.as_slice().to_vec(),
        global_max_off_diagonal: global.entries.max_abs_off_diagonal(),
        flat_tail_residuals: flat_tail_residuals(eig),
        rho_reference,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::cross_gram;
    use crate::linalg::RealSymMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn wrap(entries: RealSymMatrix) -> GramMatrix {
        GramMatrix {
            entries,
            spec: KernelSpec::angle(1.0),
            dataset_digest: String::new(),
            seed: 0,
        }
    }

    fn random_psd(n: usize, rng: &mut impl Rng) -> RealSymMatrix {
        let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let m = &b * b.transpose() + DMatrix::identity(n, n) * 0.1;
        RealSymMatrix::new((&m + m.transpose()) * 0.5).unwrap()
    }

    #[test]
    fn scalar_ridgeless_fit() {
        let g = wrap(RealSymMatrix::diagonal(&[1.0]));
        let f = fit(&g, &[5.0], RegressionMode::Ridgeless).unwrap();
        assert_eq!(f.alpha, vec![5.0]);
        assert_eq!(f.train_mse, 0.0);
    }

    #[test]
    fn identity_ridge_fit() {
        let g = wrap(RealSymMatrix::identity(3));
        let f = fit(&g, &[1.0, 2.0, 3.0], RegressionMode::Ridge(1.0)).unwrap();
        for (a, e) in f.alpha.iter().zip([0.5, 1.0, 1.5]) {
            assert!((a - e).abs() < 1e-15);
        }
        assert!((f.train_mse - 3.5 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn full_rank_interpolates() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let g = wrap(random_psd(6, &mut rng));
        let y: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = fit(&g, &y, RegressionMode::Ridgeless).unwrap();
        assert!(f.train_mse <= 1e-18, "{}", f.train_mse);
        let pred = predict(&f, g.entries.as_matrix()).unwrap();
        for (p, t) in pred.iter().zip(&y) {
            assert!((p - t).abs() < 1e-8);
        }
    }

    #[test]
    fn prediction_examples() {
        let mut f = fit(&wrap(RealSymMatrix::identity(2)), &[0.0, 0.0], RegressionMode::Ridgeless).unwrap();
        let kc = DMatrix::from_row_slice(2, 1, &[0.5, 0.25]);
        assert_eq!(predict(&f, &kc).unwrap(), vec![0.0]);
        f.alpha = vec![1.0, -1.0];
        assert_eq!(predict(&f, &kc).unwrap(), vec![0.25]);
        assert!(predict(&f, &DMatrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert!((mse(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn fit_errors() {
        let g = wrap(RealSymMatrix::identity(2));
        assert!(matches!(
            fit(&g, &[1.0], RegressionMode::Ridgeless),
            Err(Error::DimensionMismatch { .. })
        ));
        let zero = wrap(RealSymMatrix::diagonal(&[0.0, 0.0]));
        assert!(matches!(
            fit(&zero, &[1.0, 1.0], RegressionMode::Ridge(0.0)),
            Err(Error::Singular)
        ));
    }

    #[test]
    fn spectrum_of_identical_points() {
        let spec = KernelSpec::angle(1.0).local_global(0.5, 3);
        let x = DMatrix::from_row_slice(2, 1, &[0.3, 0.3]);
        let r = spectrum_report(&spec, &x, 0.5).unwrap();
        assert!((r.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!(r.eigenvalues[1].abs() < 1e-14);
        assert_eq!(r.flat_tail_residuals.len(), 1);
        assert!(spectrum_report(&spec, &DMatrix::from_row_slice(1, 1, &[0.0]), 0.5).is_err());
    }

    #[test]
    fn large_degree_kills_global_off_diagonal() {
        // nearest-neighbour base kernel cos²(0.5) ≈ 0.77
        let spec = KernelSpec::angle(2.0).local_global(0.1, 200);
        let x = DMatrix::from_row_slice(4, 1, &[-0.75, -0.25, 0.25, 0.75]);
        let r = spectrum_report(&spec, &x, 0.1).unwrap();
        assert!(r.global_max_off_diagonal < 1e-6);
    }

    #[test]
    fn eigenvalues_sum_to_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let spec = KernelSpec::fourier(1.0, 2).local_global(0.25, 4);
        let x = DMatrix::from_fn(8, 3, |_, _| rng.random_range(-1.0..1.0));
        let r = spectrum_report(&spec, &x, 0.25).unwrap();
        let sum: f64 = r.eigenvalues.iter().sum();
        assert!((sum - 8.0 * 1.25).abs() < 1e-8);
    }

    #[test]
    fn flat_tail_residuals_match_dense_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_psd(7, &mut rng);
        let eig = eigh_desc(&a).unwrap();
        let fast = flat_tail_residuals(&eig);
        for l in 1..7 {
            let mut top = DMatrix::zeros(7, 7);
            for i in 0..l {
                let v = eig.eigenvectors.column(i);
                top += v * v.transpose() * eig.eigenvalues[i];
            }
            let level = eig.eigenvalues.rows(l, 7 - l).sum() / (7 - l) as f64;
            let approx = top + DMatrix::identity(7, 7) * level;
            let dense = (a.as_matrix() - approx).amax();
            assert!((fast[l - 1] - dense).abs() < 1e-12);
        }
        // identity plus a rank-one spike: residual is ρ̄·max|v_i v_j| = 0.25
        let v = DVector::from_vec(vec![0.5, 0.5, 0.5, 0.5]);
        let spike = RealSymMatrix::new(DMatrix::identity(4, 4) + &v * v.transpose() * 3.0).unwrap();
        let r = flat_tail_residuals(&eigh_desc(&spike).unwrap());
        assert!((r[0] - 0.25).abs() < 1e-14, "{}", r[0]);
    }

    #[test]
    fn ridge_prediction_on_kernel_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let spec = KernelSpec::angle(2.0);
        let x = DMatrix::from_fn(10, 2, |_, _| rng.random_range(-1.0..1.0));
        let y: Vec<f64> = (0..10).map(|i| (i as f64).sin()).collect();
        let g = gram(&spec, &x).unwrap();
        let f = fit(&g, &y, RegressionMode::Ridge(0.1)).unwrap();
        let pred = predict(&f, &cross_gram(&spec, &x, &x).unwrap()).unwrap();
        assert!((mse(&pred, &y).unwrap() - f.train_mse).abs() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn ridge_shrinks_coefficients(seed in any::<u64>(), n in 2usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = wrap(random_psd(n, &mut rng));
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut last = f64::INFINITY;
            for rho in [1e-3, 1e-2, 0.1, 1.0] {
                let norm = fit(&g, &y, RegressionMode::Ridge(rho)).unwrap().alpha_norm();
                prop_assert!(norm <= last + 1e-12);
                last = norm;
            }
        }

        #[test]
        fn interpolation_when_well_conditioned(seed in any::<u64>(), n in 2usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = wrap(random_psd(n, &mut rng));
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let ymax = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let f = fit(&g, &y, RegressionMode::Ridgeless).unwrap();
            prop_assert!(f.train_mse <= 1e-12 * ymax * ymax);
        }

        #[test]
        fn spectral_floor(seed in any::<u64>(), q in 1u32..12, lg in 0.01f64..1.0, fam in 0u8..2) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let base = if fam == 0 { KernelSpec::angle(2.4) } else { KernelSpec::fourier(1.0, 2) };
            let spec = base.local_global(lg, q);
            let x = DMatrix::from_fn(12, 2, |_, _| rng.random_range(-1.0..1.0));
            let lg_min = eigh_desc(&gram(&spec, &x).unwrap().entries).unwrap().min_eigenvalue();
            let g_min = eigh_desc(&global_gram(&spec, &x).unwrap().entries).unwrap().min_eigenvalue();
            prop_assert!(lg_min >= lg * g_min - 1e-8);
            prop_assert!(lg_min >= -1e-8);
        }
    }
}
