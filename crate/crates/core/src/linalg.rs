//! Dense linear algebra shared by the simulator, kernels and regression code.
//!
//! Real symmetric matrices are wrapped in [`RealSymMatrix`], which checks
//! symmetry on construction so that every downstream eigendecomposition can
//! assume it. Complex matrices ([`ComplexMatrix`]) carry unitaries, density
//! matrices and observables for the simulator.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type Complex64 = Complex<f64>;

/// Iteration cap handed to the implicit-QR sweep, per matrix dimension.
const EIGEN_ITERATIONS_PER_DIM: usize = 1000;

/// Square real matrix, symmetric to within [`RealSymMatrix::SYMMETRY_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct RealSymMatrix {
    inner: DMatrix<f64>,
}

impl RealSymMatrix {
    pub const SYMMETRY_TOL: f64 = 1e-12;

    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::EmptyDataset);
        }
        for col in 0..cols {
            for row in 0..col {
                let a = matrix[(row, col)];
                let b = matrix[(col, row)];
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::NonFinite("symmetric matrix"));
                }
                let deviation = (a - b).abs();
                if deviation > Self::SYMMETRY_TOL {
                    return Err(Error::NotSymmetric {
                        row,
                        col,
                        deviation,
                    });
                }
            }
            if !matrix[(col, col)].is_finite() {
                return Err(Error::NonFinite("symmetric matrix"));
            }
        }
        Ok(Self { inner: matrix })
    }

    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                context: "row-major entries",
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    /// Builds the matrix from `f(i, j)` evaluated on `i <= j` only and
    /// mirrored, so the result is exactly symmetric.
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            for i in 0..=j {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self::new(m)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self {
            inner: DMatrix::from_diagonal(&DVector::from_column_slice(values)),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.inner
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace()
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        self.inner.transpose().as_slice().to_vec()
    }

    /// Largest absolute off-diagonal entry (0 for a 1x1 matrix).
    pub fn max_abs_off_diagonal(&self) -> f64 {
        let n = self.dim();
        let mut best = 0.0f64;
        for j in 0..n {
            for i in 0..j {
                best = best.max(self.inner[(i, j)].abs());
            }
        }
        best
    }

    /// Mean absolute off-diagonal entry (0 for a 1x1 matrix).
    pub fn mean_abs_off_diagonal(&self) -> f64 {
        let n = self.dim();
        if n < 2 {
            return 0.0;
        }
        let mut sum = 0.0;
        for j in 0..n {
            for i in 0..j {
                sum += self.inner[(i, j)].abs();
            }
        }
        2.0 * sum / (n * (n - 1)) as f64
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("matrix-vector product", self.dim(), v.len())?;
        let out = &self.inner * DVector::from_column_slice(v);
        Ok(out.as_slice().to_vec())
    }
}

/// Eigenpairs of a symmetric matrix, eigenvalues sorted descending.
///
/// Column `i` of `eigenvectors` belongs to `eigenvalues[i]`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// `V · diag(λ) · Vᵀ`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut scaled = self.eigenvectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.eigenvalues[j];
        }
        scaled * self.eigenvectors.transpose()
    }
}

/// Symmetric eigendecomposition with eigenvalues in descending order.
///
/// Ties keep the order the solver produced them in.
pub fn eigh_desc(a: &RealSymMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    let max_iterations = EIGEN_ITERATIONS_PER_DIM * n.max(1);
    let eig = SymmetricEigen::try_new(a.as_matrix().clone(), f64::EPSILON, max_iterations)
        .ok_or(Error::NoConvergence { max_iterations })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Rule for zeroing small eigenvalues in [`pinv_apply`].
///
/// Eigenvalues with `|λ| <= threshold` are treated as zero, where the
/// threshold is a multiple of `ε·max|λ|`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PinvCutoff {
    /// `ε·max|λ|`: drops only directions indistinguishable from rounding.
    #[default]
    Epsilon,
    /// `n·ε·max|λ|`, the LAPACK-style rcond rule.
    DimensionScaled,
    /// `r·max|λ|` for a caller-chosen `r >= 0`.
    Relative(f64),
}

impl PinvCutoff {
    pub fn threshold(self, dim: usize, max_abs_eigenvalue: f64) -> f64 {
        let rel = match self {
            PinvCutoff::Epsilon => f64::EPSILON,
            PinvCutoff::DimensionScaled => dim as f64 * f64::EPSILON,
            PinvCutoff::Relative(r) => r,
        };
        rel * max_abs_eigenvalue
    }

    pub fn name(self) -> String {
        match self {
            PinvCutoff::Epsilon => "epsilon".into(),
            PinvCutoff::DimensionScaled => "dimension-scaled".into(),
            PinvCutoff::Relative(r) => format!("relative:{r:e}"),
        }
    }
}

impl std::str::FromStr for PinvCutoff {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "epsilon" => Ok(PinvCutoff::Epsilon),
            "dimension-scaled" => Ok(PinvCutoff::DimensionScaled),
            other => match other.strip_prefix("relative:").map(str::parse::<f64>) {
                Some(Ok(r)) if r >= 0.0 && r.is_finite() => Ok(PinvCutoff::Relative(r)),
                _ => Err(Error::invalid(format!("unknown pseudo-inverse cutoff '{other}'"))),
            },
        }
    }
}

/// `A⁺ y` with the default cutoff.
pub fn pinv_apply(a: &RealSymMatrix, y: &[f64]) -> Result<Vec<f64>> {
    pinv_apply_with(a, y, PinvCutoff::default())
}

pub fn pinv_apply_with(a: &RealSymMatrix, y: &[f64], cutoff: PinvCutoff) -> Result<Vec<f64>> {
    check_len("pseudo-inverse", a.dim(), y.len())?;
    let eig = eigh_desc(a)?;
    pinv_apply_decomposed(&eig, y, cutoff)
}

/// `A⁺ y` from an existing decomposition of `A`.
pub fn pinv_apply_decomposed(
    eig: &EigenDecomposition,
    y: &[f64],
    cutoff: PinvCutoff,
) -> Result<Vec<f64>> {
    let n = eig.dim();
    check_len("pseudo-inverse", n, y.len())?;
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = cutoff.threshold(n, scale);

    let y = DVector::from_column_slice(y);
    let mut coeffs = eig.eigenvectors.tr_mul(&y);
    for (c, &lambda) in coeffs.iter_mut().zip(eig.eigenvalues.iter()) {
        if lambda.abs() > threshold {
            *c /= lambda;
        } else {
            *c = 0.0;
        }
    }
    Ok((&eig.eigenvectors * coeffs).as_slice().to_vec())
}

/// `(A + ρI)⁻¹ y`.
///
/// Uses a Cholesky factorization when the shifted matrix is positive
/// definite and falls back to LU otherwise.
pub fn solve_shifted(a: &RealSymMatrix, rho: f64, y: &[f64]) -> Result<Vec<f64>> {
    check_len("shifted solve", a.dim(), y.len())?;
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::invalid(format!("shift must be >= 0, got {rho}")));
    }
    let n = a.dim();
    let mut shifted = a.as_matrix().clone();
    for i in 0..n {
        shifted[(i, i)] += rho;
    }
    let rhs = DVector::from_column_slice(y);
    if let Some(chol) = shifted.clone().cholesky() {
        return finite_solution(chol.solve(&rhs));
    }
    let lu = shifted.lu();
    if !lu.is_invertible() {
        return Err(Error::Singular);
    }
    match lu.solve(&rhs) {
        Some(x) => finite_solution(x),
        None => Err(Error::Singular),
    }
}

fn finite_solution(x: DVector<f64>) -> Result<Vec<f64>> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(x.as_slice().to_vec())
    } else {
        Err(Error::Singular)
    }
}

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}

/// Dense complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

impl ComplexMatrix {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(Self { inner: matrix })
        } else {
            Err(Error::NonFinite("complex matrix"))
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn from_real(m: &DMatrix<f64>) -> Self {
        Self {
            inner: m.map(|v| Complex64::new(v, 0.0)),
        }
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.inner
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        check_len("matrix product", self.cols(), other.rows())?;
        Ok(Self {
            inner: &self.inner * &other.inner,
        })
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            inner: self.inner.kronecker(&other.inner),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            inner: &self.inner * Complex64::new(factor, 0.0),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_len("matrix sum (rows)", self.rows(), other.rows())?;
        check_len("matrix sum (cols)", self.cols(), other.cols())?;
        Ok(Self {
            inner: &self.inner + &other.inner,
        })
    }

    pub fn trace(&self) -> Complex64 {
        self.inner.trace()
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        if self.rows() != self.cols() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..=i {
                worst = worst.max((self.inner[(i, j)] - self.inner[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.inner.shape() != other.inner.shape() {
            return f64::INFINITY;
        }
        self.inner
            .iter()
            .zip(other.inner.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_psd(n: usize, rank: usize, rng: &mut impl Rng) -> RealSymMatrix {
        let b = DMatrix::from_fn(n, rank, |_, _| rng.random_range(-1.0..1.0));
        let m = &b * b.transpose();
        RealSymMatrix::new((&m + m.transpose()) * 0.5).unwrap()
    }

    /// One-sided Jacobi SVD pseudo-inverse; independent of the QR eigensolver.
    fn jacobi_svd_pinv(a: &DMatrix<f64>, rcond: f64) -> DMatrix<f64> {
        let n = a.ncols();
        let mut u = a.clone();
        let mut v = DMatrix::<f64>::identity(n, n);
        for _sweep in 0..100 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    let alpha: f64 = u.column(p).norm_squared();
                    let beta: f64 = u.column(q).norm_squared();
                    let gamma: f64 = u.column(p).dot(&u.column(q));
                    if gamma.abs() < 1e-300 {
                        continue;
                    }
                    off = off.max(gamma.abs() / (alpha * beta).sqrt().max(1e-300));
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let t = if zeta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for m in [&mut u, &mut v] {
                        for r in 0..m.nrows() {
                            let x = m[(r, p)];
                            let y = m[(r, q)];
                            m[(r, p)] = c * x - s * y;
                            m[(r, q)] = s * x + c * y;
                        }
                    }
                }
            }
            if off < 1e-15 {
                break;
            }
        }
        let sigma: Vec<f64> = (0..n).map(|j| u.column(j).norm()).collect();
        let smax = sigma.iter().cloned().fold(0.0, f64::max);
        let mut pinv = DMatrix::zeros(n, a.nrows());
        for j in 0..n {
            if sigma[j] > rcond * smax {
                let uj = u.column(j) / sigma[j];
                pinv += v.column(j) * uj.transpose() / sigma[j];
            }
        }
        pinv
    }

    #[test]
    fn eigh_diagonal_sorted() {
        let eig = eigh_desc(&RealSymMatrix::diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(eig.eigenvalues.as_slice(), &[3.0, 2.0, 1.0]);
    }

    #[test]
    fn eigh_two_by_two() {
        let a = RealSymMatrix::from_row_major(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let eig = eigh_desc(&a).unwrap();
        assert!((eig.eigenvalues[0] - 3.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigh_identity() {
        let eig = eigh_desc(&RealSymMatrix::identity(4)).unwrap();
        for v in eig.eigenvalues.iter() {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_asymmetric() {
        let err = RealSymMatrix::from_row_major(2, &[1.0, 2.0, 2.1, 1.0]).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric { .. }));
        assert!(matches!(
            RealSymMatrix::new(DMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn eigh_reconstructs_and_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 5, 17, 40] {
            let a = random_psd(n, n, &mut rng);
            let eig = eigh_desc(&a).unwrap();
            let tol = 1e-8 * (eig.max_eigenvalue().abs() + 1.0);
            let rec = eig.reconstruct();
            assert!((rec - a.as_matrix()).amax() <= tol);
            let gram = eig.eigenvectors.transpose() * &eig.eigenvectors;
            assert!((gram - DMatrix::identity(n, n)).amax() < 1e-10);
            for i in 0..n {
                let av = a.as_matrix() * eig.eigenvectors.column(i);
                let lv = eig.eigenvectors.column(i) * eig.eigenvalues[i];
                assert!((av - lv).amax() <= tol);
            }
            for w in eig.eigenvalues.as_slice().windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn eigh_is_bit_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_psd(30, 30, &mut rng);
        let e1 = eigh_desc(&a).unwrap();
        let e2 = eigh_desc(&a).unwrap();
        assert_eq!(e1.eigenvalues, e2.eigenvalues);
        assert_eq!(e1.eigenvectors, e2.eigenvectors);
    }

    #[test]
    fn pinv_rank_one_projector() {
        let a = RealSymMatrix::from_row_major(2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(pinv_apply(&a, &[2.0, 3.0]).unwrap(), vec![2.0, 0.0]);
    }

    #[test]
    fn pinv_scalar_inverse() {
        let a = RealSymMatrix::diagonal(&[2.0, 2.0, 2.0]);
        let x = pinv_apply(&a, &[2.0, 4.0, 6.0]).unwrap();
        for (v, e) in x.iter().zip([1.0, 2.0, 3.0]) {
            assert!((v - e).abs() < 1e-15);
        }
    }

    #[test]
    fn pinv_matches_svd_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for rank in [3, 2] {
            let a = random_psd(3, rank, &mut rng);
            let y: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let cutoff = if rank == 3 {
                PinvCutoff::Epsilon
            } else {
                PinvCutoff::Relative(1e-10)
            };
            let rcond = if rank == 3 { 1e-15 } else { 1e-10 };
            let ours = pinv_apply_with(&a, &y, cutoff).unwrap();
            let oracle = jacobi_svd_pinv(a.as_matrix(), rcond) * DVector::from_column_slice(&y);
            for (o, e) in ours.iter().zip(oracle.iter()) {
                assert!((o - e).abs() < 1e-10, "{o} vs {e}");
            }
        }
    }

    #[test]
    fn pinv_dimension_mismatch() {
        let a = RealSymMatrix::identity(2);
        assert!(matches!(
            pinv_apply(&a, &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dimension_scaled_cutoff_drops_more() {
        let a = RealSymMatrix::diagonal(&[1.0, 5.0 * f64::EPSILON]);
        let eps = pinv_apply_with(&a, &[1.0, 1.0], PinvCutoff::Epsilon).unwrap();
        let scaled = pinv_apply_with(&a, &[1.0, 1.0], PinvCutoff::Relative(10.0 * f64::EPSILON))
            .unwrap();
        assert!(eps[1] > 1e14);
        assert_eq!(scaled[1], 0.0);
        assert!(PinvCutoff::DimensionScaled.threshold(10, 1.0) > PinvCutoff::Epsilon.threshold(10, 1.0));
    }

    #[test]
    fn shifted_solve_examples() {
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15);
        let x = solve_shifted(&RealSymMatrix::identity(2), 1.0, &[2.0, 2.0]).unwrap();
        assert!(close(&x, &[1.0, 1.0]));
        let zero = RealSymMatrix::diagonal(&[0.0, 0.0]);
        let x = solve_shifted(&zero, 0.5, &[1.0, 1.0]).unwrap();
        assert!(close(&x, &[2.0, 2.0]));
    }

    #[test]
    fn shifted_solve_matches_spectral_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_psd(4, 4, &mut rng);
        let y: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let rho = 0.07;
        let x = solve_shifted(&a, rho, &y).unwrap();
        let eig = eigh_desc(&a).unwrap();
        let coeffs = eig.eigenvectors.tr_mul(&DVector::from_column_slice(&y));
        let scaled = DVector::from_iterator(
            4,
            coeffs.iter().zip(eig.eigenvalues.iter()).map(|(c, l)| c / (l + rho)),
        );
        let oracle = &eig.eigenvectors * scaled;
        for (a, b) in x.iter().zip(oracle.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn shifted_solve_singular_at_zero_shift() {
        let zero = RealSymMatrix::diagonal(&[0.0, 0.0]);
        assert!(matches!(
            solve_shifted(&zero, 0.0, &[1.0, 1.0]),
            Err(Error::Singular)
        ));
        assert!(solve_shifted(&zero, -1.0, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn shifted_solve_converges_to_pinv() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = random_psd(5, 5, &mut rng);
        let y: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
        let target = pinv_apply(&a, &y).unwrap();
        let mut last = f64::INFINITY;
        for rho in [1e-2, 1e-6, 1e-10] {
            let x = solve_shifted(&a, rho, &y).unwrap();
            let err = x
                .iter()
                .zip(&target)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err < last, "rho={rho}: {err} !< {last}");
            last = err;
        }
    }

    #[test]
    fn complex_helpers() {
        let i = Complex64::new(0.0, 1.0);
        let m = ComplexMatrix::new(DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(1.0, 0.0), i, -i, Complex64::new(2.0, 0.0)],
        ))
        .unwrap();
        assert!(m.hermiticity_defect() < 1e-15);
        assert_eq!(m.trace(), Complex64::new(3.0, 0.0));
        let k = m.kron(&ComplexMatrix::identity(2));
        assert_eq!((k.rows(), k.cols()), (4, 4));
        assert!(ComplexMatrix::new(DMatrix::from_element(1, 1, Complex64::new(f64::NAN, 0.0))).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn pinv_projects_onto_range(seed in any::<u64>(), n in 1usize..8, rank_frac in 0.2f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rank = ((n as f64 * rank_frac).ceil() as usize).max(1);
            let a = random_psd(n, rank, &mut rng);
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x = pinv_apply_with(&a, &y, PinvCutoff::Relative(1e-10)).unwrap();
            let ax = a.mul_vec(&x).unwrap();
            // projection of y onto range(A) from the eigenvectors with non-negligible eigenvalues
            let eig = eigh_desc(&a).unwrap();
            let thr = 1e-10 * eig.max_eigenvalue().abs();
            let mut proj = DVector::zeros(n);
            let yv = DVector::from_column_slice(&y);
            for i in 0..n {
                if eig.eigenvalues[i].abs() > thr {
                    let v = eig.eigenvectors.column(i);
                    proj += v * v.dot(&yv);
                }
            }
            for (p, q) in ax.iter().zip(proj.iter()) {
                prop_assert!((p - q).abs() < 1e-8);
            }
        }

        #[test]
        fn eigenvalue_sum_is_trace(seed in any::<u64>(), n in 1usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-2.0..2.0));
            let a = RealSymMatrix::new((&b + b.transpose()) * 0.5).unwrap();
            let eig = eigh_desc(&a).unwrap();
            let tr = a.trace();
            prop_assert!((eig.eigenvalues.sum() - tr).abs() <= 1e-8 * tr.abs().max(1.0));
        }
    }
}
