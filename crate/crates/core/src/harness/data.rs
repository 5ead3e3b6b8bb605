//! Seeded dataset generators.
//!
//! Every generator draws from its own ChaCha8 stream of the given seed, so
//! training inputs, test inputs, target centers and noise for one seed never
//! share random numbers.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernels::angle_base_kernel;

/// Independent random streams derived from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    TrainInputs = 0,
    TargetCenters = 1,
    Noise = 2,
    TestInputs = 3,
}

pub fn seeded_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Name of the normal sampler, recorded in manifests.
pub const NOISE_ALGORITHM: &str =
    "box-muller (u1 = 1 - U[0,1), u2 = U[0,1); both outputs used) on chacha8 stream 2";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    /// `1 + Σ_{i=1}^5 k_c(x, w_i)`, centers uniform on `[-0.75, 0.75]`.
    RkhsSum,
    /// `Σ_j cos(0.01π x_j)`.
    CosSum,
    /// `sin(Σ_j x_j)`.
    SinSum,
    None,
}

impl TargetKind {
    pub fn name(self) -> &'static str {
        match self {
            TargetKind::RkhsSum => "rkhs-sum",
            TargetKind::CosSum => "cos-sum",
            TargetKind::SinSum => "sin-sum",
            TargetKind::None => "none",
        }
    }
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TargetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rkhs-sum" => Ok(TargetKind::RkhsSum),
            "cos-sum" => Ok(TargetKind::CosSum),
            "sin-sum" => Ok(TargetKind::SinSum),
            "none" => Ok(TargetKind::None),
            other => Err(Error::invalid(format!("unknown target '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    /// One sample per row.
    pub x: DMatrix<f64>,
    pub y: Option<Vec<f64>>,
    pub target: TargetKind,
    pub noise_sigma: f64,
    pub seed: u64,
    pub lo: f64,
    pub hi: f64,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }
}

fn check_bounds(lo: f64, hi: f64) -> Result<()> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid(format!("need finite lo < hi, got [{lo}, {hi}]")));
    }
    Ok(())
}

/// `n × d` matrix of independent `U[lo, hi)` draws, filled row by row.
pub fn uniform_matrix<R: Rng + ?Sized>(n: usize, d: usize, lo: f64, hi: f64, rng: &mut R) -> Result<DMatrix<f64>> {
    check_bounds(lo, hi)?;
    if n == 0 || d == 0 {
        return Err(Error::EmptyDataset);
    }
    let values: Vec<f64> = (0..n * d).map(|_| rng.random_range(lo..hi)).collect();
    Ok(DMatrix::from_row_slice(n, d, &values))
}

/// Inputs only, drawn from the training stream of `seed`.
pub fn gen_uniform(n: usize, d: usize, lo: f64, hi: f64, seed: u64) -> Result<Dataset> {
    let x = uniform_matrix(n, d, lo, hi, &mut seeded_rng(seed, Stream::TrainInputs))?;
    Ok(Dataset {
        x,
        y: None,
        target: TargetKind::None,
        noise_sigma: 0.0,
        seed,
        lo,
        hi,
    })
}

/// `n` evenly spaced points from `lo` to `hi` inclusive, as an `n × 1` matrix.
pub fn grid(lo: f64, hi: f64, n: usize) -> Result<DMatrix<f64>> {
    check_bounds(lo, hi)?;
    if n < 2 {
        return Err(Error::invalid("grid needs at least two points"));
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok(DMatrix::from_fn(n, 1, |i, _| if i == n - 1 { hi } else { lo + step * i as f64 }))
}

/// Centers `w_1..w_m` of the RKHS-sum target, from the centers stream.
pub fn rkhs_centers(num_centers: usize, center_seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(center_seed, Stream::TargetCenters);
    (0..num_centers).map(|_| rng.random_range(-0.75..0.75)).collect()
}

/// `f(x) = 1 + Σ_i k_c(x, w_i)` for one-dimensional inputs.
pub fn gen_target_rkhs_sum(x: &DMatrix<f64>, c: f64, centers: &[f64]) -> Result<Vec<f64>> {
    if x.ncols() != 1 {
        return Err(Error::DimensionMismatch {
            context: "rkhs-sum target input dimension",
            expected: 1,
            found: x.ncols(),
        });
    }
    if !(c > 0.0) {
        return Err(Error::invalid(format!("bandwidth must be > 0, got {c}")));
    }
    x.column(0)
        .iter()
        .map(|&xi| {
            centers
                .iter()
                .try_fold(1.0, |acc, &w| Ok(acc + angle_base_kernel(c, &[xi], &[w])?))
        })
        .collect()
}

pub fn gen_target_cos_sum(x: &DMatrix<f64>) -> Vec<f64> {
    x.row_iter()
        .map(|r| r.iter().map(|v| (0.01 * PI * v).cos()).sum())
        .collect()
}

pub fn gen_target_sin_sum(x: &DMatrix<f64>) -> Vec<f64> {
    x.row_iter().map(|r| r.iter().sum::<f64>().sin()).collect()
}

/// `n` standard normal draws by the Box-Muller transform.
pub fn standard_normals<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    while out.len() < n {
        let u1 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        out.push(r * c);
        out.push(r * s);
    }
    out.truncate(n);
    out
}

/// `y + σ·g`, `g` standard normal from the noise stream of `seed`.
/// `sigma` is a standard deviation.
pub fn add_gaussian_noise(y: &[f64], sigma: f64, seed: u64) -> Result<Vec<f64>> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("noise sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(y.to_vec());
    }
    let g = standard_normals(y.len(), &mut seeded_rng(seed, Stream::Noise));
    Ok(y.iter().zip(g).map(|(v, e)| v + sigma * e).collect())
}

/// Noise-free target values of `kind` on `x`. `c` and `centers` are only
/// read by the RKHS-sum target.
pub fn target_values(kind: TargetKind, x: &DMatrix<f64>, c: f64, centers: &[f64]) -> Result<Option<Vec<f64>>> {
    Ok(match kind {
        TargetKind::RkhsSum => Some(gen_target_rkhs_sum(x, c, centers)?),
        TargetKind::CosSum => Some(gen_target_cos_sum(x)),
        TargetKind::SinSum => Some(gen_target_sin_sum(x)),
        TargetKind::None => None,
    })
}
