//! Experiment configuration: per-experiment defaults plus a flat
//! `key = value` override format.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kernels::{paper_eigenvalues, Family, GlobalPower, KernelSpec};
use crate::learning::RegressionMode;
use crate::linalg::PinvCutoff;

use super::data::TargetKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentId {
    Fig2,
    Fig3,
    Fig4,
    Table1,
    Table2,
    Fig5,
    Custom,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 7] = [
        ExperimentId::Fig2,
        ExperimentId::Fig3,
        ExperimentId::Fig4,
        ExperimentId::Table1,
        ExperimentId::Table2,
        ExperimentId::Fig5,
        ExperimentId::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Fig2 => "fig2",
            ExperimentId::Fig3 => "fig3",
            ExperimentId::Fig4 => "fig4",
            ExperimentId::Table1 => "table1",
            ExperimentId::Table2 => "table2",
            ExperimentId::Fig5 => "fig5",
            ExperimentId::Custom => "custom",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataSpec {
    pub n: usize,
    /// Input dimensions; only `fig3` uses more than one.
    pub dims: Vec<usize>,
    pub lo: f64,
    pub hi: f64,
    pub target: TargetKind,
    /// Standard deviation of the additive Gaussian label noise.
    pub noise_sigma: f64,
}

impl DataSpec {
    pub fn d(&self) -> usize {
        self.dims[0]
    }
}

/// Fully resolved experiment settings.
///
/// `kernel` carries family, bandwidth, weights and power convention; its
/// `degree` is ignored in favour of `degrees`, which lists every `q` the
/// experiment sweeps. `regression` is the baseline ridge (or the custom
/// experiment's mode); local-global fits are always ridgeless.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub kernel: KernelSpec,
    pub degrees: Vec<u32>,
    pub data: DataSpec,
    pub regression: RegressionMode,
    /// Test-set size, or grid size for `fig2` and `fig4`.
    pub test_n: usize,
    pub reps: usize,
    pub seed: u64,
    pub cutoff: PinvCutoff,
}

impl ExperimentConfig {
    pub fn defaults(id: ExperimentId) -> Self {
        let angle = |c: f64| KernelSpec::angle(c);
        let data = |n, d, lo, hi, target, noise_sigma| DataSpec {
            n,
            dims: vec![d],
            lo,
            hi,
            target,
            noise_sigma,
        };
        let base = |kernel: KernelSpec, degrees: Vec<u32>, data: DataSpec, regression, test_n, reps| Self {
            experiment: id,
            kernel,
            degrees,
            data,
            regression,
            test_n,
            reps,
            seed: 0,
            cutoff: PinvCutoff::default(),
        };
        match id {
            ExperimentId::Fig2 => base(
                angle(0.75 * PI)
                    .with_weights(1.0, 0.5)
                    .with_global_power(GlobalPower::Dyadic),
                vec![4, 8, 16],
                data(1, 1, -2.0, 2.0, TargetKind::None, 0.0),
                RegressionMode::Ridgeless,
                1025,
                1,
            ),
            ExperimentId::Fig3 => {
                let mut cfg = base(
                    angle(0.75 * PI),
                    vec![1],
                    data(40, 1, -1.0, 1.0, TargetKind::None, 0.0),
                    RegressionMode::Ridgeless,
                    0,
                    20,
                );
                cfg.data.dims = vec![1, 5, 20];
                cfg
            }
            ExperimentId::Fig4 => base(
                angle(0.75 * PI)
                    .with_weights(1.0, 0.1)
                    .with_global_power(GlobalPower::Dyadic),
                vec![4, 8, 16],
                data(8, 1, -0.75, 0.75, TargetKind::RkhsSum, 0.5),
                RegressionMode::Ridge(0.1),
                512,
                100,
            ),
            ExperimentId::Table1 => base(
                angle(PI / 20.0).with_weights(1.0, 0.07),
                vec![3, 5, 7],
                data(200, 20, -1.0, 1.0, TargetKind::CosSum, 0.5),
                RegressionMode::Ridge(0.07),
                1000,
                20,
            ),
            ExperimentId::Table2 | ExperimentId::Fig5 => base(
                KernelSpec::fourier(1.0, 5).with_weights(1.0, 1.0 / 1000.0),
                vec![5, 10, 50, 100],
                data(1000, 5, -1.0, 1.0, TargetKind::SinSum, 0.1),
                RegressionMode::Ridgeless,
                1000,
                if id == ExperimentId::Fig5 { 1 } else { 5 },
            ),
            ExperimentId::Custom => base(
                angle(1.0),
                vec![1],
                data(100, 2, -1.0, 1.0, TargetKind::SinSum, 0.1),
                RegressionMode::Ridgeless,
                200,
                1,
            ),
        }
    }

    /// Defaults for `id` overridden by the settings in `text`. A config
    /// naming a different experiment is rejected.
    pub fn parse(id: ExperimentId, text: &str) -> Result<Self> {
        let mut cfg = Self::defaults(id);
        cfg.apply(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Like [`parse`](Self::parse), taking the experiment from an
    /// `experiment = …` line (default `custom`).
    pub fn parse_any(text: &str) -> Result<Self> {
        let mut id = ExperimentId::Custom;
        for (line, key, value) in entries(text)? {
            if key == "experiment" {
                id = value.parse().map_err(|e: Error| config_err(line, e.to_string()))?;
            }
        }
        Self::parse(id, text)
    }

    pub fn load(id: Option<ExperimentId>, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match id {
            Some(id) => Self::parse(id, &text),
            None => Self::parse_any(&text),
        }
    }

    fn apply(&mut self, text: &str) -> Result<()> {
        let mut eigenvalues_set = false;
        let mut s_changed = false;
        let mut mode = None;
        let mut rho = None;
        for (line, key, value) in entries(text)? {
            let err = |m: String| config_err(line, m);
            match key {
                "experiment" => {
                    let id: ExperimentId = value.parse().map_err(|e: Error| err(e.to_string()))?;
                    if id != self.experiment {
                        return Err(err(format!(
                            "config is for experiment '{id}', not '{}'",
                            self.experiment
                        )));
                    }
                }
                "kernel.family" => {
                    let family: Family = value.parse().map_err(|e: Error| err(e.to_string()))?;
                    if family != self.kernel.family {
                        self.kernel.family = family;
                        match family {
                            Family::Angle => {
                                self.kernel.subsystem_size = 1;
                                self.kernel.fourier_eigenvalues = None;
                            }
                            Family::Fourier => s_changed = true,
                        }
                    }
                }
                "kernel.c" => self.kernel.bandwidth = number(value, line)?,
                "kernel.s" => {
                    self.kernel.subsystem_size = number(value, line)?;
                    s_changed = true;
                }
                "kernel.q" => self.degrees = list(value, line)?,
                "kernel.lambda_local" => self.kernel.lambda_local = number(value, line)?,
                "kernel.lambda_global" => self.kernel.lambda_global = number(value, line)?,
                "kernel.global_power" => {
                    self.kernel.global_power = value.parse().map_err(|e: Error| err(e.to_string()))?
                }
                "kernel.eigenvalues" => {
                    self.kernel.fourier_eigenvalues = Some(list(value, line)?);
                    eigenvalues_set = true;
                }
                "data.n" => self.data.n = number(value, line)?,
                "data.d" => self.data.dims = list(value, line)?,
                "data.lo" => self.data.lo = number(value, line)?,
                "data.hi" => self.data.hi = number(value, line)?,
                "data.target" => {
                    self.data.target = value.parse().map_err(|e: Error| err(e.to_string()))?
                }
                "data.noise_sigma" => self.data.noise_sigma = number(value, line)?,
                "regression.mode" => match value {
                    "ridgeless" | "ridge" => mode = Some(value),
                    other => return Err(err(format!("unknown regression mode '{other}'"))),
                },
                "regression.rho" => rho = Some(number(value, line)?),
                "regression.cutoff" => {
                    self.cutoff = value.parse().map_err(|e: Error| err(e.to_string()))?
                }
                "test.n" => self.test_n = number(value, line)?,
                "reps" => self.reps = number(value, line)?,
                "seed" => self.seed = number(value, line)?,
                other => return Err(err(format!("unknown key '{other}'"))),
            }
        }
        self.regression = match (mode, rho) {
            (Some("ridgeless"), _) => RegressionMode::Ridgeless,
            (Some(_), r) => RegressionMode::Ridge(r.unwrap_or(self.regression.rho())),
            (None, Some(r)) => RegressionMode::Ridge(r),
            (None, None) => self.regression,
        };
        if s_changed && !eigenvalues_set && self.kernel.family == Family::Fourier {
            self.kernel.fourier_eigenvalues = Some(paper_eigenvalues(self.kernel.subsystem_size));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid(m));
        if self.reps == 0 {
            return bad("reps must be >= 1".into());
        }
        if self.degrees.is_empty() || self.degrees.contains(&0) {
            return bad("kernel.q must list degrees >= 1".into());
        }
        if self.data.dims.is_empty() || self.data.dims.contains(&0) {
            return bad("data.d must list dimensions >= 1".into());
        }
        if self.data.dims.len() > 1 && self.experiment != ExperimentId::Fig3 {
            return bad("only fig3 accepts several data.d values".into());
        }
        if !(self.data.lo < self.data.hi) {
            return bad(format!("need data.lo < data.hi, got [{}, {}]", self.data.lo, self.data.hi));
        }
        if !(self.data.noise_sigma >= 0.0) {
            return bad("data.noise_sigma must be >= 0".into());
        }
        if self.regression.rho() < 0.0 {
            return bad("regression.rho must be >= 0".into());
        }
        let fits = !matches!(self.experiment, ExperimentId::Fig2 | ExperimentId::Fig3);
        if fits && self.data.n < 2 {
            return bad("data.n must be >= 2".into());
        }
        if fits && self.data.target == TargetKind::None {
            return bad(format!("{} needs a data.target", self.experiment));
        }
        if self.experiment != ExperimentId::Fig3 && self.test_n < 2 {
            return bad("test.n must be >= 2".into());
        }
        if self.experiment == ExperimentId::Fig3 && self.data.n < 2 {
            return bad("fig3 needs data.n >= 2".into());
        }
        if self.data.target == TargetKind::RkhsSum && self.data.d() != 1 {
            return bad("rkhs-sum target needs data.d = 1".into());
        }
        for &q in &self.degrees {
            self.kernel.clone().with_degree(q).validate()?;
        }
        Ok(())
    }

    /// Seed of repetition `rep`.
    pub fn rep_seed(&self, rep: usize) -> u64 {
        self.seed.wrapping_add(rep as u64)
    }

    /// Canonical `key = value` text; [`parse`](Self::parse) reads it back
    /// to an identical config.
    pub fn to_text(&self) -> String {
        fn join<T: fmt::Display>(v: &[T]) -> String {
            v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
        let k = &self.kernel;
        let mut out = String::new();
        let mut kv = |key: &str, value: String| {
            let _ = writeln!(out, "{key} = {value}");
        };
        kv("experiment", self.experiment.to_string());
        kv("seed", self.seed.to_string());
        kv("reps", self.reps.to_string());
        kv("kernel.family", k.family.name().to_string());
        kv("kernel.c", k.bandwidth.to_string());
        kv("kernel.s", k.subsystem_size.to_string());
        if let Some(ev) = &k.fourier_eigenvalues {
            kv("kernel.eigenvalues", join(ev));
        }
        kv("kernel.q", join(&self.degrees));
        kv("kernel.lambda_local", k.lambda_local.to_string());
        kv("kernel.lambda_global", k.lambda_global.to_string());
        kv("kernel.global_power", k.global_power.name().to_string());
        kv("data.n", self.data.n.to_string());
        kv("data.d", join(&self.data.dims));
        kv("data.lo", self.data.lo.to_string());
        kv("data.hi", self.data.hi.to_string());
        kv("data.target", self.data.target.to_string());
        kv("data.noise_sigma", self.data.noise_sigma.to_string());
        match self.regression {
            RegressionMode::Ridgeless => kv("regression.mode", "ridgeless".into()),
            RegressionMode::Ridge(rho) => {
                kv("regression.mode", "ridge".into());
                kv("regression.rho", rho.to_string());
            }
        }
        kv("regression.cutoff", self.cutoff.name());
        kv("test.n", self.test_n.to_string());
        out
    }
}

fn config_err(line: usize, message: String) -> Error {
    Error::Config { line, message }
}

/// `(line number, key, value)` for every non-blank, non-comment line.
fn entries(text: &str) -> Result<Vec<(usize, &str, &str)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_err(i + 1, format!("expected 'key = value', got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(config_err(i + 1, format!("empty key or value in '{line}'")));
        }
        out.push((i + 1, key, value));
    }
    Ok(out)
}

fn number<T: FromStr>(value: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| config_err(line, format!("cannot parse '{value}'")))
}

fn list<T: FromStr>(value: &str, line: usize) -> Result<Vec<T>> {
    value.split(',').map(|v| number(v.trim(), line)).collect()
}
