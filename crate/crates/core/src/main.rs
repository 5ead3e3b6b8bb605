use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::DMatrix;

use lgqk::harness::experiments::spectrum_table;
use lgqk::harness::output::{matrix_csv, Csv};
use lgqk::harness::verify::oracle_suite;
use lgqk::harness::{fmt_f64, read_numeric_csv, run_and_write, write_heatmap_pgm, ExperimentConfig, ExperimentId};
use lgqk::kernels::{cross_gram, gram, KernelSpec};
use lgqk::learning::{fit_with_cutoff, mse, predict};
use lgqk::linalg::eigh_desc;
use lgqk::{Error, Result};

/// Local-global quantum kernels: evaluation, regression and experiments.
#[derive(Parser)]
#[command(name = "lgqk", version)]
struct Cli {
    /// Key-value config file; unset keys keep the defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; repetition r uses seed + r.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Number of repetitions.
    #[arg(long, global = true)]
    reps: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate k_LG on pairs: each CSV row holds x_1..x_d then z_1..z_d.
    Kernel { input: PathBuf },
    /// Gram matrix of the rows of a CSV, as gram.csv and gram.pgm.
    Gram { input: PathBuf },
    /// Fit on a CSV whose last column is y; report train and test MSE.
    Fit {
        train: PathBuf,
        /// Test CSV in the same layout; defaults to the training set.
        #[arg(long)]
        test: Option<PathBuf>,
    },
    /// Descending eigenvalues of the Gram matrix of a CSV.
    Spectrum { input: PathBuf },
    /// Run a full experiment: fig2, fig3, fig4, table1, table2, fig5, custom.
    Experiment { id: String },
    /// Compare closed-form kernels with the circuit simulator.
    Verify,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn config(cli: &Cli, id: Option<ExperimentId>) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(id, path)?,
        None => ExperimentConfig::defaults(id.unwrap_or(ExperimentId::Custom)),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(reps) = cli.reps {
        cfg.reps = reps;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Kernel of the config at its first listed degree.
fn kernel(cfg: &ExperimentConfig) -> KernelSpec {
    cfg.kernel.clone().with_degree(cfg.degrees[0])
}

fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let (_, rows) = read_numeric_csv(&std::fs::read_to_string(path)?)?;
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let cols = rows[0].len();
    Ok(DMatrix::from_row_iterator(rows.len(), cols, rows.into_iter().flatten()))
}

/// Splits off the last column as targets.
fn read_labelled(path: &Path) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let m = read_matrix(path)?;
    if m.ncols() < 2 {
        return Err(Error::InvalidParameter("labelled CSV needs at least one feature and a y column".into()));
    }
    let d = m.ncols() - 1;
    Ok((m.columns(0, d).into_owned(), m.column(d).iter().copied().collect()))
}

fn run(cli: &Cli) -> Result<ExitCode> {
    std::fs::create_dir_all(&cli.out)?;
    match &cli.command {
        Command::Kernel { input } => {
            let spec = kernel(&config(cli, None)?);
            let m = read_matrix(input)?;
            if m.ncols() % 2 != 0 {
                return Err(Error::InvalidParameter("pair CSV needs an even number of columns".into()));
            }
            let d = m.ncols() / 2;
            let eval = spec.evaluator()?;
            let mut csv = Csv::new(&["index", "k_lg"]);
            for (i, row) in m.row_iter().enumerate() {
                let v: Vec<f64> = row.iter().copied().collect();
                csv.push(vec![i.to_string(), fmt_f64(eval.local_global(&v[..d], &v[d..]))]);
            }
            csv.write(&cli.out.join("kernel.csv"))?;
        }
        Command::Gram { input } => {
            let spec = kernel(&config(cli, None)?);
            let k = gram(&spec, &read_matrix(input)?)?;
            std::fs::write(cli.out.join("gram.csv"), matrix_csv(&k.entries))?;
            write_heatmap_pgm(&k.entries, &cli.out.join("gram.pgm"))?;
        }
        Command::Fit { train, test } => {
            let cfg = config(cli, None)?;
            let (x, y) = read_labelled(train)?;
            let (xt, yt) = match test {
                Some(p) => read_labelled(p)?,
                None => (x.clone(), y.clone()),
            };
            let mut csv = Csv::new(&["q", "mode", "train_mse", "test_mse"]);
            for &q in &cfg.degrees {
                let spec = cfg.kernel.clone().with_degree(q);
                let f = fit_with_cutoff(&gram(&spec, &x)?, &y, cfg.regression, cfg.cutoff)?;
                let pred = predict(&f, &cross_gram(&spec, &x, &xt)?)?;
                csv.push(vec![
                    q.to_string(),
                    cfg.regression.to_string(),
                    fmt_f64(f.train_mse),
                    fmt_f64(mse(&pred, &yt)?),
                ]);
            }
            csv.write(&cli.out.join("fit.csv"))?;
        }
        Command::Spectrum { input } => {
            let spec = kernel(&config(cli, None)?);
            let eig = eigh_desc(&gram(&spec, &read_matrix(input)?)?.entries)?;
            spectrum_table(eig.eigenvalues.as_slice()).write(&cli.out.join("spectrum.csv"))?;
        }
        Command::Experiment { id } => {
            let cfg = config(cli, Some(id.parse()?))?;
            let report = run_and_write(&cfg, &cli.out)?;
            for m in report.methods() {
                println!(
                    "{:?}: mean train {:e}, mean test {:e}",
                    m,
                    report.mean_train_mse(m).unwrap_or(f64::NAN),
                    report.mean_test_mse(m).unwrap_or(f64::NAN)
                );
            }
            println!("wrote {}", cli.out.display());
        }
        Command::Verify => {
            let mut ok = true;
            for c in oracle_suite(cli.seed.unwrap_or(0))? {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            if !ok {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
