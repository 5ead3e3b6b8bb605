//! Datasets, experiment configuration and runners, and file output.

pub mod config;
pub mod data;
pub mod experiments;
pub mod output;
pub mod verify;

pub use config::{DataSpec, ExperimentConfig, ExperimentId};
pub use data::{
    add_gaussian_noise, gen_target_cos_sum, gen_target_rkhs_sum, gen_target_sin_sum, gen_uniform,
    grid, rkhs_centers, seeded_rng, Dataset, Stream, TargetKind,
};
pub use experiments::{
    make_split, run_and_write, run_experiment, ExperimentReport, Method, ResultRow, Split, VERSION,
};
pub use output::{fmt_f64, read_numeric_csv, read_pgm, write_heatmap_pgm, Csv};
