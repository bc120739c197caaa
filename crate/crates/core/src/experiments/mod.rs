//! Replicated hull experiments over a grid of sample sizes (binomial model)
//! or Poisson intensities, with per-cell summaries and scaling checks.

pub mod config;
pub mod poisson;
pub mod run;
pub mod stats;

pub use config::{Bands, BodyKind, BodySpec, ExperimentConfig, Model, Outputs, Seed};
pub use run::{
    read_cell_csv, run_binomial, run_experiment, run_poisson, write_cell_csv, write_tables, CellTable, ModelKind,
    ReplicationRecord, ReplicationTable,
};
pub use stats::{clt_report, ks_to_normal, normal_cdf, summarize, variance_scaling, CltReport, SummaryStats};
