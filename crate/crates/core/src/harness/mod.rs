//! Experiment sweeps over sample sizes and trials.
//!
//! A sweep is described by a flat `key = value` file ([`ExperimentConfig`]),
//! produces one CSV row per `(measure, size tuple, trial)` with columns
//! `problem,measure,m,n,M,N,lambda,trial,seed,value`, and is summarized by a
//! log-log slope of per-size medians against `a^{-1/2} + b^{-1/2}`.
//!
//! The `lambda` column holds the scheduled ratio-estimation value for
//! `beta_*` and `aggregate_*` rows and the scheduled regression value for
//! the others.

mod config;
mod rates;
mod report;
mod sweep;

pub use config::{parse_sizes, ExperimentConfig, Measurement, Schedule, SizeTuple, WeightMode};
pub use rates::{fit_rate, median, medians, theoretical_exponent, Independent, RateFit, RatePoint};
pub use report::{plot_script, report, summary_text, ReportFiles, TheoryParams};
pub use sweep::{read_rows, run_sweep, run_sweep_on, run_sweep_to, write_rows, ResultRow};
