//! Configuration-driven Monte Carlo studies and their CSV/JSON reports.
//!
//! Almost-sure rates cannot be observed directly. They are measured as the
//! log-log slope of the mean (and 0.9 quantile) of the sup deviation over a
//! sequence of sample sizes, regressed on `log(n^-d log n)`.

pub mod config;
pub mod output;
pub mod queries;
pub mod slope;
pub mod studies;

pub use config::{check_admissibility, AdmissibilityParams, ExperimentConfig, GridPolicy, RateTarget};
pub use queries::{evaluate_conditions, evaluate_orlicz, OrliczAnswer, OrliczQuery};
pub use output::{csv_string, write_csv, CsvRow, CSV_HEADER};
pub use slope::{fit_slope, SlopeFit};
pub use studies::{
    bias_table, reference_grid, run_bias_study, run_estimation, run_rate_study, run_simulation, run_variance_study,
    variance_oracle, BiasReport, RateReport, StudyVerdict, VarianceReport,
};
