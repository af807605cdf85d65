//! ε-sweeps, rate fits, report output and run configuration.

pub mod config;
pub mod fit;
pub mod report;
pub mod sweep;

pub use config::RunConfig;
pub use fit::{linear_fit, loglog_fit, LineFit};
pub use report::{emit_report, parse_report_csv, report_csv, report_svg};
pub use sweep::{rate_sweep, RateMethod, RateReport};
