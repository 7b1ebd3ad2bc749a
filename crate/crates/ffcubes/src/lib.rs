//! Command-line runner, report formats and parallel drivers for `ffcubes-core`.

pub mod cli;
mod commands;
pub mod error;
pub mod fit;
pub mod parallel;
pub mod params;
pub mod report;

pub use cli::run;
pub use fit::{fit_exponent, FitReport};
