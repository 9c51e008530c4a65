//! Fading amplitude laws and stationary fading processes.

pub mod model;
pub mod process;

pub use model::{FadingModel, LogFadingMoments, RegularityReport, TabulatedPdf};
pub use process::{dispersion_sum, log_autocovariance, ArmaFilter, DispersionSum, FadingProcess, TruncationRule};
