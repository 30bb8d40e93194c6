//! Memory-metered streaming testbed for planted-structure detection.
//!
//! The crate is organised in four layers:
//!
//! * [`distributions`]: seeded null/planted stream generators, truncated laws and stream transforms.
//! * [`divergence`]: exact divergences, the binomial-vs-Gaussian KL pipeline, likelihood-ratio
//!   evaluators and lower-bound calculators.
//! * [`detectors`]: streaming detectors behind a name-keyed registry, with honest state metering.
//! * [`harness`]: multi-pass trial runner, advantage estimation and reports.

pub mod bits;
pub mod detectors;
pub mod distributions;
pub mod divergence;
pub mod error;
pub mod harness;
pub mod rng;
pub mod stats;
pub mod table;

pub use error::{Error, Result};
