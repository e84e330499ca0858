//! Network-parameter analysis for capacitor-class antenna elements.
//!
//! The pipeline ingests Touchstone v1 scattering data, extracts impedance,
//! computes dissipation-factor metrics, synthesizes matching networks,
//! evaluates VSWR, simulates array radiation patterns and compares
//! modem signal-quality field logs.
//!
//! ```
//! use rfcap::rf::{reflection_coefficient};
//! use rfcap::matching::vswr_from_gamma;
//! use num_complex::Complex64;
//!
//! let gamma = reflection_coefficient(Complex64::new(1.0, 0.0), 50.0).unwrap();
//! let vswr = vswr_from_gamma(gamma.norm());
//! assert!((vswr - 50.0).abs() < 1e-9);
//! ```

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod field_stats;
pub mod fixtures;
pub mod matching;
pub mod metrics;
pub mod numfmt;
pub mod radiation;
pub mod report;
pub mod rf;
pub mod svg;
pub mod touchstone;

pub use error::{Error, Result};
pub use num_complex::Complex64;
