//! Streaming anomaly detection for wide measurement streams built on random
//! matrix theory.
//!
//! A `p x N` stream (channels by samples) is scanned with a moving `p x n`
//! window. Every window is row-standardized, replaced by its singular value
//! equivalent `sqrt(X X^H / n) U` with a Haar unitary `U`, and `L` consecutive
//! windows are multiplied together. Under pure noise the eigenvalues of the
//! re-standardized product fill the Ring Law annulus
//! `(1 - c)^{L/2} <= |z| <= 1`; correlated signals pull mass inward and push
//! outliers outside. The mean spectral radius (MSR) of the product is tracked
//! over time, its increments are scored with a Student-t rule and anomalies
//! are declared when the two-sided confidence crosses a threshold.
//!
//! Module map:
//!
//! * [`linalg`]: dense complex matrices, QR, Hermitian and general
//!   eigensolvers, matrix square roots, Haar and Ginibre sampling.
//! * [`rmt`]: standardization, singular value equivalents, window products,
//!   the Ring Law reference model and the MSR statistic.
//! * [`detector`]: the sliding-window pipeline producing detection records.
//! * [`synth`]: spiked `signal + noise` matrices and step/ramp scenarios.
//! * [`io`]: dataset CSV, key-value configs, manifests and the command
//!   implementations behind the `rmtad` binary.

pub mod detector;
pub mod error;
pub mod io;
pub mod linalg;
pub mod rmt;
pub mod synth;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, EigenResult, RandomSource, C64};

/// Crate version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
