//! Link-level core for pinching-antenna-assisted index modulation (PA-IM).
//!
//! Information is carried both by M-QAM symbols and by which candidate
//! pinching-antenna positions radiate on each waveguide. This crate holds the
//! allocation-only numerics:
//!
//! - [`config`] and [`geometry`]: scenario parameters and deployment layout.
//! - [`channel`]: hybrid deterministic/stochastic channel realizations and the
//!   exact first/second-order statistics of `vec(H^H)`.
//! - [`modem`]: bits to (activation pattern, QAM symbols) and back.
//! - [`detector`]: exhaustive ML and the box-optimized sphere decoder.
//! - [`analysis`]: pairwise error probabilities and the union bound on BER.
//! - [`precoder`]: Riemannian gradient descent for the diagonal precoder.
//!
//! Everything here is `no_std` + `alloc`; file formats, the CLI and the
//! Monte Carlo harness live in the `paim` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod channel;
pub mod config;
pub mod detector;
mod error;
pub mod geometry;
pub mod linalg;
pub mod modem;
pub mod precoder;
pub mod qp;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Converts decibels to a linear power ratio.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

/// Converts a linear power ratio to decibels.
#[inline]
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * libm::log10(x)
}

/// Converts dBm to milliwatts.
#[inline]
pub fn dbm_to_mw(dbm: f64) -> f64 {
    db_to_linear(dbm)
}
