//! Cyclic shifted sequences (CSS) PAPR reduction for OFDM.
//!
//! The crate is organised bottom-up:
//!
//! - [`spectral`]: unitary DFT/IDFT, cyclic shifts, power and PAPR.
//! - [`modem`]: 16-QAM mapping and seeded symbol generation.
//! - [`partition`]: interleaved, adjacent and random subcarrier partitions.
//! - [`css`]: candidate generation (cyclic shifts or PTS rotations) and
//!   minimum-PAPR selection.
//! - [`acf`]: subblock power spectra and their ACF magnitudes, numeric and
//!   closed form.
//! - [`svsets`]: shift-value set criteria, scoring, search and file format.
//! - [`harness`]: Monte Carlo CCDF experiments and their CSV output.

// `!(x > 0.0)` is used on purpose so NaN is rejected along with the range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acf;
pub mod css;
mod error;
pub mod harness;
pub mod modem;
pub mod partition;
pub mod spectral;
pub mod svsets;

pub use error::{Error, Result};
