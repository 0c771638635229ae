//! Walsh-synthesized noise filters for a driven two-level system.
//!
//! The crate builds composite pulse sequences from Walsh spectra, computes
//! their dephasing and amplitude filter-transfer functions, turns those into
//! first-order fidelity predictions, and checks the predictions against a
//! brute-force Schrodinger propagator driven by engineered noise.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod fidelity;
pub mod filter;
pub mod linalg;
pub mod noise;
pub mod pulse;
pub mod sim;
pub mod synth;
pub mod walsh;

pub use error::{Error, Result};
