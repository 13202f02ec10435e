//! Expected-impact analysis for an initiating act that diffuses over a
//! social network.
//!
//! The crate is `no_std` (it needs `alloc`) and splits into four areas:
//!
//! * [`analytic`] evaluates the branching model in closed form: effective
//!   ratio `r = b·α·q`, total impact `T`, network multiplier `M`, regime
//!   classification, layer shares, reach counts and depth schedules.
//! * [`graph`] replaces the branching tree with a weighted adjacency
//!   structure: walk sums, spectral radius, and synthetic generators.
//! * [`sim`] is a seeded Monte Carlo realisation of the same cascade, used as
//!   an independent stochastic check of the analytic expectations.
//! * [`sir`] integrates the classical SIR system for threshold comparison.
//!
//! Everything is a pure function of its inputs.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod analytic;
pub mod error;
pub mod graph;
pub mod params;
pub mod rng;
pub mod sim;
pub mod sir;
mod sum;

pub use error::{Error, OverflowReport, Result};
pub use params::{EffectiveRatio, Horizon, ModelParams, Regime, RegimeClass, DEFAULT_CRITICAL_TOLERANCE};
