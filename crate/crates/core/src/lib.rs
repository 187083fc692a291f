//! Evanescent-field delocalization toolkit.
//!
//! Closed-form decay and coherence models ([`physics`]), synthetic
//! single-electron EFTEM frame stacks ([`synth`]), the stack reduction and
//! exponential fitting pipeline ([`reduce`]), energy-law fitting and model
//! discrimination ([`lawfit`]) and a small multi-slice engine used as an
//! elastic negative control ([`multislice`]).
//!
//! The numerical core is generic over the scalar type through [`Real`];
//! the aliases below pin the `f64` instantiation used by the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod lawfit;
mod linalg;
pub mod multislice;
pub mod physics;
pub mod reduce;
pub mod scalar;
pub mod synth;
pub mod units;

pub use error::{Error, Result};
pub use scalar::Real;

pub type BeamState = physics::BeamState<f64>;
pub type CoherenceQuery = physics::CoherenceQuery<f64>;
pub type ModelCurveSet = physics::ModelCurveSet<f64>;
pub type PhysicalConstants = physics::PhysicalConstants<f64>;
pub type LineProfile = reduce::LineProfile<f64>;
pub type DecayFit = reduce::DecayFit<f64>;
pub type DecaySeries = lawfit::DecaySeries<f64>;
pub type LawFitResult = lawfit::LawFitResult<f64>;
pub type WaveField = multislice::WaveField<f64>;
pub type SlabPhantom = multislice::SlabPhantom<f64>;
