//! Closed-form decay-length and coherence models plus relativistic beam
//! kinematics.
//!
//! All functions are pure. Inputs and outputs carry units through the
//! newtypes in [`crate::units`].

mod beam;
mod constants;
mod curves;
mod lengths;

pub use beam::{beam_kinematics, interaction_constant, wavelength_shift, BeamState};
pub use constants::{PhysicalConstants, ELECTRON_REST_ENERGY_EV, HBAR_C_EV_NM, HBAR_EV_S, LIGHT_SPEED_NM_S};
pub use curves::{model_curve_table, ModelCurveSet};
pub use lengths::{
    coherence_time, evanescent_length, goos_hanchen_shift, heisenberg_time, phase_time_constant, self_coherence_length,
    tunneling_depth, CoherenceQuery, LambdaConvention,
};
