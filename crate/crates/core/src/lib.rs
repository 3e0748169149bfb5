//! Fractal impedance control of a single rotational joint.
//!
//! The crate bundles the nonlinear divergence spring and its antagonist
//! convergence spring ([`profiles`]), the phase-switching controller with its
//! energy monitor ([`controller`]), the force-feedback search of the desired
//! position ([`haptic`]), a 1-DOF plant touching a spring–damper environment
//! ([`plant`]), the hybrid integrator tying them together ([`sim`]) and
//! tracking statistics ([`metrics`]).

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod check;
pub mod controller;
pub mod error;
pub mod experiment;
pub mod haptic;
pub mod integrator;
pub mod metrics;
pub mod plant;
pub mod profiles;
pub mod sim;

pub use controller::{compute_torque, lyapunov_value, ControllerState, LyapunovRecord, Phase, Side};
pub use error::{Error, Result};
pub use experiment::{ControlMode, ExperimentSpec};
pub use haptic::{haptic_update, HapticState};
pub use metrics::{normalized_mse, one_percent_reference, summarize, ErrorSummary};
pub use plant::{plant_derivative, Coupling, PlantConfig, PlantState, StopSide};
pub use profiles::ForceProfile;
pub use sim::{run_simulation, SimConfig, SimTrace, SwitchRecord, TraceRow};
