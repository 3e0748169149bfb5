//! Force-feedback search of the desired position.
//!
//! Each control tick compares the interaction torque measured on the previous
//! tick with the desired torque. Before the expected contact displacement is
//! reached the reference is placed `F_d / K0` beyond the expected contact;
//! afterwards it is nudged by steps proportional to the relative force error.

use crate::error::{invalid, Error, Result};
use crate::profiles::ForceProfile;

/// Default relative tolerance below which the force is considered on target.
pub const DEFAULT_FORCE_TOL: f64 = 1e-3;
/// Default search resolution scale.
pub const DEFAULT_SIGMA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HapticState {
    /// Adapted desired position, relative to the exploration origin.
    pub x_d_h: f64,
    /// Interaction torque measured on the previous tick.
    pub f_prev: f64,
    pub sigma: f64,
    /// Desired interaction torque.
    pub f_d: f64,
    /// Expected contact displacement, relative to the exploration origin.
    pub x_d: f64,
    pub force_tol: f64,
}

impl HapticState {
    pub fn new(f_d: f64, x_d: f64, sigma: f64, force_tol: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(invalid("sigma must be positive"));
        }
        if !(force_tol >= 0.0) || !force_tol.is_finite() {
            return Err(invalid("force_tol must be non-negative"));
        }
        if !f_d.is_finite() || !x_d.is_finite() {
            return Err(invalid("desired torque and contact displacement must be finite"));
        }
        Ok(Self { x_d_h: 0.0, f_prev: 0.0, sigma, f_d, x_d, force_tol })
    }

    /// Feed-forward step δx̃0 = F_d / K0.
    pub fn feed_forward_step(&self, profile: &ForceProfile) -> f64 {
        self.f_d / profile.k0()
    }

    /// Search resolution δx̃0^h = σ · δx̃0.
    pub fn search_step(&self, profile: &ForceProfile) -> f64 {
        self.sigma * self.feed_forward_step(profile)
    }

    pub fn on_target(&self) -> bool {
        (self.f_prev - self.f_d).abs() <= self.force_tol * self.f_d.abs()
    }
}

/// One tick of the search.
///
/// `displacement` is the joint position relative to the exploration origin;
/// `f_measured` is the interaction torque sensed on this tick and becomes the
/// previous-tick force for the next call.
pub fn haptic_update(
    state: &HapticState,
    profile: &ForceProfile,
    f_measured: f64,
    displacement: f64,
) -> Result<HapticState> {
    if !(profile.k0() > 0.0) {
        return Err(invalid("K0 must be positive"));
    }
    let mut next = *state;
    if !state.on_target() {
        if displacement.abs() <= state.x_d.abs() {
            next.x_d_h = state.x_d + state.feed_forward_step(profile);
        } else {
            if state.f_d == 0.0 {
                return Err(Error::ZeroDesiredForce);
            }
            let delta = (state.f_d - state.f_prev) / state.f_d * state.search_step(profile);
            next.x_d_h = state.x_d_h + delta;
        }
    }
    next.f_prev = f_measured;
    Ok(next)
}
