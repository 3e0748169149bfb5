//! Fractal impedance state machine.
//!
//! While the displacement grows the controller behaves as the nonlinear
//! spring of [`ForceProfile::force`]. At the inversion point the recorded
//! maximum `x_max` selects a centred antagonist spring which drives the state
//! back to the desired pose. Crossing the desired pose resets the attractor.
//!
//! Sign convention: `x_tilde = x - x_desired`, and the returned torque is the
//! restoring torque applied to the joint (opposite in sign to `x_tilde`).

use crate::profiles::ForceProfile;

/// Velocities whose outward component is above `-VELOCITY_DEADBAND` do not
/// count as an inversion.
pub const VELOCITY_DEADBAND: f64 = 1e-10;

/// Recorded maxima below this are treated as already converged.
pub const MIN_X_MAX: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Diverging,
    Converging,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Diverging => "diverging",
            Phase::Converging => "converging",
        }
    }
}

/// Which side of the desired pose the current episode lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Negative,
    Positive,
}

impl Side {
    pub fn of(x: f64) -> Side {
        if x < 0.0 {
            Side::Negative
        } else {
            Side::Positive
        }
    }

    pub fn sign(&self) -> f64 {
        match self {
            Side::Negative => -1.0,
            Side::Positive => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerState {
    pub phase: Phase,
    pub x_max: f64,
    pub side: Side,
    pub last_torque: f64,
}

impl Default for ControllerState {
    fn default() -> Self {
        Self { phase: Phase::Diverging, x_max: 0.0, side: Side::Positive, last_torque: 0.0 }
    }
}

impl ControllerState {
    /// Applies the phase transition rules for the displacement `x_tilde` and
    /// its rate. Returns the new state with `last_torque` left untouched.
    pub fn advance(&self, x_tilde: f64, x_tilde_dot: f64) -> ControllerState {
        let mut next = *self;
        let u = x_tilde.abs();

        if next.phase == Phase::Converging {
            let crossed = x_tilde * next.side.sign() <= 0.0;
            if crossed {
                // attractor reset at the desired pose
                next.phase = Phase::Diverging;
                next.x_max = 0.0;
                next.side = Side::of(x_tilde);
                if x_tilde == 0.0 {
                    next.side = Side::of(x_tilde_dot);
                }
            } else if u > next.x_max || next.side.sign() * x_tilde_dot > VELOCITY_DEADBAND {
                // pushed past the maximum, or moving away again
                next.phase = Phase::Diverging;
                next.x_max = u;
            } else {
                return next;
            }
        }

        // Diverging: track the displacement on the current side.
        if Side::of(x_tilde) != next.side && x_tilde != 0.0 {
            next.side = Side::of(x_tilde);
            next.x_max = 0.0;
        }
        next.x_max = next.x_max.max(u);
        let inward = next.side.sign() * x_tilde_dot < -VELOCITY_DEADBAND;
        if inward && u > MIN_X_MAX {
            next.phase = Phase::Converging;
            next.x_max = u;
        }
        next
    }

    /// Restoring torque for the current phase, without changing the phase.
    pub fn torque(&self, profile: &ForceProfile, x_tilde: f64) -> f64 {
        match self.phase {
            Phase::Diverging => -profile.force(x_tilde),
            Phase::Converging => {
                let s = self.side.sign();
                // The antagonist is only defined on [0, x_max]; integrator
                // stages may probe slightly outside before the event is located.
                let u = (s * x_tilde).clamp(0.0, self.x_max);
                // x_max >= MIN_X_MAX whenever converging
                let f = profile.antagonist_force(u, self.x_max).unwrap_or(0.0);
                -s * f
            }
        }
    }
}

/// One controller evaluation: phase bookkeeping followed by the torque law.
pub fn compute_torque(
    state: &ControllerState,
    profile: &ForceProfile,
    x_tilde: f64,
    x_tilde_dot: f64,
) -> (f64, ControllerState) {
    let mut next = state.advance(x_tilde, x_tilde_dot);
    let torque = next.torque(profile, x_tilde);
    next.last_torque = torque;
    (torque, next)
}

/// Which piece of the Lyapunov candidate is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LyapunovBranch {
    Spring,
    Antagonist,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovRecord {
    pub value: f64,
    pub offset: f64,
    pub branch: LyapunovBranch,
}

/// Antagonist energy difference ΔE_A = 2·E_AA(x_max) − E_K(x_max).
/// Zero inside the linear region, negative once the force-matched slope is used.
pub fn antagonist_energy_gap(profile: &ForceProfile, x_max: f64) -> f64 {
    let e_aa = profile.antagonist_energy(x_max, x_max).unwrap_or(0.0);
    2.0 * e_aa - profile.energy(x_max)
}

/// Per-episode offset E_C = (E_K(x_max) − ΔE_A) / 2.
pub fn energy_offset(profile: &ForceProfile, x_max: f64) -> f64 {
    if x_max < MIN_X_MAX {
        return 0.0;
    }
    0.5 * (profile.energy(x_max) - antagonist_energy_gap(profile, x_max))
}

/// Oriented antagonist energy used by the Lyapunov monitor, for `u` measured
/// on the episode side.
///
/// Between the midpoint and `x_max` it is the spring potential. Between the
/// desired pose and the midpoint the spring is doing negative work on the
/// motion, and the energy is taken negative and scaled so that it reaches
/// `-E_C` at the desired pose. This is what makes both endpoint conditions
/// hold: the candidate equals E_K(x_max) at inversion and vanishes at rest on
/// the desired pose, while staying non-increasing in between.
pub fn oriented_antagonist_energy(profile: &ForceProfile, u: f64, x_max: f64) -> f64 {
    if x_max < MIN_X_MAX {
        return 0.0;
    }
    let mid = 0.5 * x_max;
    if u >= mid {
        profile.antagonist_energy(u, x_max).unwrap_or(0.0)
    } else {
        let r = (mid - u) / mid;
        -energy_offset(profile, x_max) * r * r
    }
}

/// Lyapunov candidate for the current phase.
pub fn lyapunov_value(
    state: &ControllerState,
    profile: &ForceProfile,
    x_tilde: f64,
    x_tilde_dot: f64,
    inertia: f64,
) -> LyapunovRecord {
    let kinetic = 0.5 * inertia * x_tilde_dot * x_tilde_dot;
    match state.phase {
        Phase::Diverging => LyapunovRecord {
            value: kinetic + profile.energy(x_tilde),
            offset: 0.0,
            branch: LyapunovBranch::Spring,
        },
        Phase::Converging => {
            let offset = energy_offset(profile, state.x_max);
            let u = state.side.sign() * x_tilde;
            LyapunovRecord {
                value: kinetic + oriented_antagonist_energy(profile, u, state.x_max) + offset,
                offset,
                branch: LyapunovBranch::Antagonist,
            }
        }
    }
}
