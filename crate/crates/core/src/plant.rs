//! Single rotational inertia driven by the controller torque and coupled to a
//! spring–damper environment, either welded to it or touching it through a
//! unilateral hard stop.

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coupling {
    /// Bilateral attachment: the spring–damper always acts.
    Welded,
    /// Unilateral hard stop: the spring–damper only pushes, and only while penetrated.
    Contact,
}

/// Side of `contact_pos` occupied by the stop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopSide {
    /// The stop fills `x >= contact_pos`; the body presses in the positive direction.
    Positive,
    /// The stop fills `x <= contact_pos`.
    Negative,
}

impl StopSide {
    pub fn sign(&self) -> f64 {
        match self {
            StopSide::Positive => 1.0,
            StopSide::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantConfig {
    pub inertia: f64,
    pub k_env: f64,
    pub d_env: f64,
    pub coupling: Coupling,
    pub contact_pos: f64,
    pub stop_side: StopSide,
    pub env_rest: f64,
}

impl PlantConfig {
    pub fn welded(inertia: f64, k_env: f64, d_env: f64, env_rest: f64) -> Self {
        Self {
            inertia,
            k_env,
            d_env,
            coupling: Coupling::Welded,
            contact_pos: 0.0,
            stop_side: StopSide::Positive,
            env_rest,
        }
    }

    pub fn contact(inertia: f64, k_env: f64, d_env: f64, contact_pos: f64) -> Self {
        Self {
            inertia,
            k_env,
            d_env,
            coupling: Coupling::Contact,
            contact_pos,
            stop_side: StopSide::Positive,
            env_rest: contact_pos,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.inertia, self.k_env, self.d_env, self.contact_pos, self.env_rest];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(invalid("plant parameters must be finite"));
        }
        if self.inertia <= 0.0 {
            return Err(invalid("inertia must be positive"));
        }
        if self.k_env < 0.0 {
            return Err(invalid("K_env must be non-negative"));
        }
        if self.d_env < 0.0 {
            return Err(invalid("D_env must be non-negative"));
        }
        Ok(())
    }

    /// Signed depth into the stop; positive while penetrating. Meaningless for welded coupling.
    pub fn penetration(&self, x: f64) -> f64 {
        self.stop_side.sign() * (x - self.contact_pos)
    }

    /// Environment torque with the contact flag held fixed, as used inside an
    /// integration step. Outside contact the stop exerts nothing.
    pub fn env_torque_in_mode(&self, x: f64, x_dot: f64, in_contact: bool) -> f64 {
        match self.coupling {
            Coupling::Welded => -self.k_env * (x - self.env_rest) - self.d_env * x_dot,
            Coupling::Contact => {
                if !in_contact {
                    return 0.0;
                }
                let n = self.stop_side.sign();
                let depth = n * (x - self.contact_pos);
                let depth_rate = n * x_dot;
                // damping only while moving into the stop
                let push = self.k_env * depth + self.d_env * depth_rate.max(0.0);
                // the stop can push the body out, never pull it in
                -n * push.max(0.0)
            }
        }
    }

    /// Environment torque on the body and whether the environment is engaged.
    pub fn env_torque(&self, x: f64, x_dot: f64) -> (f64, bool) {
        let engaged = match self.coupling {
            Coupling::Welded => true,
            Coupling::Contact => self.penetration(x) > 0.0,
        };
        (self.env_torque_in_mode(x, x_dot, engaged), engaged)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState {
    pub x: f64,
    pub x_dot: f64,
    pub in_contact: bool,
    pub f_env: f64,
}

/// Time derivative of (x, x_dot) under the controller torque `tau_ctrl`.
pub fn plant_derivative(cfg: &PlantConfig, state: &PlantState, tau_ctrl: f64) -> (f64, f64) {
    let f_env = cfg.env_torque_in_mode(state.x, state.x_dot, state.in_contact);
    (state.x_dot, (tau_ctrl + f_env) / cfg.inertia)
}
