use crate::error::{invalid, Result};
use crate::haptic::{DEFAULT_FORCE_TOL, DEFAULT_SIGMA};
use crate::plant::PlantConfig;
use crate::profiles::ForceProfile;
use crate::sim::SimConfig;

/// How the desired position is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControlMode {
    /// Impedance controller with the force-feedback search adapting the reference.
    Haptic,
    /// Impedance controller holding the reference at `x0 + x_d`.
    Fixed,
    /// No controller torque at all.
    Off,
}

impl ControlMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ControlMode::Haptic => "haptic",
            ControlMode::Fixed => "fixed",
            ControlMode::Off => "off",
        }
    }
}

/// One complete simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub profile: ForceProfile,
    pub plant: PlantConfig,
    pub sim: SimConfig,
    /// Desired interaction torque, N·m.
    pub t_d: f64,
    /// Expected contact displacement from the initial position, rad.
    pub x_d: f64,
    pub sigma: f64,
    pub force_tol: f64,
    pub x0: f64,
    pub v0: f64,
    pub control: ControlMode,
}

impl ExperimentSpec {
    /// Spec with the default search settings and a resting start at the origin.
    pub fn new(name: impl Into<String>, profile: ForceProfile, plant: PlantConfig, t_d: f64, x_d: f64) -> Self {
        Self {
            name: name.into(),
            profile,
            plant,
            sim: SimConfig::default(),
            t_d,
            x_d,
            sigma: DEFAULT_SIGMA,
            force_tol: DEFAULT_FORCE_TOL,
            x0: 0.0,
            v0: 0.0,
            control: ControlMode::Haptic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(invalid("experiment name must not be empty"));
        }
        self.plant.validate()?;
        self.sim.validate()?;
        for (v, what) in [(self.t_d, "T_d"), (self.x_d, "x_d"), (self.x0, "x0"), (self.v0, "v0")] {
            if !v.is_finite() {
                return Err(invalid(format!("{what} must be finite")));
            }
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(invalid("sigma must be positive"));
        }
        if !(self.force_tol >= 0.0) || !self.force_tol.is_finite() {
            return Err(invalid("force_tol must be non-negative"));
        }
        if self.control == ControlMode::Haptic && self.t_d == 0.0 {
            return Err(invalid("T_d must be non-zero for the force search"));
        }
        Ok(())
    }

    /// Torque used to normalise tracking errors: T_d, or F_Max when the target
    /// is beyond saturation.
    pub fn torque_norm(&self) -> f64 {
        self.t_d.abs().min(self.profile.f_max())
    }
}
