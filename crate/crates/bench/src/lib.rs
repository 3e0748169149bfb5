//! Fixtures shared by the benchmarks.

use fic_core::{ExperimentSpec, ForceProfile, PlantConfig};

pub fn welded(k0: f64, t_d: f64) -> ExperimentSpec {
    let p = ForceProfile::with_defaults(k0, ForceProfile::DEFAULT_F_MAX).expect("valid profile");
    ExperimentSpec::new("welded", p, PlantConfig::welded(10.0, 100.0, 189.7, 0.0), t_d, 0.0)
}

/// Contact run starting 0.5 rad away from the stop.
pub fn contact(k_env: f64, d_env: f64) -> ExperimentSpec {
    let p = ForceProfile::with_stiffness(100.0).expect("valid profile");
    ExperimentSpec::new("contact", p, PlantConfig::contact(10.0, k_env, d_env, 0.5), 5.0, 0.5)
}
