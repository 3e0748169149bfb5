//! Suite files: TOML, one experiment per named table.
//!
//! An optional `[defaults]` table supplies values shared by every experiment;
//! anything left unset falls back to the built-in defaults listed in
//! [`Entry`]. Unknown keys are rejected.

use std::path::Path;

use fic_core::{ControlMode, Coupling, ExperimentSpec, ForceProfile, PlantConfig, SimConfig, StopSide};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

/// Name of the table holding shared settings.
pub const DEFAULTS_SECTION: &str = "defaults";

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: experiment `{name}`: {message}")]
    Invalid { path: String, name: String, message: String },
}

/// Raw keys of one experiment table. Units: rad, s, N·m, N·m/rad, N·m·s/rad, kg·m².
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    /// "welded" (default) or "contact".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<String>,
    /// "haptic" (default), "fixed" or "off".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k0: Option<f64>,
    /// Default 15.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_max: Option<f64>,
    /// Default 0.10, or F_Max / K0 when that is smaller.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_tilde_0: Option<f64>,
    /// Default 0.11.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_tilde_b: Option<f64>,
    /// Default 20.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    /// Default 10.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inertia: Option<f64>,
    /// Default 100.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_env: Option<f64>,
    /// Default 189.7.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_env: Option<f64>,
    /// Stop surface for contact coupling. Default 0.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contact_pos: Option<f64>,
    /// "positive" (default) or "negative".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop_side: Option<String>,
    /// Spring rest position for welded coupling. Default x0.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub env_rest: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_d: Option<f64>,
    /// Default: distance from x0 to the stop for contact coupling, 0 when welded.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_d: Option<f64>,
    /// Default 0.01.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Default 1e-3.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub force_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control_dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub physics_dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub event_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_dt: Option<f64>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl Entry {
    fn with_fallback(mut self, d: &Entry) -> Entry {
        overlay!(
            self, d, coupling, control, k0, f_max, x_tilde_0, x_tilde_b, s, inertia, k_env, d_env, contact_pos,
            stop_side, env_rest, t_d, x_d, sigma, force_tol, x0, v0, t_end, control_dt, physics_dt, event_tol,
            record_dt
        );
        self
    }

    /// Resolves defaults and validates.
    pub fn to_spec(&self, name: &str) -> Result<ExperimentSpec, String> {
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
            return Err("names may only contain ASCII letters, digits, '-', '_' and '.'".into());
        }
        let k0 = self.k0.ok_or("missing key `k0`")?;
        let t_d = self.t_d.ok_or("missing key `t_d`")?;
        let f_max = self.f_max.unwrap_or(ForceProfile::DEFAULT_F_MAX);
        let x_tilde_0 = self
            .x_tilde_0
            .unwrap_or_else(|| ForceProfile::fitted_linear_bound(k0, f_max, ForceProfile::DEFAULT_X_TILDE_0));
        let profile = ForceProfile::new(
            k0,
            f_max,
            x_tilde_0,
            self.x_tilde_b.unwrap_or(ForceProfile::DEFAULT_X_TILDE_B),
            self.s.unwrap_or(ForceProfile::DEFAULT_S),
        )
        .map_err(|e| e.to_string())?;

        let x0 = self.x0.unwrap_or(0.0);
        let inertia = self.inertia.unwrap_or(10.0);
        let k_env = self.k_env.unwrap_or(100.0);
        let d_env = self.d_env.unwrap_or(189.7);
        let contact_pos = self.contact_pos.unwrap_or(0.0);
        let stop_side = match self.stop_side.as_deref().unwrap_or("positive") {
            "positive" => StopSide::Positive,
            "negative" => StopSide::Negative,
            other => return Err(format!("stop_side must be \"positive\" or \"negative\", got \"{other}\"")),
        };
        let mut plant = match self.coupling.as_deref().unwrap_or("welded") {
            "welded" => PlantConfig::welded(inertia, k_env, d_env, self.env_rest.unwrap_or(x0)),
            "contact" => PlantConfig::contact(inertia, k_env, d_env, contact_pos),
            other => return Err(format!("coupling must be \"welded\" or \"contact\", got \"{other}\"")),
        };
        plant.stop_side = stop_side;
        if let Some(rest) = self.env_rest {
            plant.env_rest = rest;
        }
        let control = match self.control.as_deref().unwrap_or("haptic") {
            "haptic" => ControlMode::Haptic,
            "fixed" => ControlMode::Fixed,
            "off" => ControlMode::Off,
            other => return Err(format!("control must be \"haptic\", \"fixed\" or \"off\", got \"{other}\"")),
        };
        let x_d = self.x_d.unwrap_or(match plant.coupling {
            Coupling::Welded => 0.0,
            Coupling::Contact => contact_pos - x0,
        });
        let base = SimConfig::default();
        let mut spec = ExperimentSpec::new(name, profile, plant, t_d, x_d);
        spec.control = control;
        spec.x0 = x0;
        spec.v0 = self.v0.unwrap_or(0.0);
        spec.sigma = self.sigma.unwrap_or(spec.sigma);
        spec.force_tol = self.force_tol.unwrap_or(spec.force_tol);
        spec.sim = SimConfig {
            t_end: self.t_end.unwrap_or(base.t_end),
            control_dt: self.control_dt.unwrap_or(base.control_dt),
            physics_dt: self.physics_dt.unwrap_or(base.physics_dt),
            event_tol: self.event_tol.unwrap_or(base.event_tol),
            record_dt: self.record_dt.or(self.control_dt).unwrap_or(base.record_dt),
        };
        spec.validate().map_err(|e| e.to_string())?;
        Ok(spec)
    }

    /// Fully explicit entry describing `spec`.
    pub fn from_spec(spec: &ExperimentSpec) -> Entry {
        let p = &spec.profile;
        let pl = &spec.plant;
        Entry {
            coupling: Some(match pl.coupling {
                Coupling::Welded => "welded".into(),
                Coupling::Contact => "contact".into(),
            }),
            control: Some(spec.control.as_str().into()),
            k0: Some(p.k0()),
            f_max: Some(p.f_max()),
            x_tilde_0: Some(p.x_tilde_0()),
            x_tilde_b: Some(p.x_tilde_b()),
            s: Some(p.s()),
            inertia: Some(pl.inertia),
            k_env: Some(pl.k_env),
            d_env: Some(pl.d_env),
            contact_pos: Some(pl.contact_pos),
            stop_side: Some(match pl.stop_side {
                StopSide::Positive => "positive".into(),
                StopSide::Negative => "negative".into(),
            }),
            env_rest: Some(pl.env_rest),
            t_d: Some(spec.t_d),
            x_d: Some(spec.x_d),
            sigma: Some(spec.sigma),
            force_tol: Some(spec.force_tol),
            x0: Some(spec.x0),
            v0: Some(spec.v0),
            t_end: Some(spec.sim.t_end),
            control_dt: Some(spec.sim.control_dt),
            physics_dt: Some(spec.sim.physics_dt),
            event_tol: Some(spec.sim.event_tol),
            record_dt: Some(spec.sim.record_dt),
        }
    }
}

/// Parses suite text. `path` only labels error messages.
pub fn parse_suite(text: &str, path: &str) -> Result<Vec<ExperimentSpec>, SuiteError> {
    let mut tables: IndexMap<String, Entry> =
        toml::from_str(text).map_err(|e| SuiteError::Parse { path: path.into(), message: e.to_string() })?;
    let defaults = tables.shift_remove(DEFAULTS_SECTION).unwrap_or_default();
    tables
        .iter()
        .map(|(name, entry)| {
            entry.clone().with_fallback(&defaults).to_spec(name).map_err(|message| SuiteError::Invalid {
                path: path.into(),
                name: name.clone(),
                message,
            })
        })
        .collect()
}

pub fn load_suite(path: &Path) -> Result<Vec<ExperimentSpec>, SuiteError> {
    let label = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| SuiteError::Io { path: label.clone(), source })?;
    parse_suite(&text, &label)
}

/// Suite text with every key explicit; parses back to the same specs.
pub fn render_suite(specs: &[ExperimentSpec]) -> String {
    let tables: IndexMap<&str, Entry> = specs.iter().map(|s| (s.name.as_str(), Entry::from_spec(s))).collect();
    toml::to_string(&tables).expect("entries serialise")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_welded_section() {
        let specs = parse_suite("[w]\nk0 = 100.0\nt_d = 5.0\n", "t").unwrap();
        assert_eq!(specs.len(), 1);
        let s = &specs[0];
        assert_eq!(s.plant.coupling, Coupling::Welded);
        assert_eq!(s.profile.k0(), 100.0);
        assert_eq!(s.profile.f_max(), 15.0);
        assert_eq!(s.x_d, 0.0);
        assert_eq!(s.sim, SimConfig::default());
    }

    #[test]
    fn empty_text_is_an_empty_suite() {
        assert!(parse_suite("", "t").unwrap().is_empty());
        assert!(parse_suite("# nothing\n", "t").unwrap().is_empty());
    }

    #[test]
    fn negative_stiffness_is_rejected() {
        let err = parse_suite("[bad]\nk0 = -1.0\nt_d = 5.0\n", "t").unwrap_err();
        assert!(err.to_string().contains("K0 must be positive"), "{err}");
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = parse_suite("[a]\nk0 = 1.0\nt_d = 1.0\nstiffness = 3.0\n", "t").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 4"), "{msg}");
        assert!(msg.contains("stiffness"), "{msg}");
    }

    #[test]
    fn defaults_apply_and_can_be_overridden() {
        let text = "[defaults]\ncoupling = \"contact\"\ncontact_pos = 0.5\nk0 = 100.0\n\n[a]\nt_d = 5.0\n\n[b]\nt_d = 5.0\nk0 = 10.0\n";
        let specs = parse_suite(text, "t").unwrap();
        assert_eq!(specs.iter().map(|s| s.name.as_str()).collect::<Vec<_>>(), ["a", "b"]);
        assert_eq!(specs[0].x_d, 0.5);
        assert_eq!(specs[0].profile.k0(), 100.0);
        assert_eq!(specs[1].profile.k0(), 10.0);
    }

    #[test]
    fn stiff_profile_gets_fitted_linear_bound() {
        let specs = parse_suite("[a]\nk0 = 1000.0\nt_d = 5.0\n", "t").unwrap();
        assert_eq!(specs[0].profile.x_tilde_0(), 0.015);
        assert!(parse_suite("[a]\nk0 = 1000.0\nx_tilde_0 = 0.1\nt_d = 5.0\n", "t").is_err());
    }

    #[test]
    fn bad_names_and_enums() {
        assert!(parse_suite("[\"a b\"]\nk0 = 1.0\nt_d = 1.0\n", "t").is_err());
        assert!(parse_suite("[a]\nk0 = 1.0\nt_d = 1.0\ncoupling = \"glued\"\n", "t").is_err());
        assert!(parse_suite("[a]\nt_d = 1.0\n", "t").unwrap_err().to_string().contains("k0"));
    }

    #[test]
    fn render_round_trips() {
        let text = "[a]\nk0 = 1000.0\nt_d = 20.0\n\n[b]\ncoupling = \"contact\"\ncontact_pos = 0.5\nk0 = 100.0\nt_d = 5.0\nd_env = 63.2\n";
        let specs = parse_suite(text, "t").unwrap();
        let again = parse_suite(&render_suite(&specs), "t").unwrap();
        assert_eq!(specs, again);
    }
}
