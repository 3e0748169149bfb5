//! Self-test battery run by `fic --check`.
//!
//! Each check is a short deterministic computation against an independent
//! reference (quadrature, closed-form oscillator, step halving) or an
//! invariant evaluated over a few simulated runs.

use crate::controller::{lyapunov_value, ControllerState, Phase};
use crate::experiment::{ControlMode, ExperimentSpec};
use crate::integrator::rk4_step;
use crate::plant::PlantConfig;
use crate::profiles::ForceProfile;
use crate::sim::{run_simulation, SimConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name, passed, detail }
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn nominal_profile() -> ForceProfile {
    ForceProfile::with_stiffness(100.0).expect("default profile is valid")
}

fn check_energy_quadrature() -> CheckOutcome {
    let p = nominal_profile();
    let f = |u: f64| p.force(u);
    let mut worst: f64 = 0.0;
    for i in 1..=60 {
        let x = 0.3 * i as f64 / 60.0;
        // split at the breakpoints so each panel is smooth
        let mut edges = vec![0.0];
        edges.extend([p.x_tilde_0(), p.x_tilde_b()].into_iter().filter(|&e| e < x));
        edges.push(x);
        let q: f64 = edges.windows(2).map(|w| simpson(&f, w[0], w[1], 2000)).sum();
        worst = worst.max((p.energy(x) - q).abs() / q.max(1e-300));
    }
    outcome("energy matches quadrature", worst < 1e-9, format!("max relative error {worst:.2e}"))
}

fn check_profile_continuity() -> CheckOutcome {
    let p = nominal_profile();
    let mut worst: f64 = 0.0;
    for edge in [p.x_tilde_0(), p.x_tilde_b()] {
        let gap = (p.force(edge + 1e-12) - p.force(edge - 1e-12)).abs();
        worst = worst.max(gap);
    }
    outcome("profile continuous at breakpoints", worst < 1e-6, format!("max gap {worst:.2e} N·m"))
}

fn check_inversion_continuity() -> CheckOutcome {
    let p = nominal_profile();
    let mut worst: f64 = 0.0;
    for i in 1..=200 {
        let x_max = 0.3 * i as f64 / 200.0;
        let after = p.antagonist_force(x_max, x_max).unwrap_or(f64::NAN);
        worst = worst.max((after - p.force(x_max)).abs() / p.force(x_max));
    }
    outcome("antagonist matches profile at inversion", worst < 1e-12, format!("max relative gap {worst:.2e}"))
}

fn check_integrator_order() -> CheckOutcome {
    // x'' = -x from (1, 0); error at t = 1 for h and h/2
    let err = |h: f64| {
        let n = (1.0 / h).round() as usize;
        let mut y = [1.0, 0.0];
        for _ in 0..n {
            y = rk4_step(|s| [s[1], -s[0]], &y, h);
        }
        (y[0] - 1f64.cos()).abs()
    };
    let ratio = err(0.1) / err(0.05);
    outcome("integrator fourth order", (14.0..18.0).contains(&ratio), format!("error ratio {ratio:.2}"))
}

fn check_welded_oracle() -> CheckOutcome {
    let (i, k, d, x0) = (10.0, 100.0, 189.7, 0.05);
    let plant = PlantConfig::welded(i, k, d, 0.0);
    let mut exp = ExperimentSpec::new("oracle", nominal_profile(), plant, 1.0, 0.0);
    exp.control = ControlMode::Off;
    exp.x0 = x0;
    exp.sim = SimConfig { t_end: 5.0, ..SimConfig::default() };
    let disc = (d * d - 4.0 * i * k).sqrt();
    let (r1, r2) = ((-d + disc) / (2.0 * i), (-d - disc) / (2.0 * i));
    let b = -r1 * x0 / (r2 - r1);
    let a = x0 - b;
    match run_simulation(&exp) {
        Ok(tr) => {
            let worst = tr
                .rows
                .iter()
                .map(|r| (r.x - (a * (r1 * r.t).exp() + b * (r2 * r.t).exp())).abs())
                .fold(0.0, f64::max);
            outcome("welded plant matches damped oscillator", worst < 1e-6, format!("max error {worst:.2e} rad"))
        }
        Err(e) => outcome("welded plant matches damped oscillator", false, e.to_string()),
    }
}

fn battery() -> Vec<ExperimentSpec> {
    let mut out = Vec::new();
    for &(k0, t_d) in &[(100.0, 5.0), (10.0, 1.0), (1000.0, 5.0)] {
        let p = ForceProfile::with_defaults(k0, 15.0).expect("valid");
        out.push(ExperimentSpec::new("welded", p, PlantConfig::welded(10.0, 100.0, 189.7, 0.0), t_d, 0.0));
    }
    let p = nominal_profile();
    out.push(ExperimentSpec::new("contact", p, PlantConfig::contact(10.0, 100.0, 0.0, 0.5), 5.0, 0.5));
    let mut free = ExperimentSpec::new("free", p, PlantConfig::welded(10.0, 0.0, 0.0, 0.0), 5.0, 0.0);
    free.control = ControlMode::Fixed;
    free.v0 = 1.0;
    out.push(free);
    for e in &mut out {
        e.sim.t_end = 3.0;
    }
    out
}

fn check_switches() -> Vec<CheckOutcome> {
    let mut torque_gap: f64 = 0.0;
    let mut lyap_gap: f64 = 0.0;
    let mut over: f64 = 0.0;
    let mut failures = Vec::new();
    let mut switches = 0;
    for exp in battery() {
        match run_simulation(&exp) {
            Ok(tr) => {
                let f_max = exp.profile.f_max();
                over = over.max(tr.max_abs_torque - f_max);
                for s in tr.switches.iter().filter(|s| s.located) {
                    switches += 1;
                    torque_gap = torque_gap.max((s.torque_after - s.torque_before).abs() / f_max);
                    lyap_gap = lyap_gap
                        .max((s.lyapunov_at_max - s.spring_energy).abs())
                        .max(s.lyapunov_at_origin.abs());
                }
            }
            Err(e) => failures.push(format!("{}: {e}", exp.name)),
        }
    }
    let tail = if failures.is_empty() { String::new() } else { format!("; failed runs: {}", failures.join(", ")) };
    let ok = failures.is_empty() && switches > 0;
    vec![
        outcome(
            "torque continuous at inversion",
            ok && torque_gap < 1e-9,
            format!("{switches} switches, max jump {torque_gap:.2e}·F_Max{tail}"),
        ),
        outcome("energy candidate continuous at switches", ok && lyap_gap < 1e-9, format!("max gap {lyap_gap:.2e} J{tail}")),
        outcome("torque bounded by F_Max", failures.is_empty() && over <= 0.0, format!("max excess {over:.2e} N·m{tail}")),
    ]
}

fn check_monitor_endpoints() -> CheckOutcome {
    let p = nominal_profile();
    let mut worst: f64 = 0.0;
    for i in 1..=100 {
        let x_max = 0.25 * i as f64 / 100.0;
        let c = ControllerState { phase: Phase::Converging, x_max, ..ControllerState::default() };
        let at_max = lyapunov_value(&c, &p, x_max, 0.0, 10.0).value;
        let at_origin = lyapunov_value(&c, &p, 0.0, 0.0, 10.0).value;
        worst = worst.max((at_max - p.energy(x_max)).abs()).max(at_origin.abs());
    }
    outcome("energy candidate endpoint conditions", worst < 1e-12, format!("max residual {worst:.2e} J"))
}

/// Runs every check; a few seconds in release builds.
pub fn run_all() -> Vec<CheckOutcome> {
    let mut out = vec![
        check_energy_quadrature(),
        check_profile_continuity(),
        check_inversion_continuity(),
        check_monitor_endpoints(),
        check_integrator_order(),
        check_welded_oracle(),
    ];
    out.extend(check_switches());
    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn battery_passes() {
        for c in super::run_all() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
