//! Hybrid simulation loop.
//!
//! The plant is integrated with fixed RK4 sub-steps. The controller torque law
//! is evaluated at every stage with its discrete state (phase, recorded
//! maximum, side) and the contact flag held constant; whenever a sub-step
//! would change any of them, the crossing is bisected down to `event_tol` and
//! the transition is applied at the located time. The force search runs on
//! the coarser control grid and holds the reference in between.

use std::fmt::Write as _;

use crate::controller::{lyapunov_value, ControllerState, Phase, MIN_X_MAX, VELOCITY_DEADBAND};
use crate::error::{invalid, Error, Result};
use crate::experiment::{ControlMode, ExperimentSpec};
use crate::haptic::{haptic_update, HapticState};
use crate::integrator::rk4_step;
use crate::plant::Coupling;

/// |x| or |x_dot| beyond this aborts the run.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

const MAX_EVENTS_PER_STEP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub t_end: f64,
    pub control_dt: f64,
    pub physics_dt: f64,
    pub event_tol: f64,
    pub record_dt: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { t_end: 10.0, control_dt: 0.01, physics_dt: 1e-4, event_tol: 1e-9, record_dt: 0.01 }
    }
}

fn integer_ratio(num: f64, den: f64) -> Option<usize> {
    let r = num / den;
    let n = r.round();
    if n >= 1.0 && (r - n).abs() <= 1e-6 * n {
        Some(n as usize)
    } else {
        None
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [self.t_end, self.control_dt, self.physics_dt, self.event_tol, self.record_dt];
        if all.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(invalid("time settings must be positive and finite"));
        }
        if self.physics_dt > self.control_dt {
            return Err(invalid("physics_dt must not exceed control_dt"));
        }
        if integer_ratio(self.control_dt, self.physics_dt).is_none() {
            return Err(invalid("control_dt must be an integer multiple of physics_dt"));
        }
        if integer_ratio(self.record_dt, self.control_dt).is_none() {
            return Err(invalid("record_dt must be an integer multiple of control_dt"));
        }
        if integer_ratio(self.t_end, self.control_dt).is_none() {
            return Err(invalid("t_end must be an integer multiple of control_dt"));
        }
        if self.event_tol >= self.physics_dt {
            return Err(invalid("event_tol must be smaller than physics_dt"));
        }
        Ok(())
    }

    fn substeps(&self) -> usize {
        integer_ratio(self.control_dt, self.physics_dt).unwrap_or(1)
    }

    fn ticks(&self) -> usize {
        integer_ratio(self.t_end, self.control_dt).unwrap_or(0)
    }

    fn record_every(&self) -> usize {
        integer_ratio(self.record_dt, self.control_dt).unwrap_or(1)
    }
}

/// One sample of the trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub x: f64,
    pub x_dot: f64,
    pub x_tilde: f64,
    pub h_e: f64,
    pub f_env: f64,
    pub x_d_h: f64,
    pub phase: Phase,
    pub x_max: f64,
    pub v: f64,
    pub in_contact: bool,
    /// Work done by the controller on the body since t = 0.
    pub ctrl_work: f64,
    /// Work done by the environment on the body since t = 0.
    pub env_work: f64,
}

impl TraceRow {
    /// Interaction torque the body exerts on the environment.
    pub fn interaction_torque(&self) -> f64 {
        -self.f_env
    }
}

/// Bookkeeping for one divergence-to-convergence switch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchRecord {
    pub t: f64,
    pub x_max: f64,
    /// Divergence torque at the switch state.
    pub torque_before: f64,
    /// Convergence torque at the same state.
    pub torque_after: f64,
    /// Stored divergence energy E_K(x_max).
    pub spring_energy: f64,
    /// Lyapunov candidate of the new episode at (x_max, 0).
    pub lyapunov_at_max: f64,
    /// Lyapunov candidate of the new episode at (0, 0).
    pub lyapunov_at_origin: f64,
    /// True when the switch was located inside a sub-step rather than caused
    /// by a reference update on a control tick.
    pub located: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimTrace {
    pub rows: Vec<TraceRow>,
    pub switches: Vec<SwitchRecord>,
    /// Largest |h_e| seen at any integrator stage.
    pub max_abs_torque: f64,
    /// Accepted steps on which the stop pulled the body inwards.
    pub pull_violations: usize,
    /// Deepest penetration registered right after a located contact make.
    pub max_make_penetration: f64,
    pub events: usize,
    /// Contact flag at t = 0 followed by every located change as (time, in_contact).
    pub contact_changes: Vec<(f64, bool)>,
}

pub const CSV_HEADER: &str = "t,x,x_dot,x_tilde,h_e,F_env,x_d_h,phase,x_max,V,in_contact";

/// Formats with nine significant digits.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        // no "-0" in output
        "0.00000000e0".to_string()
    } else if v.is_finite() {
        format!("{v:.8e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

impl SimTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 160);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                fmt_num(r.t),
                fmt_num(r.x),
                fmt_num(r.x_dot),
                fmt_num(r.x_tilde),
                fmt_num(r.h_e),
                fmt_num(r.f_env),
                fmt_num(r.x_d_h),
                r.phase.as_str(),
                fmt_num(r.x_max),
                fmt_num(r.v),
                u8::from(r.in_contact),
            );
        }
        out
    }
}

// Continuous state: position, velocity, controller work, environment work.
type Y = [f64; 4];

#[derive(Debug, Clone, Copy)]
struct Mode {
    ctrl: ControllerState,
    in_contact: bool,
    reference: f64,
}

struct Runner<'a> {
    exp: &'a ExperimentSpec,
    enabled: bool,
}

impl Runner<'_> {
    fn torque(&self, mode: &Mode, x: f64) -> f64 {
        if self.enabled {
            mode.ctrl.torque(&self.exp.profile, x - mode.reference)
        } else {
            0.0
        }
    }

    fn deriv(&self, y: &Y, mode: &Mode) -> Y {
        let tau = self.torque(mode, y[0]);
        let f_env = self.exp.plant.env_torque_in_mode(y[0], y[1], mode.in_contact);
        [y[1], (tau + f_env) / self.exp.plant.inertia, tau * y[1], f_env * y[1]]
    }

    fn step(&self, y: &Y, mode: &Mode, h: f64) -> Y {
        rk4_step(|s| self.deriv(s, mode), y, h)
    }

    // Largest controller torque over the four stages of a step.
    fn stage_torque_bound(&self, y: &Y, mode: &Mode, h: f64) -> f64 {
        if !self.enabled {
            return 0.0;
        }
        let f = |s: &Y| self.deriv(s, mode);
        let k1 = f(y);
        let y2 = [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1], 0.0, 0.0];
        let k2 = f(&y2);
        let y3 = [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1], 0.0, 0.0];
        let k3 = f(&y3);
        let y4 = [y[0] + h * k3[0], y[1] + h * k3[1], 0.0, 0.0];
        [y[0], y2[0], y3[0], y4[0]]
            .iter()
            .map(|&x| self.torque(mode, x).abs())
            .fold(0.0, f64::max)
    }

    fn contact_flag(&self, x: f64) -> bool {
        match self.exp.plant.coupling {
            Coupling::Welded => true,
            Coupling::Contact => self.exp.plant.penetration(x) > 0.0,
        }
    }

    /// Whether the state `y` is outside the validity region of `mode`.
    fn triggered(&self, y: &Y, mode: &Mode) -> bool {
        if self.exp.plant.coupling == Coupling::Contact && self.contact_flag(y[0]) != mode.in_contact {
            return true;
        }
        if !self.enabled {
            return false;
        }
        let x_tilde = y[0] - mode.reference;
        let c = &mode.ctrl;
        match c.phase {
            Phase::Diverging => {
                c.side.sign() * y[1] < -VELOCITY_DEADBAND
                    && x_tilde.abs() > MIN_X_MAX
                    && x_tilde * c.side.sign() >= 0.0
            }
            Phase::Converging => {
                x_tilde * c.side.sign() <= 0.0
                    || x_tilde.abs() > c.x_max
                    || c.side.sign() * y[1] > VELOCITY_DEADBAND
            }
        }
    }

    /// Applies the discrete transitions at `y`; returns a switch record when the
    /// controller enters convergence.
    fn transition(&self, t: f64, y: &Y, mode: &mut Mode, located: bool) -> Option<SwitchRecord> {
        mode.in_contact = self.contact_flag(y[0]);
        if !self.enabled {
            return None;
        }
        let p = &self.exp.profile;
        let x_tilde = y[0] - mode.reference;
        let old = mode.ctrl;
        let new = old.advance(x_tilde, y[1]);
        mode.ctrl = new;
        let entered = new.phase == Phase::Converging
            && (old.phase == Phase::Diverging || old.x_max != new.x_max || old.side != new.side);
        if !entered {
            return None;
        }
        let torque_before = match old.phase {
            Phase::Diverging => old.torque(p, x_tilde),
            Phase::Converging => -p.force(x_tilde),
        };
        let s = new.side.sign();
        let inertia = self.exp.plant.inertia;
        Some(SwitchRecord {
            t,
            x_max: new.x_max,
            torque_before,
            torque_after: new.torque(p, x_tilde),
            spring_energy: p.energy(new.x_max),
            lyapunov_at_max: lyapunov_value(&new, p, s * new.x_max, 0.0, inertia).value,
            lyapunov_at_origin: lyapunov_value(&new, p, 0.0, 0.0, inertia).value,
            located,
        })
    }
}

/// Runs one experiment and returns the sampled trace.
pub fn run_simulation(exp: &ExperimentSpec) -> Result<SimTrace> {
    exp.validate()?;
    let cfg = &exp.sim;
    let runner = Runner { exp, enabled: exp.control != ControlMode::Off };
    let origin = exp.x0;
    let p = &exp.profile;

    let mut haptic = HapticState::new(exp.t_d, exp.x_d, exp.sigma, exp.force_tol)?;
    let mut y: Y = [exp.x0, exp.v0, 0.0, 0.0];
    let mut mode = Mode {
        ctrl: ControllerState::default(),
        in_contact: runner.contact_flag(exp.x0),
        reference: match exp.control {
            ControlMode::Fixed => origin + exp.x_d,
            _ => origin,
        },
    };
    // the initial displacement is the first divergence
    mode.ctrl = mode.ctrl.advance(y[0] - mode.reference, 0.0);

    let ticks = cfg.ticks();
    let substeps = cfg.substeps();
    let record_every = cfg.record_every();
    let h = cfg.physics_dt;

    let mut trace = SimTrace {
        rows: Vec::with_capacity(ticks / record_every + 1),
        contact_changes: vec![(0.0, mode.in_contact)],
        ..SimTrace::default()
    };

    for k in 0..=ticks {
        let t_k = k as f64 * cfg.control_dt;

        if exp.control == ControlMode::Haptic {
            let (f_env, _) = exp.plant.env_torque(y[0], y[1]);
            haptic = haptic_update(&haptic, p, -f_env, y[0] - origin)?;
            mode.reference = origin + haptic.x_d_h;
        }
        if let Some(sw) = runner.transition(t_k, &y, &mut mode, false) {
            trace.switches.push(sw);
        }

        if k % record_every == 0 {
            let x_tilde = y[0] - mode.reference;
            let h_e = runner.torque(&mode, y[0]);
            trace.max_abs_torque = trace.max_abs_torque.max(h_e.abs());
            trace.rows.push(TraceRow {
                t: t_k,
                x: y[0],
                x_dot: y[1],
                x_tilde,
                h_e,
                f_env: exp.plant.env_torque_in_mode(y[0], y[1], mode.in_contact),
                x_d_h: mode.reference,
                phase: mode.ctrl.phase,
                x_max: mode.ctrl.x_max,
                v: lyapunov_value(&mode.ctrl, p, x_tilde, y[1], exp.plant.inertia).value,
                in_contact: mode.in_contact,
                ctrl_work: y[2],
                env_work: y[3],
            });
        }
        if k == ticks {
            break;
        }

        for j in 0..substeps {
            let t0 = t_k + j as f64 * h;
            let mut done = 0.0;
            let mut events = 0;
            while done < h {
                let remaining = h - done;
                let trial = runner.step(&y, &mode, remaining);
                if !runner.triggered(&trial, &mode) || events >= MAX_EVENTS_PER_STEP {
                    trace.max_abs_torque =
                        trace.max_abs_torque.max(runner.stage_torque_bound(&y, &mode, remaining));
                    y = trial;
                    let was_in_contact = mode.in_contact;
                    runner.transition(t0 + h, &y, &mut mode, true);
                    if was_in_contact != mode.in_contact {
                        trace.contact_changes.push((t0 + h, mode.in_contact));
                    }
                    record_pull(&runner, &y, &mode, &mut trace);
                    break;
                }
                // bisect for the first triggering sub-interval
                let (mut lo, mut hi) = (0.0, remaining);
                while hi - lo > cfg.event_tol {
                    let mid = 0.5 * (lo + hi);
                    if runner.triggered(&runner.step(&y, &mode, mid), &mode) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                trace.max_abs_torque = trace.max_abs_torque.max(runner.stage_torque_bound(&y, &mode, hi));
                y = runner.step(&y, &mode, hi);
                done += hi;
                events += 1;
                trace.events += 1;
                let was_in_contact = mode.in_contact;
                if let Some(sw) = runner.transition(t0 + done, &y, &mut mode, true) {
                    trace.switches.push(sw);
                }
                if was_in_contact != mode.in_contact {
                    trace.contact_changes.push((t0 + done, mode.in_contact));
                }
                if !was_in_contact && mode.in_contact {
                    let depth = exp.plant.penetration(y[0]);
                    trace.max_make_penetration = trace.max_make_penetration.max(depth);
                }
                record_pull(&runner, &y, &mode, &mut trace);
            }
            if !(y[0].abs() <= DIVERGENCE_LIMIT && y[1].abs() <= DIVERGENCE_LIMIT) {
                return Err(Error::Diverged { t: t0 + h, x: y[0], x_dot: y[1] });
            }
        }
    }
    Ok(trace)
}

fn record_pull(runner: &Runner<'_>, y: &Y, mode: &Mode, trace: &mut SimTrace) {
    let plant = &runner.exp.plant;
    if plant.coupling == Coupling::Contact {
        let f = plant.env_torque_in_mode(y[0], y[1], mode.in_contact);
        if plant.stop_side.sign() * f > 0.0 {
            trace.pull_violations += 1;
        }
    }
}
