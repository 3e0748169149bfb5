//! Torque tracking statistics over a simulated trace.

use std::fmt::Write as _;

use crate::error::{invalid, Result};
use crate::experiment::ExperimentSpec;
use crate::sim::{fmt_num, SimTrace};

/// Relative error under which a run counts as settled.
pub const SETTLE_THRESHOLD: f64 = 1e-2;
/// Contact must be held this long before later separations count as breaking it.
pub const SUSTAINED_CONTACT: f64 = 0.1;
/// Displacement error defining the reference "1 %" level.
pub const ONE_PERCENT_DISPLACEMENT: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSummary {
    pub nmse_full: f64,
    pub nmse_last5: f64,
    /// Infinite when the run never settles.
    pub settle_time: f64,
    /// Mean of (T − T_d) over the final second.
    pub steady_error: f64,
    /// Mean of T over the final second.
    pub steady_torque: f64,
    pub contact_broken_after_first: bool,
}

/// Normalisation torque: |T_d|, or F_Max when the target exceeds saturation.
pub fn torque_norm(t_d: f64, f_max: f64) -> f64 {
    t_d.abs().min(f_max)
}

/// Mean squared torque error over rows with `t` in `[start, end]`, divided by
/// the squared normalisation torque.
pub fn normalized_mse(trace: &SimTrace, t_d: f64, f_max: f64, start: f64, end: f64) -> Result<f64> {
    if t_d == 0.0 {
        return Err(invalid("T_d must be non-zero"));
    }
    let norm = torque_norm(t_d, f_max);
    let (sum, n) = trace
        .rows
        .iter()
        .filter(|r| r.t >= start - 1e-9 && r.t <= end + 1e-9)
        .fold((0.0, 0usize), |(s, n), r| {
            let e = r.interaction_torque() - t_d;
            (s + e * e, n + 1)
        });
    if n == 0 {
        return Err(invalid(format!("empty window [{start}, {end}]")));
    }
    Ok(sum / n as f64 / (norm * norm))
}

/// Error level obtained by a displacement error of 1 mrad on stiffness `k`,
/// normalised the same way as [`normalized_mse`].
pub fn one_percent_reference(k: f64, t_d: f64, f_max: f64) -> f64 {
    let r = k * ONE_PERCENT_DISPLACEMENT / torque_norm(t_d, f_max);
    r * r
}

/// Same reference level normalised by |T_d| regardless of saturation.
pub fn one_percent_reference_raw(k: f64, t_d: f64) -> f64 {
    let r = k * ONE_PERCENT_DISPLACEMENT / t_d.abs();
    r * r
}

fn settle_time(trace: &SimTrace, t_d: f64, norm: f64) -> f64 {
    let rows = &trace.rows;
    match rows
        .iter()
        .rposition(|r| ((r.interaction_torque() - t_d) / norm).abs() >= SETTLE_THRESHOLD)
    {
        None => rows.first().map_or(0.0, |r| r.t),
        Some(i) if i + 1 < rows.len() => rows[i + 1].t,
        Some(_) => f64::INFINITY,
    }
}

fn contact_broken(trace: &SimTrace) -> bool {
    let changes = &trace.contact_changes;
    let t_end = trace.rows.last().map_or(0.0, |r| r.t);
    // find the first contact interval lasting at least SUSTAINED_CONTACT
    let mut sustained_from = None;
    for (i, &(t, c)) in changes.iter().enumerate() {
        if !c {
            continue;
        }
        let until = changes.get(i + 1).map_or(t_end, |&(t2, _)| t2);
        if until - t >= SUSTAINED_CONTACT || changes.get(i + 1).is_none() {
            sustained_from = Some(i);
            break;
        }
    }
    match sustained_from {
        Some(i) => changes[i + 1..].iter().any(|&(_, c)| !c),
        None => false,
    }
}

pub fn summarize(trace: &SimTrace, exp: &ExperimentSpec) -> Result<ErrorSummary> {
    let t_d = exp.t_d;
    let f_max = exp.profile.f_max();
    let norm = torque_norm(t_d, f_max);
    let t_end = trace.rows.last().map(|r| r.t).ok_or_else(|| invalid("empty trace"))?;
    let last: Vec<f64> = trace
        .rows
        .iter()
        .filter(|r| r.t >= t_end - 1.0 - 1e-9)
        .map(|r| r.interaction_torque())
        .collect();
    let steady_torque = last.iter().sum::<f64>() / last.len() as f64;
    Ok(ErrorSummary {
        nmse_full: normalized_mse(trace, t_d, f_max, 0.0, t_end)?,
        nmse_last5: normalized_mse(trace, t_d, f_max, (t_end - 5.0).max(0.0), t_end)?,
        settle_time: settle_time(trace, t_d, norm),
        steady_error: steady_torque - t_d,
        steady_torque,
        contact_broken_after_first: contact_broken(trace),
    })
}

pub const SUMMARY_HEADER: &str = "name,coupling,control,k0,f_max,k_env,d_env,t_d,x_d,sigma,status,\
nmse_full,nmse_last5,settle_time,steady_error,steady_torque,contact_broken_after_first,\
one_percent_ref,one_percent_ref_td";

/// One summary CSV line for `exp`; `outcome` is either the summary or the failure message.
pub fn summary_row(exp: &ExperimentSpec, outcome: &std::result::Result<ErrorSummary, String>) -> String {
    let mut line = String::new();
    let coupling = match exp.plant.coupling {
        crate::plant::Coupling::Welded => "welded",
        crate::plant::Coupling::Contact => "contact",
    };
    let _ = write!(
        line,
        "{},{},{},{},{},{},{},{},{},{},",
        exp.name,
        coupling,
        exp.control.as_str(),
        fmt_num(exp.profile.k0()),
        fmt_num(exp.profile.f_max()),
        fmt_num(exp.plant.k_env),
        fmt_num(exp.plant.d_env),
        fmt_num(exp.t_d),
        fmt_num(exp.x_d),
        fmt_num(exp.sigma),
    );
    match outcome {
        Ok(s) => {
            let _ = write!(
                line,
                "ok,{},{},{},{},{},{},",
                fmt_num(s.nmse_full),
                fmt_num(s.nmse_last5),
                fmt_num(s.settle_time),
                fmt_num(s.steady_error),
                fmt_num(s.steady_torque),
                u8::from(s.contact_broken_after_first),
            );
        }
        Err(msg) => {
            let cleaned: String = msg.chars().map(|c| if c == ',' || c == '\n' { ';' } else { c }).collect();
            let _ = write!(line, "failed: {cleaned},nan,nan,nan,nan,nan,,");
        }
    }
    let _ = write!(
        line,
        "{},{}",
        fmt_num(one_percent_reference(exp.profile.k0(), exp.t_d, exp.profile.f_max())),
        fmt_num(one_percent_reference_raw(exp.profile.k0(), exp.t_d)),
    );
    line
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::Phase;
    use crate::sim::TraceRow;

    fn trace_from(torques: &[f64], dt: f64) -> SimTrace {
        let rows = torques
            .iter()
            .enumerate()
            .map(|(i, &tq)| TraceRow {
                t: i as f64 * dt,
                x: 0.0,
                x_dot: 0.0,
                x_tilde: 0.0,
                h_e: 0.0,
                f_env: -tq,
                x_d_h: 0.0,
                phase: Phase::Diverging,
                x_max: 0.0,
                v: 0.0,
                in_contact: true,
                ctrl_work: 0.0,
                env_work: 0.0,
            })
            .collect();
        SimTrace { rows, contact_changes: vec![(0.0, true)], ..SimTrace::default() }
    }

    #[test]
    fn constant_error_of_norm_is_one() {
        let tr = trace_from(&[10.0; 11], 0.1);
        assert!((normalized_mse(&tr, 5.0, 15.0, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        // saturated target normalises by F_Max
        let tr = trace_from(&[35.0; 11], 0.1);
        assert!((normalized_mse(&tr, 20.0, 15.0, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_error_is_zero() {
        let tr = trace_from(&[5.0; 11], 0.1);
        assert_eq!(normalized_mse(&tr, 5.0, 15.0, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn empty_window_errors() {
        let tr = trace_from(&[5.0; 11], 0.1);
        assert!(normalized_mse(&tr, 5.0, 15.0, 2.0, 3.0).is_err());
        assert!(normalized_mse(&tr, 0.0, 15.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn one_percent_levels() {
        assert!((one_percent_reference(100.0, 10.0, 15.0) - 1e-4).abs() < 1e-18);
        assert!((one_percent_reference(100.0, 20.0, 15.0) - (0.1f64 / 15.0).powi(2)).abs() < 1e-18);
        assert!((one_percent_reference_raw(100.0, 20.0) - 2.5e-5).abs() < 1e-18);
        assert!(one_percent_reference(1e-12, 5.0, 15.0) < 1e-28);
    }

    #[test]
    fn window_shift_invariance_on_stationary_segment() {
        let tr = trace_from(&[4.0; 101], 0.1);
        let a = normalized_mse(&tr, 5.0, 15.0, 1.0, 3.0).unwrap();
        let b = normalized_mse(&tr, 5.0, 15.0, 6.0, 8.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn settle_and_steady_error() {
        let mut torques = vec![0.0; 50];
        torques.extend(std::iter::repeat_n(4.99, 451));
        let tr = trace_from(&torques, 0.02);
        let st = settle_time(&tr, 5.0, 5.0);
        assert!((st - 1.0).abs() < 1e-12);
        let never = trace_from(&[0.0; 20], 0.1);
        assert_eq!(settle_time(&never, 5.0, 5.0), f64::INFINITY);
    }

    #[test]
    fn contact_break_detection() {
        let mut tr = trace_from(&[0.0; 101], 0.1);
        tr.contact_changes = vec![(0.0, false), (1.0, true), (1.01, false), (1.02, true)];
        // micro bounce before sustained contact is ignored
        assert!(!contact_broken(&tr));
        tr.contact_changes.push((5.0, false));
        assert!(contact_broken(&tr));
        tr.contact_changes = vec![(0.0, false)];
        assert!(!contact_broken(&tr));
    }
}
