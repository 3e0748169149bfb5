//! Nonlinear spring profile used during divergence, its stored energy, and
//! the centred antagonist spring that takes over once the motion inverts.
//!
//! All displacements are in radians and all forces are joint torques in N·m.

use crate::error::{invalid, Error, Result};

/// Shape of the divergence spring: linear with stiffness `k0` up to `x_tilde_0`,
/// an exponential approach to `f_max` between `x_tilde_0` and `x_tilde_b`, and
/// constant saturation beyond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceProfile {
    k0: f64,
    f_max: f64,
    x_tilde_0: f64,
    x_tilde_b: f64,
    s: f64,
}

impl ForceProfile {
    /// Saturation torque, linear-region bound and saturation-onset bound shared
    /// by every bundled experiment.
    pub const DEFAULT_F_MAX: f64 = 15.0;
    pub const DEFAULT_X_TILDE_0: f64 = 0.10;
    pub const DEFAULT_X_TILDE_B: f64 = 0.11;
    pub const DEFAULT_S: f64 = 20.0;

    pub fn new(k0: f64, f_max: f64, x_tilde_0: f64, x_tilde_b: f64, s: f64) -> Result<Self> {
        let all = [k0, f_max, x_tilde_0, x_tilde_b, s];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(invalid("profile parameters must be finite"));
        }
        if k0 <= 0.0 {
            return Err(invalid("K0 must be positive"));
        }
        if f_max <= 0.0 {
            return Err(invalid("F_Max must be positive"));
        }
        if s <= 0.0 {
            return Err(invalid("S must be positive"));
        }
        if x_tilde_0 <= 0.0 || x_tilde_0 >= x_tilde_b {
            return Err(invalid("profile bounds must satisfy 0 < x_tilde_0 < x_tilde_b"));
        }
        if k0 * x_tilde_0 > f_max {
            return Err(invalid("K0 * x_tilde_0 must not exceed F_Max"));
        }
        Ok(Self { k0, f_max, x_tilde_0, x_tilde_b, s })
    }

    /// Profile with the default saturation shape and the given stiffness.
    pub fn with_stiffness(k0: f64) -> Result<Self> {
        Self::new(
            k0,
            Self::DEFAULT_F_MAX,
            Self::DEFAULT_X_TILDE_0,
            Self::DEFAULT_X_TILDE_B,
            Self::DEFAULT_S,
        )
    }

    /// Default shape for the given stiffness and saturation torque. When
    /// `k0 · x_tilde_0` would overshoot `f_max`, the linear region is cut at
    /// `f_max / k0` and the profile saturates there.
    pub fn with_defaults(k0: f64, f_max: f64) -> Result<Self> {
        let x0 = Self::fitted_linear_bound(k0, f_max, Self::DEFAULT_X_TILDE_0);
        Self::new(k0, f_max, x0, Self::DEFAULT_X_TILDE_B, Self::DEFAULT_S)
    }

    /// Linear-region bound `x_tilde_0`, shrunk to `f_max / k0` when needed.
    pub fn fitted_linear_bound(k0: f64, f_max: f64, x_tilde_0: f64) -> f64 {
        if k0 > 0.0 && k0 * x_tilde_0 > f_max {
            let x = f_max / k0;
            // rounding may leave k0 * x one ulp above f_max
            if k0 * x > f_max {
                f64::from_bits(x.to_bits() - 1)
            } else {
                x
            }
        } else {
            x_tilde_0
        }
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    pub fn f_max(&self) -> f64 {
        self.f_max
    }

    pub fn x_tilde_0(&self) -> f64 {
        self.x_tilde_0
    }

    pub fn x_tilde_b(&self) -> f64 {
        self.x_tilde_b
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Characteristic length of the exponential segment.
    pub fn b(&self) -> f64 {
        (self.x_tilde_b - self.x_tilde_0) / self.s
    }

    /// Force headroom between the end of the linear region and saturation.
    pub fn delta_f(&self) -> f64 {
        self.f_max - self.k0 * self.x_tilde_0
    }

    // The exponential segment is rescaled by 1 / (1 - e^-S) so that it lands
    // exactly on F_Max at x_tilde_b. Without it the profile jumps by
    // delta_f * e^-S there.
    fn sigmoid_gain(&self) -> f64 {
        self.delta_f() / -(-self.s).exp_m1()
    }

    /// Divergence force F_K(x̃). Odd, continuous, non-decreasing, bounded by F_Max.
    pub fn force(&self, x_tilde: f64) -> f64 {
        let u = x_tilde.abs();
        if u < self.x_tilde_0 {
            return self.k0 * x_tilde;
        }
        let magnitude = if u < self.x_tilde_b {
            let z = (u - self.x_tilde_0) / self.b();
            self.k0 * self.x_tilde_0 + self.sigmoid_gain() * -(-z).exp_m1()
        } else {
            self.f_max
        };
        magnitude.copysign(x_tilde)
    }

    /// Stored energy E_K(x̃) = ∫₀^|x̃| F_K(u) du, in closed form.
    pub fn energy(&self, x_tilde: f64) -> f64 {
        let u = x_tilde.abs();
        let linear_cap = 0.5 * self.k0 * self.x_tilde_0 * self.x_tilde_0;
        if u < self.x_tilde_0 {
            0.5 * self.k0 * u * u
        } else if u < self.x_tilde_b {
            linear_cap + self.curved_energy(u - self.x_tilde_0)
        } else {
            linear_cap
                + self.curved_energy(self.x_tilde_b - self.x_tilde_0)
                + self.f_max * (u - self.x_tilde_b)
        }
    }

    // Energy accumulated over the exponential segment after travelling `d` past x_tilde_0.
    fn curved_energy(&self, d: f64) -> f64 {
        let b = self.b();
        self.k0 * self.x_tilde_0 * d + self.sigmoid_gain() * (d + b * (-d / b).exp_m1())
    }

    /// Slope of the centred antagonist spring for a recorded maximum `x_max`.
    ///
    /// Inside the linear region the slope is energy matched, `4 E_K / x_max²`;
    /// beyond it the slope is force matched, `2 F_K / x_max`, so the spring
    /// reproduces F_K(x_max) at the inversion point. Both coincide for
    /// `x_max <= x_tilde_0`.
    pub fn antagonist_slope(&self, x_max: f64) -> Result<f64> {
        if !(x_max > 0.0) {
            return Err(Error::NonPositiveMaxDisplacement(x_max));
        }
        Ok(if x_max <= self.x_tilde_0 {
            4.0 * self.energy(x_max) / (x_max * x_max)
        } else {
            2.0 * self.force(x_max) / x_max
        })
    }

    /// Antagonist force F_AA(x̃) = slope · (x̃ − x_max / 2), expressed on the
    /// side where `x_max` was recorded (x̃ and `x_max` both taken as positive
    /// magnitudes on that side).
    pub fn antagonist_force(&self, x_tilde: f64, x_max: f64) -> Result<f64> {
        let slope = self.antagonist_slope(x_max)?;
        // slope · (x̃ − x_max/2) written as peak · ratio, so that |F_AA| ≤ F_Max
        // holds exactly in floating point on [0, x_max]
        let peak = (0.5 * slope * x_max).min(self.f_max);
        Ok(peak * ((2.0 * x_tilde - x_max) / x_max))
    }

    /// Potential of the antagonist spring, ∫_{x_max/2}^{x̃} F_AA(u) du.
    /// Zero at the midpoint and symmetric about it.
    pub fn antagonist_energy(&self, x_tilde: f64, x_max: f64) -> Result<f64> {
        let slope = self.antagonist_slope(x_max)?;
        let d = x_tilde - 0.5 * x_max;
        Ok(0.5 * slope * d * d)
    }
}
