//! Discrete PID controller.

use serde::{Deserialize, Serialize};

use super::{AltitudeController, ControlLimits, ControlOutput};

/// Integral handling.
///
/// `Literal` evaluates the published difference equation as printed:
/// `u = Kp*e + (Kd/T)*(e - e_prev) + Ki*T*(e + e_prev)`, whose last term
/// does not accumulate. `Accumulating` replaces that term with a standard
/// trapezoid integrator `Ki * integ`, `integ += T*(e + e_prev)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PidMode {
    #[default]
    Literal,
    Accumulating,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PidParams {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Sample period, seconds.
    pub t: f64,
    #[serde(default)]
    pub mode: PidMode,
}

impl PidParams {
    /// Hand-tuned altitude gains for the 5 Hz loop.
    pub fn altitude_default() -> Self {
        Self {
            kp: 6.0,
            ki: 0.4,
            kd: 0.9,
            t: 0.2,
            mode: PidMode::Literal,
        }
    }

    /// Pure PD (no integral term), as used by the hybrid scheme.
    pub fn pd(kp: f64, kd: f64, t: f64) -> Self {
        Self {
            kp,
            ki: 0.0,
            kd,
            t,
            mode: PidMode::Literal,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PidState {
    pub e_prev: f64,
    /// Accumulated integral, m·s. Unused in literal mode.
    pub integ: f64,
}

#[derive(Clone, Debug)]
pub struct PidController {
    pub params: PidParams,
    pub state: PidState,
    pub limits: ControlLimits,
}

impl PidController {
    pub fn new(params: PidParams, limits: ControlLimits) -> Self {
        Self {
            params,
            state: PidState::default(),
            limits,
        }
    }

    /// Unclamped controller output for error `e`, updating the state.
    pub(crate) fn raw_step(&mut self, e: f64) -> f64 {
        let p = &self.params;
        let proportional = p.kp * e;
        let derivative = (p.kd / p.t) * (e - self.state.e_prev);
        let integral = match p.mode {
            PidMode::Literal => p.ki * p.t * (e + self.state.e_prev),
            PidMode::Accumulating => {
                self.state.integ += p.t * (e + self.state.e_prev) / 2.0;
                p.ki * self.state.integ
            }
        };
        self.state.e_prev = e;
        proportional + derivative + integral
    }
}

impl AltitudeController for PidController {
    fn step(&mut self, error: f64) -> ControlOutput {
        let raw = self.raw_step(error);
        ControlOutput {
            total: self.limits.clamp(raw),
            net: raw,
            pd: 0.0,
        }
    }

    fn reset(&mut self) {
        self.state = PidState::default();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pid(params: PidParams) -> PidController {
        PidController::new(params, ControlLimits::default())
    }

    #[test]
    fn zero_error_zero_output() {
        let mut c = pid(PidParams::altitude_default());
        assert_eq!(c.step(0.0).total, 0.0);
        let mut c = pid(PidParams {
            mode: PidMode::Accumulating,
            ..PidParams::altitude_default()
        });
        assert_eq!(c.step(0.0).total, 0.0);
    }

    #[test]
    fn literal_mode_reproduces_hand_arithmetic() {
        // Kp=6.0, Ki=0.4, Kd=0.9, T=0.2, e=0.5 from e_prev=0:
        // 3.0 + 4.5*0.5 + 0.08*0.5 = 5.29, clamped to 3.3.
        let mut c = pid(PidParams::altitude_default());
        let out = c.step(0.5);
        assert_relative_eq!(out.net, 5.29, max_relative = 1e-12);
        assert_eq!(out.total, 3.3);
        assert_eq!(out.pd, 0.0);
    }

    #[test]
    fn clamps_at_lower_bound() {
        let mut c = pid(PidParams {
            kp: 1.0,
            ki: 0.0,
            kd: 0.0,
            t: 0.2,
            mode: PidMode::Literal,
        });
        assert_eq!(c.step(-5.0).total, -3.3);
    }

    #[test]
    fn literal_integral_term_does_not_accumulate() {
        let params = PidParams {
            kp: 0.0,
            ki: 1.0,
            kd: 0.0,
            t: 0.2,
            mode: PidMode::Literal,
        };
        let mut c = pid(params);
        c.step(1.0);
        let second = c.step(1.0);
        // Ki*T*(e_k + e_{k-1}) = 0.2 * 2.0 at every steady step.
        assert_relative_eq!(second.net, 0.4, max_relative = 1e-12);
        let third = c.step(1.0);
        assert_relative_eq!(third.net, 0.4, max_relative = 1e-12);
    }

    #[test]
    fn accumulating_integral_grows_by_trapezoid() {
        let params = PidParams {
            kp: 0.0,
            ki: 1.0,
            kd: 0.0,
            t: 0.2,
            mode: PidMode::Accumulating,
        };
        let mut c = pid(params);
        // e: 0 -> 1: integ = 0.2*(1+0)/2 = 0.1
        assert_relative_eq!(c.step(1.0).net, 0.1, max_relative = 1e-12);
        // e: 1 -> 1: integ += 0.2*(1+1)/2 = 0.2 -> 0.3
        assert_relative_eq!(c.step(1.0).net, 0.3, max_relative = 1e-12);
    }

    #[test]
    fn reset_clears_history() {
        let mut c = pid(PidParams {
            mode: PidMode::Accumulating,
            ..PidParams::altitude_default()
        });
        c.step(1.0);
        c.step(-2.0);
        c.reset();
        assert_eq!(c.state, PidState::default());
        assert_eq!(c.step(0.0).total, 0.0);
        c.reset();
        c.reset();
        assert_eq!(c.state, PidState::default());
    }
}
