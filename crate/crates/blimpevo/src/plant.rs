//! Blimp altitude dynamics and radar sensor models.
//!
//! The plant is a second-order discrete transfer function from motor voltage
//! to altitude,
//!
//! ```text
//! h_k = -d1*h_{k-1} - d2*h_{k-2} + a1*u_{k-1} + a2*u_{k-2}
//! ```
//!
//! with denominator `1 + d1*z^-1 + d2*z^-2`. There is no `z^0` numerator
//! term, so a command issued at step k first shows up in the altitude at
//! step k+1: [`PlantModel::step`] consumes the command for the step being
//! advanced and returns the altitude one sample later.
//!
//! The radar is modeled abstractly as additive Gaussian noise plus optional
//! quantization on the true altitude, with an optional median + moving
//! average smoothing cascade mirroring the onboard signal path.

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default control-loop sample period in seconds (5 Hz loop).
pub const DEFAULT_DT: f64 = 0.2;

#[derive(Debug, Error, PartialEq)]
pub enum PlantError {
    #[error("plant state or command is not finite (state corruption at u={u})")]
    StateCorruption { u: f64 },
    #[error("invalid plant parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Second-order discrete transfer function coefficients.
///
/// `num = (a1, a2)` are the numerator coefficients in m/(V·step²); `den =
/// (d1, d2)` the denominator coefficients of `1 + d1*z^-1 + d2*z^-2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantModel {
    pub num: (f64, f64),
    pub den: (f64, f64),
    /// Sample period, seconds.
    pub dt: f64,
}

impl PlantModel {
    pub fn new(num: (f64, f64), den: (f64, f64), dt: f64) -> Result<Self, PlantError> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(PlantError::InvalidParameter("dt must be positive"));
        }
        if ![num.0, num.1, den.0, den.1].iter().all(|c| c.is_finite()) {
            return Err(PlantError::InvalidParameter("coefficients must be finite"));
        }
        Ok(Self { num, den, dt })
    }

    /// Double-integrator plant from Euler discretization of `h'' = a1*u + a2*u`,
    /// denominator `1 - 2z^-1 + z^-2`.
    pub fn theoretical(a1: f64, a2: f64) -> Self {
        Self {
            num: (a1, a2),
            den: (-2.0, 1.0),
            dt: DEFAULT_DT,
        }
    }

    /// Coefficients identified from tele-operated flight data:
    /// `h = 1e-3 * (-0.969 z^-1 + 1.019 z^-2) / (1 - 1.99 z^-1 + 0.99 z^-2) * u`.
    pub fn fitted() -> Self {
        Self {
            num: (-0.969e-3, 1.019e-3),
            den: (-1.99, 0.99),
            dt: DEFAULT_DT,
        }
    }

    /// Advance one sample: returns the next state and the altitude one step
    /// after the supplied command `u`.
    ///
    /// The returned altitude is
    /// `-d1*h_prev1 - d2*h_prev2 + a1*u + a2*u_prev1`; the command `u`
    /// becomes `u_prev1` in the returned state. `u` is not clamped here —
    /// voltage limits belong to the controllers.
    pub fn step(&self, state: &PlantState, u: f64) -> Result<(PlantState, f64), PlantError> {
        if !u.is_finite() || !state.is_finite() {
            return Err(PlantError::StateCorruption { u });
        }
        let (a1, a2) = self.num;
        let (d1, d2) = self.den;
        let h = -d1 * state.h_prev1 - d2 * state.h_prev2 + a1 * u + a2 * state.u_prev1;
        let next = PlantState {
            h_prev1: h,
            h_prev2: state.h_prev1,
            u_prev1: u,
            u_prev2: state.u_prev1,
        };
        Ok((next, h))
    }
}

/// Two-sample altitude and command history carried between plant steps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    pub h_prev1: f64,
    pub h_prev2: f64,
    pub u_prev1: f64,
    pub u_prev2: f64,
}

impl PlantState {
    /// All-zero history (at rest on the ground).
    pub fn zeroed() -> Self {
        Self::default()
    }

    /// At rest at altitude `h0`: both altitude history samples equal `h0`,
    /// command history zero.
    pub fn at_altitude(h0: f64) -> Self {
        Self {
            h_prev1: h0,
            h_prev2: h0,
            u_prev1: 0.0,
            u_prev2: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.h_prev1.is_finite()
            && self.h_prev2.is_finite()
            && self.u_prev1.is_finite()
            && self.u_prev2.is_finite()
    }
}

/// Noisy, quantized radar observation of the true altitude.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadarModel {
    /// Standard deviation of additive Gaussian noise, m.
    pub noise_sigma: f64,
    /// Sensor resolution step, m; 0 disables quantization.
    pub quantization: f64,
    /// Median filter window, samples (odd).
    pub median_window: usize,
    /// Moving-average window, samples.
    pub avg_window: usize,
}

impl Default for RadarModel {
    /// Noise sigma 0.0667 m puts 3σ at the ±0.2 m sensor resolution.
    /// Quantization is off by default; the smoothing cascade uses the
    /// onboard 5-sample median and 3-sample average.
    fn default() -> Self {
        Self {
            noise_sigma: 0.0667,
            quantization: 0.0,
            median_window: 5,
            avg_window: 3,
        }
    }
}

impl RadarModel {
    /// Noiseless, non-quantizing sensor.
    pub fn ideal() -> Self {
        Self {
            noise_sigma: 0.0,
            quantization: 0.0,
            median_window: 1,
            avg_window: 1,
        }
    }

    pub fn validate(&self) -> Result<(), PlantError> {
        if self.noise_sigma < 0.0 || !self.noise_sigma.is_finite() {
            return Err(PlantError::InvalidParameter("noise_sigma must be >= 0"));
        }
        if self.quantization < 0.0 || !self.quantization.is_finite() {
            return Err(PlantError::InvalidParameter("quantization must be >= 0"));
        }
        if self.median_window == 0 || self.median_window % 2 == 0 {
            return Err(PlantError::InvalidParameter(
                "median_window must be odd and >= 1",
            ));
        }
        if self.avg_window == 0 {
            return Err(PlantError::InvalidParameter("avg_window must be >= 1"));
        }
        Ok(())
    }

    /// One radar measurement: `quantize(true_h + N(0, sigma^2))`.
    ///
    /// Draws exactly one value from `rng` even when `noise_sigma` is zero,
    /// so the random stream consumed by a simulation does not depend on the
    /// noise setting.
    pub fn sense<R: Rng + ?Sized>(&self, true_h: f64, rng: &mut R) -> f64 {
        debug_assert!(true_h.is_finite());
        let z: f64 = rng.sample(StandardNormal);
        quantize(true_h + self.noise_sigma * z, self.quantization)
    }
}

/// Round to the nearest multiple of `step`, half away from zero.
/// A step of 0 disables quantization.
pub fn quantize(value: f64, step: f64) -> f64 {
    if step == 0.0 {
        value
    } else {
        (value / step).round() * step
    }
}

/// Running state of the median + moving-average smoothing cascade.
///
/// During warm-up both windows operate on however many samples exist, so the
/// filter output is defined from the very first sample.
#[derive(Clone, Debug, Default)]
pub struct FilterState {
    raw: VecDeque<f64>,
    medians: VecDeque<f64>,
}

impl FilterState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        self.raw.clear();
        self.medians.clear();
    }

    /// Push a raw measurement and return the filtered value: the median of
    /// the last `median_window` raw samples, averaged over the last
    /// `avg_window` median outputs.
    pub fn apply(&mut self, radar: &RadarModel, raw: f64) -> f64 {
        self.raw.push_back(raw);
        while self.raw.len() > radar.median_window {
            self.raw.pop_front();
        }
        let med = median(self.raw.iter().copied());
        self.medians.push_back(med);
        while self.medians.len() > radar.avg_window {
            self.medians.pop_front();
        }
        self.medians.iter().sum::<f64>() / self.medians.len() as f64
    }
}

/// Median of a non-empty sequence; even counts average the two central
/// order statistics (only reachable during warm-up).
fn median(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    debug_assert!(!v.is_empty());
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Anything that maps a motor command to the altitude one step later.
///
/// The closed-loop simulator is written against this trait so tests can
/// substitute scripted dynamics for the linear model.
pub trait Plant {
    fn step(&mut self, u: f64) -> Result<f64, PlantError>;

    /// Current true altitude, used to seed the first measurement.
    fn altitude(&self) -> f64;
}

/// [`PlantModel`] plus owned per-episode state.
#[derive(Clone, Debug)]
pub struct LinearPlant {
    pub model: PlantModel,
    pub state: PlantState,
}

impl LinearPlant {
    pub fn new(model: PlantModel) -> Self {
        Self {
            model,
            state: PlantState::zeroed(),
        }
    }

    pub fn from_altitude(model: PlantModel, h0: f64) -> Self {
        Self {
            model,
            state: PlantState::at_altitude(h0),
        }
    }
}

impl Plant for LinearPlant {
    fn step(&mut self, u: f64) -> Result<f64, PlantError> {
        let (next, h) = self.model.step(&self.state, u)?;
        self.state = next;
        Ok(h)
    }

    fn altitude(&self) -> f64 {
        self.state.h_prev1
    }
}
