//! Altitude controllers: PID, feedforward neural network, spiking network,
//! and the network + parallel-PD hybrid.
//!
//! All controllers share one interface: altitude error in, motor voltage
//! out, with the final command clamped to `±u_max`. Component values are
//! reported pre-clamp so effort and contribution statistics stay honest.

mod ann;
mod hybrid;
mod pid;
mod snn;

pub use ann::AnnController;
pub use hybrid::HybridController;
pub use pid::{PidController, PidMode, PidParams, PidState};
pub use snn::{encode_error, SnnController, SnnState, SNN_HIDDEN, SNN_INPUTS};

use serde::{Deserialize, Serialize};

/// Motor voltage saturation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlLimits {
    pub u_max: f64,
}

impl Default for ControlLimits {
    fn default() -> Self {
        Self { u_max: 3.3 }
    }
}

impl ControlLimits {
    pub fn clamp(&self, u: f64) -> f64 {
        u.clamp(-self.u_max, self.u_max)
    }
}

/// One control step's outputs. `total` is clamped to the voltage limits;
/// `net` and `pd` are the unclamped primary and parallel-PD components
/// (`pd` is zero for non-hybrid controllers).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ControlOutput {
    pub total: f64,
    pub net: f64,
    pub pd: f64,
}

/// Error-to-voltage mapping with per-episode state.
pub trait AltitudeController {
    fn step(&mut self, error: f64) -> ControlOutput;

    /// Zero all episode-carried state (PID history, membrane potentials,
    /// spike traces). A reset controller behaves like a freshly built one.
    fn reset(&mut self);
}

impl<T: AltitudeController + ?Sized> AltitudeController for Box<T> {
    fn step(&mut self, error: f64) -> ControlOutput {
        (**self).step(error)
    }

    fn reset(&mut self) {
        (**self).reset()
    }
}
