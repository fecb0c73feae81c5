//! Spiking controller: one-hot position encoder, five leaky
//! integrate-and-fire neurons, and a tanh trace decoder.

use serde::{Deserialize, Serialize};

use crate::genome::SnnGenome;

use super::{AltitudeController, ControlLimits, ControlOutput};

pub const SNN_INPUTS: usize = 10;
pub const SNN_HIDDEN: usize = 5;

/// Lower edges of encoder intervals 1..=9. Interval 0 is everything below
/// -0.4; interval 9 is everything from 0.4 up. Boundaries are
/// lower-inclusive.
const ENCODER_EDGES: [f64; 9] = [-0.4, -0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3, 0.4];

/// Index of the input neuron that fires for error `e`.
pub fn encode_index(e: f64) -> usize {
    debug_assert!(!e.is_nan());
    let mut idx = 0;
    for edge in ENCODER_EDGES {
        if e >= edge {
            idx += 1;
        } else {
            break;
        }
    }
    idx
}

/// One-hot spike vector for error `e`. Exactly one entry is 1.
pub fn encode_error(e: f64) -> [f64; SNN_INPUTS] {
    let mut spikes = [0.0; SNN_INPUTS];
    spikes[encode_index(e)] = 1.0;
    spikes
}

/// Membrane potentials and spike traces carried between control steps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SnnState {
    pub v: [f64; SNN_HIDDEN],
    pub x: [f64; SNN_HIDDEN],
}

#[derive(Clone, Debug)]
pub struct SnnController {
    pub genome: SnnGenome,
    pub state: SnnState,
    pub limits: ControlLimits,
}

impl SnnController {
    pub fn new(genome: SnnGenome, limits: ControlLimits) -> Self {
        Self {
            genome,
            state: SnnState::default(),
            limits,
        }
    }

    /// Advance one step on an arbitrary spike vector.
    ///
    /// Per hidden neuron, in order: integrate the weighted input current
    /// into the decayed membrane potential; spike and reset to exactly 0
    /// when `v >= theta` (so a zero threshold fires on any non-negative
    /// potential); decay the trace and add the spike. The command is
    /// `u_max * tanh(w_out . x)` over the updated traces.
    pub fn step_spikes(&mut self, spikes: &[f64; SNN_INPUTS]) -> ControlOutput {
        let g = &self.genome;
        for i in 0..SNN_HIDDEN {
            let current: f64 = (0..SNN_INPUTS).map(|j| g.w_hidden[i][j] * spikes[j]).sum();
            let mut v = g.tau_v[i] * self.state.v[i] + g.alpha_v[i] * current;
            let spiked = v >= g.theta[i];
            if spiked {
                v = 0.0;
            }
            self.state.v[i] = v;
            let s = if spiked { 1.0 } else { 0.0 };
            self.state.x[i] = g.tau_t[i] * self.state.x[i] + g.alpha_t[i] * s;
        }
        let decoded: f64 = (0..SNN_HIDDEN).map(|i| g.w_out[i] * self.state.x[i]).sum();
        let net = self.limits.u_max * decoded.tanh();
        ControlOutput {
            total: self.limits.clamp(net),
            net,
            pd: 0.0,
        }
    }
}

impl AltitudeController for SnnController {
    fn step(&mut self, error: f64) -> ControlOutput {
        self.step_spikes(&encode_error(error))
    }

    fn reset(&mut self) {
        self.state = SnnState::default();
    }
}
