//! Closed-loop reference-tracking simulation shared by the evolutionary
//! fitness evaluation and the waypoint harness.
//!
//! Per step: error from the previous measurement, controller, plant, then a
//! fresh measurement. The tracking error metric is always computed on the
//! true altitude; the measured altitude is logged alongside.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controllers::AltitudeController;
use crate::plant::{FilterState, Plant, RadarModel};

/// Expand (setpoint, hold seconds) pairs into one reference value per step.
pub fn expand_reference(pairs: &[(f64, f64)], dt: f64) -> Vec<f64> {
    let mut refs = Vec::new();
    for &(setpoint, hold) in pairs {
        let steps = (hold / dt).round() as usize;
        refs.extend(std::iter::repeat_n(setpoint, steps));
    }
    refs
}

/// Radar plus optional smoothing cascade and its per-episode state.
#[derive(Clone, Debug)]
pub struct Sensor {
    pub radar: RadarModel,
    pub apply_filters: bool,
    filter: FilterState,
}

impl Sensor {
    pub fn new(radar: RadarModel, apply_filters: bool) -> Self {
        Self {
            radar,
            apply_filters,
            filter: FilterState::new(),
        }
    }

    pub fn measure<R: Rng + ?Sized>(&mut self, true_h: f64, rng: &mut R) -> f64 {
        let raw = self.radar.sense(true_h, rng);
        if self.apply_filters {
            self.filter.apply(&self.radar, raw)
        } else {
            raw
        }
    }

    pub fn reset(&mut self) {
        self.filter.reset();
    }
}

/// One logged simulation step. `t` is the time the command was issued;
/// `h_true`/`h_meas` are the altitude one sample later and its measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub h_ref: f64,
    pub h_true: f64,
    pub h_meas: f64,
    pub u_total: f64,
    pub u_net: f64,
    pub u_pd: f64,
}

/// Aggregates over one tracking run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackingStats {
    /// Root mean squared altitude error on true altitude, m.
    pub rmsae: f64,
    /// Sum of |u_total| over the run, V.
    pub sum_abs_u: f64,
    /// Sum of |u_pd| over the run, V.
    pub sum_abs_pd: f64,
    pub steps: usize,
}

#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
#[error("trajectory became non-finite at step {step}")]
pub struct NonFiniteTrajectory {
    pub step: usize,
}

/// Run the loop over `reference`, optionally logging every step.
pub fn simulate_tracking<R: Rng + ?Sized>(
    controller: &mut dyn AltitudeController,
    plant: &mut dyn Plant,
    sensor: &mut Sensor,
    rng: &mut R,
    reference: &[f64],
    dt: f64,
    mut trace: Option<&mut Vec<StepRecord>>,
) -> Result<TrackingStats, NonFiniteTrajectory> {
    let mut h_meas = plant.altitude();
    let mut sum_sq = 0.0;
    let mut sum_abs_u = 0.0;
    let mut sum_abs_pd = 0.0;

    for (k, &h_ref) in reference.iter().enumerate() {
        let out = controller.step(h_ref - h_meas);
        let h_true = match plant.step(out.total) {
            Ok(h) if h.is_finite() => h,
            _ => return Err(NonFiniteTrajectory { step: k }),
        };
        sum_sq += (h_ref - h_true) * (h_ref - h_true);
        sum_abs_u += out.total.abs();
        sum_abs_pd += out.pd.abs();
        h_meas = sensor.measure(h_true, rng);
        if let Some(trace) = trace.as_deref_mut() {
            trace.push(StepRecord {
                t: k as f64 * dt,
                h_ref,
                h_true,
                h_meas,
                u_total: out.total,
                u_net: out.net,
                u_pd: out.pd,
            });
        }
    }

    let steps = reference.len();
    Ok(TrackingStats {
        rmsae: if steps == 0 {
            0.0
        } else {
            (sum_sq / steps as f64).sqrt()
        },
        sum_abs_u,
        sum_abs_pd,
        steps,
    })
}

#[cfg(test)]
pub(crate) mod test_support {
    use crate::plant::{Plant, PlantError};

    /// Plant stub that replays a scripted altitude sequence, ignoring the
    /// commands it receives.
    pub struct ScriptedPlant {
        pub script: Vec<f64>,
        pub cursor: usize,
    }

    impl ScriptedPlant {
        pub fn new(script: Vec<f64>) -> Self {
            Self { script, cursor: 0 }
        }
    }

    impl Plant for ScriptedPlant {
        fn step(&mut self, _u: f64) -> Result<f64, PlantError> {
            let h = self.script[self.cursor];
            self.cursor += 1;
            Ok(h)
        }

        fn altitude(&self) -> f64 {
            if self.cursor == 0 {
                self.script.first().copied().unwrap_or(0.0)
            } else {
                self.script[self.cursor - 1]
            }
        }
    }
}
