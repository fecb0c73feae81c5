//! Network controller with a small parallel PD term.
//!
//! Trained networks see only the simulated plant; on the real vehicle a
//! low-gain PD running in parallel absorbs disturbances and unmodelled
//! dynamics. The combined command is clamped; both components are reported
//! unclamped so the PD contribution fraction can be measured rather than
//! enforced.

use super::pid::{PidController, PidParams};
use super::{AltitudeController, ControlLimits, ControlOutput};

pub struct HybridController<C: AltitudeController> {
    pub net: C,
    pd: PidController,
    limits: ControlLimits,
}

impl<C: AltitudeController> HybridController<C> {
    /// The parallel controller is PD by construction: no integral gain.
    pub fn new(net: C, pd_kp: f64, pd_kd: f64, t: f64, limits: ControlLimits) -> Self {
        Self {
            net,
            pd: PidController::new(PidParams::pd(pd_kp, pd_kd, t), limits),
            limits,
        }
    }
}

impl<C: AltitudeController> AltitudeController for HybridController<C> {
    fn step(&mut self, error: f64) -> ControlOutput {
        let net = self.net.step(error).total;
        let pd = self.pd.raw_step(error);
        ControlOutput {
            total: self.limits.clamp(net + pd),
            net,
            pd,
        }
    }

    fn reset(&mut self) {
        self.net.reset();
        self.pd.reset();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controllers::SnnController;
    use crate::genome::SnnGenome;
    use approx::assert_relative_eq;

    /// Fixed-output stand-in for a network.
    struct Constant(f64);

    impl AltitudeController for Constant {
        fn step(&mut self, _error: f64) -> ControlOutput {
            ControlOutput {
                total: self.0,
                net: self.0,
                pd: 0.0,
            }
        }
        fn reset(&mut self) {}
    }

    #[test]
    fn zero_pd_gains_pass_the_network_through() {
        let mut h = HybridController::new(Constant(1.25), 0.0, 0.0, 0.2, ControlLimits::default());
        let out = h.step(0.7);
        assert_eq!(out.total, 1.25);
        assert_eq!(out.net, 1.25);
        assert_eq!(out.pd, 0.0);
    }

    #[test]
    fn sum_is_clamped_components_are_not() {
        // Constant net 3.0; PD with kp chosen to produce exactly 0.5.
        let mut h = HybridController::new(Constant(3.0), 1.0, 0.0, 0.2, ControlLimits::default());
        let out = h.step(0.5);
        assert_eq!(out.total, 3.3);
        assert_eq!(out.net, 3.0);
        assert_relative_eq!(out.pd, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn pd_term_matches_hand_arithmetic() {
        // Kp=1.4, Kd=0.3, T=0.2: e 0.1 -> 0.2 gives 1.4*0.2 + 1.5*0.1 = 0.43.
        let mut h = HybridController::new(Constant(0.0), 1.4, 0.3, 0.2, ControlLimits::default());
        h.step(0.1);
        let out = h.step(0.2);
        assert_relative_eq!(out.pd, 0.43, max_relative = 1e-12);
    }

    #[test]
    fn reset_clears_both_halves() {
        let snn = SnnController::new(SnnGenome::zeroed(), ControlLimits::default());
        let mut h = HybridController::new(snn, 1.4, 0.3, 0.2, ControlLimits::default());
        h.step(1.0);
        h.step(-0.5);
        h.reset();
        let out = h.step(0.0);
        assert_eq!(out.pd, 0.0);
        assert_eq!(out.total, 0.0);
    }
}
