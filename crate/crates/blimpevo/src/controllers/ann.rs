//! Feedforward 1-3-2-1 network controller.

use crate::genome::AnnGenome;

use super::{AltitudeController, ControlLimits, ControlOutput};

/// Stateless tanh network: error in, voltage out.
#[derive(Clone, Debug)]
pub struct AnnController {
    pub genome: AnnGenome,
    pub limits: ControlLimits,
}

impl AnnController {
    pub fn new(genome: AnnGenome, limits: ControlLimits) -> Self {
        Self { genome, limits }
    }

    /// Unclamped network output for error `e`.
    pub fn forward_raw(&self, e: f64) -> f64 {
        let g = &self.genome;
        let mut h1 = [0.0; 3];
        for i in 0..3 {
            h1[i] = (g.w1[i] * e + g.b1[i]).tanh();
        }
        let mut h2 = [0.0; 2];
        for j in 0..2 {
            let z: f64 = (0..3).map(|i| g.w2[j][i] * h1[i]).sum::<f64>() + g.b2[j];
            h2[j] = z.tanh();
        }
        g.w3[0] * h2[0] + g.w3[1] * h2[1] + g.b3
    }
}

impl AltitudeController for AnnController {
    fn step(&mut self, error: f64) -> ControlOutput {
        let raw = self.forward_raw(error);
        ControlOutput {
            total: self.limits.clamp(raw),
            net: raw,
            pd: 0.0,
        }
    }

    fn reset(&mut self) {}
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ann(genome: AnnGenome) -> AnnController {
        AnnController::new(genome, ControlLimits::default())
    }

    #[test]
    fn all_zero_genome_outputs_zero() {
        let mut c = ann(AnnGenome::zeroed());
        for e in [-3.0, -0.1, 0.0, 0.7, 10.0] {
            assert_eq!(c.step(e).total, 0.0);
        }
    }

    #[test]
    fn output_bias_saturates_to_limit() {
        let mut g = AnnGenome::zeroed();
        g.b3 = 10.0;
        let mut c = ann(g);
        let out = c.step(0.3);
        assert_eq!(out.total, 3.3);
        assert_eq!(out.net, 10.0);
    }

    #[test]
    fn single_path_matches_nested_tanh_by_hand() {
        let mut g = AnnGenome::zeroed();
        g.w1[0] = 0.5;
        g.b1[0] = 0.1;
        g.w2[0][0] = -0.7;
        g.b2[0] = 0.2;
        g.w3[0] = 1.25;
        g.b3 = 0.05;
        let c = ann(g);
        let e = 0.8;
        let expected = 1.25 * (-0.7 * (0.5 * e + 0.1_f64).tanh() + 0.2).tanh() + 0.05;
        assert_relative_eq!(c.forward_raw(e), expected, max_relative = 1e-12);
    }

    #[test]
    fn zero_bias_network_is_odd() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let mut g = AnnGenome::random(&mut rng);
            g.b1 = [0.0; 3];
            g.b2 = [0.0; 2];
            g.b3 = 0.0;
            let c = ann(g);
            for e in [-2.0, -0.3, 0.05, 1.7] {
                assert_relative_eq!(
                    c.forward_raw(-e),
                    -c.forward_raw(e),
                    max_relative = 1e-12,
                    epsilon = 1e-300
                );
            }
        }
    }

    #[test]
    fn output_always_within_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let mut c = ann(AnnGenome::random(&mut rng));
            for e in [-100.0, -1.0, 0.0, 0.5, 42.0] {
                assert!(c.step(e).total.abs() <= 3.3);
            }
        }
    }
}
