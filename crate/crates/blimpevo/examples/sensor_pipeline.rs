//! Radar measurement pipeline: Gaussian noise, quantization, and the
//! median + moving-average smoothing cascade.

use blimpevo::plant::{FilterState, RadarModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let radar = RadarModel {
        noise_sigma: 0.0667,
        quantization: 0.2,
        median_window: 5,
        avg_window: 3,
    };
    radar.validate().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut filter = FilterState::new();

    let true_h = 1.5;
    println!(
        "true altitude {true_h} m, sigma {} m, quantization {} m",
        radar.noise_sigma, radar.quantization
    );
    println!("{:>6} {:>10} {:>10}", "k", "raw [m]", "smooth [m]");

    let mut raw_err = 0.0;
    let mut smooth_err = 0.0;
    let n = 200;
    for k in 0..n {
        let raw = radar.sense(true_h, &mut rng);
        let smooth = filter.apply(&radar, raw);
        raw_err += (raw - true_h) * (raw - true_h);
        smooth_err += (smooth - true_h) * (smooth - true_h);
        if k < 10 {
            println!("{k:>6} {raw:>10.3} {smooth:>10.4}");
        }
    }
    println!(
        "\nover {n} samples: raw rms error {:.4} m, smoothed rms error {:.4} m",
        (raw_err / n as f64).sqrt(),
        (smooth_err / n as f64).sqrt()
    );
}
