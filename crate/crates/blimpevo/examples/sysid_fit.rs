//! System identification round trip: simulate a tele-operated flight, add
//! sensor noise, fit the transfer function, and compare with the truth.

use blimpevo::plant::PlantModel;
use blimpevo::sysid::{fit_model, generate_log, validate_model, Excitation};

fn main() {
    let truth = PlantModel::fitted();
    let log = generate_log(
        &truth,
        3.3,
        Excitation::RandomSteps { hold_seconds: 8.0 },
        300.0,
        0.05,
        0.0,
        29,
    );
    println!(
        "synthetic log: {} samples at dt {} s, noise sigma 0.05 m",
        log.len(),
        log.dt()
    );

    let report = fit_model(&log).unwrap();
    println!("\n{:<6} {:>14} {:>14}", "coef", "true", "fitted");
    let pairs = [
        ("a1", truth.num.0, report.model.num.0),
        ("a2", truth.num.1, report.model.num.1),
        ("d1", truth.den.0, report.model.den.0),
        ("d2", truth.den.1, report.model.den.1),
    ];
    for (name, want, got) in pairs {
        println!("{name:<6} {want:>14.6e} {got:>14.6e}");
    }
    println!("\nfree-run nrmsae (fit objective): {:.4}", report.nrmsae);
    println!("free-run rmsae vs noisy log:     {:.4} m", report.rmsae);
    println!(
        "true model rmsae vs same log:    {:.4} m",
        validate_model(&truth, &log)
    );
}
