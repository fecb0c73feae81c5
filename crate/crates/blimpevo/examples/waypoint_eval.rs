//! Full waypoint evaluation of a saved genome, writing the trajectory CSV.
//!
//! Pass a genome file produced by `evolve_snn`/`evolve_ann` (or `blimpctl
//! evolve`); with no argument a small SNN evolution runs first.

use blimpevo::controllers::ControlLimits;
use blimpevo::evolution::{evolve, reevaluate_hof, EvolutionConfig};
use blimpevo::genome::{parse_genome_text, GenomeKind, NetGenome};
use blimpevo::harness::{moving_average, run_waypoint_eval, write_trajectory_csv, WaypointPlan};
use blimpevo::plant::{LinearPlant, PlantModel, RadarModel};

fn main() {
    let genome: NetGenome = match std::env::args().nth(1) {
        Some(path) => {
            let text = std::fs::read_to_string(&path).expect("genome file readable");
            parse_genome_text(&text).expect("genome file parses")
        }
        None => {
            println!("no genome file given; evolving a small SNN first...");
            let config = EvolutionConfig {
                kind: GenomeKind::Snn,
                pop_size: 20,
                n_generations: 50,
                seed: 0,
                ..EvolutionConfig::default()
            };
            let outcome = evolve(&config).unwrap();
            reevaluate_hof(&outcome.hof, &config, 5, config.seed)[0]
                .genome
                .clone()
        }
    };

    let model = PlantModel::fitted();
    let plan = WaypointPlan::default();
    let radar = RadarModel {
        quantization: 0.0,
        ..RadarModel::default()
    };
    let mut controller = genome.build_controller(ControlLimits::default());
    let mut plant = LinearPlant::new(model);

    let report = run_waypoint_eval(
        controller.as_mut(),
        &mut plant,
        &radar,
        &plan,
        model.dt,
        11,
        false,
    )
    .unwrap();

    println!("controller: {}", genome.kind());
    println!(
        "rmsae: {:.4} m over {} steps",
        report.rmsae,
        report.trajectory.len()
    );
    println!("control effort: {:.1} V", report.control_effort);

    let mut csv = Vec::new();
    write_trajectory_csv(&report.trajectory, &mut csv).unwrap();
    std::fs::write("trajectory.csv", &csv).unwrap();
    println!("wrote trajectory.csv");

    // Display-only smoothing of the command series; the CSV keeps raw
    // values and every metric above ignores this entirely.
    let u: Vec<f64> = report.trajectory.iter().map(|r| r.u_total).collect();
    let smooth = moving_average(&u, 25);
    let mut plot = String::from("t,u_raw,u_smooth\n");
    for (row, s) in report.trajectory.iter().zip(&smooth) {
        plot.push_str(&format!("{},{},{}\n", row.t, row.u_total, s));
    }
    std::fs::write("commands_smoothed.csv", plot).unwrap();
    println!("wrote commands_smoothed.csv (display series, raw commands untouched)");
}
