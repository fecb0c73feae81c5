//! Network controller with the parallel PD used to close the reality gap.
//!
//! In simulation the PD mostly idles; on hardware it absorbs unmodelled
//! dynamics. Its contribution is measured, not capped: the harness reports
//! the share of command magnitude coming from the PD.

use blimpevo::controllers::{ControlLimits, HybridController};
use blimpevo::evolution::{evolve, reevaluate_hof, EvolutionConfig};
use blimpevo::genome::GenomeKind;
use blimpevo::harness::{run_waypoint_eval, WaypointPlan};
use blimpevo::plant::{LinearPlant, PlantModel, RadarModel};

fn main() {
    let config = EvolutionConfig {
        kind: GenomeKind::Snn,
        pop_size: 20,
        n_generations: 50,
        seed: 0,
        ..EvolutionConfig::default()
    };
    println!("evolving a small SNN...");
    let outcome = evolve(&config).unwrap();
    let genome = reevaluate_hof(&outcome.hof, &config, 5, config.seed)[0]
        .genome
        .clone();

    let model = PlantModel::fitted();
    let plan = WaypointPlan::default();
    let radar = RadarModel {
        quantization: 0.0,
        ..RadarModel::default()
    };
    let limits = ControlLimits::default();

    // Plain network.
    let mut net = genome.build_controller(limits);
    let mut plant = LinearPlant::new(model);
    let plain =
        run_waypoint_eval(net.as_mut(), &mut plant, &radar, &plan, model.dt, 3, false).unwrap();

    // Same network with the parallel PD (kp 1.4, kd 0.3 for the SNN).
    let mut hybrid =
        HybridController::new(genome.build_controller(limits), 1.4, 0.3, model.dt, limits);
    let mut plant = LinearPlant::new(model);
    let wrapped =
        run_waypoint_eval(&mut hybrid, &mut plant, &radar, &plan, model.dt, 3, false).unwrap();

    println!("\n{:<22} {:>10} {:>14}", "", "rmsae [m]", "pd share [%]");
    println!(
        "{:<22} {:>10.4} {:>14.2}",
        "network alone", plain.rmsae, plain.pd_fraction_pct
    );
    println!(
        "{:<22} {:>10.4} {:>14.2}",
        "network + parallel PD", wrapped.rmsae, wrapped.pd_fraction_pct
    );
}
