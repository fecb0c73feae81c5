//! The full comparison protocol: PID, evolved ANN, and evolved SNN on the
//! five-waypoint plan, with the PID as the control-effort reference.

use blimpevo::controllers::{ControlLimits, PidController, PidParams};
use blimpevo::evolution::{evolve, reevaluate_hof, EvolutionConfig};
use blimpevo::genome::{GenomeKind, NetGenome};
use blimpevo::harness::{compare_reports, run_waypoint_eval, WaypointPlan};
use blimpevo::plant::{LinearPlant, PlantModel, RadarModel};

fn evolved(kind: GenomeKind, seed: u64) -> NetGenome {
    let config = EvolutionConfig {
        kind,
        pop_size: 20,
        n_generations: 50,
        seed,
        ..EvolutionConfig::default()
    };
    let outcome = evolve(&config).unwrap();
    reevaluate_hof(&outcome.hof, &config, 5, seed)[0]
        .genome
        .clone()
}

fn main() {
    let model = PlantModel::fitted();
    let plan = WaypointPlan::default();
    let radar = RadarModel::ideal();
    let limits = ControlLimits::default();

    println!("evolving ANN and SNN controllers (20 x 50 each)...");
    let ann = evolved(GenomeKind::Ann, 2);
    let snn = evolved(GenomeKind::Snn, 0);

    let mut pid = PidController::new(PidParams::altitude_default(), limits);
    let mut plant = LinearPlant::new(model);
    let pid_report =
        run_waypoint_eval(&mut pid, &mut plant, &radar, &plan, model.dt, 0, false).unwrap();

    let mut ann_ctrl = ann.build_controller(limits);
    let mut plant = LinearPlant::new(model);
    let ann_report = run_waypoint_eval(
        ann_ctrl.as_mut(),
        &mut plant,
        &radar,
        &plan,
        model.dt,
        0,
        false,
    )
    .unwrap();

    let mut snn_ctrl = snn.build_controller(limits);
    let mut plant = LinearPlant::new(model);
    let snn_report = run_waypoint_eval(
        snn_ctrl.as_mut(),
        &mut plant,
        &radar,
        &plan,
        model.dt,
        0,
        false,
    )
    .unwrap();

    let table = compare_reports(&pid_report, &ann_report, &snn_report).unwrap();
    println!();
    print!("{table}");
    println!(
        "\nzero-controller baseline: {:.4} m",
        plan.zero_controller_baseline()
    );
    println!("(effort is relative to the PID; the neurocontrollers spend less)");
}
