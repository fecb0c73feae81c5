//! PID controller on the five-waypoint evaluation plan.

use blimpevo::controllers::{ControlLimits, PidController, PidParams};
use blimpevo::harness::{run_waypoint_eval, WaypointPlan};
use blimpevo::plant::{LinearPlant, PlantModel, RadarModel};

fn main() {
    let plan = WaypointPlan::default();
    let model = PlantModel::fitted();
    let radar = RadarModel {
        quantization: 0.0,
        ..RadarModel::default()
    };

    let params = PidParams::altitude_default();
    let mut pid = PidController::new(params, ControlLimits::default());
    let mut plant = LinearPlant::new(model);

    let report =
        run_waypoint_eval(&mut pid, &mut plant, &radar, &plan, model.dt, 7, false).unwrap();

    println!("waypoints: {:?}", plan.waypoints);
    println!("gains: kp {} ki {} kd {}", params.kp, params.ki, params.kd);
    println!("rmsae:           {:.4} m", report.rmsae);
    println!("baseline (u=0):  {:.4} m", plan.zero_controller_baseline());
    println!(
        "control effort:  {:.1} V summed over {} steps",
        report.control_effort,
        report.trajectory.len()
    );

    // Altitude at each waypoint boundary shows how much of every hold is
    // spent in transit on this low-authority plant.
    let steps_per_hold = 300;
    for (i, row) in report.trajectory.iter().enumerate() {
        if (i + 1) % steps_per_hold == 0 {
            println!(
                "t {:>5.0} s: ref {:.1} m -> reached {:.3} m",
                row.t, row.h_ref, row.h_true
            );
        }
    }
}
