//! Step response of the identified altitude dynamics.
//!
//! Shows the non-minimum-phase dip (the first sample moves *down* under
//! full upward throttle) and the slow climb that dominates every tracking
//! task on this plant.

use blimpevo::plant::{LinearPlant, Plant, PlantModel};

fn main() {
    let model = PlantModel::fitted();
    let mut plant = LinearPlant::new(model);
    let u = 3.3;

    println!(
        "full-throttle step response, u = {u} V, dt = {} s",
        model.dt
    );
    println!("{:>8} {:>12} {:>12}", "t [s]", "h [m]", "rate [m/s]");

    let mut prev = 0.0;
    for k in 0..300 {
        let h = plant.step(u).unwrap();
        let t = (k + 1) as f64 * model.dt;
        if k < 5 || (k + 1) % 25 == 0 {
            println!("{t:>8.1} {h:>12.6} {:>12.6}", (h - prev) / model.dt);
        }
        prev = h;
    }

    // Steady climb rate: (a1+a2)*u / (1 + d1 + d2 residual of the
    // non-integrating pole), i.e. divided by 1 - 0.99 for the fitted model.
    let v_step = (model.num.0 + model.num.1) * u / (1.0 - 0.99);
    println!("\nterminal climb rate: {:.4} m/s", v_step / model.dt);
    println!("time to climb 3 m from rest: about 55 s");
}
