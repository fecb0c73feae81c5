//! Neuroevolution toolkit and closed-loop simulation harness for blimp
//! altitude control.
//!
//! The crate simulates the vertical dynamics of a miniature indoor blimp as a
//! second-order discrete transfer function, models its radar altimeter as a
//! noisy quantized sensor, and trains spiking (and conventional) neural
//! controllers against that plant with a mutation-only evolutionary
//! algorithm. A harness module runs waypoint-tracking evaluations and
//! computes tracking-error and control-effort metrics; a sysid module fits
//! plant coefficients from logged flight data.
//!
//! Most capabilities have a runnable example under `examples/`:
//!
//! ```text
//! cargo run --release -p blimpevo --example plant_step_response
//! cargo run --release -p blimpevo --example sensor_pipeline
//! cargo run --release -p blimpevo --example pid_tracking
//! cargo run --release -p blimpevo --example evolve_snn
//! cargo run --release -p blimpevo --example evolve_ann
//! cargo run --release -p blimpevo --example waypoint_eval
//! cargo run --release -p blimpevo --example hybrid_reality_gap
//! cargo run --release -p blimpevo --example sysid_fit
//! cargo run --release -p blimpevo --example compare_controllers
//! ```
//!
//! The same functionality is scriptable through the thin `blimpctl` binary
//! (`evolve`, `eval`, `sysid`, `compare`, `gen-log`).

pub mod config;
pub mod controllers;
pub mod evolution;
pub mod genome;
pub mod harness;
pub mod plant;
pub mod sim;
pub mod sysid;

pub use controllers::{AltitudeController, ControlLimits, ControlOutput};
pub use genome::NetGenome;
pub use plant::{PlantModel, PlantState, RadarModel};
