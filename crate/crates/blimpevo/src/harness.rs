//! Waypoint evaluation protocol and controller comparison metrics.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controllers::AltitudeController;
use crate::plant::{Plant, RadarModel};
use crate::sim::{expand_reference, simulate_tracking, Sensor, StepRecord};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("trajectory became non-finite at step {step}")]
    NonFiniteTrajectory { step: usize },
    #[error("empty command series")]
    EmptySeries,
    #[error("reference effort is zero; ratio undefined")]
    ZeroReferenceEffort,
    #[error("total command magnitude is zero; PD fraction undefined")]
    ZeroTotalCommand,
    #[error("reports use different plans; comparison requires one plan")]
    PlanMismatch,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("trajectory csv header must be '{expected}', got '{got}'")]
    BadHeader { expected: &'static str, got: String },
    #[error("trajectory csv: bad value at line {line}")]
    BadValue { line: usize },
}

pub const TRAJECTORY_HEADER: &str = "t,h_ref,h_true,h_meas,u_total,u_net,u_pd";

/// Ordered (setpoint, hold seconds) pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaypointPlan {
    pub waypoints: Vec<(f64, f64)>,
}

impl Default for WaypointPlan {
    /// The five-waypoint evaluation sequence, 60 s per setpoint.
    fn default() -> Self {
        Self {
            waypoints: vec![
                (3.0, 60.0),
                (2.0, 60.0),
                (1.0, 60.0),
                (2.5, 60.0),
                (1.5, 60.0),
            ],
        }
    }
}

impl WaypointPlan {
    pub fn validate(&self) -> Result<(), &'static str> {
        if self.waypoints.is_empty() {
            return Err("plan needs at least one waypoint");
        }
        for &(sp, hold) in &self.waypoints {
            if sp < 0.0 || !sp.is_finite() {
                return Err("setpoints must be finite and >= 0");
            }
            if !hold.is_finite() || hold <= 0.0 {
                return Err("holds must be finite and > 0");
            }
        }
        Ok(())
    }

    pub fn reference(&self, dt: f64) -> Vec<f64> {
        expand_reference(&self.waypoints, dt)
    }

    /// RMS of the reference profile itself: the score of a controller that
    /// never moves the plant off the ground.
    pub fn zero_controller_baseline(&self) -> f64 {
        let total: f64 = self.waypoints.iter().map(|&(_, hold)| hold).sum();
        let weighted: f64 = self
            .waypoints
            .iter()
            .map(|&(sp, hold)| sp * sp * hold)
            .sum();
        (weighted / total).sqrt()
    }
}

/// Full record of one waypoint tracking run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub plan: WaypointPlan,
    pub dt: f64,
    pub trajectory: Vec<StepRecord>,
    /// RMSAE on true altitude over the whole run, m.
    pub rmsae: f64,
    /// Sum of |u_total| over the run, V.
    pub control_effort: f64,
    /// 100 * sum|u_pd| / sum|u_net + u_pd|; 0 for non-hybrid controllers.
    pub pd_fraction_pct: f64,
    /// Effort relative to a reference controller; 100 until rebased by a
    /// comparison (a report is its own reference).
    pub effort_ratio_pct: f64,
}

/// Track the plan from altitude 0 with sensor noise, logging every step.
pub fn run_waypoint_eval(
    controller: &mut dyn AltitudeController,
    plant: &mut dyn Plant,
    radar: &RadarModel,
    plan: &WaypointPlan,
    dt: f64,
    seed: u64,
    apply_filters: bool,
) -> Result<EvalReport, HarnessError> {
    let refs = plan.reference(dt);
    let mut sensor = Sensor::new(*radar, apply_filters);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trajectory = Vec::with_capacity(refs.len());
    let stats = simulate_tracking(
        controller,
        plant,
        &mut sensor,
        &mut rng,
        &refs,
        dt,
        Some(&mut trajectory),
    )
    .map_err(|e| HarnessError::NonFiniteTrajectory { step: e.step })?;

    let net: Vec<f64> = trajectory.iter().map(|r| r.u_net).collect();
    let pd: Vec<f64> = trajectory.iter().map(|r| r.u_pd).collect();
    let pd_fraction_pct = if pd.iter().all(|&v| v == 0.0) {
        0.0
    } else {
        pd_fraction(&net, &pd)?
    };

    Ok(EvalReport {
        plan: plan.clone(),
        dt,
        trajectory,
        rmsae: stats.rmsae,
        control_effort: stats.sum_abs_u,
        pd_fraction_pct,
        effort_ratio_pct: 100.0,
    })
}

/// `100 * sum|u_test| / sum|u_ref|`: relative energy use of two command
/// histories, insensitive to sign.
pub fn control_effort_ratio(u_test: &[f64], u_ref: &[f64]) -> Result<f64, HarnessError> {
    if u_test.is_empty() || u_ref.is_empty() {
        return Err(HarnessError::EmptySeries);
    }
    let denom: f64 = u_ref.iter().map(|u| u.abs()).sum();
    if denom == 0.0 {
        return Err(HarnessError::ZeroReferenceEffort);
    }
    let num: f64 = u_test.iter().map(|u| u.abs()).sum();
    Ok(100.0 * num / denom)
}

/// `100 * sum|u_pd| / sum|u_net + u_pd|`: share of the command magnitude
/// contributed by the parallel PD.
pub fn pd_fraction(u_net: &[f64], u_pd: &[f64]) -> Result<f64, HarnessError> {
    let denom: f64 = u_net.iter().zip(u_pd).map(|(n, p)| (n + p).abs()).sum();
    if denom == 0.0 {
        return Err(HarnessError::ZeroTotalCommand);
    }
    let num: f64 = u_pd.iter().map(|p| p.abs()).sum();
    Ok(100.0 * num / denom)
}

/// Partial-window causal moving average, for display smoothing only.
/// Metrics are always computed from raw commands.
pub fn moving_average(series: &[f64], window: usize) -> Vec<f64> {
    assert!(window >= 1);
    let mut out = Vec::with_capacity(series.len());
    let mut sum = 0.0;
    for (i, &v) in series.iter().enumerate() {
        sum += v;
        if i >= window {
            sum -= series[i - window];
        }
        out.push(sum / window.min(i + 1) as f64);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub controller: String,
    pub rmsae_m: f64,
    pub effort_ratio_pct: f64,
    pub pd_fraction_pct: f64,
}

/// Side-by-side metrics with the PID as the 100% effort reference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("controller,rmsae_m,effort_ratio_pct,pd_fraction_pct\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.controller, row.rmsae_m, row.effort_ratio_pct, row.pd_fraction_pct
            ));
        }
        out
    }
}

impl std::fmt::Display for ComparisonTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:<18}", "metric")?;
        for row in &self.rows {
            write!(f, "{:>12}", row.controller)?;
        }
        writeln!(f)?;
        write!(f, "{:<18}", "rmsae_m")?;
        for row in &self.rows {
            write!(f, "{:>12.4}", row.rmsae_m)?;
        }
        writeln!(f)?;
        write!(f, "{:<18}", "effort_ratio_pct")?;
        for row in &self.rows {
            write!(f, "{:>12.2}", row.effort_ratio_pct)?;
        }
        writeln!(f)?;
        write!(f, "{:<18}", "pd_fraction_pct")?;
        for row in &self.rows {
            write!(f, "{:>12.2}", row.pd_fraction_pct)?;
        }
        writeln!(f)
    }
}

/// Compare full reports; they must share one plan.
pub fn compare_reports(
    pid: &EvalReport,
    ann: &EvalReport,
    snn: &EvalReport,
) -> Result<ComparisonTable, HarnessError> {
    if pid.plan != ann.plan || pid.plan != snn.plan || pid.dt != ann.dt || pid.dt != snn.dt {
        return Err(HarnessError::PlanMismatch);
    }
    compare_trajectories(&pid.trajectory, &ann.trajectory, &snn.trajectory)
}

/// Compare logged trajectories; metrics are recomputed from the rows so a
/// table built from CSV files matches one built in memory bit for bit.
pub fn compare_trajectories(
    pid: &[StepRecord],
    ann: &[StepRecord],
    snn: &[StepRecord],
) -> Result<ComparisonTable, HarnessError> {
    let same_plan = |a: &[StepRecord], b: &[StepRecord]| {
        a.len() == b.len()
            && a.iter()
                .zip(b)
                .all(|(x, y)| x.t == y.t && x.h_ref == y.h_ref)
    };
    if !same_plan(pid, ann) || !same_plan(pid, snn) {
        return Err(HarnessError::PlanMismatch);
    }

    let u_pid: Vec<f64> = pid.iter().map(|r| r.u_total).collect();
    let mut rows = Vec::with_capacity(3);
    for (name, traj) in [("PID", pid), ("ANN", ann), ("SNN", snn)] {
        let u: Vec<f64> = traj.iter().map(|r| r.u_total).collect();
        let net: Vec<f64> = traj.iter().map(|r| r.u_net).collect();
        let pd: Vec<f64> = traj.iter().map(|r| r.u_pd).collect();
        rows.push(ComparisonRow {
            controller: name.to_string(),
            rmsae_m: trajectory_rmsae(traj),
            effort_ratio_pct: control_effort_ratio(&u, &u_pid)?,
            pd_fraction_pct: if pd.iter().all(|&v| v == 0.0) {
                0.0
            } else {
                pd_fraction(&net, &pd)?
            },
        });
    }
    Ok(ComparisonTable { rows })
}

/// RMSAE recomputed from logged rows alone.
pub fn trajectory_rmsae(rows: &[StepRecord]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let sum: f64 = rows
        .iter()
        .map(|r| (r.h_ref - r.h_true) * (r.h_ref - r.h_true))
        .sum();
    (sum / rows.len() as f64).sqrt()
}

/// Write the pinned `t,h_ref,h_true,h_meas,u_total,u_net,u_pd` CSV.
pub fn write_trajectory_csv<W: Write>(
    rows: &[StepRecord],
    mut writer: W,
) -> Result<(), HarnessError> {
    writeln!(writer, "{TRAJECTORY_HEADER}")?;
    for r in rows {
        writeln!(
            writer,
            "{},{},{},{},{},{},{}",
            r.t, r.h_ref, r.h_true, r.h_meas, r.u_total, r.u_net, r.u_pd
        )?;
    }
    Ok(())
}

pub fn read_trajectory_csv<R: Read>(reader: R) -> Result<Vec<StepRecord>, HarnessError> {
    let mut content = String::new();
    let mut reader = reader;
    reader.read_to_string(&mut content)?;
    let mut lines = content.lines().enumerate();
    let (_, header) = lines.next().ok_or(HarnessError::BadHeader {
        expected: TRAJECTORY_HEADER,
        got: String::new(),
    })?;
    if header.trim() != TRAJECTORY_HEADER {
        return Err(HarnessError::BadHeader {
            expected: TRAJECTORY_HEADER,
            got: header.to_string(),
        });
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|_| HarnessError::BadValue { line: i + 1 })
            })
            .collect::<Result<_, _>>()?;
        if fields.len() != 7 {
            return Err(HarnessError::BadValue { line: i + 1 });
        }
        rows.push(StepRecord {
            t: fields[0],
            h_ref: fields[1],
            h_true: fields[2],
            h_meas: fields[3],
            u_total: fields[4],
            u_net: fields[5],
            u_pd: fields[6],
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controllers::{
        AltitudeController, ControlLimits, ControlOutput, PidController, PidParams,
    };
    use crate::plant::{LinearPlant, PlantModel};
    use crate::sim::test_support::ScriptedPlant;
    use approx::assert_relative_eq;

    struct ZeroController;

    impl AltitudeController for ZeroController {
        fn step(&mut self, _e: f64) -> ControlOutput {
            ControlOutput::default()
        }
        fn reset(&mut self) {}
    }

    #[test]
    fn default_plan_baseline_is_closed_form() {
        let plan = WaypointPlan::default();
        // mean of {9, 4, 1, 6.25, 2.25} = 4.5
        assert_relative_eq!(
            plan.zero_controller_baseline(),
            4.5_f64.sqrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn zero_controller_scores_the_baseline() {
        let plan = WaypointPlan::default();
        let mut plant = LinearPlant::new(PlantModel::fitted());
        let mut ctrl = ZeroController;
        let report = run_waypoint_eval(
            &mut ctrl,
            &mut plant,
            &RadarModel::ideal(),
            &plan,
            0.2,
            0,
            false,
        )
        .unwrap();
        assert_relative_eq!(
            report.rmsae,
            plan.zero_controller_baseline(),
            max_relative = 1e-12
        );
        assert_eq!(report.control_effort, 0.0);
        assert_eq!(report.trajectory.len(), 1500);
    }

    #[test]
    fn perfect_tracker_stub_scores_zero() {
        let plan = WaypointPlan::default();
        let refs = plan.reference(0.2);
        let mut plant = ScriptedPlant::new(refs.clone());
        let mut ctrl = ZeroController;
        let report = run_waypoint_eval(
            &mut ctrl,
            &mut plant,
            &RadarModel::ideal(),
            &plan,
            0.2,
            0,
            false,
        )
        .unwrap();
        assert_eq!(report.rmsae, 0.0);
        for (row, want) in report.trajectory.iter().zip(&refs) {
            assert_eq!(row.h_true, *want);
        }
    }

    #[test]
    fn pid_beats_zero_controller_substantially() {
        let plan = WaypointPlan::default();
        let mut plant = LinearPlant::new(PlantModel::fitted());
        let mut ctrl = PidController::new(PidParams::altitude_default(), ControlLimits::default());
        let report = run_waypoint_eval(
            &mut ctrl,
            &mut plant,
            &RadarModel::ideal(),
            &plan,
            0.2,
            0,
            false,
        )
        .unwrap();
        assert!(report.rmsae < plan.zero_controller_baseline());
    }

    #[test]
    fn effort_ratio_hand_cases() {
        assert_eq!(
            control_effort_ratio(&[1.0, -2.0], &[1.0, -2.0]).unwrap(),
            100.0
        );
        let halved: Vec<f64> = [1.0, -2.0, 0.5].iter().map(|u| u / 2.0).collect();
        assert_relative_eq!(
            control_effort_ratio(&halved, &[1.0, -2.0, 0.5]).unwrap(),
            50.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            control_effort_ratio(&[1.0, -1.0], &[2.0, 2.0]).unwrap(),
            50.0,
            max_relative = 1e-12
        );
        assert!(matches!(
            control_effort_ratio(&[1.0], &[0.0]),
            Err(HarnessError::ZeroReferenceEffort)
        ));
        assert!(matches!(
            control_effort_ratio(&[], &[]),
            Err(HarnessError::EmptySeries)
        ));
    }

    #[test]
    fn effort_ratio_ignores_sign_flips() {
        let u: Vec<f64> = vec![0.3, -1.2, 2.0, -0.1];
        let flipped: Vec<f64> = u.iter().map(|v| -v).collect();
        assert_relative_eq!(
            control_effort_ratio(&flipped, &u).unwrap(),
            100.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn pd_fraction_hand_cases() {
        assert_eq!(pd_fraction(&[1.0, 2.0], &[0.0, 0.0]).unwrap(), 0.0);
        assert_relative_eq!(
            pd_fraction(&[1.0, -2.0], &[1.0, -2.0]).unwrap(),
            50.0,
            max_relative = 1e-12
        );
        // Mixed signs: |pd| = 1.0, |net+pd| = |0.5| + |1.5| = 2.0 -> 50%.
        assert_relative_eq!(
            pd_fraction(&[1.0, 1.0], &[-0.5, 0.5]).unwrap(),
            50.0,
            max_relative = 1e-12
        );
        assert!(matches!(
            pd_fraction(&[1.0], &[-1.0]),
            Err(HarnessError::ZeroTotalCommand)
        ));
    }

    #[test]
    fn moving_average_smooths_without_touching_input() {
        let series = vec![0.0, 3.0, 0.0, 3.0];
        let smooth = moving_average(&series, 2);
        assert_eq!(smooth, vec![0.0, 1.5, 1.5, 1.5]);
        assert_eq!(series, vec![0.0, 3.0, 0.0, 3.0]);
        assert_eq!(moving_average(&series, 1), series);
    }

    fn tiny_report(u_scale: f64) -> EvalReport {
        let plan = WaypointPlan {
            waypoints: vec![(1.0, 1.0)],
        };
        let mut plant = LinearPlant::new(PlantModel::fitted());
        let mut ctrl = ScaledController(u_scale);
        run_waypoint_eval(
            &mut ctrl,
            &mut plant,
            &RadarModel::ideal(),
            &plan,
            0.2,
            0,
            false,
        )
        .unwrap()
    }

    struct ScaledController(f64);

    impl AltitudeController for ScaledController {
        fn step(&mut self, e: f64) -> ControlOutput {
            let u = (self.0 * e).clamp(-3.3, 3.3);
            ControlOutput {
                total: u,
                net: u,
                pd: 0.0,
            }
        }
        fn reset(&mut self) {}
    }

    #[test]
    fn comparison_uses_pid_as_reference_and_fixed_order() {
        let pid = tiny_report(2.0);
        let ann = tiny_report(1.0);
        let snn = tiny_report(0.5);
        let table = compare_reports(&pid, &ann, &snn).unwrap();
        assert_eq!(
            table
                .rows
                .iter()
                .map(|r| r.controller.as_str())
                .collect::<Vec<_>>(),
            ["PID", "ANN", "SNN"]
        );
        assert_eq!(table.rows[0].effort_ratio_pct, 100.0);
        assert_eq!(table.rows[0].rmsae_m, pid.rmsae);
        assert_eq!(table.rows[1].rmsae_m, ann.rmsae);
        assert_eq!(table.rows[2].rmsae_m, snn.rmsae);
        assert!(table.rows[2].effort_ratio_pct < table.rows[1].effort_ratio_pct);
        let csv = table.to_csv();
        assert!(csv.starts_with("controller,rmsae_m,"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn comparison_rejects_mismatched_plans() {
        let pid = tiny_report(2.0);
        let mut ann = tiny_report(1.0);
        ann.plan = WaypointPlan {
            waypoints: vec![(2.0, 1.0)],
        };
        let snn = tiny_report(0.5);
        assert!(matches!(
            compare_reports(&pid, &ann, &snn),
            Err(HarnessError::PlanMismatch)
        ));
    }

    #[test]
    fn trajectory_csv_round_trips_bit_exactly() {
        let plan = WaypointPlan {
            waypoints: vec![(2.0, 2.0), (0.5, 1.0)],
        };
        let mut plant = LinearPlant::new(PlantModel::fitted());
        let mut ctrl = PidController::new(PidParams::altitude_default(), ControlLimits::default());
        let report = run_waypoint_eval(
            &mut ctrl,
            &mut plant,
            &RadarModel::default(),
            &plan,
            0.2,
            9,
            false,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&report.trajectory, &mut buf).unwrap();
        let rows = read_trajectory_csv(buf.as_slice()).unwrap();
        assert_eq!(rows, report.trajectory);
        assert_eq!(trajectory_rmsae(&rows), report.rmsae);
    }

    #[test]
    fn failed_runs_carry_the_step_index() {
        let plan = WaypointPlan {
            waypoints: vec![(1.0, 1.0)],
        };
        let mut plant = ScriptedPlant::new(vec![0.0, f64::INFINITY, 0.0, 0.0, 0.0]);
        let mut ctrl = ZeroController;
        let err = run_waypoint_eval(
            &mut ctrl,
            &mut plant,
            &RadarModel::ideal(),
            &plan,
            0.2,
            0,
            false,
        )
        .unwrap_err();
        assert!(matches!(err, HarnessError::NonFiniteTrajectory { step: 1 }));
    }
}
