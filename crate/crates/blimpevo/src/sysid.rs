//! Plant coefficient fitting from logged (time, command, altitude) data.
//!
//! Fitting works on mean-subtracted altitude in two stages: an
//! equation-error least-squares regression (linear in all four
//! coefficients), then a derivative-free simplex refinement of the free-run
//! simulation NRMSAE, which is the score that actually matters and is not
//! convex in the denominator coefficients. The better of the two stages by
//! NRMSAE wins, so refinement can never lose to its own starting point.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::plant::{PlantModel, PlantState};

#[derive(Debug, Error)]
pub enum SysIdError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("flight log header must be 't,u,h', got '{0}'")]
    BadHeader(String),
    #[error("flight log time stamps must be strictly increasing (row {row})")]
    NonMonotonicTime { row: usize },
    #[error("flight log sampling is irregular at row {row}: dt {dt} vs median {median}")]
    IrregularSampling { row: usize, dt: f64, median: f64 },
    #[error("flight log too short: {got} samples, need at least {min}")]
    TooShort { got: usize, min: usize },
    #[error("series length mismatch: {pred} predicted vs {obs} observed")]
    LengthMismatch { pred: usize, obs: usize },
    #[error("normalization undefined: observed series is all zero")]
    UndefinedNormalization,
    #[error("degenerate data: regression is rank deficient (no excitation)")]
    DegenerateData,
    #[error("bad value in flight log at row {row}")]
    BadValue { row: usize },
}

/// One flight log sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub t: f64,
    pub u: f64,
    pub h: f64,
}

/// Time series of commands and measured altitudes at a uniform rate.
#[derive(Clone, Debug, PartialEq)]
pub struct FlightLog {
    rows: Vec<LogRow>,
    dt: f64,
}

impl FlightLog {
    /// Minimum samples required by [`fit_model`].
    pub const MIN_FIT_SAMPLES: usize = 50;

    /// Build from rows, checking monotonic time and near-uniform spacing
    /// (every interval within 10% of the median).
    pub fn new(rows: Vec<LogRow>) -> Result<Self, SysIdError> {
        if rows.len() < 2 {
            return Err(SysIdError::TooShort {
                got: rows.len(),
                min: 2,
            });
        }
        for (i, row) in rows.iter().enumerate() {
            if !row.t.is_finite() || !row.u.is_finite() || !row.h.is_finite() {
                return Err(SysIdError::BadValue { row: i });
            }
        }
        let mut gaps: Vec<f64> = rows.windows(2).map(|w| w[1].t - w[0].t).collect();
        if let Some(row) = gaps.iter().position(|&g| g <= 0.0) {
            return Err(SysIdError::NonMonotonicTime { row: row + 1 });
        }
        gaps.sort_by(|a, b| a.partial_cmp(b).expect("finite gaps"));
        let median = gaps[gaps.len() / 2];
        for (i, w) in rows.windows(2).enumerate() {
            let dt = w[1].t - w[0].t;
            if (dt - median).abs() >= 0.1 * median {
                return Err(SysIdError::IrregularSampling {
                    row: i + 1,
                    dt,
                    median,
                });
            }
        }
        Ok(Self { rows, dt: median })
    }

    pub fn rows(&self) -> &[LogRow] {
        &self.rows
    }

    /// Median sample period, seconds.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn commands(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.u).collect()
    }

    pub fn altitudes(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.h).collect()
    }

    /// Read `t,u,h` CSV; `#` lines are comments.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, SysIdError> {
        let mut csv = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = csv.headers()?.clone();
        let names: Vec<&str> = header.iter().collect();
        if names != ["t", "u", "h"] {
            return Err(SysIdError::BadHeader(names.join(",")));
        }
        let mut rows = Vec::new();
        for record in csv.deserialize() {
            let row: LogRow = record?;
            rows.push(row);
        }
        Self::new(rows)
    }

    /// Write `t,u,h` CSV with round-trip float formatting.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<(), SysIdError> {
        writeln!(writer, "t,u,h")?;
        for row in &self.rows {
            writeln!(writer, "{},{},{}", row.t, row.u, row.h)?;
        }
        Ok(())
    }
}

/// Normalized root mean squared error: `sqrt(sum((obs-pred)^2)/sum(obs^2))`.
/// Normalization is by the observed signal's energy.
pub fn nrmsae(pred: &[f64], obs: &[f64]) -> Result<f64, SysIdError> {
    if pred.len() != obs.len() || pred.is_empty() {
        return Err(SysIdError::LengthMismatch {
            pred: pred.len(),
            obs: obs.len(),
        });
    }
    let denom: f64 = obs.iter().map(|o| o * o).sum();
    if denom == 0.0 {
        return Err(SysIdError::UndefinedNormalization);
    }
    let num: f64 = pred.iter().zip(obs).map(|(p, o)| (o - p) * (o - p)).sum();
    Ok((num / denom).sqrt())
}

/// Free-run simulation: start at rest at `h[0]` and replay the logged
/// commands through the model, never looking at the observed altitude
/// again. Returns one prediction per log sample.
pub fn free_run(model: &PlantModel, commands: &[f64], h0: f64) -> Vec<f64> {
    let mut pred = Vec::with_capacity(commands.len());
    pred.push(h0);
    let mut state = PlantState::at_altitude(h0);
    for &u in &commands[..commands.len().saturating_sub(1)] {
        match model.step(&state, u) {
            Ok((next, h)) => {
                state = next;
                pred.push(h);
            }
            Err(_) => {
                pred.push(f64::NAN);
                break;
            }
        }
    }
    pred.resize(commands.len(), f64::NAN);
    pred
}

/// Free-run RMSAE of `model` against the logged altitude, m.
pub fn validate_model(model: &PlantModel, log: &FlightLog) -> f64 {
    let obs = log.altitudes();
    let pred = free_run(model, &log.commands(), obs[0]);
    let sum: f64 = pred.iter().zip(&obs).map(|(p, o)| (o - p) * (o - p)).sum();
    (sum / obs.len() as f64).sqrt()
}

#[derive(Clone, Debug)]
pub struct FitReport {
    pub model: PlantModel,
    /// Free-run NRMSAE on the mean-subtracted altitude (the fit objective).
    pub nrmsae: f64,
    /// Free-run RMSAE against the raw logged altitude, m.
    pub rmsae: f64,
    /// Free-run prediction per log sample, raw altitude scale.
    pub predicted: Vec<f64>,
    /// `predicted - observed` per log sample.
    pub residuals: Vec<f64>,
}

impl FitReport {
    /// Structured text summary, one `key value` pair per line.
    pub fn to_text(&self) -> String {
        let (a1, a2) = self.model.num;
        let (d1, d2) = self.model.den;
        format!(
            "a1 {a1}\na2 {a2}\nd1 {d1}\nd2 {d2}\ndt {}\nnrmsae {}\nrmsae_m {}\nsamples {}\n",
            self.model.dt,
            self.nrmsae,
            self.rmsae,
            self.residuals.len()
        )
    }

    /// Residual CSV: `t,h_obs,h_pred,residual`.
    pub fn write_residual_csv<W: Write>(
        &self,
        log: &FlightLog,
        mut writer: W,
    ) -> Result<(), SysIdError> {
        writeln!(writer, "t,h_obs,h_pred,residual")?;
        for ((row, pred), res) in log.rows().iter().zip(&self.predicted).zip(&self.residuals) {
            writeln!(writer, "{},{},{},{}", row.t, row.h, pred, res)?;
        }
        Ok(())
    }
}

/// Fit all four transfer-function coefficients to a flight log.
pub fn fit_model(log: &FlightLog) -> Result<FitReport, SysIdError> {
    if log.len() < FlightLog::MIN_FIT_SAMPLES {
        return Err(SysIdError::TooShort {
            got: log.len(),
            min: FlightLog::MIN_FIT_SAMPLES,
        });
    }
    let u = log.commands();
    let h_raw = log.altitudes();
    let mean = h_raw.iter().sum::<f64>() / h_raw.len() as f64;
    // Mean subtraction applies to altitude only; commands are already
    // zero-centered by the shaft-direction sign convention.
    let h: Vec<f64> = h_raw.iter().map(|v| v - mean).collect();

    let stage1 = equation_error_fit(&u, &h, log.dt())?;
    let objective = |theta: &[f64; 4]| {
        let model = model_from_theta(theta, log.dt());
        let pred = free_run(&model, &u, h[0]);
        match nrmsae(&pred, &h) {
            Ok(v) if v.is_finite() => v,
            _ => f64::INFINITY,
        }
    };
    let theta1 = [stage1.num.0, stage1.num.1, stage1.den.0, stage1.den.1];
    let score1 = objective(&theta1);

    // Measurement noise on the lagged-altitude regressors biases stage 1
    // toward over-damped denominators, sometimes badly enough to strand
    // the local search. A second start anchors the denominator at the
    // Euler double integrator with its simulation-optimal numerator.
    let (na1, na2) = numerator_for_fixed_den((-2.0, 1.0), &u, &h, log.dt());
    let theta_anchor = [na1, na2, -2.0, 1.0];

    let mut best = (theta1, score1);
    for start in [theta1, theta_anchor] {
        let begin = objective(&start);
        let (theta, score) = refine_simplex(&objective, start, begin);
        if score < best.1 {
            best = (theta, score);
        }
    }
    let (model, score) = if best.1 < score1 {
        (model_from_theta(&best.0, log.dt()), best.1)
    } else {
        (stage1, score1)
    };

    let predicted = free_run(&model, &u, h_raw[0]);
    let residuals: Vec<f64> = predicted.iter().zip(&h_raw).map(|(p, o)| p - o).collect();
    Ok(FitReport {
        model,
        nrmsae: score,
        rmsae: validate_model(&model, log),
        predicted,
        residuals,
    })
}

fn model_from_theta(theta: &[f64; 4], dt: f64) -> PlantModel {
    PlantModel {
        num: (theta[0], theta[1]),
        den: (theta[2], theta[3]),
        dt,
    }
}

/// Best (a1, a2) in the free-run sense for a fixed denominator. The
/// prediction is linear in the numerator: `pred = ic + a1*b1 + a2*b2` with
/// `b1`, `b2` the zero-state responses to the delayed commands, so this is
/// a 2x2 least-squares problem.
fn numerator_for_fixed_den(den: (f64, f64), u: &[f64], h: &[f64], dt: f64) -> (f64, f64) {
    let ic = free_run(
        &PlantModel {
            num: (0.0, 0.0),
            den,
            dt,
        },
        u,
        h[0],
    );
    let with_a1 = free_run(
        &PlantModel {
            num: (1.0, 0.0),
            den,
            dt,
        },
        u,
        h[0],
    );
    let with_a2 = free_run(
        &PlantModel {
            num: (0.0, 1.0),
            den,
            dt,
        },
        u,
        h[0],
    );
    let b1: Vec<f64> = with_a1.iter().zip(&ic).map(|(p, c)| p - c).collect();
    let b2: Vec<f64> = with_a2.iter().zip(&ic).map(|(p, c)| p - c).collect();

    let (mut s11, mut s12, mut s22, mut t1, mut t2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..h.len() {
        let r = h[k] - ic[k];
        s11 += b1[k] * b1[k];
        s12 += b1[k] * b2[k];
        s22 += b2[k] * b2[k];
        t1 += b1[k] * r;
        t2 += b2[k] * r;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() < 1e-12 * (s11 * s22).max(1e-300) {
        // Degenerate basis (e.g. constant commands); fall back to a scalar
        // fit split evenly across both taps.
        let scale = (t1 + t2) / (s11 + 2.0 * s12 + s22).max(1e-300);
        return (scale, scale);
    }
    ((s22 * t1 - s12 * t2) / det, (s11 * t2 - s12 * t1) / det)
}

/// Stage 1: solve `h_k = -d1 h_{k-1} - d2 h_{k-2} + a1 u_{k-1} + a2 u_{k-2}`
/// for (a1, a2, d1, d2) by least squares over all usable rows.
fn equation_error_fit(u: &[f64], h: &[f64], dt: f64) -> Result<PlantModel, SysIdError> {
    let n = h.len();
    let rows = n - 2;
    let mut design = DMatrix::zeros(rows, 4);
    let mut target = DVector::zeros(rows);
    for k in 2..n {
        let r = k - 2;
        design[(r, 0)] = u[k - 1];
        design[(r, 1)] = u[k - 2];
        design[(r, 2)] = -h[k - 1];
        design[(r, 3)] = -h[k - 2];
        target[r] = h[k];
    }
    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    let tol = smax * 1e-10;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    if rank < 4 {
        return Err(SysIdError::DegenerateData);
    }
    let theta = svd
        .solve(&target, tol)
        .map_err(|_| SysIdError::DegenerateData)?;
    Ok(PlantModel {
        num: (theta[0], theta[1]),
        den: (theta[2], theta[3]),
        dt,
    })
}

/// Simplex refinement with restarts: each round rebuilds a fresh simplex
/// around the best point seen, at a smaller scale. Restarting recovers from
/// collapsed simplexes, which this objective provokes — the free-run score
/// is extremely sensitive to the denominator near its integrating pole.
fn refine_simplex<F: Fn(&[f64; 4]) -> f64>(
    f: &F,
    start: [f64; 4],
    start_score: f64,
) -> ([f64; 4], f64) {
    let mut best = (start, start_score);
    for scale in [0.1, 0.03, 0.01, 0.003, 0.001] {
        let (theta, score) = nelder_mead(f, best.0, scale, 800);
        if score < best.1 {
            best = (theta, score);
        }
    }
    best
}

/// Plain Nelder-Mead over 4 parameters; returns the best vertex ever seen.
fn nelder_mead<F: Fn(&[f64; 4]) -> f64>(
    f: F,
    start: [f64; 4],
    step_scale: f64,
    max_iters: usize,
) -> ([f64; 4], f64) {
    const ALPHA: f64 = 1.0; // reflection
    const GAMMA: f64 = 2.0; // expansion
    const RHO: f64 = 0.5; // contraction
    const SIGMA: f64 = 0.5; // shrink

    let mut simplex: Vec<([f64; 4], f64)> = Vec::with_capacity(5);
    simplex.push((start, f(&start)));
    for i in 0..4 {
        let mut v = start;
        let step = (v[i].abs() * step_scale).max(1e-7);
        v[i] += step;
        simplex.push((v, f(&v)));
    }

    let mut best = simplex[0];
    for _ in 0..max_iters {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("objective is never NaN"));
        if simplex[0].1 < best.1 {
            best = simplex[0];
        }
        if simplex[4].1 - simplex[0].1 < 1e-14 {
            break;
        }

        let mut centroid = [0.0; 4];
        for (v, _) in &simplex[..4] {
            for i in 0..4 {
                centroid[i] += v[i] / 4.0;
            }
        }
        let worst = simplex[4];
        let reflect = add_scaled(&centroid, &worst.0, ALPHA);
        let fr = f(&reflect);

        if fr < simplex[0].1 {
            let expand = add_scaled(&centroid, &worst.0, GAMMA);
            let fe = f(&expand);
            simplex[4] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[3].1 {
            simplex[4] = (reflect, fr);
        } else {
            let contract = if fr < worst.1 {
                add_scaled(&centroid, &worst.0, RHO * ALPHA)
            } else {
                add_scaled(&centroid, &worst.0, -RHO)
            };
            let fc = f(&contract);
            if fc < worst.1.min(fr) {
                simplex[4] = (contract, fc);
            } else {
                let anchor = simplex[0].0;
                for entry in simplex.iter_mut().skip(1) {
                    for i in 0..4 {
                        entry.0[i] = anchor[i] + SIGMA * (entry.0[i] - anchor[i]);
                    }
                    entry.1 = f(&entry.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("objective is never NaN"));
    if simplex[0].1 < best.1 {
        best = simplex[0];
    }
    best
}

/// `centroid + scale * (centroid - worst)`.
fn add_scaled(centroid: &[f64; 4], worst: &[f64; 4], scale: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = centroid[i] + scale * (centroid[i] - worst[i]);
    }
    out
}

/// Command excitation shapes for synthetic flight logs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Excitation {
    /// Fresh uniform command every sample.
    White,
    /// Piecewise-constant commands held for `hold_seconds`, like a human
    /// driving the throttle around.
    RandomSteps { hold_seconds: f64 },
}

/// Simulate the model under random commands and return a flight log; the
/// altitude column carries additive Gaussian noise of `noise_sigma`.
pub fn generate_log(
    model: &PlantModel,
    u_max: f64,
    excitation: Excitation,
    duration_seconds: f64,
    noise_sigma: f64,
    h0: f64,
    seed: u64,
) -> FlightLog {
    let dt = model.dt;
    let n = (duration_seconds / dt).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut commands = Vec::with_capacity(n);
    match excitation {
        Excitation::White => {
            for _ in 0..n {
                commands.push(rng.gen_range(-u_max..=u_max));
            }
        }
        Excitation::RandomSteps { hold_seconds } => {
            let hold = (hold_seconds / dt).round().max(1.0) as usize;
            while commands.len() < n {
                let level = rng.gen_range(-u_max..=u_max);
                for _ in 0..hold.min(n - commands.len()) {
                    commands.push(level);
                }
            }
        }
    }

    let mut rows = Vec::with_capacity(n);
    let mut state = PlantState::at_altitude(h0);
    let mut h_true = h0;
    for (k, &u) in commands.iter().enumerate() {
        let z: f64 = rng.sample(StandardNormal);
        rows.push(LogRow {
            t: k as f64 * dt,
            u,
            h: h_true + noise_sigma * z,
        });
        let (next, h) = model.step(&state, u).expect("finite simulation");
        state = next;
        h_true = h;
    }
    FlightLog::new(rows).expect("generated log is uniform by construction")
}
