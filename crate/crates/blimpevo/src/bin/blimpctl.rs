//! Thin command-line front end over the blimpevo library.
//!
//! Exit codes: 0 success; 1 runtime failure (simulation diverged,
//! degenerate data, write errors); 2 usage error (bad flags, missing input
//! files, invalid config).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use blimpevo::config::Config;
use blimpevo::controllers::{AltitudeController, HybridController, PidController};
use blimpevo::evolution::{self, Checkpoint, EvolutionConfig};
use blimpevo::genome::{parse_genome_text, write_genome_text, GenomeKind};
use blimpevo::harness::{
    compare_trajectories, read_trajectory_csv, run_waypoint_eval, write_trajectory_csv,
    WaypointPlan,
};
use blimpevo::plant::{LinearPlant, PlantModel};
use blimpevo::sysid::{fit_model, generate_log, Excitation, FlightLog};

#[derive(Parser)]
#[command(
    name = "blimpctl",
    version,
    about = "Evolve and evaluate blimp altitude controllers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a controller population against the simulated plant.
    Evolve(EvolveArgs),
    /// Track the waypoint plan with one controller and log the trajectory.
    Eval(EvalArgs),
    /// Fit plant coefficients from a flight log CSV.
    Sysid(SysidArgs),
    /// Compare PID, ANN and SNN trajectory CSVs from one plan.
    Compare(CompareArgs),
    /// Generate a synthetic flight log.
    GenLog(GenLogArgs),
}

#[derive(Args)]
struct EvolveArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Random seed; overrides [evolution].seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Controller family to evolve; overrides [evolution].controller.
    #[arg(long)]
    controller: Option<ControllerKind>,
    /// Generation count override.
    #[arg(long)]
    generations: Option<usize>,
    /// Population size override.
    #[arg(long)]
    pop_size: Option<usize>,
    /// Output directory for logs, hall-of-fame genomes and checkpoints.
    #[arg(long, default_value = "evolve-out")]
    out_dir: PathBuf,
    /// Resume from a checkpoint JSON written by a previous run.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Worker threads for fitness evaluation (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Episode sets used for the final hall-of-fame reevaluation.
    #[arg(long, default_value_t = 5)]
    reeval_sets: usize,
    /// Skip per-generation checkpoint files.
    #[arg(long)]
    no_checkpoints: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Controller to run.
    #[arg(long)]
    controller: EvalController,
    /// Genome text file (required for ann/snn).
    #[arg(long)]
    genome: Option<PathBuf>,
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Random seed for sensor noise.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trajectory CSV output path.
    #[arg(long, default_value = "trajectory.csv")]
    out: PathBuf,
    /// Wrap the network with the parallel PD from [controller.ann/snn].
    #[arg(long)]
    hybrid: bool,
    /// Waypoint plan as "alt x hold" pairs, e.g. "3x60,2x60,1x60".
    #[arg(long)]
    plan: Option<String>,
    /// Sensor noise sigma override, m.
    #[arg(long)]
    noise_sigma: Option<f64>,
    /// Run measurements through the median/average cascade.
    #[arg(long)]
    filters: bool,
}

#[derive(Args)]
struct SysidArgs {
    /// Flight log CSV (t,u,h).
    #[arg(long)]
    log: PathBuf,
    /// Write the fit report as structured text.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write per-sample residuals as CSV.
    #[arg(long)]
    residuals: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// PID trajectory CSV (the 100% effort reference).
    #[arg(long)]
    pid: PathBuf,
    /// ANN trajectory CSV.
    #[arg(long)]
    ann: PathBuf,
    /// SNN trajectory CSV.
    #[arg(long)]
    snn: PathBuf,
    /// Also write the comparison as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenLogArgs {
    /// Output CSV path.
    #[arg(long, default_value = "flight_log.csv")]
    out: PathBuf,
    /// Log duration, seconds.
    #[arg(long, default_value_t = 300.0)]
    duration: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Additive Gaussian noise sigma on the altitude column, m.
    #[arg(long, default_value_t = 0.0)]
    noise_sigma: f64,
    /// Plant the log is generated from.
    #[arg(long, value_enum, default_value_t = GenModel::Fitted)]
    model: GenModel,
    /// TOML configuration file (plant coefficients for --model config).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Command excitation shape.
    #[arg(long, value_enum, default_value_t = GenExcitation::RandomSteps)]
    excitation: GenExcitation,
    /// Hold time for random-steps excitation, seconds.
    #[arg(long, default_value_t = 2.0)]
    hold_seconds: f64,
    /// Initial altitude, m.
    #[arg(long, default_value_t = 0.0)]
    h0: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ControllerKind {
    Snn,
    Ann,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalController {
    Pid,
    Ann,
    Snn,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenModel {
    Fitted,
    Theoretical,
    Config,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenExcitation {
    White,
    RandomSteps,
}

enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => m,
        }
    }

    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("blimpctl: {}", e.message());
        std::process::exit(e.code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Evolve(args) => cmd_evolve(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Sysid(args) => cmd_sysid(args),
        Command::Compare(args) => cmd_compare(args),
        Command::GenLog(args) => cmd_gen_log(args),
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<Config, CliError> {
    match path {
        None => Ok(Config::default()),
        Some(p) => {
            if !p.exists() {
                return Err(usage(format!("config file not found: {}", p.display())));
            }
            Config::load(p).map_err(usage)
        }
    }
}

fn read_input(path: &Path, what: &str) -> Result<String, CliError> {
    if !path.exists() {
        return Err(usage(format!("{what} not found: {}", path.display())));
    }
    fs::read_to_string(path).map_err(|e| runtime(format!("{what} unreadable: {e}")))
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(runtime)?;
        }
    }
    fs::write(path, bytes).map_err(runtime)
}

fn cmd_evolve(args: EvolveArgs) -> Result<(), CliError> {
    let config = load_config(&args.config)?;
    let mut evo: EvolutionConfig = config.evolution_config().map_err(usage)?;
    if let Some(seed) = args.seed {
        evo.seed = seed;
    }
    if let Some(kind) = args.controller {
        evo.kind = match kind {
            ControllerKind::Snn => GenomeKind::Snn,
            ControllerKind::Ann => GenomeKind::Ann,
        };
    }
    if let Some(generations) = args.generations {
        evo.n_generations = generations;
    }
    if let Some(pop) = args.pop_size {
        evo.pop_size = pop;
    }
    evo.validate().map_err(usage)?;

    let start = match &args.resume {
        None => Checkpoint::fresh(&evo),
        Some(path) => {
            let text = read_input(path, "checkpoint")?;
            let mut checkpoint: Checkpoint =
                serde_json::from_str(&text).map_err(|e| runtime(format!("bad checkpoint: {e}")))?;
            // Allow extending a finished run.
            if let Some(generations) = args.generations {
                checkpoint.config.n_generations = generations;
            }
            checkpoint
        }
    };
    let evo = start.config.clone();

    let out_dir = &args.out_dir;
    let checkpoint_dir = out_dir.join("checkpoints");
    fs::create_dir_all(&checkpoint_dir).map_err(runtime)?;

    let write_checkpoints = !args.no_checkpoints;
    let run_evolution = || {
        evolution::resume(start, |cp| {
            let stats = cp.log.last().expect("one row per generation");
            println!(
                "gen {:>4}  best {:.4}  mean {:.4}  std {:.4}",
                stats.generation, stats.best, stats.mean, stats.std
            );
            if write_checkpoints {
                let path = checkpoint_dir.join(format!("gen_{:05}.json", cp.generation));
                let json = serde_json::to_vec_pretty(cp).expect("checkpoint serializes");
                if let Err(e) = fs::write(&path, json) {
                    eprintln!("blimpctl: checkpoint write failed: {e}");
                }
            }
        })
    };
    let outcome = match args.threads {
        None => run_evolution(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(runtime)?
            .install(run_evolution),
    }
    .map_err(runtime)?;

    let mut log_csv = String::from("generation,best,mean,std,evaluations\n");
    for row in &outcome.log {
        log_csv.push_str(&format!(
            "{},{},{},{},{}\n",
            row.generation, row.best, row.mean, row.std, row.evaluations
        ));
    }
    write_output(&out_dir.join("generations.csv"), log_csv.as_bytes())?;

    let ranked = evolution::reevaluate_hof(&outcome.hof, &evo, args.reeval_sets, evo.seed);
    let hof_dir = out_dir.join("hof");
    fs::create_dir_all(&hof_dir).map_err(runtime)?;
    let mut summary = String::from("rank,id,generation_born,single_fitness,reeval_mean_rmsae\n");
    for (rank, member) in ranked.iter().enumerate() {
        summary.push_str(&format!(
            "{},{},{},{},{}\n",
            rank + 1,
            member.id,
            member.generation_born,
            member.single_fitness,
            member.mean_fitness
        ));
        write_output(
            &hof_dir.join(format!("rank_{}.genome.txt", rank + 1)),
            write_genome_text(&member.genome).as_bytes(),
        )?;
    }
    write_output(&hof_dir.join("summary.csv"), summary.as_bytes())?;
    if let Some(best) = ranked.first() {
        write_output(
            &out_dir.join("best.genome.txt"),
            write_genome_text(&best.genome).as_bytes(),
        )?;
        println!(
            "best {} genome: single-set rmsae {:.4} m, {}-set mean {:.4} m",
            evo.kind, best.single_fitness, args.reeval_sets, best.mean_fitness
        );
    }
    println!("wrote {}", out_dir.display());
    Ok(())
}

fn parse_plan(text: &str) -> Result<WaypointPlan, CliError> {
    let mut waypoints = Vec::new();
    for pair in text.split(',') {
        let (sp, hold) = pair
            .split_once(['x', 'X'])
            .ok_or_else(|| usage(format!("bad plan entry '{pair}', expected ALTxHOLD")))?;
        let sp: f64 = sp
            .trim()
            .parse()
            .map_err(|_| usage(format!("bad altitude '{sp}'")))?;
        let hold: f64 = hold
            .trim()
            .parse()
            .map_err(|_| usage(format!("bad hold '{hold}'")))?;
        waypoints.push((sp, hold));
    }
    let plan = WaypointPlan { waypoints };
    plan.validate().map_err(usage)?;
    Ok(plan)
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let config = load_config(&args.config)?;
    let plant_model = config.plant_model().map_err(usage)?;
    let mut radar = config.radar_model().map_err(usage)?;
    if let Some(sigma) = args.noise_sigma {
        radar.noise_sigma = sigma;
    }
    let limits = config.limits().map_err(usage)?;
    let plan = match &args.plan {
        Some(text) => parse_plan(text)?,
        None => WaypointPlan::default(),
    };
    let apply_filters = args.filters || config.radar.apply_filters;

    let mut controller: Box<dyn AltitudeController> = match args.controller {
        EvalController::Pid => {
            if args.hybrid {
                return Err(usage("--hybrid applies to network controllers only"));
            }
            Box::new(PidController::new(config.pid_params(), limits))
        }
        EvalController::Ann | EvalController::Snn => {
            let path = args
                .genome
                .as_ref()
                .ok_or_else(|| usage("--genome is required for network controllers"))?;
            let text = read_input(path, "genome file")?;
            let genome = parse_genome_text(&text).map_err(runtime)?;
            let wanted = match args.controller {
                EvalController::Ann => GenomeKind::Ann,
                _ => GenomeKind::Snn,
            };
            if genome.kind() != wanted {
                return Err(runtime(format!(
                    "genome file holds a {} genome but --controller {} was given",
                    genome.kind(),
                    wanted
                )));
            }
            let net = genome.build_controller(limits);
            if args.hybrid {
                let (pd_kp, pd_kd) = config.hybrid_gains(wanted);
                Box::new(HybridController::new(
                    net,
                    pd_kp,
                    pd_kd,
                    plant_model.dt,
                    limits,
                ))
            } else {
                net
            }
        }
    };

    let mut plant = LinearPlant::new(plant_model);
    let report = run_waypoint_eval(
        controller.as_mut(),
        &mut plant,
        &radar,
        &plan,
        plant_model.dt,
        args.seed,
        apply_filters,
    )
    .map_err(runtime)?;

    let mut csv = Vec::new();
    write_trajectory_csv(&report.trajectory, &mut csv).map_err(runtime)?;
    write_output(&args.out, &csv)?;

    println!("rmsae_m {}", report.rmsae);
    println!("control_effort_v {}", report.control_effort);
    println!("pd_fraction_pct {}", report.pd_fraction_pct);
    println!("steps {}", report.trajectory.len());
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_sysid(args: SysidArgs) -> Result<(), CliError> {
    let text = read_input(&args.log, "flight log")?;
    let log = FlightLog::read_csv(text.as_bytes()).map_err(runtime)?;
    let report = fit_model(&log).map_err(runtime)?;

    print!("{}", report.to_text());
    if let Some(path) = &args.report {
        write_output(path, report.to_text().as_bytes())?;
    }
    if let Some(path) = &args.residuals {
        let mut csv = Vec::new();
        report.write_residual_csv(&log, &mut csv).map_err(runtime)?;
        write_output(path, &csv)?;
    }
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let mut trajectories = Vec::new();
    for (path, what) in [
        (&args.pid, "pid trajectory"),
        (&args.ann, "ann trajectory"),
        (&args.snn, "snn trajectory"),
    ] {
        let text = read_input(path, what)?;
        trajectories.push(read_trajectory_csv(text.as_bytes()).map_err(runtime)?);
    }
    let table = compare_trajectories(&trajectories[0], &trajectories[1], &trajectories[2])
        .map_err(runtime)?;
    print!("{table}");
    if let Some(path) = &args.out {
        write_output(path, table.to_csv().as_bytes())?;
    }
    Ok(())
}

fn cmd_gen_log(args: GenLogArgs) -> Result<(), CliError> {
    let config = load_config(&args.config)?;
    let model = match args.model {
        GenModel::Fitted => PlantModel::fitted(),
        GenModel::Theoretical => {
            let fitted = PlantModel::fitted();
            PlantModel::theoretical(fitted.num.0, fitted.num.1)
        }
        GenModel::Config => config.plant_model().map_err(usage)?,
    };
    let u_max = config.limits().map_err(usage)?.u_max;
    let excitation = match args.excitation {
        GenExcitation::White => Excitation::White,
        GenExcitation::RandomSteps => Excitation::RandomSteps {
            hold_seconds: args.hold_seconds,
        },
    };
    if !args.duration.is_finite() || args.duration <= 0.0 {
        return Err(usage("--duration must be > 0"));
    }
    let log = generate_log(
        &model,
        u_max,
        excitation,
        args.duration,
        args.noise_sigma,
        args.h0,
        args.seed,
    );
    let mut csv = Vec::new();
    log.write_csv(&mut csv).map_err(runtime)?;
    write_output(&args.out, &csv)?;
    println!("wrote {} ({} samples)", args.out.display(), log.len());
    Ok(())
}
