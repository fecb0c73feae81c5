//! Mutation-only evolutionary optimizer with tournament selection, a hall
//! of fame, and noisy episodic fitness evaluation.
//!
//! Every random decision is drawn from a ChaCha stream derived from the run
//! seed and a purpose tag, with one pre-split stream per fitness evaluation
//! derived from (seed, generation, index). Results are therefore identical
//! whether evaluations run sequentially or on a rayon pool, and a
//! checkpoint only needs the generation counter and id cursor to resume a
//! run exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controllers::ControlLimits;
use crate::genome::{GenomeKind, MutationRanges, NetGenome};
use crate::plant::{PlantModel, RadarModel};
use crate::sim::{simulate_tracking, Sensor};

const STREAM_INIT: u64 = 1 << 56;
const STREAM_EVAL: u64 = 2 << 56;
const STREAM_BREED: u64 = 3 << 56;
const STREAM_REEVAL_SET: u64 = 4 << 56;
const STREAM_REEVAL_NOISE: u64 = 5 << 56;

fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn eval_stream(generation: usize, index: usize) -> u64 {
    STREAM_EVAL | ((generation as u64) << 24) | index as u64
}

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("invalid evolution config: {0}")]
    InvalidConfig(&'static str),
}

/// Distribution an episode set is drawn from: `n_setpoints` reference
/// altitudes uniform in `setpoint_range`, each held for `hold_seconds`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTemplate {
    pub n_setpoints: usize,
    pub setpoint_range: (f64, f64),
    pub hold_seconds: f64,
    pub dt: f64,
    pub radar: RadarModel,
}

impl Default for EpisodeTemplate {
    fn default() -> Self {
        Self {
            n_setpoints: 10,
            setpoint_range: (0.0, 3.0),
            hold_seconds: 15.0,
            dt: 0.2,
            radar: RadarModel {
                quantization: 0.0,
                ..RadarModel::default()
            },
        }
    }
}

impl EpisodeTemplate {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> EpisodeSet {
        let (lo, hi) = self.setpoint_range;
        let setpoints = (0..self.n_setpoints)
            .map(|_| rng.gen_range(lo..=hi))
            .collect();
        EpisodeSet {
            setpoints,
            hold_seconds: self.hold_seconds,
            dt: self.dt,
            radar: self.radar,
        }
    }

    pub fn validate(&self) -> Result<(), EvolutionError> {
        if self.n_setpoints == 0 {
            return Err(EvolutionError::InvalidConfig("n_setpoints must be >= 1"));
        }
        if !self.hold_seconds.is_finite() || self.hold_seconds <= 0.0 {
            return Err(EvolutionError::InvalidConfig("hold_seconds must be > 0"));
        }
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(EvolutionError::InvalidConfig("episode dt must be > 0"));
        }
        if self.setpoint_range.0 > self.setpoint_range.1 {
            return Err(EvolutionError::InvalidConfig("setpoint range is inverted"));
        }
        Ok(())
    }
}

/// Concrete sequence of held setpoints forming one fitness rollout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSet {
    pub setpoints: Vec<f64>,
    pub hold_seconds: f64,
    pub dt: f64,
    pub radar: RadarModel,
}

impl EpisodeSet {
    /// Per-step reference altitude over the whole episode set.
    pub fn reference(&self) -> Vec<f64> {
        let steps = (self.hold_seconds / self.dt).round() as usize;
        let mut refs = Vec::with_capacity(steps * self.setpoints.len());
        for &sp in &self.setpoints {
            refs.extend(std::iter::repeat_n(sp, steps));
        }
        refs
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub kind: GenomeKind,
    pub pop_size: usize,
    pub tournament_size: usize,
    pub p_mut_individual: f64,
    pub p_mut_param: f64,
    pub n_generations: usize,
    pub hof_size: usize,
    pub mutation: MutationRanges,
    pub episode: EpisodeTemplate,
    pub plant: PlantModel,
    pub limits: ControlLimits,
    /// Apply the median/average cascade to simulated measurements during
    /// training. Off by default: training adds Gaussian noise only.
    pub apply_filters: bool,
    pub seed: u64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            kind: GenomeKind::Snn,
            pop_size: 100,
            tournament_size: 3,
            p_mut_individual: 0.4,
            p_mut_param: 0.6,
            n_generations: 300,
            hof_size: 5,
            mutation: MutationRanges::default(),
            episode: EpisodeTemplate::default(),
            plant: PlantModel::fitted(),
            limits: ControlLimits::default(),
            apply_filters: false,
            seed: 0,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), EvolutionError> {
        if self.pop_size == 0 {
            return Err(EvolutionError::InvalidConfig("pop_size must be >= 1"));
        }
        if self.tournament_size == 0 || self.tournament_size > self.pop_size {
            return Err(EvolutionError::InvalidConfig(
                "need pop_size >= tournament_size >= 1",
            ));
        }
        if !(0.0..=1.0).contains(&self.p_mut_individual) || !(0.0..=1.0).contains(&self.p_mut_param)
        {
            return Err(EvolutionError::InvalidConfig(
                "mutation probabilities must be in [0,1]",
            ));
        }
        if self.hof_size == 0 {
            return Err(EvolutionError::InvalidConfig("hof_size must be >= 1"));
        }
        self.episode.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub id: u64,
    pub generation_born: usize,
    pub genome: NetGenome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedIndividual {
    pub id: u64,
    pub generation_born: usize,
    pub genome: NetGenome,
    /// RMSAE, m. Non-finite rollouts are recorded as +inf, never NaN.
    pub fitness: f64,
}

impl EvaluatedIndividual {
    fn beats(&self, other: &Self) -> bool {
        (self.fitness, self.id) < (other.fitness, other.id)
    }
}

/// Archive of the best individuals ever seen, immune to selection loss.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HallOfFame {
    size: usize,
    members: Vec<EvaluatedIndividual>,
}

impl HallOfFame {
    pub fn new(size: usize) -> Self {
        Self {
            size,
            members: Vec::new(),
        }
    }

    pub fn update(&mut self, evaluated: &[EvaluatedIndividual]) {
        self.members.extend_from_slice(evaluated);
        self.members.sort_by(|a, b| {
            (a.fitness, a.generation_born, a.id)
                .partial_cmp(&(b.fitness, b.generation_born, b.id))
                .expect("fitness is never NaN")
        });
        self.members.truncate(self.size);
    }

    pub fn members(&self) -> &[EvaluatedIndividual] {
        &self.members
    }

    pub fn best(&self) -> Option<&EvaluatedIndividual> {
        self.members.first()
    }
}

/// Per-generation fitness summary; `evaluations` counts all evaluations
/// performed so far in the run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub std: f64,
    pub evaluations: u64,
}

/// Uniformly random population of `pop_size` genomes, every parameter drawn
/// from its class domain.
pub fn init_population(config: &EvolutionConfig) -> Vec<Individual> {
    let mut rng = rng_stream(config.seed, STREAM_INIT);
    (0..config.pop_size)
        .map(|i| Individual {
            id: i as u64,
            generation_born: 0,
            genome: NetGenome::random(config.kind, &mut rng),
        })
        .collect()
}

/// Tournament of `m` uniform draws with replacement; lowest fitness wins,
/// ties broken by lowest id.
pub fn tournament_select<'a, R: Rng + ?Sized>(
    evaluated: &'a [EvaluatedIndividual],
    m: usize,
    rng: &mut R,
) -> &'a EvaluatedIndividual {
    assert!(!evaluated.is_empty() && m >= 1);
    let mut best = &evaluated[rng.gen_range(0..evaluated.len())];
    for _ in 1..m {
        let candidate = &evaluated[rng.gen_range(0..evaluated.len())];
        if candidate.beats(best) {
            best = candidate;
        }
    }
    best
}

/// With probability `p_mut_individual` perturb the genome: each parameter
/// independently with probability `p_mut_param` receives a uniform additive
/// bump from its class range and is clamped back into its domain.
pub fn mutate<R: Rng + ?Sized>(
    genome: &NetGenome,
    config: &EvolutionConfig,
    rng: &mut R,
) -> NetGenome {
    let mut child = genome.clone();
    if !rng.gen_bool(config.p_mut_individual) {
        return child;
    }
    let ranges = config.mutation;
    child.for_each_param(|p, class| {
        if rng.gen_bool(config.p_mut_param) {
            let w = ranges.half_width(class);
            let (lo, hi) = class.domain();
            *p = (*p + rng.gen_range(-w..=w)).clamp(lo, hi);
        }
    });
    child
}

/// Closed-loop fitness: RMSAE on true altitude over the episode set, +inf
/// when the trajectory leaves the finite range. The rng is consumed only by
/// sensor noise, so with a zero noise sigma the result depends on the
/// genome and episode set alone.
pub fn evaluate<R: Rng + ?Sized>(
    genome: &NetGenome,
    episode: &EpisodeSet,
    plant: &PlantModel,
    limits: ControlLimits,
    apply_filters: bool,
    rng: &mut R,
) -> f64 {
    let mut controller = genome.build_controller(limits);
    let mut linear = crate::plant::LinearPlant::new(*plant);
    let mut sensor = Sensor::new(episode.radar, apply_filters);
    let refs = episode.reference();
    match simulate_tracking(
        controller.as_mut(),
        &mut linear,
        &mut sensor,
        rng,
        &refs,
        episode.dt,
        None,
    ) {
        Ok(stats) => stats.rmsae,
        Err(_) => f64::INFINITY,
    }
}

/// Everything `evolve` produces: the archive, the per-generation log, and
/// the final (unevaluated) offspring population.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveOutcome {
    pub hof: HallOfFame,
    pub log: Vec<GenerationStats>,
    pub population: Vec<Individual>,
    pub next_id: u64,
    pub evaluations: u64,
}

/// State capture at a generation boundary, sufficient for exact resume.
///
/// The "rng cursor" is implicit: all streams are re-derived from
/// (seed, generation, index), so the generation counter and id cursor fully
/// locate the run's randomness.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config: EvolutionConfig,
    /// Next generation index to evaluate.
    pub generation: usize,
    pub population: Vec<Individual>,
    pub hof: HallOfFame,
    pub next_id: u64,
    pub evaluations: u64,
    pub log: Vec<GenerationStats>,
}

impl Checkpoint {
    pub fn fresh(config: &EvolutionConfig) -> Self {
        Self {
            config: config.clone(),
            generation: 0,
            population: init_population(config),
            hof: HallOfFame::new(config.hof_size),
            next_id: config.pop_size as u64,
            evaluations: 0,
            log: Vec::new(),
        }
    }
}

/// Run `init -> [evaluate -> update hall of fame -> select -> mutate]` for
/// `n_generations`.
pub fn evolve(config: &EvolutionConfig) -> Result<EvolveOutcome, EvolutionError> {
    evolve_observed(config, |_| {})
}

/// `evolve` with a per-generation observer, called after breeding with the
/// checkpointable state for the *next* generation.
pub fn evolve_observed(
    config: &EvolutionConfig,
    observer: impl FnMut(&Checkpoint),
) -> Result<EvolveOutcome, EvolutionError> {
    config.validate()?;
    resume(Checkpoint::fresh(config), observer)
}

/// Continue a run from a checkpoint; produces exactly the states the
/// uninterrupted run would have produced.
pub fn resume(
    start: Checkpoint,
    mut observer: impl FnMut(&Checkpoint),
) -> Result<EvolveOutcome, EvolutionError> {
    let config = start.config.clone();
    config.validate()?;

    let mut population = start.population;
    let mut hof = start.hof;
    let mut log = start.log;
    let mut next_id = start.next_id;
    let mut evaluations = start.evaluations;

    for generation in start.generation..config.n_generations {
        let fitnesses: Vec<f64> = population
            .par_iter()
            .enumerate()
            .map(|(index, individual)| {
                let mut rng = rng_stream(config.seed, eval_stream(generation, index));
                let episode = config.episode.sample(&mut rng);
                evaluate(
                    &individual.genome,
                    &episode,
                    &config.plant,
                    config.limits,
                    config.apply_filters,
                    &mut rng,
                )
            })
            .collect();

        let evaluated: Vec<EvaluatedIndividual> = population
            .iter()
            .zip(&fitnesses)
            .map(|(ind, &fitness)| EvaluatedIndividual {
                id: ind.id,
                generation_born: ind.generation_born,
                genome: ind.genome.clone(),
                fitness,
            })
            .collect();

        hof.update(&evaluated);
        evaluations += population.len() as u64;

        let n = fitnesses.len() as f64;
        let best = fitnesses.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = fitnesses.iter().sum::<f64>() / n;
        let std = (fitnesses
            .iter()
            .map(|f| (f - mean) * (f - mean))
            .sum::<f64>()
            / n)
            .sqrt();
        log.push(GenerationStats {
            generation,
            best,
            mean,
            std,
            evaluations,
        });

        let mut breed_rng = rng_stream(config.seed, STREAM_BREED | generation as u64);
        population = (0..config.pop_size)
            .map(|_| {
                let parent = tournament_select(&evaluated, config.tournament_size, &mut breed_rng);
                let genome = mutate(&parent.genome, &config, &mut breed_rng);
                let id = next_id;
                next_id += 1;
                Individual {
                    id,
                    generation_born: generation + 1,
                    genome,
                }
            })
            .collect();

        observer(&Checkpoint {
            config: config.clone(),
            generation: generation + 1,
            population: population.clone(),
            hof: hof.clone(),
            next_id,
            evaluations,
            log: log.clone(),
        });
    }

    Ok(EvolveOutcome {
        hof,
        log,
        population,
        next_id,
        evaluations,
    })
}

/// Hall-of-fame member with its robustness score: the mean RMSAE over the
/// reevaluation episode sets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedIndividual {
    pub id: u64,
    pub generation_born: usize,
    pub genome: NetGenome,
    pub single_fitness: f64,
    pub mean_fitness: f64,
}

/// Reevaluate archive members on `n_sets` freshly drawn episode sets and
/// rank them by mean RMSAE (ascending, ties by id).
///
/// All members see the same sets; noise streams are derived per
/// (member id, set index), so the ranking does not depend on processing
/// order.
pub fn reevaluate_hof(
    hof: &HallOfFame,
    config: &EvolutionConfig,
    n_sets: usize,
    seed: u64,
) -> Vec<RankedIndividual> {
    let sets: Vec<EpisodeSet> = (0..n_sets)
        .map(|s| {
            let mut rng = rng_stream(seed, STREAM_REEVAL_SET | s as u64);
            config.episode.sample(&mut rng)
        })
        .collect();
    reevaluate_with_sets(hof.members(), &sets, config, seed)
}

/// Reevaluation against caller-provided episode sets.
pub fn reevaluate_with_sets(
    members: &[EvaluatedIndividual],
    sets: &[EpisodeSet],
    config: &EvolutionConfig,
    seed: u64,
) -> Vec<RankedIndividual> {
    let mut ranked: Vec<RankedIndividual> = members
        .iter()
        .map(|member| {
            let total: f64 = sets
                .iter()
                .enumerate()
                .map(|(s, set)| {
                    let mut rng =
                        rng_stream(seed, STREAM_REEVAL_NOISE | (member.id << 24) | s as u64);
                    evaluate(
                        &member.genome,
                        set,
                        &config.plant,
                        config.limits,
                        config.apply_filters,
                        &mut rng,
                    )
                })
                .sum();
            RankedIndividual {
                id: member.id,
                generation_born: member.generation_born,
                genome: member.genome.clone(),
                single_fitness: member.fitness,
                mean_fitness: total / sets.len() as f64,
            }
        })
        .collect();
    ranked.sort_by(|a, b| {
        (a.mean_fitness, a.id)
            .partial_cmp(&(b.mean_fitness, b.id))
            .expect("fitness is never NaN")
    });
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand_chacha::ChaCha8Rng;

    fn small_config() -> EvolutionConfig {
        EvolutionConfig {
            pop_size: 8,
            n_generations: 4,
            episode: EpisodeTemplate {
                n_setpoints: 2,
                hold_seconds: 2.0,
                ..EpisodeTemplate::default()
            },
            seed: 42,
            ..EvolutionConfig::default()
        }
    }

    #[test]
    fn divergent_rollout_scores_positive_infinity() {
        // Constant full-throttle controller (ANN output bias beyond the
        // limit) against an unstable denominator.
        let mut g = crate::genome::AnnGenome::zeroed();
        g.b3 = 10.0;
        let genome = NetGenome::Ann(g);
        let unstable = PlantModel::new((1.0, 0.0), (-3.0, 2.0), 0.2).unwrap();
        let episode = EpisodeSet {
            setpoints: vec![1.0; 10],
            hold_seconds: 15.0,
            dt: 0.2,
            radar: RadarModel::ideal(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let fitness =
            evaluate(&genome, &episode, &unstable, ControlLimits::default(), false, &mut rng);
        assert_eq!(fitness, f64::INFINITY);
    }

    #[test]
    fn init_population_respects_domains_and_seed() {
        let mut config = EvolutionConfig {
            pop_size: 100,
            ..small_config()
        };
        config.kind = GenomeKind::Snn;
        let pop = init_population(&config);
        assert_eq!(pop.len(), 100);
        for ind in &pop {
            assert!(ind.genome.in_domain());
        }
        let again = init_population(&config);
        assert_eq!(pop, again);

        config.seed ^= 1;
        let different = init_population(&config);
        assert_ne!(pop, different);
    }

    #[test]
    fn single_member_population_still_evolves() {
        let config = EvolutionConfig {
            pop_size: 1,
            tournament_size: 1,
            ..small_config()
        };
        let outcome = evolve(&config).unwrap();
        assert_eq!(outcome.population.len(), 1);
        assert_eq!(outcome.log.len(), config.n_generations);
    }

    #[test]
    fn tournament_with_full_coverage_returns_global_best() {
        // Two members, M = 2: find a seed whose two draws cover both, then
        // the winner must be the global best.
        let members: Vec<EvaluatedIndividual> = [(0u64, 0.9), (1u64, 0.2)]
            .iter()
            .map(|&(id, fitness)| EvaluatedIndividual {
                id,
                generation_born: 0,
                genome: NetGenome::Snn(crate::genome::SnnGenome::zeroed()),
                fitness,
            })
            .collect();
        let mut found = false;
        for seed in 0..64 {
            let mut probe = ChaCha8Rng::seed_from_u64(seed);
            let draws: Vec<usize> = (0..2).map(|_| probe.gen_range(0..2)).collect();
            if draws.contains(&0) && draws.contains(&1) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let winner = tournament_select(&members, 2, &mut rng);
                assert_eq!(winner.id, 1);
                found = true;
                break;
            }
        }
        assert!(found, "no seed below 64 drew both members");
    }

    #[test]
    fn tournament_breaks_ties_by_lowest_id() {
        let members: Vec<EvaluatedIndividual> = (0..5)
            .map(|id| EvaluatedIndividual {
                id,
                generation_born: 0,
                genome: NetGenome::Snn(crate::genome::SnnGenome::zeroed()),
                fitness: 1.0,
            })
            .collect();
        for seed in 0..32 {
            let mut probe = ChaCha8Rng::seed_from_u64(seed);
            let drawn: Vec<usize> = (0..5).map(|_| probe.gen_range(0..5)).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let winner = tournament_select(&members, 5, &mut rng);
            assert_eq!(winner.id, *drawn.iter().min().unwrap() as u64);
        }
    }

    #[test]
    fn mutation_disabled_returns_identical_genome() {
        let config = EvolutionConfig {
            p_mut_individual: 0.0,
            ..EvolutionConfig::default()
        };
        let mut rng = rng_stream(7, STREAM_INIT);
        let genome = NetGenome::random(GenomeKind::Snn, &mut rng);
        let child = mutate(&genome, &config, &mut rng);
        assert_eq!(child, genome);
    }

    #[test]
    fn mutation_keeps_parameters_in_domain_and_clamps_at_bounds() {
        let config = EvolutionConfig {
            p_mut_individual: 1.0,
            p_mut_param: 1.0,
            ..EvolutionConfig::default()
        };
        let mut rng = rng_stream(3, STREAM_INIT);
        let mut saw_upper_clamp = false;
        for _ in 0..300 {
            let mut genome = NetGenome::random(GenomeKind::Snn, &mut rng);
            // Park thresholds near the top so upward bumps must clamp.
            if let NetGenome::Snn(g) = &mut genome {
                g.theta = [0.999; 5];
            }
            let child = mutate(&genome, &config, &mut rng);
            assert!(child.in_domain());
            if let NetGenome::Snn(g) = &child {
                if g.theta.contains(&1.0) {
                    saw_upper_clamp = true;
                }
            }
        }
        assert!(
            saw_upper_clamp,
            "no perturbation ever clamped to the domain edge"
        );
    }

    #[test]
    fn zero_noise_evaluation_is_pure() {
        let config = small_config();
        let mut rng = rng_stream(11, STREAM_INIT);
        let genome = NetGenome::random(GenomeKind::Snn, &mut rng);
        let episode = EpisodeSet {
            setpoints: vec![1.0, 2.5],
            hold_seconds: 3.0,
            dt: 0.2,
            radar: RadarModel::ideal(),
        };
        let mut r1 = ChaCha8Rng::seed_from_u64(100);
        let mut r2 = ChaCha8Rng::seed_from_u64(2000);
        let f1 = evaluate(
            &genome,
            &episode,
            &config.plant,
            config.limits,
            false,
            &mut r1,
        );
        let f2 = evaluate(
            &genome,
            &episode,
            &config.plant,
            config.limits,
            false,
            &mut r2,
        );
        assert_eq!(f1, f2);
    }

    #[test]
    fn zero_output_controller_scores_setpoint_rms() {
        let genome = NetGenome::Snn(crate::genome::SnnGenome::zeroed());
        let episode = EpisodeSet {
            setpoints: vec![3.0; 10],
            hold_seconds: 15.0,
            dt: 0.2,
            radar: RadarModel::ideal(),
        };
        let plant = PlantModel::theoretical(-0.969e-3, 1.019e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let fitness = evaluate(
            &genome,
            &episode,
            &plant,
            ControlLimits::default(),
            false,
            &mut rng,
        );
        assert_relative_eq!(fitness, 3.0, max_relative = 1e-12);
    }

    #[test]
    fn population_size_is_invariant_and_hof_monotone() {
        let config = small_config();
        let mut sizes = Vec::new();
        let outcome = evolve_observed(&config, |cp| sizes.push(cp.population.len())).unwrap();
        assert!(sizes.iter().all(|&n| n == config.pop_size));

        let mut best_so_far = f64::INFINITY;
        let mut running = Vec::new();
        for stats in &outcome.log {
            best_so_far = best_so_far.min(stats.best);
            running.push(best_so_far);
        }
        assert_eq!(outcome.hof.best().unwrap().fitness, best_so_far);
        assert!(running.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn same_seed_reproduces_log_and_hof_bit_exactly() {
        let config = small_config();
        let a = evolve(&config).unwrap();
        let b = evolve(&config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_thread_pool_matches_default_parallelism() {
        let config = small_config();
        let parallel = evolve(&config).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let serial = pool.install(|| evolve(&config).unwrap());
        assert_eq!(parallel, serial);
    }

    #[test]
    fn resume_from_checkpoint_matches_uninterrupted_run() {
        let config = small_config();
        let full = evolve(&config).unwrap();

        let mut mid: Option<Checkpoint> = None;
        let _ = evolve_observed(&config, |cp| {
            if cp.generation == 2 {
                mid = Some(cp.clone());
            }
        })
        .unwrap();
        let resumed = resume(mid.expect("checkpoint at generation 2"), |_| {}).unwrap();
        assert_eq!(full, resumed);
    }

    #[test]
    fn checkpoint_round_trips_through_json() {
        let config = small_config();
        let cp = Checkpoint::fresh(&config);
        let json = serde_json::to_string(&cp).unwrap();
        let back: Checkpoint = serde_json::from_str(&json).unwrap();
        assert_eq!(cp, back);
    }

    #[test]
    fn reevaluation_with_identical_noiseless_sets_matches_single_fitness() {
        let mut config = small_config();
        config.episode.radar = RadarModel::ideal();
        let set = EpisodeSet {
            setpoints: vec![0.5, 2.0, 1.0],
            hold_seconds: 4.0,
            dt: 0.2,
            radar: RadarModel::ideal(),
        };
        let mut rng = rng_stream(5, STREAM_INIT);
        let genome = NetGenome::random(GenomeKind::Snn, &mut rng);
        let mut noise = ChaCha8Rng::seed_from_u64(0);
        let single = evaluate(
            &genome,
            &set,
            &config.plant,
            config.limits,
            false,
            &mut noise,
        );
        let member = EvaluatedIndividual {
            id: 0,
            generation_born: 0,
            genome,
            fitness: single,
        };
        let ranked = reevaluate_with_sets(&[member], &vec![set; 5], &config, 999);
        assert_eq!(ranked.len(), 1);
        assert_relative_eq!(ranked[0].mean_fitness, single, max_relative = 1e-12);
    }

    #[test]
    fn reevaluation_ranking_is_order_invariant() {
        let config = small_config();
        let outcome = evolve(&config).unwrap();
        let forward = reevaluate_hof(&outcome.hof, &config, 3, 77);
        let mut reversed_members: Vec<EvaluatedIndividual> = outcome.hof.members().to_vec();
        reversed_members.reverse();
        let sets: Vec<EpisodeSet> = (0..3)
            .map(|s| {
                let mut rng = rng_stream(77, STREAM_REEVAL_SET | s as u64);
                config.episode.sample(&mut rng)
            })
            .collect();
        let reversed = reevaluate_with_sets(&reversed_members, &sets, &config, 77);
        assert_eq!(forward, reversed);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut config = small_config();
        config.tournament_size = config.pop_size + 1;
        assert!(config.validate().is_err());
        let mut config = small_config();
        config.p_mut_param = 1.5;
        assert!(config.validate().is_err());
        let mut config = small_config();
        config.hof_size = 0;
        assert!(config.validate().is_err());
    }
}
