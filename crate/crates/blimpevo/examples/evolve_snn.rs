//! Evolve a spiking controller and save the best genome.
//!
//! Small budget so it finishes in seconds; raise pop_size/n_generations
//! for real runs (the flight experiments used 100 x 300).

use blimpevo::evolution::{evolve, reevaluate_hof, EvolutionConfig};
use blimpevo::genome::{write_genome_text, GenomeKind};

fn main() {
    let config = EvolutionConfig {
        kind: GenomeKind::Snn,
        pop_size: 20,
        n_generations: 50,
        seed: 0,
        ..EvolutionConfig::default()
    };

    println!(
        "evolving {} SNN genomes for {} generations (seed {})",
        config.pop_size, config.n_generations, config.seed
    );
    let outcome = evolve(&config).unwrap();
    for stats in outcome.log.iter().step_by(10) {
        println!(
            "gen {:>3}: best {:.4} mean {:.4} std {:.4}",
            stats.generation, stats.best, stats.mean, stats.std
        );
    }

    println!("\nhall of fame (single-set fitness):");
    for member in outcome.hof.members() {
        println!(
            "  id {:>5} born gen {:>3}: {:.4} m",
            member.id, member.generation_born, member.fitness
        );
    }

    let ranked = reevaluate_hof(&outcome.hof, &config, 5, config.seed);
    println!("\nafter reevaluation on 5 fresh episode sets:");
    for (rank, member) in ranked.iter().enumerate() {
        println!(
            "  rank {}: id {:>5} single {:.4} m -> mean {:.4} m",
            rank + 1,
            member.id,
            member.single_fitness,
            member.mean_fitness
        );
    }

    let path = "best_snn.genome.txt";
    std::fs::write(path, write_genome_text(&ranked[0].genome)).unwrap();
    println!("\nsaved best genome to {path}");
}
