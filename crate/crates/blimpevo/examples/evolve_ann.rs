//! Evolve the 1-3-2-1 tanh network controller.

use blimpevo::evolution::{evolve, reevaluate_hof, EvolutionConfig};
use blimpevo::genome::{write_genome_text, GenomeKind};

fn main() {
    let config = EvolutionConfig {
        kind: GenomeKind::Ann,
        pop_size: 20,
        n_generations: 50,
        seed: 2,
        ..EvolutionConfig::default()
    };

    let outcome = evolve(&config).unwrap();
    println!(
        "evolved {} generations; best single-set fitness {:.4} m",
        outcome.log.len(),
        outcome.hof.best().unwrap().fitness
    );

    let ranked = reevaluate_hof(&outcome.hof, &config, 5, config.seed);
    println!(
        "best after 5-set reevaluation: {:.4} m",
        ranked[0].mean_fitness
    );

    let path = "best_ann.genome.txt";
    std::fs::write(path, write_genome_text(&ranked[0].genome)).unwrap();
    println!("saved best genome to {path}");
}
