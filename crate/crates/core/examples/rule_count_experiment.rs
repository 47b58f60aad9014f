//! Compare 13-rule and 39-rule fuzzy models over several dataset seeds.
//!
//! cargo run --release --example rule_count_experiment

use contactlab::experiment::{generate, train_nfis, ExperimentConfig, RuleTarget};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::default();
    let scene = cfg.load_scene()?;
    println!("{:>5} {:>6} {:>9} {:>10} {:>9} {:>9}", "seed", "rules", "radius", "train rmse", "train acc", "check acc");
    for seed in 1..=5 {
        let data = generate(&scene, &cfg.dataset, seed)?.dataset;
        for m in [13, 39] {
            let r = train_nfis(&data, &cfg.subclust, &cfg.nfis, RuleTarget::Count(m))?.metrics;
            println!(
                "{seed:>5} {:>6} {:>9.5} {:>10.5} {:>9.3} {:>9.3}",
                r.rules, r.radius, r.best_train_rmse, r.train_accuracy, r.check_accuracy
            );
        }
    }
    Ok(())
}
