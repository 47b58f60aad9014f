//! Train both surrogates, scan random windows over a snapshot and compare
//! each fused verdict with the exact classifier.
//!
//! cargo run --release --example window_fusion

use contactlab::experiment::{generate, train_nfis, train_som, ExperimentConfig, RuleTarget};
use contactlab::geometry::{classify_contact, DEFAULT_TOL};
use contactlab::pipeline::{random_windows, scan_windows, Domain};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::default();
    let scene = cfg.load_scene()?;
    let data = generate(&scene, &cfg.dataset, 42)?.dataset;
    let nfis = train_nfis(&data, &cfg.subclust, &cfg.nfis, RuleTarget::Count(13))?.model;
    let som = train_som(&data, &cfg.som, 42)?.grid;

    let step = 25;
    let blocks = scene.blocks_at(step);
    let domain = Domain::around(&blocks, 1.0)?;
    let windows = random_windows(&domain, 12, 4.0, 4.0, 7)?;
    println!("{:>16} {:>5} {:>4} {:>5} {:>6}", "window origin", "pair", "som", "nfis", "exact");
    for r in scan_windows(&windows, &blocks, &som, &nfis)? {
        let exact = match r.pair {
            Some((a, b)) => classify_contact(&blocks[a], &blocks[b], DEFAULT_TOL)?.to_string(),
            None => "-".into(),
        };
        let pair = r.pair.map_or("-".to_string(), |(a, b)| format!("{a}-{b}"));
        let flag = if r.fused.disagrees() { "  (disagree)" } else { "" };
        println!(
            "({:>6.2}, {:>5.2}) {pair:>5} {:>4} {:>5} {exact:>6}{flag}",
            r.window.origin.x, r.window.origin.y, r.som, r.nfis
        );
    }
    Ok(())
}
