//! Train the 3x3 map on gravity-center features and print its label grid.
//!
//! cargo run --example som_contact_map

use contactlab::experiment::{generate, som_labels_csv, train_som, ExperimentConfig};
use contactlab::pipeline::{evaluate, SomOnFeatures};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::default();
    let scene = cfg.load_scene()?;
    let data = generate(&scene, &cfg.dataset, 42)?.dataset;
    let run = train_som(&data, &cfg.som, 42)?;

    println!("neuron labels (row i, column j):");
    for i in 0..run.grid.nx() {
        let row: Vec<String> = (0..run.grid.ny()).map(|j| run.grid.label(i, j).unwrap().to_string()).collect();
        println!("  {}", row.join(" "));
    }
    print!("\n{}", som_labels_csv(&run.grid, &run.labels));
    let check = evaluate(&SomOnFeatures(&run.grid), &data.check)?;
    println!("\ntrain accuracy {:.3}, check accuracy {:.3}", run.train.accuracy, check.accuracy);
    Ok(())
}
