//! Simulate the built-in scene and list each pair's contact transitions.
//!
//! cargo run --example kinematic_scene

use contactlab::experiment::ExperimentConfig;
use contactlab::pipeline::simulate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scene = ExperimentConfig::default().load_scene()?;
    let series = simulate(&scene)?;
    println!("{} blocks, {} steps, {} observed pairs", scene.blocks.len(), scene.steps, scene.pairs.len());
    for &[a, b] in &scene.pairs {
        print!("pair ({a}, {b}):");
        let mut last = None;
        for frame in &series.frames {
            let s = frame.state(a, b).expect("every pair is classified");
            if last != Some(s) {
                print!("  t={} -> {s}", frame.t);
                last = Some(s);
            }
        }
        println!();
    }
    let samples = series.samples()?;
    let mut counts = [0usize; 4];
    for s in &samples {
        counts[s.label.code() as usize] += 1;
    }
    println!("{} samples; per state {counts:?}", samples.len());
    Ok(())
}
