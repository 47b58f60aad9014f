//! Fit a rule base to a nonlinear surface with hybrid training and print the
//! error trace.
//!
//! cargo run --example hybrid_training

use contactlab::anfis::{rmse, train_hybrid, HybridConfig};
use contactlab::scaling::Standardization;
use contactlab::subclust::{calibrate_radius, rules_from_clusters, SubclustParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut inputs = Vec::new();
    for i in 0..15 {
        for j in 0..15 {
            inputs.push(vec![i as f64 / 7.0 - 1.0, j as f64 / 7.0 - 1.0]);
        }
    }
    let targets: Vec<f64> = inputs.iter().map(|x| (2.0 * x[0]).sin() * x[1] + 0.5 * x[0] * x[0]).collect();

    let std = Standardization::fit(&inputs);
    let z = std.apply_all(&inputs);
    let cal = calibrate_radius(&z, &SubclustParams::default(), 9)?;
    let centers: Vec<Vec<f64>> = cal.centers.iter().map(|c| c.center.clone()).collect();
    let model = rules_from_clusters(&centers, cal.radius, std, &inputs, &targets)?;
    println!("{} rules, initial rmse {:.5}", model.rule_count(), rmse(&model, &inputs, &targets)?);

    let report = train_hybrid(&model, &inputs, &targets, HybridConfig { epochs: 40, lr: 1.0 })?;
    for (epoch, (lse, grad)) in report.lse_rmse.iter().zip(&report.gradient_rmse).enumerate().step_by(5) {
        println!("epoch {epoch:>3}: after LSE {lse:.5}, after gradient {grad:.5}");
    }
    println!("best rmse {:.5}, final learning rate {:.2e}", report.best_rmse, report.final_lr);
    Ok(())
}
