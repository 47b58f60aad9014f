//! Build a two-input, three-rule TSK model by hand and evaluate it.
//!
//! cargo run --example tsk_inference

use contactlab::anfis::{GaussianMf, TskModel, TskRule};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rule = |c: [f64; 2], sigma: f64, p: [f64; 3]| -> Result<TskRule, contactlab::anfis::AnfisError> {
        TskRule::new(vec![GaussianMf::new(c[0], sigma)?, GaussianMf::new(c[1], sigma)?], p.to_vec())
    };
    // y ~ 0 near the origin, ~ x1 + x2 near (1, 1), ~ 3 near (2, 0)
    let model = TskModel::new(vec![
        rule([0.0, 0.0], 0.5, [0.0, 0.0, 0.0])?,
        rule([1.0, 1.0], 0.5, [0.0, 1.0, 1.0])?,
        rule([2.0, 0.0], 0.5, [3.0, 0.0, 0.0])?,
    ])?;

    println!("{:>5} {:>5} {:>8} {:>6}", "x1", "x2", "y", "state");
    for x in [[0.0, 0.0], [0.5, 0.5], [1.0, 1.0], [1.5, 0.5], [2.0, 0.0], [9.0, 9.0]] {
        let y = model.infer(&x)?;
        println!("{:>5} {:>5} {y:>8.4} {:>6}", x[0], x[1], model.predict_contact_state(&x)?);
    }

    let g = model.premise_gradients(&[1.2, 0.8])?;
    println!("\ndy/dc at (1.2, 0.8):");
    for (k, row) in g.d_center.iter().enumerate() {
        println!("  rule {k}: {:>9.5} {:>9.5}", row[0], row[1]);
    }
    println!("\n{}", serde_json::to_string(&model.rules()[1])?);
    Ok(())
}
