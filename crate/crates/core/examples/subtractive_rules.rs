//! Subtractive clustering on three point clouds, then a radius search for a
//! fixed rule count.
//!
//! cargo run --example subtractive_rules

use contactlab::subclust::{calibrate_radius, subtractive_cluster, SubclustParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut data = Vec::new();
    for (cx, cy) in [(0.0, 0.0), (3.0, 0.5), (1.0, 3.0)] {
        for _ in 0..40 {
            data.push(vec![cx + rng.gen_range(-0.4..0.4), cy + rng.gen_range(-0.4..0.4)]);
        }
    }

    let params = SubclustParams::default().with_radius(1.0);
    for c in subtractive_cluster(&data, &params)? {
        println!("center #{:<3} ({:>6.3}, {:>6.3})  potential {:.3}", c.index, c.center[0], c.center[1], c.potential);
    }

    println!("\nradius sweep:");
    for r in [0.2, 0.4, 0.6, 1.0, 1.5, 2.5] {
        println!("  r_a = {r:<4} -> {} centers", subtractive_cluster(&data, &params.with_radius(r))?.len());
    }

    for target in [5, 12] {
        let cal = calibrate_radius(&data, &params, target)?;
        println!(
            "\n{target} rules: radius {:.5} after {} clusterings (exact: {})",
            cal.radius, cal.iterations, cal.exact
        );
    }
    Ok(())
}
