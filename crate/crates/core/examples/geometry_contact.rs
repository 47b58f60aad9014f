//! Classify a few hand-placed block pairs and show their separation.
//!
//! cargo run --example geometry_contact

use contactlab::geometry::{classify_contact, min_separation, Block, Point, DEFAULT_TOL};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = Block::rectangle(0, 0.0, 0.0, 2.0, 1.0)?;
    let diamond = |x: f64, y: f64| {
        Block::new(
            1,
            vec![Point::new(x, y), Point::new(x + 0.5, y + 0.5), Point::new(x, y + 1.0), Point::new(x - 0.5, y + 0.5)],
        )
    };
    let cases = [
        ("far apart", Block::rectangle(1, 4.0, 0.0, 5.0, 1.0)?),
        ("corner to corner", Block::rectangle(1, 2.0, 1.0, 3.0, 2.0)?),
        ("diamond tip on top edge", diamond(1.0, 1.0)?),
        ("resting on top", Block::rectangle(1, 0.5, 1.0, 1.5, 2.0)?),
        ("hovering 1 mm above", Block::rectangle(1, 0.5, 1.001, 1.5, 2.0)?),
    ];
    println!("{:<26} {:>12} {:>6}", "configuration", "separation", "state");
    for (name, other) in &cases {
        let state = classify_contact(&base, other, DEFAULT_TOL)?;
        println!("{name:<26} {:>12.6} {:>6}", min_separation(&base, other), state.code());
    }

    let sunk = Block::rectangle(1, 0.5, 0.9, 1.5, 2.0)?;
    match classify_contact(&base, &sunk, DEFAULT_TOL) {
        Ok(s) => println!("unexpected: {s}"),
        Err(e) => println!("sunk 0.1 m into the base: {e}"),
    }
    Ok(())
}
