//! Fuzzifies a few crisp readings against the default rulebook's labels.
//!
//! ```text
//! cargo run --example fuzzify -- distance 3.0
//! ```

use fogmind::fuzzy::DEFAULT_THRESHOLD;
use fogmind::rulebook::default_rulebook;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rb = default_rulebook();
    let mut args = std::env::args().skip(1);
    let queries: Vec<(String, f64)> = match (args.next(), args.next()) {
        (Some(v), Some(x)) => vec![(v, x.parse()?)],
        _ => vec![
            ("distance".into(), 3.0),
            ("distance".into(), 14.0),
            ("heading".into(), 35.0),
            ("temperature".into(), 31.0),
            ("time".into(), 16.5),
        ],
    };
    for (name, x) in queries {
        let var = rb.variable(&name).ok_or(format!("no variable `{name}`"))?;
        let degrees = var.fuzzify(x);
        let shown: Vec<String> = degrees
            .degrees
            .iter()
            .map(|(l, d)| format!("{l}={d:.3}"))
            .collect();
        println!(
            "{name} = {x} {}: {} -> {}",
            var.universe.unit,
            shown.join(" "),
            var.classify(x, DEFAULT_THRESHOLD).unwrap_or("(none)")
        );
    }
    Ok(())
}
