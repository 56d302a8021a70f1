//! Parses and validates a rulebook, then prints it in canonical form along
//! with its single-output decomposition.
//!
//! ```text
//! cargo run --example rulebook -- my_rules.txt
//! ```

use fogmind::rulebook::{default_rulebook_text, parse_rulebook, serialize};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => default_rulebook_text().to_string(),
    };
    let rb = parse_rulebook(&text)?;
    let canonical = serialize(&rb);
    print!("{canonical}");
    assert_eq!(parse_rulebook(&canonical)?, rb);

    let split = rb.decomposed();
    eprintln!(
        "{} variables, {} objects, {} rules ({} single-output parts)",
        rb.variables.len(),
        rb.objects.len(),
        rb.rules.len(),
        split.rules.len()
    );
    for r in split.rules.iter().filter(|r| r.part.is_some()) {
        eprintln!(
            "  {} -> {} is {}",
            r.reference(),
            r.consequent[0].variable,
            r.consequent[0].value
        );
    }
    Ok(())
}
