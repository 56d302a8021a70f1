//! One Mamdani pass over the default rulebook for a hand-built snapshot:
//! rain, standing at the drawer and looking at it.
//!
//! ```text
//! cargo run --example infer
//! ```

use std::collections::{BTreeMap, BTreeSet};

use fogmind::fuzzy::{defuzzify_cog, infer, select_integer_output, InferenceOptions, ValueKind};
use fogmind::rulebook::default_rulebook;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rb = default_rulebook();
    let inputs = BTreeMap::from([
        ("rain".to_string(), 1.0),
        ("distance(object1)".to_string(), 2.5),
        ("heading(object1)".to_string(), 6.0),
        ("time".to_string(), 16.0),
    ]);
    let result = infer(&rb, &inputs, &InferenceOptions::default());
    for f in result.activated() {
        println!("rule {} strength {:.3}", f.rule, f.strength);
    }
    println!("{} rules skipped for missing inputs", result.skipped.len());
    // only outputs written by an activated rule; weak firings still shape others
    let written: BTreeSet<&str> = result
        .activated()
        .filter_map(|f| rb.rule(f.rule.id))
        .flat_map(|r| r.consequent.iter().map(|a| a.variable.as_str()))
        .collect();
    for var in rb.outputs().filter(|v| written.contains(v.name.as_str())) {
        let agg = &result.outputs[&var.name];
        match var.kind {
            ValueKind::Integer => println!("{} = {}", var.name, select_integer_output(agg, var)?),
            _ => println!("{} COG = {:.4}", var.name, defuzzify_cog(agg)?),
        }
    }
    Ok(())
}
