//! Runs a built-in scenario against an in-process broker and prints the
//! dispatch log.
//!
//! ```text
//! cargo run --example run_scenario -- plant_watering
//! ```

use fogmind::service::{run_scenario, RunOptions};
use fogmind::sim::builtin_scenario;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "rain_umbrella".into());
    let scenario = builtin_scenario(&name)?;
    let state = tempfile::tempdir()?;
    let report = run_scenario(RunOptions::new(scenario, state.path())).await?;
    for line in &report.lines {
        println!("{line}");
    }
    eprintln!(
        "{}: {} ticks, {} dispatch records, {} notifications delivered",
        report.scenario,
        report.ticks,
        report.lines.len(),
        report.notifications.len()
    );
    Ok(())
}
