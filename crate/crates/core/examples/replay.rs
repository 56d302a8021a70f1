//! Records a scenario's input log, replays it offline and compares the
//! dispatch logs byte for byte.
//!
//! ```text
//! cargo run --example replay -- offline_caregiver
//! ```

use fogmind::service::{render_dispatch_log, replay_log, run_scenario, RunOptions};
use fogmind::sim::builtin_scenario;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "offline_caregiver".into());
    let dir = tempfile::tempdir()?;
    let input = dir.path().join("input.jsonl");
    let mut opts = RunOptions::new(builtin_scenario(&name)?, dir.path().join("live"));
    opts.input_log = Some(input.clone());
    let live = run_scenario(opts).await?;

    let replayed = replay_log(&input, &dir.path().join("replay"))?;
    let (a, b) = (
        render_dispatch_log(&live.lines),
        render_dispatch_log(&replayed),
    );
    println!(
        "{name}: {} input events, {} dispatch lines, replay {}",
        std::fs::read_to_string(&input)?.lines().count(),
        live.lines.len(),
        if a == b { "identical" } else { "DIFFERS" }
    );
    if a != b {
        std::process::exit(1);
    }
    Ok(())
}
