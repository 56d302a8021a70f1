//! A short latency run: the service, 22 simulated endpoints and probes on
//! every message channel, all through the in-process broker.
//!
//! ```text
//! cargo run --release --example bench -- 20
//! ```

use fogmind::service::{run_bench, BenchOptions};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mut opts = BenchOptions::new(dir.path());
    opts.probes_per_kind = std::env::args()
        .nth(1)
        .map(|n| n.parse())
        .transpose()?
        .unwrap_or(10);
    let report = run_bench(opts).await?;
    println!("{report}");
    Ok(())
}
