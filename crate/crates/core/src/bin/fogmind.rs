use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use fogmind::qr::{qr_min_size, Condition, QrSizingParams};
use fogmind::rulebook::{parse_unchecked, validate, DEFAULT_RULEBOOK_SOURCE};
use fogmind::service::{
    clamp_rate, render_dispatch_log, replay_log, run_bench, run_scenario, serve, BenchOptions,
    RunOptions, ServeOptions, ServiceConfig,
};
use fogmind::sim::{builtin_scenario, load_scenario_file, BUILTIN_SCENARIOS};

#[derive(Parser)]
#[command(
    name = "fogmind",
    version,
    about = "Fuzzy decision service for an assistive smart home"
)]
struct Cli {
    /// Log filter, e.g. `info` or `fogmind=debug`.
    #[arg(long, global = true, env = "FOGMIND_LOG", default_value = "warn")]
    log: String,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scripted scenario in lockstep and print its dispatch log.
    Run(RunArgs),
    /// Serve live traffic from a broker until interrupted.
    Serve(ServeArgs),
    /// Re-drive a recorded input log and print or compare the dispatch log.
    Replay(ReplayArgs),
    /// Measure probe-to-device dispatch latency.
    Bench(BenchArgs),
    /// Rulebook tools.
    Rules {
        #[command(subcommand)]
        cmd: RulesCmd,
    },
    /// Minimum printed QR marker size.
    QrSize(QrArgs),
}

#[derive(Args)]
struct Common {
    /// Broker URL; an in-process broker is used when absent.
    #[arg(long, env = "FOGMIND_BROKER")]
    broker: Option<String>,
    /// Control rate in Hz, clamped to 0.5..=2.
    #[arg(long)]
    rate: Option<f64>,
    /// Rulebook file instead of the built-in one.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Service config as JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    state_dir: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Built-in scenario name or a scenario JSON file.
    #[arg(long)]
    scenario: String,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    input_log: Option<PathBuf>,
    #[arg(long)]
    dispatch_log: Option<PathBuf>,
    /// Serve console frames on this address.
    #[arg(long)]
    ws: Option<SocketAddr>,
    /// Keep virtual time in step with the wall clock.
    #[arg(long)]
    pace: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    input_log: Option<PathBuf>,
    #[arg(long)]
    dispatch_log: Option<PathBuf>,
    #[arg(long)]
    ws: Option<SocketAddr>,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    input: PathBuf,
    /// Dispatch log to compare against byte for byte.
    #[arg(long)]
    expect: Option<PathBuf>,
    /// Write the regenerated dispatch log here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    state_dir: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 50)]
    probes: usize,
    #[arg(long, default_value_t = 500)]
    interval_ms: u64,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum RulesCmd {
    /// Parse and validate a rulebook; the built-in one when no path is given.
    Check { path: Option<PathBuf> },
    /// Print the built-in rulebook.
    Show,
}

#[derive(Args)]
struct QrArgs {
    /// Maximum scanning distance, mm.
    #[arg(long, default_value_t = 300.0)]
    dscan: f64,
    /// Camera resolution, megapixels.
    #[arg(long, default_value_t = 12.0)]
    mp: f64,
    /// Field of view at the scanning distance, mm.
    #[arg(long, default_value_t = 340.0)]
    fov: f64,
    #[arg(long, default_value_t = 21)]
    modules: u32,
    #[arg(long, default_value_t = 10)]
    ppm: u32,
    #[arg(long)]
    low_light: bool,
    #[arg(long)]
    light_code: bool,
    #[arg(long)]
    off_angle: bool,
}

type Failure = Box<dyn std::error::Error>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .json()
        .with_writer(std::io::stderr)
        .with_env_filter(tracing_subscriber::EnvFilter::new(&cli.log))
        .init();
    let rt = tokio::runtime::Runtime::new().expect("tokio runtime");
    match rt.block_on(dispatch(cli.cmd)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("fogmind: {e}");
            ExitCode::FAILURE
        }
    }
}

async fn dispatch(cmd: Cmd) -> Result<ExitCode, Failure> {
    match cmd {
        Cmd::Run(a) => run(a).await,
        Cmd::Serve(a) => serve_live(a).await,
        Cmd::Replay(a) => replay(a),
        Cmd::Bench(a) => bench(a).await,
        Cmd::Rules { cmd } => rules(cmd),
        Cmd::QrSize(a) => qr(a),
    }
}

fn load_config(common: &Common) -> Result<ServiceConfig, Failure> {
    let mut cfg = match &common.config {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => ServiceConfig::default(),
    };
    if let Some(r) = common.rate {
        cfg.rate_hz = clamp_rate(r);
    }
    Ok(cfg)
}

fn load_rules(common: &Common) -> Result<String, Failure> {
    Ok(match &common.rules {
        Some(p) => std::fs::read_to_string(p)?,
        None => DEFAULT_RULEBOOK_SOURCE.to_string(),
    })
}

/// The given directory, or a scratch one that lives as long as the guard.
fn state_dir(given: &Option<PathBuf>) -> Result<(PathBuf, Option<tempfile::TempDir>), Failure> {
    match given {
        Some(p) => {
            std::fs::create_dir_all(p)?;
            Ok((p.clone(), None))
        }
        None => {
            let t = tempfile::tempdir()?;
            Ok((t.path().to_path_buf(), Some(t)))
        }
    }
}

async fn run(a: RunArgs) -> Result<ExitCode, Failure> {
    let scenario = if Path::new(&a.scenario).is_file() {
        load_scenario_file(Path::new(&a.scenario))?
    } else {
        builtin_scenario(&a.scenario).map_err(|e| {
            format!(
                "{e} (built-in: {})",
                BUILTIN_SCENARIOS
                    .iter()
                    .map(|(n, _)| *n)
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        })?
    };
    let (dir, _guard) = state_dir(&a.common.state_dir)?;
    let mut opts = RunOptions::new(scenario, dir);
    let mut cfg = load_config(&a.common)?;
    cfg.zones = opts.config.zones.clone();
    opts.config = cfg;
    opts.rulebook_text = load_rules(&a.common)?;
    opts.broker = a.common.broker.clone();
    opts.input_log = a.input_log;
    opts.dispatch_log = a.dispatch_log;
    opts.ws = a.ws;
    opts.pace = a.pace;
    let report = run_scenario(opts).await?;
    print!("{}", render_dispatch_log(&report.lines));
    eprintln!(
        "{}: {} ticks at {} ms, {} records, {} notifications delivered, mode {}",
        report.scenario,
        report.ticks,
        report.period_ms,
        report.lines.len(),
        report.notifications.len(),
        report.final_mode.as_str()
    );
    Ok(ExitCode::SUCCESS)
}

async fn serve_live(a: ServeArgs) -> Result<ExitCode, Failure> {
    let broker = a
        .common
        .broker
        .clone()
        .ok_or("serve needs --broker or FOGMIND_BROKER")?;
    let (dir, _guard) = state_dir(&a.common.state_dir)?;
    let mut opts = ServeOptions::new(broker, dir);
    opts.config = load_config(&a.common)?;
    opts.rulebook_text = load_rules(&a.common)?;
    opts.input_log = a.input_log;
    opts.dispatch_log = a.dispatch_log;
    opts.ws = a.ws;
    let handle = serve(opts).await?;
    if let Some(addr) = handle.ws_addr() {
        eprintln!("console on ws://{addr}");
    }
    tokio::signal::ctrl_c().await?;
    let summary = handle.stop().await?;
    eprintln!(
        "{} ticks ({} overran), {} records",
        summary.ticks,
        summary.overruns,
        summary.lines.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn replay(a: ReplayArgs) -> Result<ExitCode, Failure> {
    let (dir, _guard) = state_dir(&a.state_dir)?;
    let text = render_dispatch_log(&replay_log(&a.input, &dir)?);
    if let Some(out) = &a.out {
        std::fs::write(out, &text)?;
    } else if a.expect.is_none() {
        print!("{text}");
    }
    if let Some(expect) = &a.expect {
        let want = std::fs::read(expect)?;
        if want != text.as_bytes() {
            let at = want
                .split(|b| *b == b'\n')
                .zip(text.as_bytes().split(|b| *b == b'\n'))
                .position(|(x, y)| x != y)
                .map_or("at the end".to_string(), |n| format!("at line {}", n + 1));
            eprintln!("replay differs from {} {at}", expect.display());
            return Ok(ExitCode::FAILURE);
        }
        eprintln!("replay matches {} ({} bytes)", expect.display(), want.len());
    }
    Ok(ExitCode::SUCCESS)
}

async fn bench(a: BenchArgs) -> Result<ExitCode, Failure> {
    let (dir, _guard) = state_dir(&a.common.state_dir)?;
    let mut opts = BenchOptions::new(dir);
    opts.broker = a.common.broker.clone();
    opts.config = load_config(&a.common)?;
    opts.probes_per_kind = a.probes;
    opts.interval = Duration::from_millis(a.interval_ms);
    let report = run_bench(opts).await?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("{report}");
    }
    Ok(ExitCode::SUCCESS)
}

fn rules(cmd: RulesCmd) -> Result<ExitCode, Failure> {
    let (name, text) = match cmd {
        RulesCmd::Show => {
            print!("{DEFAULT_RULEBOOK_SOURCE}");
            return Ok(ExitCode::SUCCESS);
        }
        RulesCmd::Check { path: Some(p) } => {
            (p.display().to_string(), std::fs::read_to_string(&p)?)
        }
        RulesCmd::Check { path: None } => (
            "built-in rulebook".into(),
            DEFAULT_RULEBOOK_SOURCE.to_string(),
        ),
    };
    let rb = match parse_unchecked(&text) {
        Ok(rb) => rb,
        Err(e) => {
            eprintln!("{name}: {e}");
            return Ok(ExitCode::FAILURE);
        }
    };
    let diags = validate(&rb);
    if diags.is_empty() {
        println!("OK, {} rules", rb.rules.len());
        return Ok(ExitCode::SUCCESS);
    }
    for d in &diags {
        eprintln!("{name}: {d}");
    }
    Ok(ExitCode::FAILURE)
}

fn qr(a: QrArgs) -> Result<ExitCode, Failure> {
    let conditions: Vec<Condition> = [
        (a.low_light, Condition::LowLight),
        (a.light_code, Condition::LightColoredCode),
        (a.off_angle, Condition::OffAngle),
    ]
    .into_iter()
    .filter_map(|(on, c)| on.then_some(c))
    .collect();
    let p = QrSizingParams {
        scan_distance_mm: a.dscan,
        modules_per_side: a.modules,
        pixels_per_module: a.ppm,
        camera_pixels: a.mp * 1e6,
        fov_mm: a.fov,
        ..QrSizingParams::default()
    }
    .with_conditions(&conditions);
    let size = qr_min_size(&p)?;
    println!("{size}");
    if let Some(note) = size.discrepancy_note(&p) {
        println!("{note}");
    }
    Ok(ExitCode::SUCCESS)
}
