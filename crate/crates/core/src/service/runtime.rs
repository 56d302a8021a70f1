use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use tokio::sync::{mpsc, watch};
use tokio::task::JoinHandle;
use tokio::time::MissedTickBehavior;

use crate::bus::{BusClient, BusOptions};
use crate::rulebook::DEFAULT_RULEBOOK_SOURCE;

use super::{
    CommandFrame, ConsoleSnapshot, Counters, Driver, Frame, Output, ServiceConfig, ServiceError,
    WsBridge,
};

/// Milliseconds on whatever timeline the engine should see.
pub type Clock = Arc<dyn Fn() -> u64 + Send + Sync>;

pub fn wall_clock() -> Clock {
    Arc::new(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_millis() as u64)
    })
}

pub fn wall_clock_us() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_micros() as u64)
}

pub struct ServeOptions {
    pub broker: String,
    pub client_id: String,
    pub config: ServiceConfig,
    pub rulebook_text: String,
    pub state_dir: PathBuf,
    pub input_log: Option<PathBuf>,
    pub dispatch_log: Option<PathBuf>,
    pub ws: Option<SocketAddr>,
    pub clock: Clock,
}

impl ServeOptions {
    pub fn new(broker: impl Into<String>, state_dir: impl Into<PathBuf>) -> Self {
        ServeOptions {
            broker: broker.into(),
            client_id: "fogmind-service".into(),
            config: ServiceConfig::default(),
            rulebook_text: DEFAULT_RULEBOOK_SOURCE.to_string(),
            state_dir: state_dir.into(),
            input_log: None,
            dispatch_log: None,
            ws: None,
            clock: wall_clock(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ServeSummary {
    pub ticks: u64,
    /// Ticks that took longer than one period.
    pub overruns: u64,
    pub lines: Vec<String>,
    pub counters: Counters,
}

/// A decision service running on the wall clock.
pub struct ServiceHandle {
    stop: watch::Sender<bool>,
    task: JoinHandle<Result<ServeSummary, ServiceError>>,
    ws_addr: Option<SocketAddr>,
}

impl ServiceHandle {
    pub fn ws_addr(&self) -> Option<SocketAddr> {
        self.ws_addr
    }

    pub async fn stop(self) -> Result<ServeSummary, ServiceError> {
        let _ = self.stop.send(true);
        self.task
            .await
            .map_err(|e| ServiceError::Protocol(format!("service task: {e}")))?
    }
}

/// Connects to the broker and starts the control loop.
///
/// Messages are fed to the engine as they arrive; caregiver commands and
/// latency probes therefore act without waiting for a tick. Ticks run on a
/// fixed interval inside the same task, so two ticks never overlap.
pub async fn serve(opts: ServeOptions) -> Result<ServiceHandle, ServiceError> {
    let rate = opts.config.clamped_rate();
    let period = Duration::from_secs_f64(1.0 / rate);
    let client = BusClient::connect(
        BusOptions::new(&opts.broker, &opts.client_id)
            .subscribe("home/#")
            .subscribe("caregiver/command/+")
            .subscribe("sys/presence/+")
            .subscribe("sys/latency/+"),
    )
    .await?;
    let (ws, mut commands) = match opts.ws {
        Some(addr) => {
            let (b, rx) = WsBridge::bind(addr).await?;
            (Some(b), rx)
        }
        None => (None, mpsc::unbounded_channel::<CommandFrame>().1),
    };
    let ws_addr = ws.as_ref().map(|b| b.local_addr());
    let mut driver = Driver::open(
        opts.config.clone(),
        &opts.rulebook_text,
        &opts.state_dir,
        opts.input_log.as_deref(),
        opts.dispatch_log.as_deref(),
        None,
    )?;
    let clock = opts.clock.clone();
    let (stop_tx, mut stop_rx) = watch::channel(false);

    let task = tokio::spawn(async move {
        let mut interval = tokio::time::interval(period);
        interval.set_missed_tick_behavior(MissedTickBehavior::Delay);
        let mut ticks = 0;
        let mut overruns = 0;
        loop {
            let out = tokio::select! {
                biased;
                _ = stop_rx.changed() => break,
                m = client.recv() => {
                    let Some(m) = m else { break };
                    driver.msg(clock(), &m.topic, &m.payload)?
                }
                Some(c) = commands.recv() => match c.to_message() {
                    Ok((topic, payload)) => driver.msg(clock(), &topic, &payload)?,
                    Err(detail) => {
                        if let Some(ws) = &ws {
                            ws.send(&Frame::Ack(crate::bus::codec::CommandAck {
                                kind: c.kind,
                                nonce: c.nonce,
                                ok: false,
                                detail,
                            }));
                        }
                        continue;
                    }
                },
                _ = interval.tick() => {
                    let started = tokio::time::Instant::now();
                    let now = clock();
                    let out = driver.tick(now)?;
                    ticks += 1;
                    if started.elapsed() > period {
                        overruns += 1;
                        tracing::warn!("tick at {now} overran the {period:?} period");
                    }
                    if let Some(ws) = &ws {
                        ws.send(&Frame::Snapshot(Box::new(ConsoleSnapshot::of(driver.engine(), now))));
                    }
                    out
                }
            };
            emit(&client, ws.as_ref(), &out).await?;
        }
        let counters = driver.engine().counters();
        let lines = driver.finish()?;
        client.disconnect().await;
        Ok(ServeSummary {
            ticks,
            overruns,
            lines,
            counters,
        })
    });
    Ok(ServiceHandle {
        stop: stop_tx,
        task,
        ws_addr,
    })
}

async fn emit(client: &BusClient, ws: Option<&WsBridge>, out: &Output) -> Result<(), ServiceError> {
    for o in &out.publish {
        client
            .publish(&o.topic, o.payload.as_bytes().to_vec())
            .await?;
    }
    if let Some(ws) = ws {
        for r in &out.records {
            ws.send(&Frame::Event(r.clone()));
        }
        for a in &out.acks {
            ws.send(&Frame::Ack(a.clone()));
        }
    }
    Ok(())
}
