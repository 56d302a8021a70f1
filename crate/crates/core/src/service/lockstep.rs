use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

use tokio::sync::mpsc;

use crate::bus::codec::{
    decode, encode, Barrier, CommandAck, MessageDispatch, Notification, Presence,
};
use crate::bus::{topics, BusClient, BusOptions, Inbox, LoopbackBroker};
use crate::rulebook::DEFAULT_RULEBOOK_SOURCE;
use crate::sim::{Emission, Scenario, WorldState};

use super::{
    ConsoleSnapshot, Counters, DispatchRecord, Driver, Frame, Mode, Output, ServiceConfig,
    ServiceError, WsBridge,
};

const BATCH_TIMEOUT: Duration = Duration::from_secs(5);
const SETTLE_TIMEOUT: Duration = Duration::from_secs(3);

pub struct RunOptions {
    pub scenario: Scenario,
    pub rulebook_text: String,
    pub config: ServiceConfig,
    /// External broker; an in-process one is started when absent.
    pub broker: Option<String>,
    pub state_dir: PathBuf,
    pub input_log: Option<PathBuf>,
    pub dispatch_log: Option<PathBuf>,
    pub ws: Option<SocketAddr>,
    /// Sleep so virtual time keeps pace with the wall clock.
    pub pace: bool,
}

impl RunOptions {
    /// Default rulebook and config, with the scenario's zones preloaded.
    pub fn new(scenario: Scenario, state_dir: impl Into<PathBuf>) -> Self {
        let config = ServiceConfig {
            zones: scenario.plan.zones.clone(),
            ..ServiceConfig::default()
        };
        RunOptions {
            scenario,
            rulebook_text: DEFAULT_RULEBOOK_SOURCE.to_string(),
            config,
            broker: None,
            state_dir: state_dir.into(),
            input_log: None,
            dispatch_log: None,
            ws: None,
            pace: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario: String,
    pub start_ms: u64,
    pub period_ms: u64,
    pub ticks: u64,
    /// Dispatch log lines, byte for byte.
    pub lines: Vec<String>,
    pub records: Vec<DispatchRecord>,
    pub notifications_sent: usize,
    /// Notifications as the caregiver's client received them.
    pub notifications: Vec<Notification>,
    pub messages_sent: usize,
    /// Messages as the patient's device received them.
    pub patient: Vec<(String, MessageDispatch)>,
    pub acks: Vec<CommandAck>,
    pub counters: Counters,
    pub final_mode: Mode,
    pub active_endpoints: usize,
    pub outbox_dropped: u64,
}

struct Audit {
    notifications: Vec<Notification>,
    patient: Vec<(String, MessageDispatch)>,
    acks: Vec<CommandAck>,
    notifications_sent: usize,
    messages_sent: usize,
}

impl Audit {
    fn drain(&mut self, caregiver: Option<&Inbox>, patient: &Inbox) {
        if let Some(inbox) = caregiver {
            while let Some(m) = inbox.try_recv() {
                if m.topic == topics::NOTIFICATION {
                    if let Ok(n) = decode::<Notification>(&m.topic, &m.payload) {
                        self.notifications.push(n);
                    }
                } else if m.topic == topics::COMMAND_ACK {
                    if let Ok(a) = decode::<CommandAck>(&m.topic, &m.payload) {
                        self.acks.push(a);
                    }
                }
            }
        }
        while let Some(m) = patient.try_recv() {
            if let Ok(d) = decode::<MessageDispatch>(&m.topic, &m.payload) {
                self.patient.push((m.topic.clone(), d));
            }
        }
    }

    fn caught_up(&self) -> bool {
        self.notifications.len() >= self.notifications_sent
            && self.patient.len() >= self.messages_sent
    }
}

async fn caregiver_client(url: &str) -> Result<BusClient, ServiceError> {
    let will = encode(&Presence {
        online: false,
        t: 0,
    });
    Ok(BusClient::connect(
        BusOptions::new(url, "caregiver")
            .subscribe(topics::NOTIFICATION)
            .subscribe(topics::COMMAND_ACK)
            .subscribe("assistant/actuator/+")
            .subscribe(topics::MODE)
            .will(topics::presence_topic("caregiver"), will),
    )
    .await?)
}

async fn publish(service: &BusClient, out: &Output, audit: &mut Audit) -> Result<(), ServiceError> {
    for o in &out.publish {
        if o.topic == topics::NOTIFICATION {
            audit.notifications_sent += 1;
        } else if o.topic.starts_with("assistant/message/") {
            audit.messages_sent += 1;
        }
        service
            .publish(&o.topic, o.payload.as_bytes().to_vec())
            .await?;
    }
    Ok(())
}

/// Drives a scenario through the bus in lockstep with the simulated clock.
///
/// Each control period the simulator publishes one batch followed by a
/// barrier carrying the batch size. The service side waits for the whole
/// batch, feeds it to the engine, then ticks. Runs are reproducible for a
/// given scenario seed regardless of machine speed.
pub async fn run_scenario(opts: RunOptions) -> Result<RunReport, ServiceError> {
    let period_ms = (1000.0 / opts.config.clamped_rate()).round() as u64;
    let broker = match &opts.broker {
        Some(_) => None,
        None => Some(LoopbackBroker::start("127.0.0.1:0").await?),
    };
    let url = match (&opts.broker, &broker) {
        (Some(u), _) => u.clone(),
        (None, Some(b)) => b.url(),
        _ => unreachable!(),
    };

    let service = BusClient::connect(
        BusOptions::new(&url, "fogmind-service")
            .subscribe("home/#")
            .subscribe("caregiver/command/+")
            .subscribe(topics::BARRIER),
    )
    .await?;
    let patient =
        BusClient::connect(BusOptions::new(&url, "patient").subscribe("assistant/message/+"))
            .await?;
    let mut caregiver = Some(caregiver_client(&url).await?);
    let sim = BusClient::connect(BusOptions::new(&url, "fogmind-sim")).await?;

    let (ws, mut ws_commands) = match opts.ws {
        Some(addr) => {
            let (b, rx) = WsBridge::bind(addr).await?;
            tracing::info!("console bridge on ws://{}", b.local_addr());
            (Some(b), rx)
        }
        None => (None, mpsc::unbounded_channel().1),
    };

    let mut driver = Driver::open(
        opts.config.clone(),
        &opts.rulebook_text,
        &opts.state_dir,
        opts.input_log.as_deref(),
        opts.dispatch_log.as_deref(),
        Some(opts.scenario.name.clone()),
    )?;
    let mut world = WorldState::new(opts.scenario.clone());
    let start_ms = world.now_ms();
    let mut audit = Audit {
        notifications: Vec::new(),
        patient: Vec::new(),
        acks: Vec::new(),
        notifications_sent: 0,
        messages_sent: 0,
    };
    let mut records = Vec::new();
    let wall_start = tokio::time::Instant::now();
    let mut ticks = 0;

    while !world.is_done() {
        let emissions = world.step(period_ms);
        let now = world.now_ms();
        let mut count = 0;
        let mut side = Vec::new();
        for e in emissions {
            match e.message() {
                Some((topic, payload)) => {
                    sim.publish(&topic, payload).await?;
                    count += 1;
                }
                None => side.push(e),
            }
        }
        sim.publish(topics::BARRIER, encode(&Barrier { count, t: now }))
            .await?;

        let mut batch = Vec::with_capacity(count);
        loop {
            let m = tokio::time::timeout(BATCH_TIMEOUT, service.recv())
                .await
                .map_err(|_| ServiceError::Protocol(format!("batch at {now} ms timed out")))?
                .ok_or_else(|| ServiceError::Protocol("service inbox closed".into()))?;
            if m.retained || m.topic == topics::COMMAND_ACK {
                continue;
            }
            if m.topic == topics::BARRIER {
                let b: Barrier = decode(&m.topic, &m.payload)?;
                if b.t == now {
                    break;
                }
                continue;
            }
            batch.push(m);
        }
        if batch.len() != count {
            return Err(ServiceError::Protocol(format!(
                "batch at {now} ms: expected {count} messages, got {}",
                batch.len()
            )));
        }

        let mut outputs = Vec::new();
        while let Ok(c) = ws_commands.try_recv() {
            match c.to_message() {
                Ok((topic, payload)) => outputs.push(driver.msg(now, &topic, &payload)?),
                Err(detail) => {
                    if let Some(ws) = &ws {
                        ws.send(&Frame::Ack(CommandAck {
                            kind: c.kind.clone(),
                            nonce: c.nonce.clone(),
                            ok: false,
                            detail,
                        }));
                    }
                }
            }
        }
        for m in &batch {
            outputs.push(driver.msg(now, &m.topic, &m.payload)?);
        }
        for e in side {
            match e {
                Emission::Link { subscriber, online } => {
                    if subscriber == "caregiver" {
                        if online {
                            if caregiver.is_none() {
                                caregiver = Some(caregiver_client(&url).await?);
                            }
                        } else if let Some(c) = caregiver.take() {
                            settle(&mut audit, Some(&c), &patient).await;
                            c.abort();
                        }
                    }
                    outputs.push(driver.link(now, &subscriber, online)?);
                }
                Emission::Restart => outputs.push(driver.restart(now)?),
                _ => {}
            }
        }
        outputs.push(driver.tick(now)?);
        ticks += 1;

        for out in &outputs {
            publish(&service, out, &mut audit).await?;
            records.extend(out.records.iter().cloned());
            if let Some(ws) = &ws {
                for r in &out.records {
                    ws.send(&Frame::Event(r.clone()));
                }
                for a in &out.acks {
                    ws.send(&Frame::Ack(a.clone()));
                }
            }
        }
        if let Some(ws) = &ws {
            ws.send(&Frame::Snapshot(Box::new(ConsoleSnapshot::of(
                driver.engine(),
                now,
            ))));
        }
        audit.drain(
            caregiver.as_ref().map(|c| c.inbox()).as_deref(),
            &patient.inbox(),
        );
        if opts.pace {
            tokio::time::sleep_until(wall_start + Duration::from_millis(now - start_ms)).await;
        }
    }

    settle(&mut audit, caregiver.as_ref(), &patient).await;
    let engine = driver.engine();
    let counters = engine.counters();
    let final_mode = engine.mode();
    let active_endpoints = engine.active_endpoints();
    let outbox_dropped = engine.outbox().dropped("caregiver") + engine.outbox().dropped("patient");
    let lines = driver.finish()?;

    sim.disconnect().await;
    service.disconnect().await;
    patient.disconnect().await;
    if let Some(c) = caregiver {
        c.disconnect().await;
    }
    if let Some(b) = broker {
        b.shutdown();
    }
    Ok(RunReport {
        scenario: opts.scenario.name.clone(),
        start_ms,
        period_ms,
        ticks,
        lines,
        records,
        notifications_sent: audit.notifications_sent,
        notifications: audit.notifications,
        messages_sent: audit.messages_sent,
        patient: audit.patient,
        acks: audit.acks,
        counters,
        final_mode,
        active_endpoints,
        outbox_dropped,
    })
}

/// Waits until everything published so far has reached the subscribers.
async fn settle(audit: &mut Audit, caregiver: Option<&BusClient>, patient: &BusClient) {
    let deadline = tokio::time::Instant::now() + SETTLE_TIMEOUT;
    loop {
        audit.drain(caregiver.map(|c| c.inbox()).as_deref(), &patient.inbox());
        if audit.caught_up() || tokio::time::Instant::now() >= deadline {
            return;
        }
        tokio::time::sleep(Duration::from_millis(2)).await;
    }
}
