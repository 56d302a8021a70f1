//! End-to-end dispatch latency over a live broker.
//!
//! A probe is published on `sys/latency/{kind}` stamped with the wall clock
//! in microseconds. The service forwards it as a message dispatch without
//! waiting for a tick, and a patient-side collector measures arrival time
//! against the stamp. Meanwhile every configured endpoint produces ordinary
//! traffic at the control rate so the probe competes with real load.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::Serialize;

use crate::bus::codec::{decode, encode, encode_reading, LatencyProbe, MessageDispatch, Presence};
use crate::bus::{topics, BusClient, BusOptions, LoopbackBroker, PositionFix, Reading, Value};

use super::{
    serve, summarize, wall_clock, wall_clock_us, MessageKind, ServeOptions, ServiceConfig,
    ServiceError, Summary,
};

pub struct BenchOptions {
    /// External broker; an in-process one is started when absent.
    pub broker: Option<String>,
    pub state_dir: PathBuf,
    pub config: ServiceConfig,
    pub probes_per_kind: usize,
    /// Spacing between probe rounds and between endpoint publications.
    pub interval: Duration,
    /// How long to wait for stragglers after the last probe.
    pub drain: Duration,
}

impl BenchOptions {
    pub fn new(state_dir: impl Into<PathBuf>) -> Self {
        BenchOptions {
            broker: None,
            state_dir: state_dir.into(),
            config: ServiceConfig::default(),
            probes_per_kind: 50,
            interval: Duration::from_millis(500),
            drain: Duration::from_secs(2),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KindReport {
    pub sent: usize,
    pub received: usize,
    pub lost: usize,
    pub duplicates: usize,
    pub latency: Option<Summary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub endpoints: usize,
    pub rate_hz: f64,
    pub endpoint_messages: u64,
    pub service_ticks: u64,
    pub overruns: u64,
    pub kinds: BTreeMap<String, KindReport>,
}

impl BenchReport {
    pub fn lost(&self) -> usize {
        self.kinds.values().map(|k| k.lost).sum()
    }

    pub fn duplicates(&self) -> usize {
        self.kinds.values().map(|k| k.duplicates).sum()
    }

    /// Worst per-kind p95, in ms.
    pub fn worst_p95_ms(&self) -> Option<f64> {
        self.kinds
            .values()
            .filter_map(|k| k.latency.map(|s| s.p95_ms))
            .max_by(f64::total_cmp)
    }
}

/// Figures measured on a physical deployment (glasses, Raspberry Pi fog
/// node, Wi-Fi), kept for comparison with local runs.
pub const REFERENCE_FIGURES: &str = "\
reference deployment, mean end-to-end:
  run 1 (50 trials): voice 364 ms, image 106 ms
  run 2 (30 trials): voice 247 ms, image 388 ms
  broker publish/subscribe alone: about 120 ms, no loss";

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} endpoints at {} Hz, {} endpoint messages, {} ticks ({} overran)",
            self.endpoints, self.rate_hz, self.endpoint_messages, self.service_ticks, self.overruns
        )?;
        writeln!(
            f,
            "{:<6} {:>5} {:>5} {:>5} {:>5} {:>9} {:>9} {:>9} {:>9}",
            "kind", "sent", "recv", "lost", "dup", "mean ms", "p50 ms", "p95 ms", "max ms"
        )?;
        for (kind, k) in &self.kinds {
            write!(
                f,
                "{kind:<6} {:>5} {:>5} {:>5} {:>5}",
                k.sent, k.received, k.lost, k.duplicates
            )?;
            match k.latency {
                Some(s) => writeln!(
                    f,
                    " {:>9.2} {:>9.2} {:>9.2} {:>9.2}",
                    s.mean_ms, s.p50_ms, s.p95_ms, s.max_ms
                )?,
                None => writeln!(f, " {:>9}", "-")?,
            }
        }
        write!(f, "{REFERENCE_FIGURES}")
    }
}

/// One publication per endpoint with a value that should not trigger any
/// rule. Endpoints without a sensor send a presence heartbeat.
fn endpoint_traffic(id: &str, seq: u64, now_ms: u64) -> (String, Vec<u8>) {
    let reading = |topic: String, v: Value, unit: &str, worn: Option<bool>| {
        let r = Reading {
            topic: topic.clone(),
            value: v,
            unit: unit.into(),
            t: now_ms,
            seq,
            device: id.into(),
            worn,
        };
        (topic, encode_reading(&r).expect("finite reading"))
    };
    match id {
        "terrace-rain" => reading(
            topics::sensor_topic(id, "rain"),
            Value::Bool(false),
            "bool",
            None,
        ),
        "kitchen-flame" => reading(
            topics::sensor_topic(id, "flame"),
            Value::Bool(false),
            "bool",
            None,
        ),
        "kitchen-gas" => reading(
            topics::sensor_topic(id, "gas"),
            Value::Bool(false),
            "bool",
            None,
        ),
        "tvroom-temp" => reading(
            topics::sensor_topic(id, "temperature"),
            Value::Real(20.0),
            "C",
            None,
        ),
        "tvroom-humidity" => reading(
            topics::sensor_topic(id, "humidity"),
            Value::Real(50.0),
            "%",
            None,
        ),
        "plant-pot" => reading(
            topics::sensor_topic(id, "plant_humidity"),
            Value::Real(65.0),
            "%",
            None,
        ),
        "tag-motion" => reading(
            topics::sensor_topic(id, "motion"),
            Value::Real(6.0),
            "h",
            None,
        ),
        "tag-pulse" => reading(topics::PULSE.into(), Value::Real(72.0), "bpm", Some(true)),
        "ar-game" => reading(topics::GAME_SCORE.into(), Value::Real(10.0), "pts", None),
        "tag-position" => {
            let fix = PositionFix {
                x: 3.5,
                y: 2.0,
                facing: 270.0,
                t: now_ms,
                seq,
            };
            (topics::POSITION.into(), encode(&fix))
        }
        other => (
            topics::presence_topic(other),
            encode(&Presence {
                online: true,
                t: now_ms,
            }),
        ),
    }
}

#[derive(Default)]
struct Collected {
    seen: BTreeMap<(String, u64), usize>,
    latency: BTreeMap<String, Vec<f64>>,
}

impl Collected {
    fn add(&mut self, kind: &str, probe: u64, published_us: u64, arrived_us: u64) {
        let n = self.seen.entry((kind.to_string(), probe)).or_default();
        *n += 1;
        if *n == 1 {
            let ms = arrived_us.saturating_sub(published_us) as f64 / 1000.0;
            self.latency.entry(kind.to_string()).or_default().push(ms);
        }
    }
}

pub async fn run_bench(opts: BenchOptions) -> Result<BenchReport, ServiceError> {
    let embedded = match &opts.broker {
        Some(_) => None,
        None => Some(LoopbackBroker::start("127.0.0.1:0").await?),
    };
    let url = match (&opts.broker, &embedded) {
        (Some(u), _) => u.clone(),
        (None, Some(b)) => b.url(),
        (None, None) => unreachable!(),
    };
    let endpoints: Vec<String> = opts.config.endpoints.iter().map(|e| e.id.clone()).collect();
    let rate_hz = opts.config.clamped_rate();

    let mut serve_opts = ServeOptions::new(&url, &opts.state_dir);
    serve_opts.config = opts.config.clone();
    serve_opts.clock = wall_clock();
    let service = serve(serve_opts).await?;

    let patient =
        BusClient::connect(BusOptions::new(&url, "patient").subscribe("assistant/message/+"))
            .await?;
    let sim = BusClient::connect(BusOptions::new(&url, "fogmind-bench")).await?;

    let kinds = [MessageKind::Voice, MessageKind::Image, MessageKind::Text];
    let collected = Arc::new(Mutex::new(Collected::default()));
    let patient = Arc::new(patient);
    let collector = {
        let collected = collected.clone();
        let patient = patient.clone();
        tokio::spawn(async move {
            while let Some(m) = patient.recv().await {
                let arrived = wall_clock_us();
                let Some(kind) = m.topic.strip_prefix("assistant/message/") else {
                    continue;
                };
                let Ok(d) = decode::<MessageDispatch>(&m.topic, &m.payload) else {
                    continue;
                };
                if let Some(probe) = d.probe {
                    collected
                        .lock()
                        .expect("collector lock")
                        .add(kind, probe, d.t, arrived);
                }
            }
        })
    };

    let mut interval = tokio::time::interval(opts.interval);
    interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
    let mut endpoint_messages = 0;
    let mut sent: BTreeMap<String, BTreeSet<u64>> = BTreeMap::new();
    for round in 0..opts.probes_per_kind as u64 {
        interval.tick().await;
        let now_ms = wall_clock_us() / 1000;
        for id in &endpoints {
            let (topic, payload) = endpoint_traffic(id, round + 1, now_ms);
            sim.publish(&topic, payload).await?;
            endpoint_messages += 1;
        }
        for kind in kinds {
            let probe = LatencyProbe {
                probe: round + 1,
                t: wall_clock_us(),
            };
            sim.publish(&topics::latency_topic(kind.as_str()), encode(&probe))
                .await?;
            sent.entry(kind.as_str().to_string())
                .or_default()
                .insert(probe.probe);
        }
    }

    let expected: usize = sent.values().map(BTreeSet::len).sum();
    let deadline = tokio::time::Instant::now() + opts.drain;
    while tokio::time::Instant::now() < deadline
        && collected.lock().expect("collector lock").seen.len() < expected
    {
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
    // late duplicates would show up right behind the originals
    tokio::time::sleep(Duration::from_millis(200)).await;
    let summary = service.stop().await?;
    collector.abort();
    let _ = collector.await;
    sim.disconnect().await;
    if let Ok(p) = Arc::try_unwrap(patient) {
        p.disconnect().await;
    }
    if let Some(b) = embedded {
        b.shutdown();
    }
    let Collected { seen, mut latency } =
        std::mem::take(&mut *collected.lock().expect("collector lock"));

    let mut report = BTreeMap::new();
    for (kind, ids) in &sent {
        let mut received = 0;
        let mut duplicates = 0;
        for id in ids {
            if let Some(n) = seen.get(&(kind.clone(), *id)) {
                received += 1;
                duplicates += n - 1;
            }
        }
        report.insert(
            kind.clone(),
            KindReport {
                sent: ids.len(),
                received,
                lost: ids.len() - received,
                duplicates,
                latency: summarize(&latency.remove(kind).unwrap_or_default()),
            },
        );
    }
    Ok(BenchReport {
        endpoints: endpoints.len(),
        rate_hz,
        endpoint_messages,
        service_ticks: summary.ticks,
        overruns: summary.overruns,
        kinds: report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_endpoint_has_traffic_the_service_accepts() {
        let cfg = ServiceConfig::default();
        let tmp = tempfile::tempdir().unwrap();
        let mut engine = super::super::Engine::open(
            cfg.clone(),
            crate::rulebook::default_rulebook(),
            tmp.path(),
        )
        .unwrap();
        let t0 = 1_704_067_200_000 + 3 * 3_600_000;
        let mut sensors = 0;
        for e in &cfg.endpoints {
            let (topic, payload) = endpoint_traffic(&e.id, 1, t0);
            topics::validate_topic(&topic).unwrap();
            let out = engine.ingest(&topic, &payload, t0).unwrap();
            assert!(out.records.is_empty(), "{topic}");
            sensors += usize::from(!topic.starts_with("sys/"));
        }
        assert_eq!(engine.counters().ingested, sensors as u64);
        assert_eq!(engine.counters().malformed, 0);
        // at 03:00 nothing time-driven applies, so benign traffic stays quiet
        let out = engine.tick(t0 + 500).unwrap();
        assert!(out.records.is_empty(), "{:?}", out.records);
    }

    #[tokio::test(flavor = "multi_thread", worker_threads = 4)]
    async fn short_run_loses_nothing() {
        let tmp = tempfile::tempdir().unwrap();
        let mut opts = BenchOptions::new(tmp.path());
        opts.probes_per_kind = 6;
        opts.interval = Duration::from_millis(100);
        let r = run_bench(opts).await.unwrap();
        assert_eq!(r.kinds.len(), 3);
        for k in r.kinds.values() {
            assert_eq!((k.sent, k.received, k.lost, k.duplicates), (6, 6, 0, 0));
            assert_eq!(k.latency.unwrap().count, 6);
        }
        assert_eq!(r.endpoint_messages, 22 * 6);
        let text = r.to_string();
        assert!(text.contains("voice 364 ms"), "{text}");
    }
}
