use std::collections::BTreeMap;

use serde::Serialize;

use crate::bus::codec::{decode, decode_reading, PositionFix};
use crate::bus::{topics, BusError};
use crate::rulebook::{object_key, ObjectDecl};
use crate::sim::{distance_dm, heading_deviation, Pose};

use super::ServiceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub value: f64,
    /// Publisher timestamp.
    pub t: u64,
    pub received_ms: u64,
}

/// Why an inbound reading was not stored.
#[derive(Debug, thiserror::Error)]
pub enum Rejected {
    #[error(transparent)]
    Malformed(#[from] BusError),
    #[error("{topic}: seq {seq} does not advance past {last}")]
    SeqRegression { topic: String, seq: u64, last: u64 },
    #[error("{0}: not a sensor topic")]
    Unrouted(String),
}

/// Something the snapshot store learned from one message that the engine
/// must react to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stored {
    Value,
    WornChanged(bool),
    GameScore(f64),
}

/// Latest value per variable. Owned by the control loop only.
#[derive(Debug, Clone, Default)]
pub struct SnapshotStore {
    values: BTreeMap<String, Sample>,
    pose: Option<(PositionFix, u64)>,
    worn: Option<(bool, u64)>,
    last_seq: BTreeMap<String, u64>,
}

/// Fuzzy variable fed by a sensor kind.
pub fn variable_for_kind(kind: &str) -> &str {
    match kind {
        "motion" => "movement",
        other => other,
    }
}

impl SnapshotStore {
    pub fn ingest(
        &mut self,
        topic: &str,
        payload: &[u8],
        received_ms: u64,
    ) -> Result<Stored, Rejected> {
        if topic == topics::POSITION {
            let fix: PositionFix = decode(topic, payload)?;
            if ![fix.x, fix.y, fix.facing].iter().all(|v| v.is_finite()) {
                return Err(BusError::NonFinite(topic.to_string()).into());
            }
            self.check_seq(topic, fix.seq)?;
            self.pose = Some((fix, received_ms));
            return Ok(Stored::Value);
        }
        let reading = decode_reading(topic, payload)?;
        let value = reading.value.as_f64();
        if !value.is_finite() {
            return Err(BusError::NonFinite(topic.to_string()).into());
        }
        let variable = if topic == topics::PULSE {
            "pulse"
        } else if topic == topics::GAME_SCORE {
            "game_score"
        } else if let Some((_, kind)) = topics::parse_sensor_topic(topic) {
            variable_for_kind(kind)
        } else {
            return Err(Rejected::Unrouted(topic.to_string()));
        };
        self.check_seq(topic, reading.seq)?;
        self.values.insert(
            variable.to_string(),
            Sample {
                value,
                t: reading.t,
                received_ms,
            },
        );
        if topic == topics::GAME_SCORE {
            return Ok(Stored::GameScore(value));
        }
        if let Some(w) = reading.worn {
            let before = self.worn.map(|(w, _)| w);
            self.worn = Some((w, received_ms));
            if before != Some(w) {
                return Ok(Stored::WornChanged(w));
            }
        }
        Ok(Stored::Value)
    }

    fn check_seq(&mut self, topic: &str, seq: u64) -> Result<(), Rejected> {
        if seq == 0 {
            return Ok(());
        }
        match self.last_seq.get(topic) {
            Some(&last) if seq <= last => Err(Rejected::SeqRegression {
                topic: topic.to_string(),
                seq,
                last,
            }),
            _ => {
                self.last_seq.insert(topic.to_string(), seq);
                Ok(())
            }
        }
    }

    pub fn sample(&self, variable: &str) -> Option<Sample> {
        self.values.get(variable).copied()
    }

    pub fn pose(&self) -> Option<(Pose, u64)> {
        self.pose.map(|(f, at)| {
            (
                Pose {
                    x: f.x,
                    y: f.y,
                    facing: f.facing,
                },
                at,
            )
        })
    }

    /// Unknown until the tag first reports.
    pub fn worn(&self) -> Option<bool> {
        self.worn.map(|(w, _)| w)
    }

    /// Crisp inputs for inference: fresh sensor values, per-object distance
    /// and heading from a fresh pose, and the time of day.
    pub fn view(&self, cfg: &ServiceConfig, objects: &[ObjectDecl], now_ms: u64) -> Snapshot {
        let fresh = |key: &str, received_ms: u64| match cfg.stale_after_ms(key) {
            Some(budget) => now_ms.saturating_sub(received_ms) <= budget,
            None => true,
        };
        let mut inputs = BTreeMap::new();
        let mut stale = Vec::new();
        for (k, s) in &self.values {
            if fresh(k, s.received_ms) {
                inputs.insert(k.clone(), s.value);
            } else {
                stale.push(k.clone());
            }
        }
        let mut pose = None;
        if let Some((p, at)) = self.pose() {
            if fresh("position", at) {
                pose = Some(p);
                for o in objects {
                    inputs.insert(
                        object_key("distance", &o.name),
                        distance_dm(p.x, p.y, o.x, o.y),
                    );
                    inputs.insert(
                        object_key("heading", &o.name),
                        heading_deviation(&p, o.x, o.y),
                    );
                }
            } else {
                stale.push("position".into());
            }
        }
        inputs.insert("time".into(), time_of_day_h(now_ms));
        Snapshot {
            now_ms,
            inputs,
            stale,
            pose,
            worn: self.worn(),
        }
    }
}

/// Hours since UTC midnight.
pub fn time_of_day_h(ms: u64) -> f64 {
    (ms % 86_400_000) as f64 / 3_600_000.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub now_ms: u64,
    pub inputs: BTreeMap<String, f64>,
    pub stale: Vec<String>,
    pub pose: Option<Pose>,
    pub worn: Option<bool>,
}
