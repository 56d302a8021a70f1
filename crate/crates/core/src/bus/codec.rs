//! JSON payloads carried on the bus.

use serde::{Deserialize, Serialize};

use super::BusError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Real(f64),
}

impl Value {
    /// Crisp value fed to the fuzzy engine; booleans map to 0 and 1.
    pub fn as_f64(self) -> f64 {
        match self {
            Value::Bool(b) => f64::from(u8::from(b)),
            Value::Int(i) => i as f64,
            Value::Real(r) => r,
        }
    }

    fn is_finite(self) -> bool {
        !matches!(self, Value::Real(r) if !r.is_finite())
    }
}

/// A timestamped sensor value. `seq == 0` means the publisher did not
/// sequence it.
#[derive(Debug, Clone, PartialEq)]
pub struct Reading {
    pub topic: String,
    pub value: Value,
    pub unit: String,
    pub t: u64,
    pub seq: u64,
    pub device: String,
    pub worn: Option<bool>,
}

impl Reading {
    pub fn is_sequenced(&self) -> bool {
        self.seq != 0
    }
}

#[derive(Serialize)]
struct WireOut<'a> {
    v: Value,
    u: &'a str,
    t: u64,
    seq: u64,
    d: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    w: Option<bool>,
}

#[derive(Deserialize)]
struct WireIn {
    v: Value,
    #[serde(default)]
    u: String,
    t: u64,
    #[serde(default)]
    seq: u64,
    #[serde(default)]
    d: String,
    #[serde(default)]
    w: Option<bool>,
}

pub fn encode_reading(r: &Reading) -> Result<Vec<u8>, BusError> {
    if !r.value.is_finite() {
        return Err(BusError::NonFinite(r.topic.clone()));
    }
    let wire = WireOut {
        v: r.value,
        u: &r.unit,
        t: r.t,
        seq: r.seq,
        d: &r.device,
        w: r.worn,
    };
    Ok(serde_json::to_vec(&wire).expect("reading serializes"))
}

pub fn decode_reading(topic: &str, payload: &[u8]) -> Result<Reading, BusError> {
    let w: WireIn = serde_json::from_slice(payload).map_err(|e| malformed(topic, e))?;
    Ok(Reading {
        topic: topic.to_string(),
        value: w.v,
        unit: w.u,
        t: w.t,
        seq: w.seq,
        device: w.d,
        worn: w.w,
    })
}

fn malformed(topic: &str, e: impl std::fmt::Display) -> BusError {
    BusError::Malformed {
        topic: topic.to_string(),
        reason: e.to_string(),
    }
}

/// Decodes any JSON payload type, tagging errors with the topic.
pub fn decode<T: for<'de> Deserialize<'de>>(topic: &str, payload: &[u8]) -> Result<T, BusError> {
    serde_json::from_slice(payload).map_err(|e| malformed(topic, e))
}

pub fn encode<T: Serialize>(value: &T) -> Vec<u8> {
    serde_json::to_vec(value).expect("bus payloads serialize")
}

/// Tag pose in meters, facing in degrees counterclockwise from +x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionFix {
    pub x: f64,
    pub y: f64,
    pub facing: f64,
    pub t: u64,
    #[serde(default)]
    pub seq: u64,
}

/// `assistant/message/{kind}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageDispatch {
    pub id: i64,
    /// Activating rule, 0 when not rule-driven.
    pub rule: u32,
    pub t: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub src: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<u64>,
}

/// `assistant/actuator/{id}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActuatorState {
    pub state: String,
    pub rule: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub src: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeMessage {
    pub mode: String,
    pub t: u64,
}

/// `caregiver/notification`, sequenced for the store-and-forward audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Notification {
    pub seq: u64,
    pub kind: String,
    pub detail: String,
    pub t: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presence {
    pub online: bool,
    pub t: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Barrier {
    pub count: usize,
    pub t: u64,
}

/// `sys/latency/{kind}`; `t` is the publisher's wall clock in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatencyProbe {
    pub probe: u64,
    pub t: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandAck {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonce: Option<String>,
    pub ok: bool,
    pub detail: String,
}
