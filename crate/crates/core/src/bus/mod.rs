//! Telemetry bus: topic table, payload codec, MQTT client, loopback broker
//! and the store-and-forward journal.

mod broker;
mod client;
pub mod codec;
mod journal;
pub mod topics;

pub use broker::LoopbackBroker;
pub use client::{parse_broker_url, BusClient, BusOptions, Inbox, Incoming};
pub use codec::{decode_reading, encode_reading, PositionFix, Reading, Value};
pub use journal::OfflineQueue;

#[derive(Debug, thiserror::Error)]
pub enum BusError {
    #[error("invalid topic filter `{0}`")]
    InvalidFilter(String),
    #[error("topic `{0}` is not in the topic table")]
    InvalidTopic(String),
    #[error("malformed payload on `{topic}`: {reason}")]
    Malformed { topic: String, reason: String },
    #[error("non-finite value on `{0}`")]
    NonFinite(String),
    #[error("broker connection: {0}")]
    Connection(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
