//! Topic table and per-class delivery settings.

use rumqttc::mqttbytes::{matches, valid_filter, valid_topic};
use rumqttc::QoS;

use super::BusError;

pub const POSITION: &str = "home/position/tag";
pub const PULSE: &str = "home/pulse/tag";
pub const GAME_SCORE: &str = "home/game/score";
pub const MODE: &str = "assistant/mode";
pub const NOTIFICATION: &str = "caregiver/notification";
pub const COMMAND_ACK: &str = "caregiver/command/ack";
/// Marks the end of one lockstep batch; payload carries the batch size.
pub const BARRIER: &str = "sys/barrier";

pub const SENSOR_KINDS: [&str; 7] = [
    "rain",
    "flame",
    "gas",
    "temperature",
    "humidity",
    "plant_humidity",
    "motion",
];
pub const MESSAGE_KINDS: [&str; 3] = ["voice", "image", "text"];
pub const COMMAND_KINDS: [&str; 7] = [
    "reminder",
    "lock",
    "unlock",
    "zone_add",
    "zone_del",
    "med_schedule",
    "override",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TopicClass {
    pub filter: &'static str,
    pub qos: QoS,
    pub retained: bool,
}

const fn class(filter: &'static str, qos: QoS, retained: bool) -> TopicClass {
    TopicClass {
        filter,
        qos,
        retained,
    }
}

/// Every publishable topic, first match wins.
pub const SCHEMA: [TopicClass; 13] = [
    class("home/sensor/+/+", QoS::AtLeastOnce, true),
    class(POSITION, QoS::AtMostOnce, true),
    class(PULSE, QoS::AtLeastOnce, true),
    class(GAME_SCORE, QoS::AtLeastOnce, true),
    class("assistant/message/+", QoS::AtLeastOnce, false),
    class("assistant/actuator/+", QoS::AtLeastOnce, true),
    class(MODE, QoS::AtLeastOnce, true),
    class(COMMAND_ACK, QoS::AtLeastOnce, false),
    class("caregiver/command/+", QoS::AtLeastOnce, false),
    class(NOTIFICATION, QoS::AtLeastOnce, false),
    class("sys/latency/+", QoS::AtLeastOnce, false),
    class("sys/presence/+", QoS::AtLeastOnce, true),
    class(BARRIER, QoS::AtLeastOnce, false),
];

pub fn class_of(topic: &str) -> Option<TopicClass> {
    SCHEMA.iter().copied().find(|c| matches(topic, c.filter))
}

pub fn validate_filter(filter: &str) -> Result<(), BusError> {
    if valid_filter(filter) {
        Ok(())
    } else {
        Err(BusError::InvalidFilter(filter.to_string()))
    }
}

pub fn validate_topic(topic: &str) -> Result<TopicClass, BusError> {
    if topic.is_empty() || !valid_topic(topic) {
        return Err(BusError::InvalidTopic(topic.to_string()));
    }
    class_of(topic).ok_or_else(|| BusError::InvalidTopic(topic.to_string()))
}

pub fn sensor_topic(device: &str, kind: &str) -> String {
    format!("home/sensor/{device}/{kind}")
}

/// `(device, kind)` of a sensor topic.
pub fn parse_sensor_topic(topic: &str) -> Option<(&str, &str)> {
    let rest = topic.strip_prefix("home/sensor/")?;
    let (device, kind) = rest.split_once('/')?;
    (!device.is_empty() && SENSOR_KINDS.contains(&kind)).then_some((device, kind))
}

pub fn message_topic(kind: &str) -> String {
    format!("assistant/message/{kind}")
}

pub fn actuator_topic(id: &str) -> String {
    format!("assistant/actuator/{id}")
}

pub fn command_topic(kind: &str) -> String {
    format!("caregiver/command/{kind}")
}

pub fn parse_command_topic(topic: &str) -> Option<&str> {
    topic
        .strip_prefix("caregiver/command/")
        .filter(|k| COMMAND_KINDS.contains(k))
}

pub fn latency_topic(probe: &str) -> String {
    format!("sys/latency/{probe}")
}

pub fn presence_topic(subscriber: &str) -> String {
    format!("sys/presence/{subscriber}")
}
