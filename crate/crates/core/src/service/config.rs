use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::sim::DangerZone;

/// A logical endpoint counted in the active-device bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Endpoint {
    pub id: String,
    /// Quiesced while semi-automated.
    #[serde(default)]
    pub reminder_support: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    pub rate_hz: f64,
    pub activation_threshold: f64,
    /// Identical (rule, channel, value) dispatches are not repeated within this.
    pub refractory_s: f64,
    /// Silence on the bus longer than this raises one caregiver notification.
    pub stale_link_s: f64,
    /// Per-variable staleness budgets; 0 means never stale.
    pub stale_after_s: BTreeMap<String, f64>,
    pub default_stale_s: f64,
    /// Rules that read an intent to leave; suppressed while the door is locked.
    pub exit_intent_rules: Vec<u32>,
    pub door_actuator: String,
    /// Rule that scheduled medication reminders are attributed to.
    pub medication_rule: u32,
    /// Message ids sent when the patient enters a danger zone.
    pub zone_alert_voice: Option<i64>,
    pub zone_alert_image: Option<i64>,
    /// First rule id handed to caregiver-drawn danger zones.
    pub zone_rule_base: u32,
    pub endpoints: Vec<Endpoint>,
    /// Zones known before any caregiver edits.
    pub zones: Vec<DangerZone>,
    /// Subscribers whose traffic is held while they are offline.
    pub subscribers: Vec<String>,
    pub outbox_capacity: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        let stale = [
            ("position", 3.0),
            ("rain", 150.0),
            ("flame", 150.0),
            ("gas", 150.0),
            ("temperature", 30.0),
            ("humidity", 30.0),
            ("plant_humidity", 30.0),
            ("movement", 60.0),
            ("game_score", 0.0),
            ("worn", 30.0),
        ];
        let plain = [
            "terrace-rain",
            "kitchen-flame",
            "kitchen-gas",
            "tvroom-temp",
            "tvroom-humidity",
            "tag-position",
            "tag-pulse",
            "tag-motion",
            "ar-game",
            "stove-relay",
            "door",
            "glasses-voice",
            "glasses-image",
            "glasses-text",
        ];
        let reminder = [
            "plant-pot",
            "pill-dispenser",
            "hall-display",
            "kitchen-display",
            "bedroom-display",
            "kitchen-speaker",
            "bedroom-speaker",
            "wardrobe-light",
        ];
        let endpoints = plain
            .iter()
            .map(|id| (id, false))
            .chain(reminder.iter().map(|id| (id, true)))
            .map(|(id, reminder_support)| Endpoint {
                id: id.to_string(),
                reminder_support,
            })
            .collect();
        ServiceConfig {
            rate_hz: 2.0,
            activation_threshold: crate::fuzzy::DEFAULT_THRESHOLD,
            refractory_s: 60.0,
            stale_link_s: 10.0,
            stale_after_s: stale.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            default_stale_s: 30.0,
            exit_intent_rules: vec![1],
            door_actuator: "door".into(),
            medication_rule: 14,
            zone_alert_voice: Some(8),
            zone_alert_image: None,
            zone_rule_base: 901,
            endpoints,
            zones: Vec::new(),
            subscribers: vec!["caregiver".into(), "patient".into()],
            outbox_capacity: 10_000,
        }
    }
}

impl ServiceConfig {
    /// Staleness budget in ms for a variable, None when it never goes stale.
    pub fn stale_after_ms(&self, variable: &str) -> Option<u64> {
        let base = variable.split('(').next().unwrap_or(variable);
        let key = match base {
            "distance" | "heading" => "position",
            other => other,
        };
        let s = self
            .stale_after_s
            .get(key)
            .copied()
            .unwrap_or(self.default_stale_s);
        (s > 0.0).then(|| (s * 1000.0).round() as u64)
    }

    pub fn clamped_rate(&self) -> f64 {
        clamp_rate(self.rate_hz)
    }
}

pub const MIN_RATE_HZ: f64 = 0.5;
pub const MAX_RATE_HZ: f64 = 2.0;

/// Keeps the control loop within 0.5 to 2 Hz, warning when it has to.
pub fn clamp_rate(rate_hz: f64) -> f64 {
    let clamped = if rate_hz.is_finite() {
        rate_hz.clamp(MIN_RATE_HZ, MAX_RATE_HZ)
    } else {
        MAX_RATE_HZ
    };
    if clamped != rate_hz {
        tracing::warn!("control rate {rate_hz} Hz clamped to {clamped} Hz");
    }
    clamped
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_counts() {
        let c = ServiceConfig::default();
        assert_eq!(c.endpoints.len(), 22);
        assert_eq!(
            c.endpoints.iter().filter(|e| !e.reminder_support).count(),
            14
        );
    }

    #[test]
    fn rate_clamp() {
        assert_eq!(clamp_rate(10.0), 2.0);
        assert_eq!(clamp_rate(0.1), 0.5);
        assert_eq!(clamp_rate(1.0), 1.0);
        assert_eq!(clamp_rate(f64::NAN), 2.0);
    }

    #[test]
    fn staleness_lookup() {
        let c = ServiceConfig::default();
        assert_eq!(c.stale_after_ms("heading(object1)"), Some(3000));
        assert_eq!(c.stale_after_ms("game_score"), None);
        assert_eq!(c.stale_after_ms("something_new"), Some(30_000));
    }

    #[test]
    fn config_json_round_trip_with_partial_input() {
        let c: ServiceConfig = serde_json::from_str(r#"{"rate_hz":1.0}"#).unwrap();
        assert_eq!(c.rate_hz, 1.0);
        assert_eq!(c.endpoints.len(), 22);
        let back: ServiceConfig =
            serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
