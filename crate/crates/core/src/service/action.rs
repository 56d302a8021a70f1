use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rulebook::CommandClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    Voice,
    Image,
    Text,
}

impl MessageKind {
    pub const ALL: [MessageKind; 3] = [MessageKind::Voice, MessageKind::Image, MessageKind::Text];

    pub fn as_str(self) -> &'static str {
        match self {
            MessageKind::Voice => "voice",
            MessageKind::Image => "image",
            MessageKind::Text => "text",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Output variable carrying this channel's message ids.
    pub fn variable(self) -> &'static str {
        match self {
            MessageKind::Voice => "voice_message",
            MessageKind::Image => "image_message",
            MessageKind::Text => "text_message",
        }
    }

    pub fn from_variable(v: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.variable() == v)
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Why an action happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Rule(u32),
    Caregiver,
    Probe(u64),
}

impl Provenance {
    /// Rule id carried on the wire, 0 for non-rule actions.
    pub fn rule_id(self) -> u32 {
        match self {
            Provenance::Rule(id) => id,
            _ => 0,
        }
    }

    pub fn source(self) -> Option<&'static str> {
        match self {
            Provenance::Rule(_) => None,
            Provenance::Caregiver => Some("caregiver"),
            Provenance::Probe(_) => Some("probe"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Automated,
    #[serde(rename = "semi")]
    SemiAutomated,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Automated => "automated",
            Mode::SemiAutomated => "semi",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "cause", content = "value")]
pub enum ModeCause {
    Initial,
    GameScore(f64),
    Caregiver,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    Message {
        kind: MessageKind,
        id: i64,
        by: Provenance,
        #[serde(skip_serializing_if = "Option::is_none")]
        class: Option<CommandClass>,
    },
    Actuator {
        id: String,
        on: bool,
        by: Provenance,
        #[serde(skip_serializing_if = "Option::is_none")]
        class: Option<CommandClass>,
    },
    Notify {
        seq: u64,
        kind: String,
        detail: String,
    },
    ModeChange {
        to: Mode,
        cause: ModeCause,
        active_endpoints: usize,
    },
}

impl Action {
    pub fn class(&self) -> Option<CommandClass> {
        match self {
            Action::Message { class, .. } | Action::Actuator { class, .. } => *class,
            _ => None,
        }
    }

    pub fn provenance(&self) -> Option<Provenance> {
        match self {
            Action::Message { by, .. } | Action::Actuator { by, .. } => Some(*by),
            _ => None,
        }
    }
}

/// One line of the dispatch log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchRecord {
    pub t: u64,
    #[serde(flatten)]
    pub action: Action,
}

impl DispatchRecord {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_line_shape() {
        let r = DispatchRecord {
            t: 5,
            action: Action::Message {
                kind: MessageKind::Image,
                id: 3,
                by: Provenance::Rule(1),
                class: Some(CommandClass::Reminder),
            },
        };
        assert_eq!(
            r.to_line(),
            r#"{"t":5,"action":"message","kind":"image","id":3,"by":{"rule":1},"class":"reminder"}"#
        );
        let back: DispatchRecord = serde_json::from_str(&r.to_line()).unwrap();
        assert_eq!(back, r);
        let c = DispatchRecord {
            t: 1,
            action: Action::Message {
                kind: MessageKind::Voice,
                id: 1,
                by: Provenance::Caregiver,
                class: None,
            },
        };
        assert!(c.to_line().contains(r#""by":"caregiver""#));
    }

    #[test]
    fn kinds_and_variables() {
        for k in MessageKind::ALL {
            assert_eq!(MessageKind::from_variable(k.variable()), Some(k));
            assert_eq!(MessageKind::parse(k.as_str()), Some(k));
        }
        assert_eq!(Provenance::Caregiver.rule_id(), 0);
        assert_eq!(Provenance::Rule(7).source(), None);
    }
}
