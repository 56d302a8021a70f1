use std::collections::{BTreeMap, BTreeSet};
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bus::{topics, OfflineQueue};

/// A message the service wants on the bus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outgoing {
    pub topic: String,
    pub payload: String,
}

impl Outgoing {
    pub fn new(topic: impl Into<String>, payload: Vec<u8>) -> Self {
        Outgoing {
            topic: topic.into(),
            payload: String::from_utf8(payload).expect("bus payloads are JSON"),
        }
    }
}

/// Which store-and-forward subscriber a topic is meant for.
pub fn subscriber_of(topic: &str) -> Option<&'static str> {
    if topic == topics::NOTIFICATION {
        Some("caregiver")
    } else if topic.starts_with("assistant/message/") {
        Some("patient")
    } else {
        None
    }
}

/// Holds traffic for offline subscribers in durable FIFO journals.
#[derive(Debug)]
pub struct Outbox {
    queues: BTreeMap<String, OfflineQueue>,
    offline: BTreeSet<String>,
}

impl Outbox {
    pub fn open(
        dir: &Path,
        subscribers: &[String],
        capacity: usize,
        offline: BTreeSet<String>,
    ) -> io::Result<Self> {
        let mut queues = BTreeMap::new();
        for s in subscribers {
            queues.insert(s.clone(), OfflineQueue::open(dir, s, capacity)?);
        }
        Ok(Outbox { queues, offline })
    }

    pub fn is_online(&self, subscriber: &str) -> bool {
        !self.offline.contains(subscriber)
    }

    pub fn offline(&self) -> &BTreeSet<String> {
        &self.offline
    }

    pub fn pending(&self, subscriber: &str) -> usize {
        self.queues.get(subscriber).map_or(0, |q| q.len())
    }

    pub fn dropped(&self, subscriber: &str) -> u64 {
        self.queues.get(subscriber).map_or(0, |q| q.dropped())
    }

    /// Returns the message when it can go out now; otherwise it is journaled.
    pub fn route(&mut self, msg: Outgoing) -> io::Result<Option<Outgoing>> {
        let Some(sub) = subscriber_of(&msg.topic) else {
            return Ok(Some(msg));
        };
        match self.queues.get_mut(sub) {
            Some(q) if self.offline.contains(sub) => {
                q.enqueue(&serde_json::to_vec(&msg).expect("outgoing serializes"))?;
                Ok(None)
            }
            _ => Ok(Some(msg)),
        }
    }

    /// Marks a subscriber up or down. Coming up hands back its backlog in
    /// the order it was queued.
    pub fn set_online(&mut self, subscriber: &str, online: bool) -> io::Result<Vec<Outgoing>> {
        if !self.queues.contains_key(subscriber) {
            return Ok(Vec::new());
        }
        if !online {
            self.offline.insert(subscriber.to_string());
            return Ok(Vec::new());
        }
        self.offline.remove(subscriber);
        let q = self.queues.get_mut(subscriber).expect("checked");
        q.drain()?
            .into_iter()
            .map(|bytes| {
                serde_json::from_slice(&bytes)
                    .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
            })
            .collect()
    }
}
