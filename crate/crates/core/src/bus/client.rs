use std::collections::VecDeque;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use bytes::Bytes;
use rumqttc::{AsyncClient, Event, LastWill, MqttOptions, NetworkOptions, Packet, QoS};
use tokio::sync::{watch, Notify};
use tokio::task::JoinHandle;

use super::topics::{validate_filter, validate_topic};
use super::BusError;

#[derive(Debug, Clone, PartialEq)]
pub struct Incoming {
    pub topic: String,
    pub payload: Bytes,
    pub qos: QoS,
    pub retained: bool,
}

/// Bounded handoff between the network reader and one consumer.
///
/// When full, a QoS 0 arrival evicts the oldest queued QoS 0 message (counted
/// in `dropped`); anything else waits for room.
pub struct Inbox {
    queue: Mutex<VecDeque<Incoming>>,
    capacity: usize,
    readable: Notify,
    writable: Notify,
    dropped: AtomicU64,
    closed: Mutex<bool>,
}

impl Inbox {
    pub fn new(capacity: usize) -> Arc<Self> {
        Arc::new(Inbox {
            queue: Mutex::new(VecDeque::new()),
            capacity: capacity.max(1),
            readable: Notify::new(),
            writable: Notify::new(),
            dropped: AtomicU64::new(0),
            closed: Mutex::new(false),
        })
    }

    pub async fn push(&self, msg: Incoming) {
        loop {
            {
                let mut q = self.queue.lock().unwrap();
                if q.len() < self.capacity {
                    q.push_back(msg);
                    self.readable.notify_one();
                    return;
                }
                if msg.qos == QoS::AtMostOnce {
                    if let Some(i) = q.iter().position(|m| m.qos == QoS::AtMostOnce) {
                        q.remove(i);
                        q.push_back(msg);
                        self.dropped.fetch_add(1, Ordering::Relaxed);
                        self.readable.notify_one();
                        return;
                    }
                }
            }
            self.writable.notified().await;
        }
    }

    /// Next message, or None once closed and empty.
    pub async fn recv(&self) -> Option<Incoming> {
        loop {
            {
                let mut q = self.queue.lock().unwrap();
                if let Some(m) = q.pop_front() {
                    self.writable.notify_one();
                    return Some(m);
                }
                if *self.closed.lock().unwrap() {
                    return None;
                }
            }
            self.readable.notified().await;
        }
    }

    pub fn try_recv(&self) -> Option<Incoming> {
        let m = self.queue.lock().unwrap().pop_front();
        if m.is_some() {
            self.writable.notify_one();
        }
        m
    }

    pub fn dropped(&self) -> u64 {
        self.dropped.load(Ordering::Relaxed)
    }

    pub fn close(&self) {
        *self.closed.lock().unwrap() = true;
        self.readable.notify_waiters();
        self.readable.notify_one();
    }
}

#[derive(Debug, Clone)]
pub struct BusOptions {
    pub url: String,
    pub client_id: String,
    pub subscriptions: Vec<String>,
    /// Last will as (topic, payload), published retained.
    pub will: Option<(String, Vec<u8>)>,
    pub inbox_capacity: usize,
}

impl BusOptions {
    pub fn new(url: impl Into<String>, client_id: impl Into<String>) -> Self {
        BusOptions {
            url: url.into(),
            client_id: client_id.into(),
            subscriptions: Vec::new(),
            will: None,
            inbox_capacity: 4096,
        }
    }

    pub fn subscribe(mut self, filter: impl Into<String>) -> Self {
        self.subscriptions.push(filter.into());
        self
    }

    pub fn will(mut self, topic: impl Into<String>, payload: Vec<u8>) -> Self {
        self.will = Some((topic.into(), payload));
        self
    }
}

/// Parses `tcp://host:port` or `mqtt://host:port` (port defaults to 1883).
pub fn parse_broker_url(url: &str) -> Result<(String, u16), BusError> {
    let parsed = url::Url::parse(url).map_err(|e| BusError::Connection(format!("{url}: {e}")))?;
    if !matches!(parsed.scheme(), "tcp" | "mqtt") {
        return Err(BusError::Connection(format!("{url}: unsupported scheme")));
    }
    let host = parsed
        .host_str()
        .ok_or_else(|| BusError::Connection(format!("{url}: missing host")))?;
    Ok((host.to_string(), parsed.port().unwrap_or(1883)))
}

/// A connected MQTT session that reconnects on its own and re-subscribes
/// after every reconnect. `connect` returns once subscriptions are acked.
pub struct BusClient {
    client: AsyncClient,
    inbox: Arc<Inbox>,
    connected: watch::Receiver<bool>,
    task: JoinHandle<()>,
}

impl BusClient {
    pub async fn connect(opts: BusOptions) -> Result<Self, BusError> {
        for f in &opts.subscriptions {
            validate_filter(f)?;
        }
        let (host, port) = parse_broker_url(&opts.url)?;
        let mut mqtt = MqttOptions::new(&opts.client_id, host, port);
        mqtt.set_keep_alive(Duration::from_secs(5));
        mqtt.set_clean_session(true);
        mqtt.set_max_packet_size(256 * 1024, 256 * 1024);
        if let Some((topic, payload)) = &opts.will {
            mqtt.set_last_will(LastWill::new(
                topic,
                payload.clone(),
                QoS::AtLeastOnce,
                true,
            ));
        }
        let (client, mut eventloop) = AsyncClient::new(mqtt, 1024);
        let mut net = NetworkOptions::new();
        net.set_tcp_nodelay(true);
        eventloop.set_network_options(net);
        let inbox = Inbox::new(opts.inbox_capacity);
        let (conn_tx, connected) = watch::channel(false);

        let subs = opts.subscriptions.clone();
        let sub_client = client.clone();
        let task_inbox = inbox.clone();
        let task = tokio::spawn(async move {
            let mut acks = 0;
            loop {
                match eventloop.poll().await {
                    Ok(Event::Incoming(Packet::ConnAck(_))) => {
                        acks = 0;
                        for f in &subs {
                            let _ = sub_client.try_subscribe(f.clone(), QoS::AtLeastOnce);
                        }
                        if subs.is_empty() {
                            let _ = conn_tx.send(true);
                        }
                    }
                    Ok(Event::Incoming(Packet::SubAck(ack))) => {
                        if ack
                            .return_codes
                            .iter()
                            .any(|c| matches!(c, rumqttc::SubscribeReasonCode::Failure))
                        {
                            tracing::warn!("broker refused a subscription");
                        }
                        acks += 1;
                        if acks == subs.len() {
                            let _ = conn_tx.send(true);
                        }
                    }
                    Ok(Event::Incoming(Packet::Publish(p))) => {
                        task_inbox
                            .push(Incoming {
                                topic: p.topic,
                                payload: p.payload,
                                qos: p.qos,
                                retained: p.retain,
                            })
                            .await;
                    }
                    Ok(Event::Outgoing(rumqttc::Outgoing::Disconnect)) => break,
                    Ok(_) => {}
                    Err(rumqttc::ConnectionError::RequestsDone) => break,
                    Err(e) => {
                        tracing::debug!("bus connection: {e}");
                        let _ = conn_tx.send(false);
                        tokio::time::sleep(Duration::from_millis(100)).await;
                    }
                }
            }
            task_inbox.close();
        });

        let mut client_conn = connected.clone();
        let ok = tokio::time::timeout(Duration::from_secs(5), client_conn.wait_for(|c| *c)).await;
        if !matches!(ok, Ok(Ok(_))) {
            task.abort();
            return Err(BusError::Connection(format!("{}: no CONNACK", opts.url)));
        }
        Ok(BusClient {
            client,
            inbox,
            connected,
            task,
        })
    }

    /// Resolves once the session is connected and every subscription is
    /// acknowledged.
    pub async fn ready(&self) {
        let mut rx = self.connected.clone();
        let _ = rx.wait_for(|c| *c).await;
    }

    /// Publishes with the topic table's QoS and retain flag.
    pub async fn publish(&self, topic: &str, payload: impl Into<Vec<u8>>) -> Result<(), BusError> {
        let class = validate_topic(topic)?;
        self.publish_with(topic, class.qos, class.retained, payload)
            .await
    }

    pub async fn publish_with(
        &self,
        topic: &str,
        qos: QoS,
        retain: bool,
        payload: impl Into<Vec<u8>>,
    ) -> Result<(), BusError> {
        self.client
            .publish(topic, qos, retain, payload)
            .await
            .map_err(|e| BusError::Connection(e.to_string()))
    }

    pub fn inbox(&self) -> Arc<Inbox> {
        self.inbox.clone()
    }

    pub async fn recv(&self) -> Option<Incoming> {
        self.inbox.recv().await
    }

    pub fn is_connected(&self) -> bool {
        *self.connected.borrow()
    }

    /// Graceful DISCONNECT; the will is not published.
    pub async fn disconnect(self) {
        let _ = self.client.disconnect().await;
        let deadline = tokio::time::Instant::now() + Duration::from_secs(2);
        while !self.task.is_finished() && tokio::time::Instant::now() < deadline {
            tokio::time::sleep(Duration::from_millis(5)).await;
        }
    }

    /// Drops the connection without DISCONNECT so the broker publishes the will.
    pub fn abort(self) {
        self.task.abort();
        self.inbox.close();
    }
}

impl Drop for BusClient {
    fn drop(&mut self) {
        self.task.abort();
    }
}
