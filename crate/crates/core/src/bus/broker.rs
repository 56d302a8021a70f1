//! Minimal in-process MQTT 3.1.1 broker for tests, benches and local runs.
//!
//! Supports QoS 0 and 1, retained messages, wildcards, last will, and clean
//! sessions only. QoS 2 publishes are downgraded to QoS 1.

use std::collections::{BTreeMap, HashMap};
use std::io;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use bytes::BytesMut;
use rumqttc::mqttbytes::{matches, valid_filter};
use rumqttc::{
    ConnAck, ConnectReturnCode, LastWill, Packet, PubAck, Publish, QoS, SubAck,
    SubscribeReasonCode, UnsubAck,
};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::mpsc;
use tokio::task::{JoinHandle, JoinSet};

const MAX_PACKET: usize = 256 * 1024;

#[derive(Default)]
struct State {
    next_conn: u64,
    sessions: HashMap<u64, Session>,
    retained: BTreeMap<String, Publish>,
}

struct Session {
    client_id: String,
    tx: mpsc::UnboundedSender<Packet>,
    subs: Vec<(String, QoS)>,
    next_pkid: u16,
}

impl Session {
    fn deliver(&mut self, publish: &Publish, granted: QoS, retain: bool) {
        let mut out = publish.clone();
        out.qos = min_qos(publish.qos, granted);
        out.retain = retain;
        out.dup = false;
        out.pkid = 0;
        if out.qos != QoS::AtMostOnce {
            self.next_pkid = self.next_pkid.checked_add(1).unwrap_or(1);
            out.pkid = self.next_pkid;
        }
        let _ = self.tx.send(Packet::Publish(out));
    }
}

fn min_qos(a: QoS, b: QoS) -> QoS {
    if (a as u8) <= (b as u8) {
        a
    } else {
        b
    }
}

pub struct LoopbackBroker {
    addr: SocketAddr,
    task: JoinHandle<()>,
}

impl LoopbackBroker {
    /// Binds `addr` (use port 0 for an ephemeral port) and starts serving.
    pub async fn start(addr: &str) -> io::Result<Self> {
        let listener = TcpListener::bind(addr).await?;
        let addr = listener.local_addr()?;
        let state = Arc::new(Mutex::new(State::default()));
        let task = tokio::spawn(async move {
            let mut conns = JoinSet::new();
            loop {
                tokio::select! {
                    accepted = listener.accept() => {
                        let Ok((stream, _)) = accepted else { continue };
                        let _ = stream.set_nodelay(true);
                        conns.spawn(serve(stream, state.clone()));
                    }
                    Some(_) = conns.join_next(), if !conns.is_empty() => {}
                }
            }
        });
        Ok(LoopbackBroker { addr, task })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("tcp://{}", self.addr)
    }

    /// Stops accepting and drops every connection without sending wills.
    pub fn shutdown(self) {
        self.task.abort();
    }
}

impl Drop for LoopbackBroker {
    fn drop(&mut self) {
        self.task.abort();
    }
}

async fn serve(stream: TcpStream, state: Arc<Mutex<State>>) {
    let (mut rd, mut wr) = stream.into_split();
    let mut buf = BytesMut::with_capacity(4096);

    let connect = loop {
        match Packet::read(&mut buf, MAX_PACKET) {
            Ok(Packet::Connect(c)) => break c,
            Ok(_) => return,
            Err(rumqttc::mqttbytes::Error::InsufficientBytes(_)) => {
                if rd.read_buf(&mut buf).await.unwrap_or(0) == 0 {
                    return;
                }
            }
            Err(_) => return,
        }
    };

    let (tx, mut rx) = mpsc::unbounded_channel::<Packet>();
    let conn_id = {
        let mut st = state.lock().unwrap();
        // a reconnect with the same client id takes over the old session
        st.sessions.retain(|_, s| s.client_id != connect.client_id);
        st.next_conn += 1;
        let id = st.next_conn;
        st.sessions.insert(
            id,
            Session {
                client_id: connect.client_id.clone(),
                tx: tx.clone(),
                subs: Vec::new(),
                next_pkid: 0,
            },
        );
        id
    };
    let _ = tx.send(Packet::ConnAck(ConnAck::new(
        ConnectReturnCode::Success,
        false,
    )));

    let writer = tokio::spawn(async move {
        let mut out = BytesMut::with_capacity(4096);
        while let Some(packet) = rx.recv().await {
            out.clear();
            if packet.write(&mut out, MAX_PACKET).is_err() {
                continue;
            }
            if wr.write_all(&out).await.is_err() {
                break;
            }
            if matches!(packet, Packet::Disconnect) {
                break;
            }
        }
    });

    let will = connect.last_will.clone();
    let mut graceful = false;
    'conn: loop {
        loop {
            match Packet::read(&mut buf, MAX_PACKET) {
                Ok(packet) => {
                    if !handle(packet, conn_id, &tx, &state) {
                        graceful = true;
                        break 'conn;
                    }
                }
                Err(rumqttc::mqttbytes::Error::InsufficientBytes(_)) => break,
                Err(_) => break 'conn,
            }
        }
        match rd.read_buf(&mut buf).await {
            Ok(0) | Err(_) => break,
            Ok(_) => {}
        }
    }

    let removed = {
        let mut st = state.lock().unwrap();
        st.sessions.remove(&conn_id).is_some()
    };
    if removed && !graceful {
        if let Some(w) = will {
            publish_will(&state, w);
        }
    }
    drop(tx);
    let _ = writer.await;
}

/// Returns false on DISCONNECT.
fn handle(
    packet: Packet,
    conn_id: u64,
    tx: &mpsc::UnboundedSender<Packet>,
    state: &Arc<Mutex<State>>,
) -> bool {
    match packet {
        Packet::Publish(mut p) => {
            if p.qos == QoS::ExactlyOnce {
                p.qos = QoS::AtLeastOnce;
            }
            if p.qos == QoS::AtLeastOnce {
                let _ = tx.send(Packet::PubAck(PubAck::new(p.pkid)));
            }
            route(state, p);
        }
        Packet::Subscribe(sub) => {
            let mut st = state.lock().unwrap();
            let State {
                sessions, retained, ..
            } = &mut *st;
            let Some(session) = sessions.get_mut(&conn_id) else {
                return true;
            };
            let mut codes = Vec::new();
            for f in &sub.filters {
                if !valid_filter(&f.path) {
                    codes.push(SubscribeReasonCode::Failure);
                    continue;
                }
                let qos = min_qos(f.qos, QoS::AtLeastOnce);
                session.subs.retain(|(p, _)| p != &f.path);
                session.subs.push((f.path.clone(), qos));
                codes.push(SubscribeReasonCode::Success(qos));
            }
            let _ = session
                .tx
                .send(Packet::SubAck(SubAck::new(sub.pkid, codes)));
            for f in sub.filters.iter().filter(|f| valid_filter(&f.path)) {
                let qos = min_qos(f.qos, QoS::AtLeastOnce);
                for (topic, p) in retained.iter() {
                    if matches(topic, &f.path) {
                        session.deliver(p, qos, true);
                    }
                }
            }
        }
        Packet::Unsubscribe(unsub) => {
            let mut st = state.lock().unwrap();
            if let Some(session) = st.sessions.get_mut(&conn_id) {
                session.subs.retain(|(p, _)| !unsub.topics.contains(p));
                let _ = session.tx.send(Packet::UnsubAck(UnsubAck::new(unsub.pkid)));
            }
        }
        Packet::PingReq => {
            let _ = tx.send(Packet::PingResp);
        }
        Packet::Disconnect => return false,
        // acks for our outgoing QoS 1 deliveries; nothing is redelivered
        _ => {}
    }
    true
}

fn route(state: &Arc<Mutex<State>>, p: Publish) {
    let mut st = state.lock().unwrap();
    if p.retain {
        if p.payload.is_empty() {
            st.retained.remove(&p.topic);
        } else {
            st.retained.insert(p.topic.clone(), p.clone());
        }
    }
    let mut ids: Vec<u64> = st.sessions.keys().copied().collect();
    ids.sort_unstable();
    for id in ids {
        let session = st.sessions.get_mut(&id).expect("listed");
        let granted = session
            .subs
            .iter()
            .filter(|(f, _)| matches(&p.topic, f))
            .map(|&(_, q)| q)
            .max_by_key(|q| *q as u8);
        if let Some(q) = granted {
            session.deliver(&p, q, false);
        }
    }
}

fn publish_will(state: &Arc<Mutex<State>>, w: LastWill) {
    let mut p = Publish::from_bytes(w.topic, w.qos, w.message);
    p.retain = w.retain;
    route(state, p);
}

#[cfg(test)]
mod tests {
    use super::*;
    use rumqttc::{AsyncClient, Event, MqttOptions};
    use std::time::Duration;

    async fn client(id: &str, port: u16) -> (AsyncClient, rumqttc::EventLoop) {
        let mut opts = MqttOptions::new(id, "127.0.0.1", port);
        opts.set_keep_alive(Duration::from_secs(5));
        AsyncClient::new(opts, 64)
    }

    async fn next_publish(el: &mut rumqttc::EventLoop) -> Publish {
        loop {
            if let Event::Incoming(Packet::Publish(p)) =
                tokio::time::timeout(Duration::from_secs(5), el.poll())
                    .await
                    .unwrap()
                    .unwrap()
            {
                return p;
            }
        }
    }

    async fn until_suback(el: &mut rumqttc::EventLoop) {
        loop {
            if let Event::Incoming(Packet::SubAck(_)) = el.poll().await.unwrap() {
                return;
            }
        }
    }

    #[tokio::test]
    async fn retained_then_live() {
        let broker = LoopbackBroker::start("127.0.0.1:0").await.unwrap();
        let port = broker.addr().port();
        let (pubc, mut pel) = client("pub", port).await;
        tokio::spawn(async move { while pel.poll().await.is_ok() {} });
        pubc.publish("home/position/tag", QoS::AtMostOnce, true, "p1")
            .await
            .unwrap();
        tokio::time::sleep(Duration::from_millis(50)).await;

        let (subc, mut sel) = client("sub", port).await;
        subc.subscribe("home/#", QoS::AtLeastOnce).await.unwrap();
        until_suback(&mut sel).await;
        let first = next_publish(&mut sel).await;
        assert_eq!(&first.payload[..], b"p1");
        assert!(first.retain);

        pubc.publish("home/sensor/k/gas", QoS::AtLeastOnce, false, "g")
            .await
            .unwrap();
        let live = next_publish(&mut sel).await;
        assert_eq!(live.topic, "home/sensor/k/gas");
        assert_eq!(live.qos, QoS::AtLeastOnce);
        assert!(!live.retain);
    }

    #[tokio::test]
    async fn will_fires_on_abrupt_close() {
        let broker = LoopbackBroker::start("127.0.0.1:0").await.unwrap();
        let port = broker.addr().port();
        let (watch, mut wel) = client("watch", port).await;
        watch
            .subscribe("sys/presence/+", QoS::AtLeastOnce)
            .await
            .unwrap();
        until_suback(&mut wel).await;

        let mut opts = MqttOptions::new("caregiver", "127.0.0.1", port);
        opts.set_last_will(LastWill::new(
            "sys/presence/caregiver",
            "gone",
            QoS::AtLeastOnce,
            true,
        ));
        let (_c, mut el) = AsyncClient::new(opts, 8);
        loop {
            if let Event::Incoming(Packet::ConnAck(_)) = el.poll().await.unwrap() {
                break;
            }
        }
        drop(el);
        let p = next_publish(&mut wel).await;
        assert_eq!(&p.payload[..], b"gone");
    }
}
