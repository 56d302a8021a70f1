use std::collections::BTreeMap;
use std::io;
use std::net::SocketAddr;

use futures_util::{SinkExt, StreamExt};
use serde::{Deserialize, Serialize};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{broadcast, mpsc, watch};
use tokio::task::JoinHandle;
use tokio_tungstenite::tungstenite::Message;

use crate::bus::codec::CommandAck;
use crate::bus::topics;
use crate::rulebook::ObjectDecl;
use crate::sim::Pose;

use super::state::ZoneEntry;
use super::{DispatchRecord, Engine, Mode};

/// What the console needs to draw the home.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsoleSnapshot {
    pub t: u64,
    pub mode: Mode,
    pub active_endpoints: usize,
    pub pose: Option<Pose>,
    pub worn: Option<bool>,
    pub inputs: BTreeMap<String, f64>,
    pub stale: Vec<String>,
    pub door_locked: bool,
    pub zones: Vec<ZoneEntry>,
    pub objects: Vec<ObjectDecl>,
}

impl ConsoleSnapshot {
    pub fn of(engine: &Engine, now_ms: u64) -> Self {
        let snap = engine.snapshot(now_ms);
        ConsoleSnapshot {
            t: now_ms,
            mode: engine.mode(),
            active_endpoints: engine.active_endpoints(),
            pose: snap.pose,
            worn: snap.worn,
            inputs: snap.inputs,
            stale: snap.stale,
            door_locked: engine.door_locked(),
            zones: engine.zones().to_vec(),
            objects: engine.rulebook().objects.clone(),
        }
    }
}

/// A console command, mirroring `caregiver/command/{kind}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandFrame {
    pub kind: String,
    #[serde(default)]
    pub payload: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonce: Option<String>,
}

impl CommandFrame {
    /// Topic and payload the command would have on the bus.
    pub fn to_message(&self) -> Result<(String, Vec<u8>), String> {
        let topic = topics::command_topic(&self.kind);
        if topics::parse_command_topic(&topic).is_none() {
            return Err(format!("unknown command `{}`", self.kind));
        }
        let mut body = match &self.payload {
            serde_json::Value::Object(m) => m.clone(),
            serde_json::Value::Null => serde_json::Map::new(),
            _ => return Err("payload must be an object".into()),
        };
        if let Some(n) = &self.nonce {
            body.insert("nonce".into(), n.clone().into());
        }
        Ok((
            topic,
            serde_json::to_vec(&body).expect("json map serializes"),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Frame {
    Snapshot(Box<ConsoleSnapshot>),
    Event(DispatchRecord),
    Ack(CommandAck),
    Command(CommandFrame),
}

impl Frame {
    pub fn to_text(&self) -> String {
        serde_json::to_string(self).expect("frames serialize")
    }
}

/// Serves console connections. Outbound frames fan out to every client;
/// commands from any client arrive on one queue.
pub struct WsBridge {
    addr: SocketAddr,
    frames: broadcast::Sender<String>,
    snapshot: watch::Sender<Option<String>>,
    task: JoinHandle<()>,
}

impl WsBridge {
    pub async fn bind(
        addr: SocketAddr,
    ) -> io::Result<(Self, mpsc::UnboundedReceiver<CommandFrame>)> {
        let listener = TcpListener::bind(addr).await?;
        let addr = listener.local_addr()?;
        let (frames, _) = broadcast::channel(1024);
        let (snapshot, _) = watch::channel(None);
        let (cmd_tx, cmd_rx) = mpsc::unbounded_channel();
        let task = {
            let frames = frames.clone();
            let snapshot = snapshot.subscribe();
            tokio::spawn(async move {
                while let Ok((stream, peer)) = listener.accept().await {
                    let rx = frames.subscribe();
                    let snap = snapshot.borrow().clone();
                    let cmd_tx = cmd_tx.clone();
                    tokio::spawn(async move {
                        if let Err(e) = serve_client(stream, rx, snap, cmd_tx).await {
                            tracing::debug!("console {peer}: {e}");
                        }
                    });
                }
            })
        };
        Ok((
            WsBridge {
                addr,
                frames,
                snapshot,
                task,
            },
            cmd_rx,
        ))
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn send(&self, frame: &Frame) {
        let text = frame.to_text();
        if matches!(frame, Frame::Snapshot(_)) {
            self.snapshot.send_replace(Some(text.clone()));
        }
        // no console connected is fine
        let _ = self.frames.send(text);
    }
}

impl Drop for WsBridge {
    fn drop(&mut self) {
        self.task.abort();
    }
}

async fn serve_client(
    stream: TcpStream,
    mut frames: broadcast::Receiver<String>,
    snapshot: Option<String>,
    commands: mpsc::UnboundedSender<CommandFrame>,
) -> Result<(), tokio_tungstenite::tungstenite::Error> {
    let mut ws = tokio_tungstenite::accept_async(stream).await?;
    if let Some(s) = snapshot {
        ws.send(Message::text(s)).await?;
    }
    loop {
        tokio::select! {
            f = frames.recv() => match f {
                Ok(text) => ws.send(Message::text(text)).await?,
                Err(broadcast::error::RecvError::Lagged(n)) => {
                    tracing::warn!("console fell behind, skipped {n} frames");
                }
                Err(broadcast::error::RecvError::Closed) => break,
            },
            m = ws.next() => match m {
                Some(Ok(Message::Text(t))) => {
                    match serde_json::from_str::<Frame>(t.as_str()) {
                        Ok(Frame::Command(c)) => {
                            let _ = commands.send(c);
                        }
                        other => {
                            let detail = match other {
                                Ok(_) => "only command frames are accepted".to_string(),
                                Err(e) => format!("bad frame: {e}"),
                            };
                            let nack = Frame::Ack(CommandAck {
                                kind: String::new(),
                                nonce: None,
                                ok: false,
                                detail,
                            });
                            ws.send(Message::text(nack.to_text())).await?;
                        }
                    }
                }
                Some(Ok(Message::Close(_))) | None => break,
                Some(Ok(_)) => {}
                Some(Err(e)) => return Err(e),
            },
        }
    }
    Ok(())
}
