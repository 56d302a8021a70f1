//! Plays the caregiver console: starts the service with its WebSocket
//! bridge, locks the door and prints the frames that come back.
//!
//! ```text
//! cargo run --example console
//! ```

use std::time::Duration;

use fogmind::bus::LoopbackBroker;
use fogmind::service::{serve, CommandFrame, Frame, ServeOptions};
use futures_util::{SinkExt, StreamExt};
use tokio_tungstenite::tungstenite::Message;

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let broker = LoopbackBroker::start("127.0.0.1:0").await?;
    let dir = tempfile::tempdir()?;
    let mut opts = ServeOptions::new(broker.url(), dir.path());
    opts.ws = Some("127.0.0.1:0".parse()?);
    let svc = serve(opts).await?;
    let addr = svc.ws_addr().ok_or("bridge not bound")?;

    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}")).await?;
    let lock = Frame::Command(CommandFrame {
        kind: "lock".into(),
        payload: serde_json::Value::Null,
        nonce: Some("console-1".into()),
    });
    ws.send(Message::text(lock.to_text())).await?;

    let deadline = tokio::time::sleep(Duration::from_secs(2));
    tokio::pin!(deadline);
    loop {
        tokio::select! {
            _ = &mut deadline => break,
            msg = ws.next() => {
                let Some(Ok(Message::Text(text))) = msg else { break };
                match serde_json::from_str::<Frame>(&text)? {
                    Frame::Snapshot(s) => println!("snapshot t={} mode={:?} door_locked={}", s.t, s.mode, s.door_locked),
                    other => println!("{}", other.to_text()),
                }
            }
        }
    }
    ws.close(None).await.ok();
    let summary = svc.stop().await?;
    println!(
        "{} ticks, {} dispatch lines",
        summary.ticks,
        summary.lines.len()
    );
    broker.shutdown();
    Ok(())
}
