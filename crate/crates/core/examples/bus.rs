//! Publishes a sensor reading through the in-process broker and decodes it
//! on the other side.
//!
//! ```text
//! cargo run --example bus
//! ```

use fogmind::bus::codec::{decode_reading, encode_reading, Reading, Value};
use fogmind::bus::topics::sensor_topic;
use fogmind::bus::{BusClient, BusOptions, LoopbackBroker};

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let broker = LoopbackBroker::start("127.0.0.1:0").await?;
    println!("broker at {}", broker.url());

    let listener =
        BusClient::connect(BusOptions::new(broker.url(), "listener").subscribe("home/sensor/+/+"))
            .await?;
    let sensor = BusClient::connect(BusOptions::new(broker.url(), "kitchen-node")).await?;

    let topic = sensor_topic("kitchen", "temperature");
    for (seq, celsius) in [(1, 21.5), (2, 22.0), (3, 34.2)] {
        let r = Reading {
            topic: topic.clone(),
            value: Value::Real(celsius),
            unit: "C".into(),
            t: 1_000 * seq,
            seq,
            device: "kitchen".into(),
            worn: None,
        };
        sensor.publish(&topic, encode_reading(&r)?).await?;
    }
    for _ in 0..3 {
        let m = listener.recv().await.ok_or("bus closed")?;
        let r = decode_reading(&m.topic, &m.payload)?;
        println!(
            "{} seq {} = {} {}",
            r.topic,
            r.seq,
            r.value.as_f64(),
            r.unit
        );
    }
    sensor.disconnect().await;
    listener.disconnect().await;
    broker.shutdown();
    Ok(())
}
