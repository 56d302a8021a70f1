use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::rulebook::{parse_rulebook, RuleBase, RulebookError};

use super::state::PersistentState;
use super::{DispatchRecord, Engine, Output, ServiceConfig};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Rulebook(#[from] RulebookError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Bus(#[from] crate::bus::BusError),
    #[error(transparent)]
    Scenario(#[from] crate::sim::ScenarioError),
    #[error("input log line {line}: {message}")]
    Log { line: usize, message: String },
    #[error("{0}")]
    Protocol(String),
}

/// Payload bytes, kept readable when they are text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Text(String),
    Bytes(Vec<u8>),
}

impl Payload {
    pub fn from_bytes(b: &[u8]) -> Self {
        match std::str::from_utf8(b) {
            Ok(s) => Payload::Text(s.to_string()),
            Err(_) => Payload::Bytes(b.to_vec()),
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        match self {
            Payload::Text(s) => s.as_bytes(),
            Payload::Bytes(b) => b,
        }
    }
}

/// One line of the input log. Everything the engine saw, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "ev", rename_all = "snake_case")]
pub enum InputEvent {
    Header {
        config: Box<ServiceConfig>,
        rulebook: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scenario: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        state: Option<Box<PersistentState>>,
    },
    Msg {
        at: u64,
        topic: String,
        payload: Payload,
    },
    Tick {
        at: u64,
    },
    Link {
        at: u64,
        subscriber: String,
        online: bool,
    },
    Restart {
        at: u64,
    },
}

/// Owns the engine for a session, logging its inputs and its decisions.
pub struct Driver {
    cfg: ServiceConfig,
    rulebook: RuleBase,
    dir: PathBuf,
    engine: Engine,
    input_log: Option<BufWriter<File>>,
    dispatch_log: Option<BufWriter<File>>,
    lines: Vec<String>,
}

impl Driver {
    pub fn open(
        cfg: ServiceConfig,
        rulebook_text: &str,
        dir: &Path,
        input_log: Option<&Path>,
        dispatch_log: Option<&Path>,
        scenario: Option<String>,
    ) -> Result<Self, ServiceError> {
        let rulebook = parse_rulebook(rulebook_text)?;
        let state = PersistentState::load(dir)?;
        let mut input_log = input_log.map(File::create).transpose()?.map(BufWriter::new);
        if let Some(w) = input_log.as_mut() {
            let header = InputEvent::Header {
                config: Box::new(cfg.clone()),
                rulebook: rulebook_text.to_string(),
                scenario,
                state: state.map(Box::new),
            };
            writeln!(
                w,
                "{}",
                serde_json::to_string(&header).expect("header serializes")
            )?;
        }
        let dispatch_log = dispatch_log
            .map(File::create)
            .transpose()?
            .map(BufWriter::new);
        let engine = Engine::open(cfg.clone(), rulebook.clone(), dir)?;
        Ok(Driver {
            cfg,
            rulebook,
            dir: dir.to_path_buf(),
            engine,
            input_log,
            dispatch_log,
            lines: Vec::new(),
        })
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    /// Dispatch log lines so far.
    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn apply(&mut self, ev: &InputEvent) -> Result<Output, ServiceError> {
        if let Some(w) = self.input_log.as_mut() {
            writeln!(
                w,
                "{}",
                serde_json::to_string(ev).expect("events serialize")
            )?;
        }
        let out = match ev {
            InputEvent::Header { .. } => Output::default(),
            InputEvent::Msg { at, topic, payload } => {
                self.engine.ingest(topic, payload.as_bytes(), *at)?
            }
            InputEvent::Tick { at } => self.engine.tick(*at)?,
            InputEvent::Link {
                at,
                subscriber,
                online,
            } => self.engine.link(subscriber, *online, *at)?,
            InputEvent::Restart { .. } => {
                self.engine = Engine::open(self.cfg.clone(), self.rulebook.clone(), &self.dir)?;
                Output::default()
            }
        };
        for r in &out.records {
            self.log(r)?;
        }
        Ok(out)
    }

    fn log(&mut self, r: &DispatchRecord) -> io::Result<()> {
        let line = r.to_line();
        if let Some(w) = self.dispatch_log.as_mut() {
            writeln!(w, "{line}")?;
        }
        self.lines.push(line);
        Ok(())
    }

    pub fn msg(&mut self, at: u64, topic: &str, payload: &[u8]) -> Result<Output, ServiceError> {
        self.apply(&InputEvent::Msg {
            at,
            topic: topic.to_string(),
            payload: Payload::from_bytes(payload),
        })
    }

    pub fn tick(&mut self, at: u64) -> Result<Output, ServiceError> {
        self.apply(&InputEvent::Tick { at })
    }

    pub fn link(
        &mut self,
        at: u64,
        subscriber: &str,
        online: bool,
    ) -> Result<Output, ServiceError> {
        self.apply(&InputEvent::Link {
            at,
            subscriber: subscriber.to_string(),
            online,
        })
    }

    pub fn restart(&mut self, at: u64) -> Result<Output, ServiceError> {
        self.apply(&InputEvent::Restart { at })
    }

    /// Flushes both logs and returns the dispatch lines.
    pub fn finish(mut self) -> io::Result<Vec<String>> {
        if let Some(w) = self.input_log.as_mut() {
            w.flush()?;
        }
        if let Some(w) = self.dispatch_log.as_mut() {
            w.flush()?;
        }
        Ok(self.lines)
    }
}

/// The dispatch log as bytes, one record per line.
pub fn render_dispatch_log(lines: &[String]) -> String {
    lines.iter().map(|l| format!("{l}\n")).collect()
}

/// Re-drives a recorded input log through a fresh engine rooted at
/// `state_dir` and returns the dispatch lines it produces.
pub fn replay_log(input_log: &Path, state_dir: &Path) -> Result<Vec<String>, ServiceError> {
    let reader = BufReader::new(File::open(input_log)?);
    let mut lines = reader.lines().enumerate();
    let parse = |n: usize, text: &str| {
        serde_json::from_str::<InputEvent>(text).map_err(|e| ServiceError::Log {
            line: n + 1,
            message: e.to_string(),
        })
    };
    let (n, first) = lines.next().ok_or(ServiceError::Log {
        line: 1,
        message: "empty log".into(),
    })?;
    let InputEvent::Header {
        config,
        rulebook,
        state,
        ..
    } = parse(n, &first?)?
    else {
        return Err(ServiceError::Log {
            line: 1,
            message: "first line must be the header".into(),
        });
    };
    if let Some(state) = state {
        state.save(state_dir)?;
    }
    let mut driver = Driver::open(*config, &rulebook, state_dir, None, None, None)?;
    for (n, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let ev = parse(n, &line)?;
        if matches!(ev, InputEvent::Header { .. }) {
            return Err(ServiceError::Log {
                line: n + 1,
                message: "second header".into(),
            });
        }
        driver.apply(&ev)?;
    }
    Ok(driver.finish()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bus::codec::{encode, PositionFix};
    use crate::bus::topics;
    use crate::rulebook::DEFAULT_RULEBOOK_SOURCE;

    const T0: u64 = 1_704_067_200_000 + 16 * 3_600_000;

    #[test]
    fn replay_matches_recording() {
        let tmp = tempfile::tempdir().unwrap();
        let input = tmp.path().join("in.jsonl");
        let out = tmp.path().join("dispatch.jsonl");
        let mut d = Driver::open(
            ServiceConfig::default(),
            DEFAULT_RULEBOOK_SOURCE,
            &tmp.path().join("state"),
            Some(&input),
            Some(&out),
            Some("unit".into()),
        )
        .unwrap();
        d.msg(
            T0,
            "home/sensor/terrace-rain/rain",
            br#"{"v":true,"u":"bool","t":0,"seq":1,"d":"r"}"#,
        )
        .unwrap();
        d.msg(T0, "home/sensor/kitchen-gas/gas", &[0xff, 0xfe])
            .unwrap();
        d.link(T0, "caregiver", false).unwrap();
        for i in 0..10u64 {
            let fix = PositionFix {
                x: 4.8,
                y: 2.8,
                facing: 45.0,
                t: 0,
                seq: i + 1,
            };
            d.msg(T0 + i * 500, topics::POSITION, &encode(&fix))
                .unwrap();
            d.tick(T0 + i * 500).unwrap();
            if i == 4 {
                d.restart(T0 + i * 500).unwrap();
            }
        }
        d.msg(
            T0 + 6000,
            "caregiver/command/reminder",
            br#"{"kind":"text","id":2}"#,
        )
        .unwrap();
        d.link(T0 + 6000, "caregiver", true).unwrap();
        let lines = d.finish().unwrap();
        assert!(lines.len() >= 3);
        let written = std::fs::read_to_string(&out).unwrap();
        assert_eq!(written, render_dispatch_log(&lines));

        let again = replay_log(&input, &tmp.path().join("replay")).unwrap();
        assert_eq!(render_dispatch_log(&again), written);
    }

    #[test]
    fn bad_logs_are_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        let p = tmp.path().join("bad.jsonl");
        std::fs::write(&p, "{\"ev\":\"tick\",\"at\":1}\n").unwrap();
        assert!(matches!(
            replay_log(&p, tmp.path()),
            Err(ServiceError::Log { line: 1, .. })
        ));
        std::fs::write(&p, "").unwrap();
        assert!(replay_log(&p, tmp.path()).is_err());
    }

    #[test]
    fn binary_payloads_survive() {
        let p = Payload::from_bytes(&[0xff, 0x00]);
        let back: Payload = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back.as_bytes(), &[0xff, 0x00]);
        assert_eq!(Payload::from_bytes(b"{}"), Payload::Text("{}".into()));
    }
}
