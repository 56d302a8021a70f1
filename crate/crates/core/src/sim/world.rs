use std::collections::BTreeMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use super::geometry::{normalize_deg, wrap180, Pose};
use super::scenario::{Keyframe, Scenario};
use crate::bus::codec::{encode, encode_reading};
use crate::bus::topics::{self, command_topic, sensor_topic};
use crate::bus::{PositionFix, Reading, Value};

const DAY_MS: u64 = 86_400_000;
const HOUR_MS: f64 = 3_600_000.0;

/// One thing the simulated home produced during a step.
#[derive(Debug, Clone, PartialEq)]
pub enum Emission {
    Reading(Reading),
    Position {
        topic: String,
        fix: PositionFix,
    },
    Command {
        kind: String,
        payload: serde_json::Value,
    },
    Link {
        subscriber: String,
        online: bool,
    },
    Restart,
}

impl Emission {
    /// Topic and payload for emissions that travel over the bus.
    pub fn message(&self) -> Option<(String, Vec<u8>)> {
        match self {
            Emission::Reading(r) => Some((r.topic.clone(), encode_reading(r).ok()?)),
            Emission::Position { topic, fix } => Some((topic.clone(), encode(fix))),
            Emission::Command { kind, payload } => Some((command_topic(kind), encode(payload))),
            Emission::Link { .. } | Emission::Restart => None,
        }
    }
}

struct SensorState {
    next_due: u64,
    last: Option<Value>,
}

/// Advances the scripted home. Deterministic for a given scenario and seed.
pub struct WorldState {
    scenario: Scenario,
    rng: ChaCha8Rng,
    start_epoch: u64,
    t_ms: u64,
    seq: BTreeMap<String, u64>,
    movement_ms: u64,
    pose: Pose,
    next_position: u64,
    next_pulse: u64,
    next_movement: u64,
    last_worn: Option<bool>,
    sensors: Vec<SensorState>,
    next_score: usize,
    next_command: usize,
    next_link: usize,
    next_restart: usize,
}

impl WorldState {
    pub fn new(scenario: Scenario) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(scenario.seed);
        let start_epoch = scenario.start_epoch_ms();
        let pose = pose_at(&scenario.agent.path, 0.0);
        let sensors = scenario
            .sensors
            .iter()
            .map(|_| SensorState {
                next_due: 0,
                last: None,
            })
            .collect();
        let movement_ms = (scenario.agent.movement_hours_at_start * HOUR_MS).round() as u64;
        WorldState {
            scenario,
            rng,
            start_epoch,
            t_ms: 0,
            seq: BTreeMap::new(),
            movement_ms,
            pose,
            next_position: 0,
            next_pulse: 0,
            next_movement: 0,
            last_worn: None,
            sensors,
            next_score: 0,
            next_command: 0,
            next_link: 0,
            next_restart: 0,
        }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Milliseconds since the run started.
    pub fn elapsed_ms(&self) -> u64 {
        self.t_ms
    }

    /// Current simulated wall clock, epoch milliseconds.
    pub fn now_ms(&self) -> u64 {
        self.start_epoch + self.t_ms
    }

    pub fn is_done(&self) -> bool {
        self.t_ms as f64 >= self.scenario.duration_s * 1000.0
    }

    /// Noise-free agent pose.
    pub fn pose(&self) -> Pose {
        self.pose
    }

    pub fn worn(&self) -> bool {
        worn_at(&self.scenario, self.t_ms as f64 / 1000.0)
    }

    /// Hours spent moving since simulated midnight.
    pub fn daily_movement(&self) -> f64 {
        self.movement_ms as f64 / HOUR_MS
    }

    /// Advances by `dt_ms` and returns everything due at the new time.
    pub fn step(&mut self, dt_ms: u64) -> Vec<Emission> {
        assert!(dt_ms > 0, "step needs a positive dt");
        let prev_t = self.t_ms;
        self.t_ms += dt_ms;
        let t = self.t_ms;
        let secs = t as f64 / 1000.0;
        let now = self.now_ms();

        let prev_pose = self.pose;
        self.pose = pose_at(&self.scenario.agent.path, secs);
        let moved = (self.pose.x - prev_pose.x).hypot(self.pose.y - prev_pose.y) > 1e-9;
        let day_start = (now / DAY_MS) * DAY_MS;
        if self.start_epoch + prev_t < day_start {
            self.movement_ms = if moved { now - day_start } else { 0 };
        } else if moved {
            self.movement_ms += dt_ms;
        }

        let mut out = Vec::new();
        let agent = self.scenario.agent.clone();

        if t >= self.next_position {
            let nx = Normal::new(0.0, agent.position_noise_m).expect("noise sigma");
            let nf = Normal::new(0.0, agent.facing_noise_deg).expect("noise sigma");
            let fix = PositionFix {
                x: round_to(self.pose.x + self.rng.sample(nx), 1e3),
                y: round_to(self.pose.y + self.rng.sample(nx), 1e3),
                facing: round_to(normalize_deg(self.pose.facing + self.rng.sample(nf)), 1e2),
                t: now,
                seq: self.next_seq(topics::POSITION),
            };
            out.push(Emission::Position {
                topic: topics::POSITION.to_string(),
                fix,
            });
            self.next_position = advance(self.next_position, ms(agent.position_period_s), t);
        }

        let worn = self.worn();
        if t >= self.next_pulse || self.last_worn != Some(worn) {
            let n = Normal::new(0.0, agent.pulse_noise_bpm).expect("noise sigma");
            let bpm = if worn {
                round_to(agent.pulse_bpm + self.rng.sample(n), 10.0)
            } else {
                0.0
            };
            let r = self.reading(topics::PULSE, Value::Real(bpm), "bpm", "tag", Some(worn));
            out.push(Emission::Reading(r));
            self.last_worn = Some(worn);
            self.next_pulse = advance(self.next_pulse.max(t), ms(agent.pulse_period_s), t);
        }

        for i in 0..self.sensors.len() {
            let model = self.scenario.sensors[i].clone();
            let value = model.value_at(secs);
            let state = &self.sensors[i];
            let due = t >= state.next_due;
            let edge = model.kind.is_boolean() && state.last != Some(value);
            if !(due || edge) {
                continue;
            }
            let noisy = match value {
                Value::Bool(_) => value,
                v => {
                    let sigma = model.sigma();
                    let noise = if sigma > 0.0 {
                        self.rng
                            .sample(Normal::new(0.0, sigma).expect("noise sigma"))
                    } else {
                        0.0
                    };
                    Value::Real(round_to(v.as_f64() + noise, 100.0))
                }
            };
            let topic = sensor_topic(&model.device, model.kind.as_str());
            let r = self.reading(&topic, noisy, model.kind.unit(), &model.device, None);
            out.push(Emission::Reading(r));
            let state = &mut self.sensors[i];
            state.last = Some(value);
            state.next_due = if due {
                advance(state.next_due, ms(model.period()), t)
            } else {
                // an edge restarts the heartbeat
                t + ms(model.period())
            };
        }

        if t >= self.next_movement {
            let hours = round_to(self.daily_movement(), 1e3);
            let topic = sensor_topic("tag", "motion");
            let r = self.reading(&topic, Value::Real(hours), "h", "tag", None);
            out.push(Emission::Reading(r));
            self.next_movement = advance(self.next_movement, ms(agent.movement_period_s), t);
        }

        let events = self.scenario.events.clone();
        while let Some(g) = events
            .game_score
            .get(self.next_score)
            .filter(|g| ms(g.t) <= t)
        {
            let r = self.reading(
                topics::GAME_SCORE,
                Value::Real(g.score),
                "pts",
                "ar-game",
                None,
            );
            out.push(Emission::Reading(r));
            self.next_score += 1;
        }
        while let Some(c) = events
            .commands
            .get(self.next_command)
            .filter(|c| ms(c.t) <= t)
        {
            out.push(Emission::Command {
                kind: c.kind.clone(),
                payload: c.payload.clone(),
            });
            self.next_command += 1;
        }
        while let Some(l) = events.links.get(self.next_link).filter(|l| ms(l.t) <= t) {
            out.push(Emission::Link {
                subscriber: l.subscriber.clone(),
                online: l.online,
            });
            self.next_link += 1;
        }
        while let Some(&r) = events.restarts.get(self.next_restart) {
            if ms(r) > t {
                break;
            }
            out.push(Emission::Restart);
            self.next_restart += 1;
        }
        out
    }

    fn next_seq(&mut self, topic: &str) -> u64 {
        let s = self.seq.entry(topic.to_string()).or_insert(0);
        *s += 1;
        *s
    }

    fn reading(
        &mut self,
        topic: &str,
        value: Value,
        unit: &str,
        device: &str,
        worn: Option<bool>,
    ) -> Reading {
        Reading {
            topic: topic.to_string(),
            value,
            unit: unit.to_string(),
            t: self.now_ms(),
            seq: self.next_seq(topic),
            device: device.to_string(),
            worn,
        }
    }
}

fn ms(secs: f64) -> u64 {
    (secs * 1000.0).round() as u64
}

fn round_to(v: f64, scale: f64) -> f64 {
    (v * scale).round() / scale
}

/// Next due time strictly after `t`, stepping by `period` from `due`.
fn advance(due: u64, period: u64, t: u64) -> u64 {
    let period = period.max(1);
    let mut next = due + period;
    if next <= t {
        next += ((t - next) / period + 1) * period;
    }
    next
}

fn worn_at(s: &Scenario, secs: f64) -> bool {
    s.agent
        .worn
        .iter()
        .take_while(|w| w.t <= secs)
        .last()
        .is_none_or(|w| w.worn)
}

/// Linear interpolation between keyframes; facing turns the short way.
pub fn pose_at(path: &[Keyframe], secs: f64) -> Pose {
    let first = path[0];
    if secs <= first.t {
        return Pose {
            x: first.x,
            y: first.y,
            facing: normalize_deg(first.facing),
        };
    }
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        if secs <= b.t {
            let f = (secs - a.t) / (b.t - a.t);
            return Pose {
                x: a.x + (b.x - a.x) * f,
                y: a.y + (b.y - a.y) * f,
                facing: normalize_deg(a.facing + wrap180(b.facing - a.facing) * f),
            };
        }
    }
    let last = path[path.len() - 1];
    Pose {
        x: last.x,
        y: last.y,
        facing: normalize_deg(last.facing),
    }
}
