use serde::{Deserialize, Serialize};

use super::plan::FloorPlan;
use crate::bus::topics::COMMAND_KINDS;
use crate::bus::Value;

/// Midnight UTC on 2024-01-01; simulated days start here.
pub const SIM_EPOCH_MS: u64 = 1_704_067_200_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub seed: u64,
    pub duration_s: f64,
    /// Time of day the run starts at, in hours.
    #[serde(default = "default_start")]
    pub start_time_h: f64,
    #[serde(default)]
    pub plan: FloorPlan,
    #[serde(default)]
    pub agent: AgentScript,
    #[serde(default)]
    pub sensors: Vec<SensorModel>,
    #[serde(default)]
    pub events: Events,
}

fn default_start() -> f64 {
    16.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Keyframe {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub facing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WornChange {
    pub t: f64,
    pub worn: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgentScript {
    /// Pose keyframes; the agent moves linearly between them.
    pub path: Vec<Keyframe>,
    pub position_noise_m: f64,
    pub facing_noise_deg: f64,
    pub position_period_s: f64,
    pub worn: Vec<WornChange>,
    pub pulse_bpm: f64,
    pub pulse_noise_bpm: f64,
    pub pulse_period_s: f64,
    /// Hours already walked today when the run starts.
    pub movement_hours_at_start: f64,
    pub movement_period_s: f64,
}

impl Default for AgentScript {
    fn default() -> Self {
        AgentScript {
            path: vec![Keyframe {
                t: 0.0,
                x: 1.0,
                y: 1.0,
                facing: 263.0,
            }],
            position_noise_m: 0.1,
            facing_noise_deg: 1.0,
            position_period_s: 0.5,
            worn: Vec::new(),
            pulse_bpm: 72.0,
            pulse_noise_bpm: 2.0,
            pulse_period_s: 5.0,
            movement_hours_at_start: 6.0,
            movement_period_s: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorKind {
    Rain,
    Flame,
    Gas,
    Temperature,
    Humidity,
    PlantHumidity,
    Motion,
}

impl SensorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SensorKind::Rain => "rain",
            SensorKind::Flame => "flame",
            SensorKind::Gas => "gas",
            SensorKind::Temperature => "temperature",
            SensorKind::Humidity => "humidity",
            SensorKind::PlantHumidity => "plant_humidity",
            SensorKind::Motion => "motion",
        }
    }

    pub fn is_boolean(self) -> bool {
        matches!(self, SensorKind::Rain | SensorKind::Flame | SensorKind::Gas)
    }

    pub fn unit(self) -> &'static str {
        match self {
            SensorKind::Rain | SensorKind::Flame | SensorKind::Gas => "bool",
            SensorKind::Temperature => "C",
            SensorKind::Humidity | SensorKind::PlantHumidity => "%",
            SensorKind::Motion => "h",
        }
    }

    pub fn default_noise(self) -> f64 {
        match self {
            SensorKind::Temperature => 0.2,
            SensorKind::Humidity => 1.0,
            SensorKind::PlantHumidity => 0.5,
            _ => 0.0,
        }
    }

    /// Emit period for numeric kinds, heartbeat for boolean ones.
    pub fn default_period(self) -> f64 {
        if self.is_boolean() {
            60.0
        } else {
            5.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimelinePoint {
    pub t: f64,
    pub v: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorModel {
    pub device: String,
    pub kind: SensorKind,
    #[serde(default)]
    pub at: Option<[f64; 2]>,
    #[serde(default)]
    pub period_s: Option<f64>,
    #[serde(default)]
    pub noise: Option<f64>,
    /// Step function of scripted values; a single point is a constant.
    pub timeline: Vec<TimelinePoint>,
}

impl SensorModel {
    pub fn period(&self) -> f64 {
        self.period_s.unwrap_or_else(|| self.kind.default_period())
    }

    pub fn sigma(&self) -> f64 {
        self.noise.unwrap_or_else(|| self.kind.default_noise())
    }

    /// Scripted value at `t` seconds.
    pub fn value_at(&self, t: f64) -> Value {
        self.timeline
            .iter()
            .take_while(|p| p.t <= t)
            .last()
            .or(self.timeline.first())
            .map(|p| p.v)
            .expect("timeline is non-empty")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreEvent {
    pub t: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandEvent {
    pub t: f64,
    pub kind: String,
    #[serde(default)]
    pub payload: serde_json::Value,
}

/// A store-and-forward subscriber going offline or coming back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkEvent {
    pub t: f64,
    pub subscriber: String,
    pub online: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Events {
    pub game_score: Vec<ScoreEvent>,
    pub commands: Vec<CommandEvent>,
    pub links: Vec<LinkEvent>,
    /// Times at which the decision service restarts.
    pub restarts: Vec<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("scenario schema: {path}: {message}")]
    Schema { path: String, message: String },
    #[error("{0}")]
    OutOfRoom(String),
    #[error("{0}")]
    Invalid(String),
    #[error("unknown scenario `{0}`")]
    Unknown(String),
    #[error("reading scenario: {0}")]
    Io(#[from] std::io::Error),
}

/// Parses and checks a scenario document. Omitted sections take defaults.
pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ScenarioError::Schema {
            path,
            message: e.into_inner().to_string(),
        }
    })?;
    scenario.check()?;
    Ok(scenario)
}

pub fn load_scenario_file(path: &std::path::Path) -> Result<Scenario, ScenarioError> {
    load_scenario(&std::fs::read_to_string(path)?)
}

impl Scenario {
    pub fn check(&self) -> Result<(), ScenarioError> {
        let invalid = |m: String| Err(ScenarioError::Invalid(m));
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return invalid("duration_s must be positive".into());
        }
        if !(0.0..24.0).contains(&self.start_time_h) {
            return invalid("start_time_h must be in [0, 24)".into());
        }
        self.plan.check().map_err(ScenarioError::OutOfRoom)?;
        let within = |what: &str, t: f64| -> Result<(), ScenarioError> {
            if (0.0..=self.duration_s).contains(&t) {
                Ok(())
            } else {
                Err(ScenarioError::Invalid(format!(
                    "{what} at t={t} s is outside the {} s run",
                    self.duration_s
                )))
            }
        };

        let a = &self.agent;
        if a.path.is_empty() {
            return invalid("agent.path needs at least one keyframe".into());
        }
        for (i, k) in a.path.iter().enumerate() {
            within("agent keyframe", k.t)?;
            if i > 0 && k.t <= a.path[i - 1].t {
                return invalid(format!(
                    "agent.path[{i}] is not after the previous keyframe"
                ));
            }
            if !self.plan.contains(k.x, k.y) {
                return Err(ScenarioError::OutOfRoom(format!(
                    "agent.path[{i}] ({}, {}) is outside the room",
                    k.x, k.y
                )));
            }
        }
        for (name, v) in [
            ("position_period_s", a.position_period_s),
            ("pulse_period_s", a.pulse_period_s),
            ("movement_period_s", a.movement_period_s),
        ] {
            if !(v > 0.0) {
                return invalid(format!("agent.{name} must be positive"));
            }
        }
        if a.position_noise_m < 0.0 || a.facing_noise_deg < 0.0 || a.pulse_noise_bpm < 0.0 {
            return invalid("agent noise must be non-negative".into());
        }
        for w in &a.worn {
            within("worn change", w.t)?;
        }

        for s in &self.sensors {
            if s.timeline.is_empty() {
                return invalid(format!("sensor `{}` has an empty timeline", s.device));
            }
            if !(s.period() > 0.0) || s.sigma() < 0.0 {
                return invalid(format!(
                    "sensor `{}` needs period > 0 and noise >= 0",
                    s.device
                ));
            }
            if let Some([x, y]) = s.at {
                if !self.plan.contains(x, y) {
                    return Err(ScenarioError::OutOfRoom(format!(
                        "sensor `{}` at ({x}, {y}) is outside the room",
                        s.device
                    )));
                }
            }
            for p in &s.timeline {
                within(&format!("sensor `{}` value", s.device), p.t)?;
                let ok = match p.v {
                    Value::Bool(_) => s.kind.is_boolean(),
                    Value::Int(_) => !s.kind.is_boolean(),
                    Value::Real(r) => !s.kind.is_boolean() && r.is_finite(),
                };
                if !ok {
                    return invalid(format!(
                        "sensor `{}` of kind {} cannot take {:?}",
                        s.device,
                        s.kind.as_str(),
                        p.v
                    ));
                }
            }
        }

        let ev = &self.events;
        for g in &ev.game_score {
            within("game score", g.t)?;
            if !(0.0..=100.0).contains(&g.score) {
                return invalid(format!("game score {} is outside [0, 100]", g.score));
            }
        }
        for c in &ev.commands {
            within("caregiver command", c.t)?;
            if !COMMAND_KINDS.contains(&c.kind.as_str()) {
                return invalid(format!("unknown caregiver command `{}`", c.kind));
            }
        }
        for l in &ev.links {
            within("link change", l.t)?;
        }
        for &r in &ev.restarts {
            within("restart", r)?;
        }
        Ok(())
    }

    pub fn start_epoch_ms(&self) -> u64 {
        SIM_EPOCH_MS + (self.start_time_h * 3_600_000.0).round() as u64
    }
}

pub const BUILTIN_SCENARIOS: [(&str, &str); 6] = [
    (
        "rain_umbrella",
        include_str!("../../scenarios/rain_umbrella.json"),
    ),
    (
        "medication_morning",
        include_str!("../../scenarios/medication_morning.json"),
    ),
    (
        "flame_alert",
        include_str!("../../scenarios/flame_alert.json"),
    ),
    (
        "plant_watering",
        include_str!("../../scenarios/plant_watering.json"),
    ),
    (
        "game_mode_switch",
        include_str!("../../scenarios/game_mode_switch.json"),
    ),
    (
        "offline_caregiver",
        include_str!("../../scenarios/offline_caregiver.json"),
    ),
];

pub fn builtin_scenario(name: &str) -> Result<Scenario, ScenarioError> {
    let (_, text) = BUILTIN_SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| ScenarioError::Unknown(name.to_string()))?;
    load_scenario(text)
}
