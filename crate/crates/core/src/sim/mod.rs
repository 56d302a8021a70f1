//! Deterministic virtual home: floor plan, scripted patient, virtual
//! sensors and the geometry that turns a pose into fuzzy inputs.

pub mod geometry;
mod plan;
mod scenario;
mod world;

pub use geometry::{
    bearing_deg, distance_dm, heading_deviation, in_danger_zone, DangerZone, Pose, ZoneShape,
    ZONE_MARGIN_M,
};
pub use plan::{Anchor, FloorPlan, SmartObject, OBJECT_SIZE_M};
pub use scenario::{
    builtin_scenario, load_scenario, load_scenario_file, AgentScript, CommandEvent, Events,
    Keyframe, LinkEvent, Scenario, ScenarioError, ScoreEvent, SensorKind, SensorModel,
    TimelinePoint, WornChange, BUILTIN_SCENARIOS, SIM_EPOCH_MS,
};
pub use world::{pose_at, Emission, WorldState};
