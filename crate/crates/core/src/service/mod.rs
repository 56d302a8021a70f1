//! The decision service: snapshot, inference, dispatch and caregiver control.

mod action;
mod bench;
mod config;
mod engine;
mod lockstep;
mod metrics;
mod outbox;
mod record;
mod runtime;
mod snapshot;
mod state;
mod ws;

pub use action::{Action, DispatchRecord, MessageKind, Mode, ModeCause, Provenance};
pub use bench::{run_bench, BenchOptions, BenchReport, KindReport, REFERENCE_FIGURES};
pub use config::{clamp_rate, Endpoint, ServiceConfig, MAX_RATE_HZ, MIN_RATE_HZ};
pub use engine::{active_endpoints, Counters, Engine, Output};
pub use lockstep::{run_scenario, RunOptions, RunReport};
pub use metrics::{summarize, LatencyMetrics, LatencyRecord, Summary};
pub use outbox::{subscriber_of, Outbox, Outgoing};
pub use record::{render_dispatch_log, replay_log, Driver, InputEvent, Payload, ServiceError};
pub use runtime::{
    serve, wall_clock, wall_clock_us, Clock, ServeOptions, ServeSummary, ServiceHandle,
};
pub use snapshot::{time_of_day_h, Rejected, Sample, Snapshot, SnapshotStore, Stored};
pub use state::{MedSchedule, Pending, PersistentState, ZoneEntry, STATE_FILE};
pub use ws::{CommandFrame, ConsoleSnapshot, Frame, WsBridge};
