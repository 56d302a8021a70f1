use std::collections::BTreeSet;
use std::io;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::bus::codec::{
    decode, encode, ActuatorState, CommandAck, LatencyProbe, MessageDispatch, ModeMessage,
    Notification, Presence,
};
use crate::bus::topics;
use crate::fuzzy::{
    defuzzify_cog, infer, select_integer_output, singleton_activations, InferenceOptions, ValueKind,
};
use crate::rulebook::{ActionValue, CommandClass, ModeScope, RuleBase};
use crate::sim::{DangerZone, ZONE_MARGIN_M};

use super::snapshot::{Rejected, Snapshot, SnapshotStore, Stored};
use super::state::{MedSchedule, Pending, PersistentState, ZoneEntry};
use super::{
    Action, DispatchRecord, MessageKind, Mode, ModeCause, Outbox, Outgoing, Provenance,
    ServiceConfig,
};

const DAY_MS: u64 = 86_400_000;
const SEMI_LABEL: &str = "high";

/// What one engine call wants done: bus traffic and dispatch log lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Output {
    pub publish: Vec<Outgoing>,
    pub records: Vec<DispatchRecord>,
    pub acks: Vec<CommandAck>,
}

impl Output {
    fn extend(&mut self, other: Output) {
        self.publish.extend(other.publish);
        self.records.extend(other.records);
        self.acks.extend(other.acks);
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub ingested: u64,
    pub malformed: u64,
    pub seq_regressions: u64,
    pub ticks: u64,
}

struct Candidate {
    action: Action,
    /// `rule/channel/value`, None to skip the refractory check.
    key: Option<String>,
}

/// The decision loop's state machine. It never reads a clock; callers pass
/// the time of every event, so a recorded input stream replays exactly.
pub struct Engine {
    cfg: ServiceConfig,
    rulebook: RuleBase,
    options: InferenceOptions,
    dir: PathBuf,
    store: SnapshotStore,
    state: PersistentState,
    outbox: Outbox,
    started_ms: Option<u64>,
    last_rx_ms: Option<u64>,
    stale_flagged: bool,
    score_pending: Option<f64>,
    last_tick_ms: Option<u64>,
    counters: Counters,
}

impl Engine {
    /// Opens the engine over `dir`, resuming any state a previous run left.
    pub fn open(cfg: ServiceConfig, rulebook: RuleBase, dir: &Path) -> io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        let state = match PersistentState::load(dir)? {
            Some(s) => s,
            None => {
                let mut s = PersistentState::default();
                for (i, zone) in cfg.zones.iter().enumerate() {
                    s.zones.push(ZoneEntry {
                        zone: zone.clone(),
                        rule: cfg.zone_rule_base + i as u32,
                    });
                }
                s
            }
        };
        let outbox = Outbox::open(
            &dir.join("outbox"),
            &cfg.subscribers,
            cfg.outbox_capacity,
            state.offline.clone(),
        )?;
        let options = InferenceOptions {
            activation_threshold: cfg.activation_threshold,
            ..InferenceOptions::default()
        };
        let engine = Engine {
            cfg,
            rulebook,
            options,
            dir: dir.to_path_buf(),
            store: SnapshotStore::default(),
            state,
            outbox,
            started_ms: None,
            last_rx_ms: None,
            stale_flagged: false,
            score_pending: None,
            last_tick_ms: None,
            counters: Counters::default(),
        };
        engine.persist()?;
        Ok(engine)
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.cfg
    }

    pub fn rulebook(&self) -> &RuleBase {
        &self.rulebook
    }

    pub fn mode(&self) -> Mode {
        self.state.mode
    }

    pub fn mode_cause(&self) -> &ModeCause {
        &self.state.mode_cause
    }

    pub fn door_locked(&self) -> bool {
        self.state.door_locked
    }

    pub fn zones(&self) -> &[ZoneEntry] {
        &self.state.zones
    }

    pub fn med_schedules(&self) -> &[MedSchedule] {
        &self.state.meds
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn outbox(&self) -> &Outbox {
        &self.outbox
    }

    /// Endpoints not quiesced by the current mode.
    pub fn active_endpoints(&self) -> usize {
        active_endpoints(&self.cfg, self.state.mode)
    }

    pub fn snapshot(&self, now_ms: u64) -> Snapshot {
        self.store.view(&self.cfg, &self.rulebook.objects, now_ms)
    }

    fn persist(&self) -> io::Result<()> {
        let mut s = self.state.clone();
        s.offline = self.outbox.offline().clone();
        s.save(&self.dir)
    }

    /// Feeds one bus message. Sensor data only updates the snapshot;
    /// caregiver commands, presence and latency probes act right away.
    pub fn ingest(&mut self, topic: &str, payload: &[u8], now_ms: u64) -> io::Result<Output> {
        let mut out = Output::default();
        if let Some(kind) = topic.strip_prefix("sys/latency/") {
            if let (Some(kind), Ok(p)) = (
                MessageKind::parse(kind),
                decode::<LatencyProbe>(topic, payload),
            ) {
                self.dispatch_probe(kind, p, &mut out)?;
            }
            return Ok(out);
        }
        if let Some(sub) = topic.strip_prefix("sys/presence/") {
            if let Ok(p) = decode::<Presence>(topic, payload) {
                out.extend(self.link(sub, p.online, now_ms)?);
            }
            return Ok(out);
        }
        if topic.starts_with("sys/") || topic == topics::COMMAND_ACK {
            return Ok(out);
        }
        if let Some(kind) = topics::parse_command_topic(topic) {
            self.handle_command(kind, payload, now_ms, &mut out)?;
            self.persist()?;
            return Ok(out);
        }
        match self.store.ingest(topic, payload, now_ms) {
            Ok(stored) => {
                self.counters.ingested += 1;
                self.last_rx_ms = Some(now_ms);
                self.stale_flagged = false;
                match stored {
                    Stored::GameScore(s) => self.score_pending = Some(s),
                    Stored::WornChanged(false) => {
                        self.notify(
                            "device_removed",
                            "AR glasses taken off".into(),
                            now_ms,
                            &mut out,
                        )?;
                        self.persist()?;
                    }
                    _ => {}
                }
            }
            Err(Rejected::SeqRegression { .. }) => self.counters.seq_regressions += 1,
            Err(e) => {
                tracing::debug!("dropped inbound message: {e}");
                self.counters.malformed += 1;
            }
        }
        Ok(out)
    }

    /// Records a subscriber going offline or coming back. Coming back
    /// flushes everything held for it, oldest first.
    pub fn link(&mut self, subscriber: &str, online: bool, _now_ms: u64) -> io::Result<Output> {
        let mut out = Output::default();
        if !self.cfg.subscribers.iter().any(|s| s == subscriber) {
            // device heartbeats share the presence topic
            return Ok(out);
        }
        out.publish = self.outbox.set_online(subscriber, online)?;
        self.persist()?;
        Ok(out)
    }

    /// One control period.
    pub fn tick(&mut self, now_ms: u64) -> io::Result<Output> {
        let mut out = Output::default();
        self.counters.ticks += 1;
        let started = *self.started_ms.get_or_insert(now_ms);

        for p in std::mem::take(&mut self.state.pending) {
            self.apply_pending(p, now_ms, &mut out)?;
        }
        if let Some(score) = self.score_pending.take() {
            let label = self
                .rulebook
                .variable("game_score")
                .and_then(|v| v.classify_strict(score, self.cfg.activation_threshold))
                .map(str::to_string);
            match label.as_deref() {
                Some(SEMI_LABEL) => self.set_mode(
                    Mode::SemiAutomated,
                    ModeCause::GameScore(score),
                    now_ms,
                    &mut out,
                )?,
                Some(_) => self.set_mode(
                    Mode::Automated,
                    ModeCause::GameScore(score),
                    now_ms,
                    &mut out,
                )?,
                None => {}
            }
        }

        let silent_since = self.last_rx_ms.unwrap_or(started);
        let stale_ms = (self.cfg.stale_link_s * 1000.0) as u64;
        if !self.stale_flagged && now_ms.saturating_sub(silent_since) > stale_ms {
            self.stale_flagged = true;
            let secs = now_ms.saturating_sub(silent_since) / 1000;
            self.notify(
                "stale_inputs",
                format!("no sensor data for {secs} s"),
                now_ms,
                &mut out,
            )?;
        }

        let snap = self.snapshot(now_ms);
        let mut candidates = self.decide(&snap);
        candidates.extend(self.zone_alerts(&snap));
        candidates.extend(self.due_medication(now_ms));
        self.deliver(candidates, snap.worn, now_ms, &mut out)?;

        self.last_tick_ms = Some(now_ms);
        self.persist()?;
        Ok(out)
    }

    fn active_rules(&self) -> RuleBase {
        let semi = self.state.mode == Mode::SemiAutomated;
        let locked = self.state.door_locked;
        self.rulebook.filtered(|r| {
            !(semi && r.scope() == ModeScope::AutomatedOnly)
                && !(locked && self.cfg.exit_intent_rules.contains(&r.id))
        })
    }

    /// Runs inference and turns each output variable into at most one action.
    fn decide(&self, snap: &Snapshot) -> Vec<Candidate> {
        let rb = self.active_rules();
        let inference = infer(&rb, &snap.inputs, &self.options);
        let theta = self.cfg.activation_threshold;
        let mut out = Vec::new();
        for var in rb.outputs() {
            let Some(agg) = inference.outputs.get(&var.name) else {
                continue;
            };
            if agg.is_empty() {
                continue;
            }
            let value = match var.kind {
                ValueKind::Integer => {
                    let Ok(id) = select_integer_output(agg, var) else {
                        continue;
                    };
                    let act = singleton_activations(agg, var)
                        .unwrap_or_default()
                        .into_iter()
                        .find(|&(i, _)| i == id)
                        .map_or(0.0, |(_, a)| a);
                    if act < theta {
                        continue;
                    }
                    ActionValue::Int(id)
                }
                _ => {
                    let Ok(cog) = defuzzify_cog(agg) else {
                        continue;
                    };
                    ActionValue::Label(if cog >= 0.5 { "yes" } else { "no" }.into())
                }
            };
            // strongest activated rule asking for this value, smaller ref on ties
            let Some((rule, class)) = inference
                .activated()
                .filter_map(|f| {
                    let r = rb.rules.iter().find(|r| r.reference() == f.rule)?;
                    r.targets(&var.name, &value)
                        .then_some((f.strength, f.rule, r.class))
                })
                .min_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)))
                .map(|(_, r, c)| (r.id, c))
            else {
                continue;
            };
            let by = Provenance::Rule(rule);
            let action = match (MessageKind::from_variable(&var.name), &value) {
                (Some(kind), ActionValue::Int(id)) => Action::Message {
                    kind,
                    id: *id,
                    by,
                    class: Some(class),
                },
                (None, ActionValue::Label(l)) => {
                    if class == CommandClass::Disable {
                        // mode switching handles quiescing
                        continue;
                    }
                    Action::Actuator {
                        id: var.name.clone(),
                        on: l == "yes",
                        by,
                        class: Some(class),
                    }
                }
                _ => continue,
            };
            out.push(Candidate {
                key: Some(format!("{rule}/{}/{value}", var.name)),
                action,
            });
        }
        out
    }

    fn zone_alerts(&self, snap: &Snapshot) -> Vec<Candidate> {
        let Some(pose) = snap.pose else {
            return Vec::new();
        };
        let Some(entry) = self
            .state
            .zones
            .iter()
            .find(|z| z.zone.distance(pose.x, pose.y) <= ZONE_MARGIN_M)
        else {
            return Vec::new();
        };
        [
            (MessageKind::Voice, self.cfg.zone_alert_voice),
            (MessageKind::Image, self.cfg.zone_alert_image),
        ]
        .into_iter()
        .filter_map(|(kind, id)| {
            let id = id?;
            Some(Candidate {
                key: Some(format!("{}/{}/{id}", entry.rule, kind.variable())),
                action: Action::Message {
                    kind,
                    id,
                    by: Provenance::Rule(entry.rule),
                    class: Some(CommandClass::Alert),
                },
            })
        })
        .collect()
    }

    /// Schedules whose time of day was crossed since the previous tick.
    fn due_medication(&mut self, now_ms: u64) -> Vec<Candidate> {
        let prev = self.last_tick_ms.unwrap_or(now_ms);
        let semi = self.state.mode == Mode::SemiAutomated;
        let rule = self.cfg.medication_rule;
        let mut out = Vec::new();
        for med in &mut self.state.meds {
            let day = now_ms / DAY_MS;
            let at = day * DAY_MS + (med.at_h * 3_600_000.0).round() as u64;
            let crossed = prev < at && at <= now_ms || (prev == now_ms && at == now_ms);
            if !crossed || med.fired_day == Some(day) {
                continue;
            }
            med.fired_day = Some(day);
            if semi {
                continue;
            }
            for (kind, id) in [
                (MessageKind::Voice, med.voice),
                (MessageKind::Image, med.image),
                (MessageKind::Text, med.text),
            ] {
                if let Some(id) = id {
                    out.push(Candidate {
                        key: None,
                        action: Action::Message {
                            kind,
                            id,
                            by: Provenance::Rule(rule),
                            class: Some(CommandClass::Reminder),
                        },
                    });
                }
            }
        }
        out
    }

    fn deliver(
        &mut self,
        candidates: Vec<Candidate>,
        worn: Option<bool>,
        now_ms: u64,
        out: &mut Output,
    ) -> io::Result<()> {
        let refractory_ms = (self.cfg.refractory_s * 1000.0) as u64;
        let mut held = Vec::new();
        let mut alerted = BTreeSet::new();
        for c in candidates {
            if let Some(key) = &c.key {
                if let Some(&last) = self.state.refractory.get(key) {
                    if now_ms.saturating_sub(last) < refractory_ms {
                        continue;
                    }
                }
                self.state.refractory.insert(key.clone(), now_ms);
            }
            if c.action.class() == Some(CommandClass::Alert) {
                if let Some(Provenance::Rule(r)) = c.action.provenance() {
                    alerted.insert((r, describe(&c.action)));
                }
            }
            if worn == Some(false) && matches!(c.action, Action::Message { .. }) {
                held.push(describe(&c.action));
                continue;
            }
            self.emit(c.action, now_ms, out)?;
        }
        let mut by_rule: Vec<(u32, Vec<String>)> = Vec::new();
        for (r, what) in alerted {
            match by_rule.last_mut() {
                Some((last, v)) if *last == r => v.push(what),
                _ => by_rule.push((r, vec![what])),
            }
        }
        for (r, what) in by_rule {
            self.notify(
                "alert",
                format!("rule {r}: {}", what.join(", ")),
                now_ms,
                out,
            )?;
        }
        if !held.is_empty() {
            self.notify(
                "not_worn",
                format!("glasses not worn, held {}", held.join(", ")),
                now_ms,
                out,
            )?;
        }
        Ok(())
    }

    /// Publishes an action and logs it.
    fn emit(&mut self, action: Action, now_ms: u64, out: &mut Output) -> io::Result<()> {
        match &action {
            Action::Message { kind, id, by, .. } => {
                let msg = MessageDispatch {
                    id: *id,
                    rule: by.rule_id(),
                    t: now_ms,
                    src: by.source().map(str::to_string),
                    probe: None,
                };
                let o = Outgoing::new(topics::message_topic(kind.as_str()), encode(&msg));
                if let Some(o) = self.outbox.route(o)? {
                    out.publish.push(o);
                }
            }
            Action::Actuator { id, on, by, .. } => {
                let msg = ActuatorState {
                    state: if *on { "on" } else { "off" }.into(),
                    rule: by.rule_id(),
                    src: by.source().map(str::to_string),
                };
                out.publish
                    .push(Outgoing::new(topics::actuator_topic(id), encode(&msg)));
            }
            Action::Notify { seq, kind, detail } => {
                let msg = Notification {
                    seq: *seq,
                    kind: kind.clone(),
                    detail: detail.clone(),
                    t: now_ms,
                };
                let o = Outgoing::new(topics::NOTIFICATION, encode(&msg));
                if let Some(o) = self.outbox.route(o)? {
                    out.publish.push(o);
                }
            }
            Action::ModeChange { to, .. } => {
                let msg = ModeMessage {
                    mode: to.as_str().into(),
                    t: now_ms,
                };
                out.publish.push(Outgoing::new(topics::MODE, encode(&msg)));
            }
        }
        out.records.push(DispatchRecord { t: now_ms, action });
        Ok(())
    }

    fn notify(
        &mut self,
        kind: &str,
        detail: String,
        now_ms: u64,
        out: &mut Output,
    ) -> io::Result<()> {
        self.state.notification_seq += 1;
        let action = Action::Notify {
            seq: self.state.notification_seq,
            kind: kind.into(),
            detail,
        };
        self.emit(action, now_ms, out)
    }

    fn dispatch_probe(
        &mut self,
        kind: MessageKind,
        p: LatencyProbe,
        out: &mut Output,
    ) -> io::Result<()> {
        let msg = MessageDispatch {
            id: 0,
            rule: 0,
            t: p.t,
            src: Some("probe".into()),
            probe: Some(p.probe),
        };
        let o = Outgoing::new(topics::message_topic(kind.as_str()), encode(&msg));
        if let Some(o) = self.outbox.route(o)? {
            out.publish.push(o);
        }
        Ok(())
    }

    fn set_mode(
        &mut self,
        to: Mode,
        cause: ModeCause,
        now_ms: u64,
        out: &mut Output,
    ) -> io::Result<()> {
        if self.state.mode == to {
            return Ok(());
        }
        self.state.mode = to;
        self.state.mode_cause = cause.clone();
        let by = match cause {
            ModeCause::Caregiver => Provenance::Caregiver,
            _ => Provenance::Rule(self.disable_rule()),
        };
        self.emit(
            Action::ModeChange {
                to,
                cause,
                active_endpoints: self.active_endpoints(),
            },
            now_ms,
            out,
        )?;
        let quiet: Vec<String> = self
            .cfg
            .endpoints
            .iter()
            .filter(|e| e.reminder_support)
            .map(|e| e.id.clone())
            .collect();
        for id in quiet {
            self.emit(
                Action::Actuator {
                    id,
                    on: to == Mode::Automated,
                    by,
                    class: Some(CommandClass::Disable),
                },
                now_ms,
                out,
            )?;
        }
        Ok(())
    }

    /// The rule that takes reminders down while the patient plays.
    fn disable_rule(&self) -> u32 {
        self.rulebook
            .rules
            .iter()
            .find(|r| {
                r.class == CommandClass::Disable
                    && r.antecedent.iter().any(|a| a.variable == "game_score")
            })
            .map_or(0, |r| r.id)
    }

    fn apply_pending(&mut self, p: Pending, now_ms: u64, out: &mut Output) -> io::Result<()> {
        match p {
            Pending::ZoneAdd { zone } => {
                self.state.zones.retain(|z| z.zone.id != zone.id);
                let rule = self
                    .state
                    .zones
                    .iter()
                    .map(|z| z.rule + 1)
                    .max()
                    .unwrap_or(self.cfg.zone_rule_base)
                    .max(self.cfg.zone_rule_base);
                self.state.zones.push(ZoneEntry { zone, rule });
            }
            Pending::ZoneDel { id } => self.state.zones.retain(|z| z.zone.id != id),
            Pending::MedSchedule { schedule } => self.state.meds.push(schedule),
            Pending::Override { mode } => self.set_mode(mode, ModeCause::Caregiver, now_ms, out)?,
        }
        Ok(())
    }

    fn handle_command(
        &mut self,
        kind: &str,
        payload: &[u8],
        now_ms: u64,
        out: &mut Output,
    ) -> io::Result<()> {
        let nonce = serde_json::from_slice::<serde_json::Value>(payload)
            .ok()
            .and_then(|v| v.get("nonce").and_then(|n| n.as_str()).map(str::to_string));
        let result = self.apply_command(kind, payload, now_ms, out);
        let (ok, detail) = match result {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        let ack = CommandAck {
            kind: kind.to_string(),
            nonce,
            ok,
            detail,
        };
        out.publish
            .push(Outgoing::new(topics::COMMAND_ACK, encode(&ack)));
        out.acks.push(ack);
        Ok(())
    }

    fn apply_command(
        &mut self,
        kind: &str,
        payload: &[u8],
        now_ms: u64,
        out: &mut Output,
    ) -> Result<String, String> {
        fn parse<T: for<'de> Deserialize<'de>>(payload: &[u8]) -> Result<T, String> {
            let de = &mut serde_json::Deserializer::from_slice(payload);
            serde_path_to_error::deserialize(de).map_err(|e| format!("bad payload: {e}"))
        }
        let io_err = |e: io::Error| e.to_string();
        match kind {
            "reminder" => {
                #[derive(Deserialize)]
                struct Reminder {
                    kind: String,
                    id: i64,
                }
                let r: Reminder = parse(payload)?;
                let kind =
                    MessageKind::parse(&r.kind).ok_or(format!("unknown channel `{}`", r.kind))?;
                self.check_message_id(kind, r.id)?;
                let action = Action::Message {
                    kind,
                    id: r.id,
                    by: Provenance::Caregiver,
                    class: None,
                };
                let worn = self.store.worn();
                self.deliver(vec![Candidate { action, key: None }], worn, now_ms, out)
                    .map_err(io_err)?;
                Ok(format!("{kind} {} sent", r.id))
            }
            "lock" | "unlock" => {
                let on = kind == "lock";
                self.state.door_locked = on;
                let action = Action::Actuator {
                    id: self.cfg.door_actuator.clone(),
                    on,
                    by: Provenance::Caregiver,
                    class: None,
                };
                self.emit(action, now_ms, out).map_err(io_err)?;
                Ok(format!("door {}", if on { "locked" } else { "unlocked" }))
            }
            "zone_add" => {
                let zone: DangerZone = parse(payload)?;
                zone.check()?;
                let id = zone.id.clone();
                self.state.pending.push(Pending::ZoneAdd { zone });
                Ok(format!("zone `{id}` queued"))
            }
            "zone_del" => {
                #[derive(Deserialize)]
                struct Del {
                    id: String,
                }
                let d: Del = parse(payload)?;
                let known = self.state.zones.iter().any(|z| z.zone.id == d.id)
                    || self
                        .state
                        .pending
                        .iter()
                        .any(|p| matches!(p, Pending::ZoneAdd { zone } if zone.id == d.id));
                if !known {
                    return Err(format!("no zone `{}`", d.id));
                }
                let msg = format!("zone `{}` removal queued", d.id);
                self.state.pending.push(Pending::ZoneDel { id: d.id });
                Ok(msg)
            }
            "med_schedule" => {
                let mut schedule: MedSchedule = parse(payload)?;
                schedule.fired_day = None;
                if !(0.0..24.0).contains(&schedule.at_h) {
                    return Err(format!("at_h {} outside 0..24", schedule.at_h));
                }
                let ids = [
                    (MessageKind::Voice, schedule.voice),
                    (MessageKind::Image, schedule.image),
                    (MessageKind::Text, schedule.text),
                ];
                if ids.iter().all(|(_, id)| id.is_none()) {
                    return Err("schedule names no message".into());
                }
                for (k, id) in ids {
                    if let Some(id) = id {
                        self.check_message_id(k, id)?;
                    }
                }
                let at = schedule.at_h;
                self.state.pending.push(Pending::MedSchedule { schedule });
                Ok(format!("medication at {at} h queued"))
            }
            "override" => {
                #[derive(Deserialize)]
                struct Override {
                    mode: Mode,
                }
                let o: Override = parse(payload)?;
                self.state.pending.push(Pending::Override { mode: o.mode });
                Ok(format!("mode {} queued", o.mode.as_str()))
            }
            other => Err(format!("unknown command `{other}`")),
        }
    }

    fn check_message_id(&self, kind: MessageKind, id: i64) -> Result<(), String> {
        self.rulebook
            .variable(kind.variable())
            .and_then(|v| v.singleton(id))
            .map(|_| ())
            .ok_or(format!("{kind} id {id} is not declared"))
    }
}

pub fn active_endpoints(cfg: &ServiceConfig, mode: Mode) -> usize {
    cfg.endpoints
        .iter()
        .filter(|e| mode == Mode::Automated || !e.reminder_support)
        .count()
}

fn describe(a: &Action) -> String {
    match a {
        Action::Message { kind, id, .. } => format!("{kind} {id}"),
        Action::Actuator { id, on, .. } => format!("{id} {}", if *on { "on" } else { "off" }),
        Action::Notify { kind, .. } => kind.clone(),
        Action::ModeChange { to, .. } => to.as_str().to_string(),
    }
}
