use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::sim::DangerZone;

use super::{Mode, ModeCause};

pub const STATE_FILE: &str = "state.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneEntry {
    pub zone: DangerZone,
    /// Rule id alerts from this zone are attributed to.
    pub rule: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedSchedule {
    pub at_h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voice: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<i64>,
    /// Day number of the last firing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fired_day: Option<u64>,
}

/// Caregiver edits accepted but not yet applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Pending {
    ZoneAdd { zone: DangerZone },
    ZoneDel { id: String },
    MedSchedule { schedule: MedSchedule },
    Override { mode: Mode },
}

/// Everything that must survive a restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PersistentState {
    pub mode: Mode,
    pub mode_cause: ModeCause,
    pub door_locked: bool,
    pub zones: Vec<ZoneEntry>,
    pub meds: Vec<MedSchedule>,
    pub pending: Vec<Pending>,
    pub notification_seq: u64,
    pub offline: BTreeSet<String>,
    /// Last dispatch time per `rule/channel/value`.
    pub refractory: BTreeMap<String, u64>,
}

impl Default for PersistentState {
    fn default() -> Self {
        PersistentState {
            mode: Mode::Automated,
            mode_cause: ModeCause::Initial,
            door_locked: false,
            zones: Vec::new(),
            meds: Vec::new(),
            pending: Vec::new(),
            notification_seq: 0,
            offline: BTreeSet::new(),
            refractory: BTreeMap::new(),
        }
    }
}

impl PersistentState {
    pub fn load(dir: &Path) -> io::Result<Option<Self>> {
        match fs::read(dir.join(STATE_FILE)) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map(Some)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Write-then-rename so a crash leaves either the old or the new file.
    pub fn save(&self, dir: &Path) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        let tmp = dir.join(format!("{STATE_FILE}.tmp"));
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&serde_json::to_vec_pretty(self).expect("state serializes"))?;
        f.sync_data()?;
        fs::rename(tmp, dir.join(STATE_FILE))
    }
}
