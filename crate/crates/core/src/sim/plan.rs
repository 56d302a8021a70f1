use serde::{Deserialize, Serialize};

use super::geometry::DangerZone;
use crate::rulebook::default_rulebook;

pub const OBJECT_SIZE_M: [f64; 3] = [0.52, 0.7, 0.23];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmartObject {
    pub id: String,
    pub x: f64,
    pub y: f64,
    #[serde(default = "default_size")]
    pub size: [f64; 3],
}

fn default_size() -> [f64; 3] {
    OBJECT_SIZE_M
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

/// Room extents in meters, with its objects, anchors and danger zones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloorPlan {
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default = "default_depth")]
    pub depth: f64,
    #[serde(default = "default_height")]
    pub height: f64,
    #[serde(default = "default_objects")]
    pub objects: Vec<SmartObject>,
    #[serde(default = "default_anchors")]
    pub anchors: Vec<Anchor>,
    #[serde(default)]
    pub zones: Vec<DangerZone>,
}

fn default_width() -> f64 {
    8.5
}
fn default_depth() -> f64 {
    4.6
}
fn default_height() -> f64 {
    2.0
}

/// The rulebook's objects, so rule qualifiers and the plan always agree.
pub fn default_objects() -> Vec<SmartObject> {
    default_rulebook()
        .objects
        .into_iter()
        .map(|o| SmartObject {
            id: o.name,
            x: o.x,
            y: o.y,
            size: OBJECT_SIZE_M,
        })
        .collect()
}

pub fn default_anchors() -> Vec<Anchor> {
    [("A1", 0.0, 0.0), ("A2", 2.8, 4.8), ("A3", 7.2, 2.4)]
        .into_iter()
        .map(|(id, x, y)| Anchor {
            id: id.into(),
            x,
            y,
        })
        .collect()
}

impl Default for FloorPlan {
    fn default() -> Self {
        FloorPlan {
            width: default_width(),
            depth: default_depth(),
            height: default_height(),
            objects: default_objects(),
            anchors: default_anchors(),
            zones: Vec::new(),
        }
    }
}

impl FloorPlan {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        (0.0..=self.width).contains(&x) && (0.0..=self.depth).contains(&y)
    }

    pub fn object(&self, id: &str) -> Option<&SmartObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    /// Objects and zones must sit inside the room. Anchors are wall-mounted
    /// and only need finite coordinates.
    pub fn check(&self) -> Result<(), String> {
        if !(self.width > 0.0 && self.depth > 0.0 && self.height > 0.0) {
            return Err("room extents must be positive".into());
        }
        for o in &self.objects {
            if !self.contains(o.x, o.y) {
                return Err(format!(
                    "object `{}` at ({}, {}) is outside the room",
                    o.id, o.x, o.y
                ));
            }
        }
        for a in &self.anchors {
            if !(a.x.is_finite() && a.y.is_finite()) {
                return Err(format!("anchor `{}` has non-finite coordinates", a.id));
            }
        }
        for z in &self.zones {
            z.check()?;
            for [x, y] in z.extent_points() {
                if !self.contains(x, y) {
                    return Err(format!(
                        "zone `{}` point ({x}, {y}) is outside the room",
                        z.id
                    ));
                }
            }
        }
        Ok(())
    }
}
