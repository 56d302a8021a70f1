use serde::{Deserialize, Serialize};

/// Zones also capture poses whose distance to the boundary is within this
/// many meters.
pub const ZONE_MARGIN_M: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Degrees in [0, 360), counterclockwise from +x.
    pub facing: f64,
}

/// Planar center-to-center distance in decimeters.
pub fn distance_dm(x: f64, y: f64, ox: f64, oy: f64) -> f64 {
    (ox - x).hypot(oy - y) * 10.0
}

/// Bearing from `(x, y)` to `(ox, oy)` in the facing frame, in [0, 360).
pub fn bearing_deg(x: f64, y: f64, ox: f64, oy: f64) -> f64 {
    normalize_deg((oy - y).atan2(ox - x).to_degrees())
}

pub fn normalize_deg(a: f64) -> f64 {
    let r = a.rem_euclid(360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Signed angle in (-180, 180].
pub fn wrap180(a: f64) -> f64 {
    let r = normalize_deg(a);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

/// Unsigned angle between where the pose faces and where the object lies.
pub fn heading_deviation(pose: &Pose, ox: f64, oy: f64) -> f64 {
    wrap180(pose.facing - bearing_deg(pose.x, pose.y, ox, oy)).abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ZoneShape {
    Disc { x: f64, y: f64, r: f64 },
    Polygon { points: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DangerZone {
    pub id: String,
    #[serde(default)]
    pub label: String,
    #[serde(flatten)]
    pub shape: ZoneShape,
}

impl DangerZone {
    pub fn check(&self) -> Result<(), String> {
        match &self.shape {
            ZoneShape::Disc { x, y, r } => {
                if !(x.is_finite() && y.is_finite() && r.is_finite() && *r > 0.0) {
                    return Err(format!("zone `{}` needs a positive radius", self.id));
                }
            }
            ZoneShape::Polygon { points } => {
                if points.len() < 3 || polygon_area(points).abs() < 1e-9 {
                    return Err(format!("zone `{}` polygon is degenerate", self.id));
                }
            }
        }
        Ok(())
    }

    /// Distance in meters from the point to the zone, 0 inside.
    pub fn distance(&self, x: f64, y: f64) -> f64 {
        match &self.shape {
            ZoneShape::Disc { x: cx, y: cy, r } => ((x - cx).hypot(y - cy) - r).max(0.0),
            ZoneShape::Polygon { points } => {
                if point_in_polygon(x, y, points) {
                    return 0.0;
                }
                (0..points.len())
                    .map(|i| {
                        let a = points[i];
                        let b = points[(i + 1) % points.len()];
                        segment_distance(x, y, a, b)
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Points used for the room-extent check.
    pub fn extent_points(&self) -> Vec<[f64; 2]> {
        match &self.shape {
            ZoneShape::Disc { x, y, .. } => vec![[*x, *y]],
            ZoneShape::Polygon { points } => points.clone(),
        }
    }
}

/// First declared zone containing the point or within the margin of it.
pub fn in_danger_zone(x: f64, y: f64, zones: &[DangerZone]) -> Option<&DangerZone> {
    zones.iter().find(|z| z.distance(x, y) <= ZONE_MARGIN_M)
}

fn polygon_area(points: &[[f64; 2]]) -> f64 {
    let n = points.len();
    0.5 * (0..n)
        .map(|i| {
            let [x0, y0] = points[i];
            let [x1, y1] = points[(i + 1) % n];
            x0 * y1 - x1 * y0
        })
        .sum::<f64>()
}

fn point_in_polygon(x: f64, y: f64, points: &[[f64; 2]]) -> bool {
    let mut inside = false;
    let n = points.len();
    let mut j = n - 1;
    for i in 0..n {
        let [xi, yi] = points[i];
        let [xj, yj] = points[j];
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn segment_distance(x: f64, y: f64, a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((x - a[0]) * dx + (y - a[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    (x - (a[0] + t * dx)).hypot(y - (a[1] + t * dy))
}
