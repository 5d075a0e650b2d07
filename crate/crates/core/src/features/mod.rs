//! Fixed-order swipe feature catalog: 117 touch features followed by 94
//! motion features.
//!
//! The catalog is frozen. Indices never move within a major version; the
//! committed `REGISTRY.json` next to this crate's manifest is the record and
//! a test keeps it in sync with [`catalog`].

mod motion;
mod touch;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::segment::Swipe;

pub use motion::extract_motion;
pub use touch::extract_touch;

pub const N_TOUCH: usize = 117;
pub const N_MOTION: usize = 94;
pub const N_FEATURES: usize = N_TOUCH + N_MOTION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    Touch,
    Motion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    Position,
    Pressure,
    Kinematics,
    Geometry,
    Direction,
    Temporal,
    Checkpoint,
    Transition,
    MotionCentral,
    MotionExtremes,
    MotionPercentiles,
    MotionEnergy,
    MotionShape,
    MotionCross,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureId {
    pub index: usize,
    pub name: String,
    pub group: FeatureGroup,
    pub channel: Channel,
}

/// Which catalog columns a model may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSet {
    Touch,
    Motion,
    Fusion,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 3] = [FeatureSet::Touch, FeatureSet::Motion, FeatureSet::Fusion];

    pub fn columns(self) -> std::ops::Range<usize> {
        match self {
            FeatureSet::Touch => 0..N_TOUCH,
            FeatureSet::Motion => N_TOUCH..N_FEATURES,
            FeatureSet::Fusion => 0..N_FEATURES,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureSet::Touch => "touch",
            FeatureSet::Motion => "motion",
            FeatureSet::Fusion => "fusion",
        }
    }
}

impl std::str::FromStr for FeatureSet {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "touch" => Ok(FeatureSet::Touch),
            "motion" => Ok(FeatureSet::Motion),
            "fusion" => Ok(FeatureSet::Fusion),
            other => Err(crate::Error::InvalidConfig(format!(
                "unknown feature set {other:?}"
            ))),
        }
    }
}

impl std::fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// 211 finite values in catalog order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

const NINE: [&str; 9] = crate::stats::NINE_STAT_NAMES;
const CHECKPOINTS: [u32; 5] = [20, 35, 50, 65, 80];

pub(crate) const WINDOW_FEATURES: [(&str, FeatureGroup); 28] = {
    use FeatureGroup::*;
    [
        ("mean", MotionCentral),
        ("std", MotionCentral),
        ("var", MotionCentral),
        ("mad", MotionCentral),
        ("trimmed_mean10", MotionCentral),
        ("min", MotionExtremes),
        ("max", MotionExtremes),
        ("range", MotionExtremes),
        ("argmin_frac", MotionExtremes),
        ("argmax_frac", MotionExtremes),
        ("p5", MotionPercentiles),
        ("p10", MotionPercentiles),
        ("p25", MotionPercentiles),
        ("p50", MotionPercentiles),
        ("p75", MotionPercentiles),
        ("p90", MotionPercentiles),
        ("p95", MotionPercentiles),
        ("iqr", MotionPercentiles),
        ("rms", MotionEnergy),
        ("mean_square", MotionEnergy),
        ("mean_abs_diff", MotionEnergy),
        ("autocorr1", MotionShape),
        ("slope", MotionShape),
        ("mean_cross_rate", MotionShape),
        ("peak_count", MotionShape),
        ("peak_mean", MotionShape),
        ("first_last_delta", MotionShape),
        ("mean_minus_median", MotionShape),
    ]
};

pub(crate) const CROSS_STATS: [&str; 5] = ["mean", "std", "rms", "max", "range"];

fn build_catalog() -> Vec<FeatureId> {
    use FeatureGroup::*;
    let mut entries: Vec<(String, FeatureGroup)> = Vec::with_capacity(N_FEATURES);
    fn nine(prefix: &str, group: FeatureGroup, entries: &mut Vec<(String, FeatureGroup)>) {
        for s in NINE {
            entries.push((format!("touch.{prefix}.{s}"), group));
        }
    }
    nine("x", Position, &mut entries);
    nine("y", Position, &mut entries);
    nine("pressure", Pressure, &mut entries);
    for series in ["vx", "vy", "speed", "acc"] {
        nine(series, Kinematics, &mut entries);
    }
    for name in [
        "start_x",
        "start_y",
        "end_x",
        "end_y",
        "dx",
        "dy",
        "displacement",
        "path_length",
        "straightness",
        "x_range",
        "y_range",
        "aspect_ratio",
        "dev_max",
        "dev_mean",
        "dev_std",
        "chord_area",
        "curvature_mean",
        "curvature_std",
        "curvature_max",
        "bbox_area",
    ] {
        entries.push((format!("touch.{name}"), Geometry));
    }
    for name in [
        "chord_angle",
        "chord_sin",
        "chord_cos",
        "first3_angle",
        "last3_angle",
        "end_angle_diff",
        "segment_angle_mean",
        "segment_angle_circstd",
        "x_dir_changes",
        "y_dir_changes",
    ] {
        entries.push((format!("touch.{name}"), Direction));
    }
    for name in [
        "duration",
        "n_points",
        "dt_mean",
        "dt_std",
        "peak_speed_time_frac",
        "peak_pressure_time_frac",
    ] {
        entries.push((format!("touch.{name}"), Temporal));
    }
    for series in ["speed", "pressure", "curvature"] {
        for q in CHECKPOINTS {
            entries.push((format!("touch.{series}_at{q}"), Checkpoint));
        }
    }
    for name in ["pressure_delta", "speed_delta", "jerk_mean"] {
        entries.push((format!("touch.{name}"), Transition));
    }
    debug_assert_eq!(entries.len(), N_TOUCH);

    for window in ["pre", "during", "post"] {
        for (name, group) in WINDOW_FEATURES {
            entries.push((format!("motion.{window}.{name}"), group));
        }
    }
    for other in ["pre", "post"] {
        for s in CROSS_STATS {
            entries.push((format!("motion.during_minus_{other}.{s}"), MotionCross));
        }
    }
    debug_assert_eq!(entries.len(), N_FEATURES);

    entries
        .into_iter()
        .enumerate()
        .map(|(index, (name, group))| FeatureId {
            index,
            name,
            group,
            channel: if index < N_TOUCH {
                Channel::Touch
            } else {
                Channel::Motion
            },
        })
        .collect()
}

/// The frozen feature registry.
pub fn catalog() -> &'static [FeatureId] {
    static CATALOG: OnceLock<Vec<FeatureId>> = OnceLock::new();
    CATALOG.get_or_init(build_catalog)
}

pub fn feature_name(index: usize) -> &'static str {
    &catalog()[index].name
}

/// Touch and motion features concatenated in catalog order.
pub fn extract(swipe: &Swipe) -> FeatureVector {
    let mut v = Vec::with_capacity(N_FEATURES);
    v.extend_from_slice(&extract_touch(swipe));
    v.extend_from_slice(&extract_motion(swipe));
    debug_assert!(v.iter().all(|x| x.is_finite()));
    FeatureVector(v)
}

/// `atan2(dy, dx)` in degrees, mapped into (-180, 180].
pub(crate) fn angle_deg(dx: f64, dy: f64) -> f64 {
    let a = dy.atan2(dx).to_degrees();
    if a <= -180.0 {
        a + 360.0
    } else {
        a
    }
}

pub(crate) fn wrap_deg(mut d: f64) -> f64 {
    while d > 180.0 {
        d -= 360.0;
    }
    while d <= -180.0 {
        d += 360.0;
    }
    d
}
