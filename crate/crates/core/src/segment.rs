//! Swipe segmentation, accelerometer window attachment and the direction
//! filter.
//!
//! A swipe is a maximal `Down, Move*, Up` run with more than
//! [`MIN_SWIPE_POINTS`] samples. Each swipe carries three accelerometer
//! magnitude windows:
//!
//! ```text
//!   pre    [t_start - 500, t_start)
//!   during [t_start, t_end]
//!   post   (t_end, t_end + 500]
//! ```

use serde::{Deserialize, Serialize};

use crate::types::{accel_magnitude, AccelSample, Millis, TouchAction, TouchSample};

/// Gestures need strictly more samples than this to count as swipes.
pub const MIN_SWIPE_POINTS: usize = 5;

/// Half-length of the pre/post accelerometer windows.
pub const MOTION_WINDOW_MS: Millis = 500;

/// Consecutive touch samples further apart than this break a gesture.
pub const DEFAULT_MAX_GAP_MS: Millis = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagSample {
    pub t: Millis,
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Swipe {
    pub samples: Vec<TouchSample>,
    pub mag_pre: Vec<MagSample>,
    pub mag_during: Vec<MagSample>,
    pub mag_post: Vec<MagSample>,
}

impl Swipe {
    /// Wraps touch samples without motion windows.
    pub fn from_samples(samples: Vec<TouchSample>) -> Self {
        Swipe {
            samples,
            mag_pre: Vec::new(),
            mag_during: Vec::new(),
            mag_post: Vec::new(),
        }
    }

    pub fn t_start(&self) -> Millis {
        self.samples.first().map_or(0, |s| s.t)
    }

    pub fn t_end(&self) -> Millis {
        self.samples.last().map_or(0, |s| s.t)
    }

    pub fn direction(&self) -> DirectionClass {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => DirectionClass::classify(b.x - a.x, b.y - a.y),
            _ => DirectionClass::Vertical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DirectionClass {
    Vertical,
    Horizontal,
}

impl DirectionClass {
    /// Diagonal ties count as vertical.
    pub fn classify(dx: f64, dy: f64) -> Self {
        if dy.abs() >= dx.abs() {
            DirectionClass::Vertical
        } else {
            DirectionClass::Horizontal
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentConfig {
    pub max_gap_ms: Millis,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        SegmentConfig {
            max_gap_ms: DEFAULT_MAX_GAP_MS,
        }
    }
}

/// Cuts a validated touch stream into swipes (without motion windows).
pub fn segment_swipes(touch: &[TouchSample]) -> Vec<Swipe> {
    segment_swipes_with(touch, &SegmentConfig::default())
}

pub fn segment_swipes_with(touch: &[TouchSample], cfg: &SegmentConfig) -> Vec<Swipe> {
    let mut out = Vec::new();
    let mut run: Option<Vec<TouchSample>> = None;

    for s in touch {
        if let Some(open) = run.as_mut() {
            let last_t = open.last().map_or(s.t, |p| p.t);
            if s.t - last_t > cfg.max_gap_ms {
                // neither side of the gap is a framed gesture
                run = None;
            }
        }
        match s.action {
            TouchAction::Down => run = Some(vec![*s]),
            TouchAction::Move => {
                if let Some(open) = run.as_mut() {
                    open.push(*s);
                }
            }
            TouchAction::Up => {
                if let Some(mut open) = run.take() {
                    open.push(*s);
                    if open.len() > MIN_SWIPE_POINTS {
                        out.push(Swipe::from_samples(open));
                    }
                }
            }
        }
    }
    out
}

/// Fills the pre/during/post magnitude windows of each swipe from an
/// accelerometer stream sorted by time.
pub fn attach_motion(swipes: Vec<Swipe>, accel: &[AccelSample]) -> Vec<Swipe> {
    swipes
        .into_iter()
        .map(|mut sw| {
            let (t0, t1) = (sw.t_start(), sw.t_end());
            let window = |lo: Millis, lo_inclusive: bool, hi: Millis, hi_inclusive: bool| {
                let start = accel.partition_point(|a| if lo_inclusive { a.t < lo } else { a.t <= lo });
                let end = accel.partition_point(|a| if hi_inclusive { a.t <= hi } else { a.t < hi });
                accel[start..end.max(start)]
                    .iter()
                    .map(|a| MagSample {
                        t: a.t,
                        m: accel_magnitude(a),
                    })
                    .collect::<Vec<_>>()
            };
            sw.mag_pre = window(t0 - MOTION_WINDOW_MS, true, t0, false);
            sw.mag_during = window(t0, true, t1, true);
            sw.mag_post = window(t1, false, t1 + MOTION_WINDOW_MS, true);
            sw
        })
        .collect()
}

/// Keeps swipes of the requested direction, preserving order.
pub fn filter_direction(swipes: &[Swipe], keep: DirectionClass) -> Vec<Swipe> {
    swipes
        .iter()
        .filter(|s| s.direction() == keep)
        .cloned()
        .collect()
}
