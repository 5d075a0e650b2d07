//! Raw sensor samples, context labels and session identifiers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Milliseconds on the recording clock.
pub type Millis = i64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TouchAction {
    Down,
    Move,
    Up,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TouchSample {
    pub t: Millis,
    pub x: f64,
    pub y: f64,
    pub pressure: f64,
    pub action: TouchAction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccelSample {
    pub t: Millis,
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
}

impl AccelSample {
    pub fn magnitude(&self) -> f64 {
        accel_magnitude(self)
    }
}

/// Euclidean norm of the three accelerometer axes.
pub fn accel_magnitude(s: &AccelSample) -> f64 {
    (s.ax * s.ax + s.ay * s.ay + s.az * s.az).sqrt()
}

/// Anything carrying a recording timestamp.
pub trait Timestamped {
    fn timestamp(&self) -> Millis;
}

impl Timestamped for TouchSample {
    fn timestamp(&self) -> Millis {
        self.t
    }
}

impl Timestamped for AccelSample {
    fn timestamp(&self) -> Millis {
        self.t
    }
}

/// Sorts samples stably by timestamp and collapses duplicate timestamps,
/// keeping the first occurrence. The result is strictly increasing in time.
pub fn validate_stream<T: Timestamped>(mut samples: Vec<T>) -> Result<Vec<T>> {
    if samples.is_empty() {
        return Err(Error::EmptyStream);
    }
    samples.sort_by_key(|s| s.timestamp());
    samples.dedup_by_key(|s| s.timestamp());
    Ok(samples)
}

/// Phone-usage task crossed with physical activity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Context {
    #[serde(rename = "S1")]
    S1ReadSit,
    #[serde(rename = "S2")]
    S2ReadWalk,
    #[serde(rename = "S3")]
    S3MapSit,
    #[serde(rename = "S4")]
    S4MapWalk,
}

impl Context {
    pub const ALL: [Context; 4] = [
        Context::S1ReadSit,
        Context::S2ReadWalk,
        Context::S3MapSit,
        Context::S4MapWalk,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Context::S1ReadSit => "S1",
            Context::S2ReadWalk => "S2",
            Context::S3MapSit => "S3",
            Context::S4MapWalk => "S4",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Context::S1ReadSit => "read & sit",
            Context::S2ReadWalk => "read & walk",
            Context::S3MapSit => "map & sit",
            Context::S4MapWalk => "map & walk",
        }
    }

    pub fn is_walking(self) -> bool {
        matches!(self, Context::S2ReadWalk | Context::S4MapWalk)
    }

    pub fn is_reading(self) -> bool {
        matches!(self, Context::S1ReadSit | Context::S2ReadWalk)
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Context {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "S1" | "s1" => Ok(Context::S1ReadSit),
            "S2" | "s2" => Ok(Context::S2ReadWalk),
            "S3" | "s3" => Ok(Context::S3MapSit),
            "S4" | "s4" => Ok(Context::S4MapWalk),
            other => Err(Error::InvalidConfig(format!(
                "unknown context {other:?} (expected S1..S4)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SessionId {
    pub user: String,
    pub session_index: u8,
    pub context: Context,
}

impl SessionId {
    pub fn new(user: impl Into<String>, session_index: u8, context: Context) -> Result<Self> {
        if !(1..=4).contains(&session_index) {
            return Err(Error::InvalidConfig(format!(
                "session index {session_index} outside 1..=4"
            )));
        }
        Ok(SessionId {
            user: user.into(),
            session_index,
            context,
        })
    }
}
