use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sensor {
    Accel,
    Gyro,
    Rotvec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Sensor {
    pub const ALL: [Sensor; 3] = [Sensor::Accel, Sensor::Gyro, Sensor::Rotvec];

    pub fn name(self) -> &'static str {
        match self {
            Sensor::Accel => "accel",
            Sensor::Gyro => "gyro",
            Sensor::Rotvec => "rotvec",
        }
    }
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

impl FromStr for Sensor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Sensor::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::input(format!("unknown sensor `{s}`")))
    }
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        Axis::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::input(format!("unknown axis `{s}`")))
    }
}

/// One of the nine raw (sensor, axis) streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AxisChannel {
    pub sensor: Sensor,
    pub axis: Axis,
}

pub const NUM_AXIS_CHANNELS: usize = 9;

impl AxisChannel {
    pub fn all() -> [AxisChannel; NUM_AXIS_CHANNELS] {
        let mut out = [AxisChannel {
            sensor: Sensor::Accel,
            axis: Axis::X,
        }; NUM_AXIS_CHANNELS];
        for (i, slot) in out.iter_mut().enumerate() {
            slot.sensor = Sensor::ALL[i / 3];
            slot.axis = Axis::ALL[i % 3];
        }
        out
    }

    pub fn index(self) -> usize {
        self.sensor as usize * 3 + self.axis as usize
    }
}

impl fmt::Display for AxisChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.sensor.name(), self.axis.name())
    }
}

/// A resampled channel: the nine axis streams followed by the three per-sensor
/// summation streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    Axis(AxisChannel),
    Sum(Sensor),
}

pub const NUM_CHANNELS: usize = NUM_AXIS_CHANNELS + 3;

impl Channel {
    pub fn all() -> Vec<Channel> {
        AxisChannel::all()
            .into_iter()
            .map(Channel::Axis)
            .chain(Sensor::ALL.into_iter().map(Channel::Sum))
            .collect()
    }

    pub fn index(self) -> usize {
        match self {
            Channel::Axis(a) => a.index(),
            Channel::Sum(s) => NUM_AXIS_CHANNELS + s as usize,
        }
    }

    pub fn name(self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::Axis(a) => a.fmt(f),
            Channel::Sum(s) => write!(f, "{}_sum", s.name()),
        }
    }
}
