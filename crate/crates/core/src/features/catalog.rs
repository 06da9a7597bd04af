use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::{AxisChannel, Channel, Sensor};

/// The eighteen time-domain measures: ten on the raw window, eight on its
/// first difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Mean,
    Max,
    Min,
    Variance,
    StdDev,
    Range,
    Iqr,
    SignChange,
    Energy,
    SpectralEntropy,
    DerivMean,
    DerivMax,
    DerivMin,
    DerivVariance,
    DerivStdDev,
    DerivRange,
    DerivIqr,
    DerivSignChange,
}

impl Measure {
    pub const ALL: [Measure; 18] = [
        Measure::Mean,
        Measure::Max,
        Measure::Min,
        Measure::Variance,
        Measure::StdDev,
        Measure::Range,
        Measure::Iqr,
        Measure::SignChange,
        Measure::Energy,
        Measure::SpectralEntropy,
        Measure::DerivMean,
        Measure::DerivMax,
        Measure::DerivMin,
        Measure::DerivVariance,
        Measure::DerivStdDev,
        Measure::DerivRange,
        Measure::DerivIqr,
        Measure::DerivSignChange,
    ];

    pub fn on_derivative(self) -> bool {
        self as usize >= Measure::DerivMean as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Measure::Mean => "mean",
            Measure::Max => "max",
            Measure::Min => "min",
            Measure::Variance => "var",
            Measure::StdDev => "std",
            Measure::Range => "range",
            Measure::Iqr => "iqr",
            Measure::SignChange => "signchange",
            Measure::Energy => "energy",
            Measure::SpectralEntropy => "spectral_entropy",
            Measure::DerivMean => "d_mean",
            Measure::DerivMax => "d_max",
            Measure::DerivMin => "d_min",
            Measure::DerivVariance => "d_var",
            Measure::DerivStdDev => "d_std",
            Measure::DerivRange => "d_range",
            Measure::DerivIqr => "d_iqr",
            Measure::DerivSignChange => "d_signchange",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Time,
    Freq,
}

/// Which feature family a run uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureDomain {
    Time,
    Freq,
    #[default]
    Pooled,
}

impl FeatureDomain {
    pub fn includes(self, d: Domain) -> bool {
        matches!(
            (self, d),
            (FeatureDomain::Pooled, _) | (FeatureDomain::Time, Domain::Time) | (FeatureDomain::Freq, Domain::Freq)
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureDomain::Time => "time",
            FeatureDomain::Freq => "freq",
            FeatureDomain::Pooled => "pooled",
        }
    }
}

impl std::str::FromStr for FeatureDomain {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "time" => Ok(FeatureDomain::Time),
            "freq" => Ok(FeatureDomain::Freq),
            "pooled" => Ok(FeatureDomain::Pooled),
            _ => Err(crate::error::Error::input(format!(
                "unknown feature domain `{s}` (expected time, freq or pooled)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Measure(Measure),
    /// Rank of the DFT component (0 = strongest) or its bin offset,
    /// depending on the frequency selection mode.
    Component(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDescriptor {
    pub id: usize,
    pub domain: Domain,
    pub channel: Channel,
    pub kind: FeatureKind,
}

impl FeatureDescriptor {
    /// Column name, e.g. `t_accel_x_mean` or `f_gyro_z_c07`.
    pub fn name(&self) -> String {
        match self.kind {
            FeatureKind::Measure(m) => format!("t_{}_{}", self.channel, m.name()),
            FeatureKind::Component(c) => format!("f_{}_c{:02}", self.channel, c),
        }
    }
}

impl fmt::Display for FeatureDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

pub const NUM_TIME_FEATURES: usize = 165;
pub const NUM_FREQ_FEATURES: usize = 180;
pub const NUM_FEATURES: usize = NUM_TIME_FEATURES + NUM_FREQ_FEATURES;
pub const FREQ_COMPONENTS: usize = 20;

const ROTVEC_AXIS_MEASURES: [Measure; 7] = [
    Measure::Mean,
    Measure::Max,
    Measure::Min,
    Measure::Variance,
    Measure::StdDev,
    Measure::Range,
    Measure::Iqr,
];

const ROTVEC_SUM_MEASURES: [Measure; 4] = [
    Measure::Mean,
    Measure::Variance,
    Measure::Range,
    Measure::SignChange,
];

/// Measures applied to each channel in the time-domain plan.
pub fn time_plan(channel: Channel) -> Vec<Measure> {
    match channel {
        Channel::Axis(AxisChannel {
            sensor: Sensor::Accel | Sensor::Gyro,
            ..
        }) => Measure::ALL.to_vec(),
        Channel::Axis(AxisChannel {
            sensor: Sensor::Rotvec,
            ..
        }) => ROTVEC_AXIS_MEASURES.to_vec(),
        Channel::Sum(Sensor::Accel | Sensor::Gyro) => Measure::ALL
            .into_iter()
            .filter(|m| !matches!(m, Measure::Energy | Measure::SpectralEntropy))
            .collect(),
        Channel::Sum(Sensor::Rotvec) => ROTVEC_SUM_MEASURES.to_vec(),
    }
}

/// Ordered descriptors for all 345 features: ids 0..165 are time-domain
/// (channel order, then measure order), ids 165..345 are the twenty
/// frequency components of each axis channel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureCatalog {
    pub descriptors: Vec<FeatureDescriptor>,
}

impl Default for FeatureCatalog {
    fn default() -> Self {
        Self::standard()
    }
}

impl FeatureCatalog {
    pub fn standard() -> FeatureCatalog {
        let mut descriptors = Vec::with_capacity(NUM_FEATURES);
        for channel in Channel::all() {
            for m in time_plan(channel) {
                descriptors.push(FeatureDescriptor {
                    id: descriptors.len(),
                    domain: Domain::Time,
                    channel,
                    kind: FeatureKind::Measure(m),
                });
            }
        }
        for ch in AxisChannel::all() {
            for c in 0..FREQ_COMPONENTS {
                descriptors.push(FeatureDescriptor {
                    id: descriptors.len(),
                    domain: Domain::Freq,
                    channel: Channel::Axis(ch),
                    kind: FeatureKind::Component(c),
                });
            }
        }
        FeatureCatalog { descriptors }
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&FeatureDescriptor> {
        self.descriptors.get(id)
    }

    pub fn ids(&self, domain: FeatureDomain) -> Vec<usize> {
        self.descriptors
            .iter()
            .filter(|d| domain.includes(d.domain))
            .map(|d| d.id)
            .collect()
    }

    pub fn name(&self, id: usize) -> String {
        self.descriptors
            .get(id)
            .map_or_else(|| format!("feature_{id}"), FeatureDescriptor::name)
    }

    pub fn id_by_name(&self, name: &str) -> Option<usize> {
        self.descriptors.iter().find(|d| d.name() == name).map(|d| d.id)
    }
}
