//! Time- and frequency-domain features over 1-s windows.

mod catalog;
mod scaler;
mod spectrum;
mod time;

pub use catalog::{
    time_plan, Domain, FeatureCatalog, FeatureDescriptor, FeatureDomain, FeatureKind, Measure,
    FREQ_COMPONENTS, NUM_FEATURES, NUM_FREQ_FEATURES, NUM_TIME_FEATURES,
};
pub use scaler::{apply_scaler, fit_scaler, Scaler};
pub use spectrum::{dft, dft_magnitudes, spectral_entropy, NUM_BINS};

use serde::{Deserialize, Serialize};

use crate::channel::{Channel, NUM_AXIS_CHANNELS};
use crate::error::{Error, Result};
use crate::mode::ModeLabel;
use crate::signal::{derivative, SumMode, Window};

/// Which DFT components become frequency features.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreqSelect {
    /// The twenty largest non-DC magnitudes, strongest first.
    #[default]
    TopMagnitudes,
    /// Bins 1..=20 in bin order.
    FirstBins,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub sum_mode: SumMode,
    pub freq_select: FreqSelect,
}

/// Feature values aligned to a list of catalog ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub mode: ModeLabel,
    pub ids: Vec<usize>,
    pub values: Vec<f64>,
}

/// The 165 time-domain values of a window, in catalog order.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePart(pub Vec<f64>);

/// The 180 frequency-domain values of a window, in catalog order.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqPart(pub Vec<f64>);

pub fn time_features(window: &Window, catalog: &FeatureCatalog) -> Result<TimePart> {
    window.validate()?;
    let mut out = Vec::with_capacity(NUM_TIME_FEATURES);
    let mut current: Option<(Channel, time::Summary, time::Summary)> = None;
    for d in catalog.descriptors.iter().filter(|d| d.domain == Domain::Time) {
        let FeatureKind::Measure(m) = d.kind else {
            return Err(Error::Feature(format!("time descriptor {} has no measure", d.id)));
        };
        if current.as_ref().is_none_or(|(c, _, _)| *c != d.channel) {
            let series = window.channel(d.channel.index());
            let deriv = derivative(series, window.dt)?;
            current = Some((d.channel, time::Summary::of(series), time::Summary::of(&deriv)));
        }
        let (ch, raw, dv) = current.as_ref().expect("summary computed above");
        let series = window.channel(ch.index());
        out.push(time::measure_value(m, raw, dv, || {
            spectral_entropy(&dft_magnitudes(series).expect("validated window length"))
        }));
    }
    Ok(TimePart(out))
}

/// Component values of one channel under the given selection rule.
pub fn channel_components(series: &[f64], select: FreqSelect) -> Result<Vec<f64>> {
    let mags = dft_magnitudes(series)?;
    let ac = &mags[1..];
    Ok(match select {
        FreqSelect::TopMagnitudes => {
            let mut sorted = ac.to_vec();
            // stable: equal magnitudes keep bin order
            sorted.sort_by(|a, b| b.total_cmp(a));
            sorted.truncate(FREQ_COMPONENTS);
            sorted
        }
        FreqSelect::FirstBins => ac[..FREQ_COMPONENTS].to_vec(),
    })
}

pub fn freq_features(window: &Window, select: FreqSelect) -> Result<FreqPart> {
    window.validate()?;
    let mut out = Vec::with_capacity(NUM_FREQ_FEATURES);
    for ch in 0..NUM_AXIS_CHANNELS {
        out.extend(channel_components(window.channel(ch), select)?);
    }
    Ok(FreqPart(out))
}

/// Concatenates whichever parts are present in catalog order.
pub fn pool(
    mode: ModeLabel,
    time: Option<&TimePart>,
    freq: Option<&FreqPart>,
    catalog: &FeatureCatalog,
) -> Result<FeatureVector> {
    let mut ids = Vec::new();
    let mut values = Vec::new();
    if let Some(TimePart(t)) = time {
        let tids = catalog.ids(FeatureDomain::Time);
        if t.len() != tids.len() {
            return Err(Error::Feature(format!(
                "time part has {} values for {} slots",
                t.len(),
                tids.len()
            )));
        }
        ids.extend(tids);
        values.extend_from_slice(t);
    }
    if let Some(FreqPart(f)) = freq {
        let fids = catalog.ids(FeatureDomain::Freq);
        if f.len() != fids.len() {
            return Err(Error::Feature(format!(
                "frequency part has {} values for {} slots",
                f.len(),
                fids.len()
            )));
        }
        ids.extend(fids);
        values.extend_from_slice(f);
    }
    if ids.is_empty() {
        return Err(Error::Feature("nothing to pool".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Feature("non-finite feature value".into()));
    }
    Ok(FeatureVector {
        mode,
        ids,
        values,
    })
}

/// Extracts the features of `domain` from one window.
pub fn extract(
    window: &Window,
    catalog: &FeatureCatalog,
    domain: FeatureDomain,
    config: FeatureConfig,
) -> Result<FeatureVector> {
    let time = domain
        .includes(Domain::Time)
        .then(|| time_features(window, catalog))
        .transpose()?;
    let freq = domain
        .includes(Domain::Freq)
        .then(|| freq_features(window, config.freq_select))
        .transpose()?;
    pool(window.mode, time.as_ref(), freq.as_ref(), catalog)
}

impl std::str::FromStr for FreqSelect {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "top_magnitudes" => Ok(FreqSelect::TopMagnitudes),
            "first_bins" => Ok(FreqSelect::FirstBins),
            _ => Err(Error::input(format!(
                "unknown frequency selection `{s}` (expected top_magnitudes or first_bins)"
            ))),
        }
    }
}
