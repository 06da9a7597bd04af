//! Synthetic labelled sensor traces.
//!
//! Each mode has an accelerometer signature (dominant tone, amplitude and
//! optional vibration / stop-go modulation). Gyroscope and rotation-vector
//! streams are scaled, phase-shifted copies of the same motion with their own
//! noise. Every axis is sampled on its own jittered clock, so the channels are
//! never synchronized.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::channel::{AxisChannel, Sensor, NUM_AXIS_CHANNELS};
use crate::error::{Error, Result};
use crate::mode::{ModeLabel, NUM_MODES};
use crate::seed::{derive_seed, rng_for};

/// Generator parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    /// Seconds of data per mode, indexed by [`ModeLabel::index`].
    pub durations_s: [f64; NUM_MODES],
    pub base_rate_hz: f64,
    /// Timestamp jitter as a fraction of the nominal sample interval.
    pub jitter: f64,
    /// Standard deviation of the additive Gaussian noise, in sensor units.
    pub noise: f64,
    pub seed: u64,
    /// Each mode's duration is split into this many independently seeded traces.
    pub traces_per_mode: usize,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            durations_s: [1800.0; NUM_MODES],
            base_rate_hz: 25.0,
            jitter: 0.1,
            noise: 0.1,
            seed: 0,
            traces_per_mode: 1,
        }
    }
}

impl GenSpec {
    pub fn with_duration(mut self, seconds: f64) -> Self {
        self.durations_s = [seconds; NUM_MODES];
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (m, d) in ModeLabel::ALL.iter().zip(self.durations_s) {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "duration for {m} must be positive, got {d}"
                )));
            }
        }
        if !(1.0..=100.0).contains(&self.base_rate_hz) {
            return Err(Error::InvalidSpec(format!(
                "base rate must lie in [1, 100] Hz, got {}",
                self.base_rate_hz
            )));
        }
        if !(0.0..0.5).contains(&self.jitter) {
            return Err(Error::InvalidSpec(format!(
                "jitter must lie in [0, 0.5), got {}",
                self.jitter
            )));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "noise level must be non-negative, got {}",
                self.noise
            )));
        }
        if self.traces_per_mode == 0 {
            return Err(Error::InvalidSpec("traces_per_mode must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub v: f64,
}

/// A labelled recording of the nine raw axis channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorTrace {
    pub mode: ModeLabel,
    /// Indexed by [`AxisChannel::index`].
    pub channels: Vec<Vec<Sample>>,
}

impl SensorTrace {
    pub fn channel(&self, ch: AxisChannel) -> &[Sample] {
        &self.channels[ch.index()]
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels.len() != NUM_AXIS_CHANNELS {
            return Err(Error::input(format!(
                "trace has {} channels, expected {NUM_AXIS_CHANNELS}",
                self.channels.len()
            )));
        }
        for ch in AxisChannel::all() {
            let samples = self.channel(ch);
            if samples.len() < 2 {
                return Err(Error::Channel {
                    channel: ch.to_string(),
                    reason: format!("needs at least 2 samples, has {}", samples.len()),
                });
            }
            if let Some(k) = samples.windows(2).position(|w| !(w[1].t > w[0].t)) {
                return Err(Error::Channel {
                    channel: ch.to_string(),
                    reason: format!("timestamps not strictly increasing at sample {}", k + 1),
                });
            }
        }
        Ok(())
    }
}

/// Accelerometer signature of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Signature {
    pub freq_hz: f64,
    pub amplitude: f64,
    /// High-frequency low-amplitude vibration (frequency, amplitude).
    pub vibration: Option<(f64, f64)>,
    /// Stop-go amplitude modulation frequency.
    pub modulation_hz: Option<f64>,
    pub gyro_scale: f64,
    pub rotvec_scale: f64,
}

impl Signature {
    pub fn of(mode: ModeLabel) -> Signature {
        match mode {
            ModeLabel::Walk => Signature {
                freq_hz: 2.0,
                amplitude: 1.0,
                vibration: None,
                modulation_hz: None,
                gyro_scale: 0.5,
                rotvec_scale: 0.2,
            },
            ModeLabel::Run => Signature {
                freq_hz: 3.0,
                amplitude: 2.5,
                vibration: None,
                modulation_hz: None,
                gyro_scale: 0.7,
                rotvec_scale: 0.25,
            },
            ModeLabel::Bike => Signature {
                freq_hz: 1.2,
                amplitude: 0.8,
                vibration: None,
                modulation_hz: None,
                gyro_scale: 0.6,
                rotvec_scale: 0.15,
            },
            ModeLabel::Car => Signature {
                freq_hz: 0.3,
                amplitude: 0.3,
                vibration: Some((15.0, 0.1)),
                modulation_hz: None,
                gyro_scale: 0.3,
                rotvec_scale: 0.1,
            },
            ModeLabel::Bus => Signature {
                freq_hz: 0.2,
                amplitude: 0.4,
                vibration: Some((15.0, 0.1)),
                modulation_hz: Some(0.05),
                gyro_scale: 0.4,
                rotvec_scale: 0.1,
            },
        }
    }

    /// Noise-free motion value at time `t` for the given axis phase.
    fn motion(&self, t: f64, phase: f64, vib_phase: f64) -> f64 {
        let envelope = match self.modulation_hz {
            // stop-go: amplitude swings between 0 and the full value
            Some(fm) => 0.5 * (1.0 - (2.0 * PI * fm * t).cos()),
            None => 1.0,
        };
        let mut v = self.amplitude * envelope * (2.0 * PI * self.freq_hz * t + phase).sin();
        if let Some((fv, av)) = self.vibration {
            v += av * (2.0 * PI * fv * t + vib_phase).sin();
        }
        v
    }
}

const AXIS_GAIN: [f64; 3] = [1.0, 0.8, 0.6];
const AXIS_PHASE: [f64; 3] = [0.0, PI / 3.0, 2.0 * PI / 3.0];

fn sensor_transform(sensor: Sensor, sig: &Signature) -> (f64, f64) {
    match sensor {
        Sensor::Accel => (1.0, 0.0),
        Sensor::Gyro => (sig.gyro_scale, PI / 4.0),
        Sensor::Rotvec => (sig.rotvec_scale, PI / 2.0),
    }
}

/// Generates one trace of `duration_s` seconds for `mode`, seeded by
/// `(spec.seed, mode index)`.
pub fn generate_trace(mode: ModeLabel, duration_s: f64, spec: &GenSpec) -> Result<SensorTrace> {
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "duration must be positive, got {duration_s}"
        )));
    }
    spec.validate()?;
    let trace_seed = derive_seed(spec.seed, "trace", mode.index() as u64);
    Ok(generate_seeded(mode, duration_s, spec, trace_seed))
}

fn generate_seeded(mode: ModeLabel, duration_s: f64, spec: &GenSpec, trace_seed: u64) -> SensorTrace {
    let sig = Signature::of(mode);
    let base_phase = rng_for(trace_seed, "phase", 0).gen_range(0.0..2.0 * PI);
    let vib_phase = rng_for(trace_seed, "phase", 1).gen_range(0.0..2.0 * PI);
    let dt = 1.0 / spec.base_rate_hz;
    // one guard sample beyond each end so the synchronized span covers [0, duration]
    let n = (duration_s * spec.base_rate_hz).ceil() as i64;
    let noise = Normal::new(0.0, spec.noise).expect("validated noise level");

    let channels = AxisChannel::all()
        .into_iter()
        .map(|ch| {
            let mut rng = rng_for(trace_seed, "channel", ch.index() as u64);
            let (scale, shift) = sensor_transform(ch.sensor, &sig);
            let a = ch.axis as usize;
            (-1..=n + 1)
                .map(|k| {
                    let jit = if spec.jitter > 0.0 {
                        rng.gen_range(-spec.jitter..spec.jitter)
                    } else {
                        0.0
                    };
                    let t = (k as f64 + jit) * dt;
                    let clean = scale
                        * AXIS_GAIN[a]
                        * sig.motion(t, base_phase + AXIS_PHASE[a] + shift, vib_phase + AXIS_PHASE[a]);
                    let eps = if spec.noise > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                    Sample { t, v: clean + eps }
                })
                .collect()
        })
        .collect();
    SensorTrace { mode, channels }
}

/// Generates the balanced dataset: `traces_per_mode` traces for every mode,
/// each covering an equal share of that mode's duration.
pub fn generate_dataset(spec: &GenSpec) -> Result<Vec<SensorTrace>> {
    spec.validate()?;
    let mut out = Vec::with_capacity(NUM_MODES * spec.traces_per_mode);
    for mode in ModeLabel::ALL {
        let share = spec.durations_s[mode.index()] / spec.traces_per_mode as f64;
        for seg in 0..spec.traces_per_mode {
            let trace_seed = if spec.traces_per_mode == 1 {
                derive_seed(spec.seed, "trace", mode.index() as u64)
            } else {
                derive_seed(
                    spec.seed,
                    "trace-segment",
                    (mode.index() * 1_000_000 + seg) as u64,
                )
            };
            out.push(generate_seeded(mode, share, spec, trace_seed));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet() -> GenSpec {
        GenSpec {
            jitter: 0.0,
            noise: 0.0,
            ..GenSpec::default()
        }
    }

    #[test]
    fn default_dataset_is_five_half_hour_traces() {
        let spec = GenSpec::default();
        assert_eq!(spec.durations_s, [1800.0; 5]);
        let short = spec.clone().with_duration(4.0);
        let traces = generate_dataset(&short).unwrap();
        assert_eq!(traces.len(), 5);
        for (t, m) in traces.iter().zip(ModeLabel::ALL) {
            assert_eq!(t.mode, m);
            t.validate().unwrap();
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = GenSpec::default();
        s.durations_s[2] = 0.0;
        assert!(matches!(generate_dataset(&s), Err(Error::InvalidSpec(_))));
        let s = GenSpec {
            jitter: 0.5,
            ..GenSpec::default()
        };
        assert!(s.validate().is_err());
        let s = GenSpec {
            base_rate_hz: 0.5,
            ..GenSpec::default()
        };
        assert!(s.validate().is_err());
        assert!(generate_trace(ModeLabel::Walk, -1.0, &GenSpec::default()).is_err());
    }

    #[test]
    fn seeded_generation_is_bit_identical() {
        let spec = GenSpec::default();
        let a = generate_trace(ModeLabel::Bus, 3.0, &spec).unwrap();
        let b = generate_trace(ModeLabel::Bus, 3.0, &spec).unwrap();
        assert_eq!(a, b);
        let c = generate_trace(
            ModeLabel::Bus,
            3.0,
            &GenSpec {
                seed: 1,
                ..spec
            },
        )
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn quiet_walk_is_a_pure_two_hertz_tone() {
        let t = generate_trace(ModeLabel::Walk, 2.0, &quiet()).unwrap();
        let x = t.channel(AxisChannel::all()[0]);
        // v(t) = a sin(4 pi t) + b cos(4 pi t); solve (a, b) from two samples, check the rest
        let w = 4.0 * PI;
        let (s0, s1) = (x[2], x[3]);
        let det = (w * s0.t).sin() * (w * s1.t).cos() - (w * s0.t).cos() * (w * s1.t).sin();
        let a = (s0.v * (w * s1.t).cos() - s1.v * (w * s0.t).cos()) / det;
        let b = ((w * s0.t).sin() * s1.v - (w * s1.t).sin() * s0.v) / det;
        assert!(((a * a + b * b).sqrt() - 1.0).abs() < 1e-9);
        for s in x {
            let expected = a * (w * s.t).sin() + b * (w * s.t).cos();
            assert!((s.v - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn jittered_timestamps_stay_increasing() {
        let spec = GenSpec {
            jitter: 0.49,
            ..GenSpec::default()
        };
        generate_trace(ModeLabel::Run, 30.0, &spec)
            .unwrap()
            .validate()
            .unwrap();
    }
}
