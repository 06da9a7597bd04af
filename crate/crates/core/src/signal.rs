//! Conditioning of raw traces: linear-interpolation resampling onto a common
//! 100 Hz grid, per-sensor summation channels, first differences and
//! non-overlapping windowing.

use serde::{Deserialize, Serialize};

use crate::channel::{AxisChannel, Sensor, NUM_AXIS_CHANNELS, NUM_CHANNELS};
use crate::datagen::{Sample, SensorTrace};
use crate::error::{Error, Result};
use crate::mode::ModeLabel;

pub const TARGET_RATE_HZ: f64 = 100.0;
pub const WINDOW_SAMPLES: usize = 100;

/// How the per-sensor summation channel combines the three axes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SumMode {
    /// x + y + z
    #[default]
    Algebraic,
    /// sqrt(x² + y² + z²)
    Norm,
}

impl std::str::FromStr for SumMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "algebraic" => Ok(SumMode::Algebraic),
            "norm" => Ok(SumMode::Norm),
            _ => Err(Error::input(format!(
                "unknown sum mode `{s}` (expected algebraic or norm)"
            ))),
        }
    }
}

/// Synchronized channels on a uniform grid. After [`derive_sum_channels`] the
/// vector holds all twelve channels in [`crate::channel::Channel`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct ResampledChannels {
    pub mode: ModeLabel,
    pub rate_hz: f64,
    pub start_t: f64,
    pub channels: Vec<Vec<f64>>,
}

impl ResampledChannels {
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One second of synchronized data, 100 samples per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub mode: ModeLabel,
    pub channels: Vec<Vec<f64>>,
    pub dt: f64,
}

impl Window {
    pub fn channel(&self, idx: usize) -> &[f64] {
        &self.channels[idx]
    }

    pub fn validate(&self) -> Result<()> {
        if self.channels.len() != NUM_CHANNELS {
            return Err(Error::input(format!(
                "window has {} channels, expected {NUM_CHANNELS}",
                self.channels.len()
            )));
        }
        for (i, c) in self.channels.iter().enumerate() {
            if c.len() != WINDOW_SAMPLES {
                return Err(Error::input(format!(
                    "window channel {i} has {} samples, expected {WINDOW_SAMPLES}",
                    c.len()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::input(format!("window channel {i} has non-finite values")));
            }
        }
        Ok(())
    }
}

/// Piecewise-linear interpolant of `samples` evaluated at increasing `grid`
/// times, all of which must lie inside the sample span.
fn interpolate_on_grid(samples: &[Sample], grid: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut seg = 0;
    grid.map(|t| {
        while seg + 2 < samples.len() && samples[seg + 1].t < t {
            seg += 1;
        }
        let (a, b) = (samples[seg], samples[seg + 1]);
        if t == a.t {
            a.v
        } else if t == b.t {
            b.v
        } else {
            a.v + (b.v - a.v) * (t - a.t) / (b.t - a.t)
        }
    })
    .collect()
}

/// Resamples every axis channel onto the uniform `target_hz` grid that starts
/// at the latest first timestamp and stops at the earliest last timestamp, so
/// no value is ever extrapolated.
pub fn interpolate_resample(trace: &SensorTrace, target_hz: f64) -> Result<ResampledChannels> {
    if !(target_hz.is_finite() && target_hz > 0.0) {
        return Err(Error::input(format!("target rate must be positive, got {target_hz}")));
    }
    trace.validate()?;
    let start = trace
        .channels
        .iter()
        .map(|c| c[0].t)
        .fold(f64::NEG_INFINITY, f64::max);
    let end = trace
        .channels
        .iter()
        .map(|c| c[c.len() - 1].t)
        .fold(f64::INFINITY, f64::min);
    if end < start {
        return Err(Error::input("channels share no common time span"));
    }
    let step = 1.0 / target_hz;
    let mut count = ((end - start) * target_hz).floor() as usize + 1;
    while count > 1 && start + (count - 1) as f64 * step > end {
        count -= 1;
    }
    let channels = AxisChannel::all()
        .iter()
        .map(|&ch| {
            let grid = (0..count).map(|k| start + k as f64 * step);
            interpolate_on_grid(trace.channel(ch), grid)
        })
        .collect();
    Ok(ResampledChannels {
        mode: trace.mode,
        rate_hz: target_hz,
        start_t: start,
        channels,
    })
}

/// Appends the accel, gyro and rotvec summation channels.
pub fn derive_sum_channels(mut rc: ResampledChannels, mode: SumMode) -> Result<ResampledChannels> {
    if rc.channels.len() != NUM_AXIS_CHANNELS {
        return Err(Error::input(format!(
            "summation needs all {NUM_AXIS_CHANNELS} axis channels, found {}",
            rc.channels.len()
        )));
    }
    let n = rc.len();
    if rc.channels.iter().any(|c| c.len() != n) {
        return Err(Error::input("axis channels differ in length"));
    }
    for sensor in Sensor::ALL {
        let base = sensor as usize * 3;
        let (x, y, z) = (&rc.channels[base], &rc.channels[base + 1], &rc.channels[base + 2]);
        let sum = (0..n)
            .map(|k| match mode {
                SumMode::Algebraic => x[k] + y[k] + z[k],
                SumMode::Norm => (x[k] * x[k] + y[k] * y[k] + z[k] * z[k]).sqrt(),
            })
            .collect();
        rc.channels.push(sum);
    }
    Ok(rc)
}

/// Cuts non-overlapping windows of `width_s` seconds; the trailing remainder
/// is dropped.
pub fn segment_windows(rc: &ResampledChannels, width_s: f64) -> Vec<Window> {
    let per_window = (rc.rate_hz * width_s).round() as usize;
    if per_window == 0 {
        return Vec::new();
    }
    let count = rc.len() / per_window;
    (0..count)
        .map(|w| {
            let range = w * per_window..(w + 1) * per_window;
            Window {
                mode: rc.mode,
                channels: rc.channels.iter().map(|c| c[range.clone()].to_vec()).collect(),
                dt: 1.0 / rc.rate_hz,
            }
        })
        .collect()
}

/// Forward difference `(s[k+1] - s[k]) / dt`.
pub fn derivative(series: &[f64], dt: f64) -> Result<Vec<f64>> {
    if series.len() < 2 {
        return Err(Error::input(format!(
            "derivative needs at least 2 samples, got {}",
            series.len()
        )));
    }
    Ok(series.windows(2).map(|w| (w[1] - w[0]) / dt).collect())
}

/// Full conditioning path for one trace: resample, add summation channels,
/// window.
pub fn windows_from_trace(trace: &SensorTrace, sum_mode: SumMode) -> Result<Vec<Window>> {
    let rc = interpolate_resample(trace, TARGET_RATE_HZ)?;
    let rc = derive_sum_channels(rc, sum_mode)?;
    Ok(segment_windows(&rc, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{generate_trace, GenSpec};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trace_from(mut f: impl FnMut(usize, f64) -> Vec<Sample>) -> SensorTrace {
        SensorTrace {
            mode: ModeLabel::Car,
            channels: (0..NUM_AXIS_CHANNELS).map(|c| f(c, 0.0)).collect(),
        }
    }

    #[test]
    fn linear_midpoint() {
        let tr = trace_from(|_, _| vec![Sample { t: 0.0, v: 0.0 }, Sample { t: 1.0, v: 10.0 }]);
        let rc = interpolate_resample(&tr, 2.0).unwrap();
        assert_eq!(rc.channels[0], vec![0.0, 5.0, 10.0]);
    }

    #[test]
    fn on_grid_input_is_reproduced() {
        let tr = trace_from(|c, _| {
            (0..300)
                .map(|k| Sample {
                    t: k as f64 / 100.0,
                    v: (k as f64 * 0.37 + c as f64).sin(),
                })
                .collect()
        });
        let rc = interpolate_resample(&tr, 100.0).unwrap();
        assert_eq!(rc.len(), 300);
        for (c, ch) in rc.channels.iter().enumerate() {
            for (k, v) in ch.iter().enumerate() {
                assert!((v - tr.channels[c][k].v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jittered_sinusoid_resamples_within_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = |t: f64| (2.0 * std::f64::consts::PI * 3.0 * t).sin();
        let tr = trace_from(|_, _| {
            (0..250)
                .map(|k| {
                    let t = (k as f64 + rng.gen_range(-0.1..0.1)) / 25.0;
                    Sample { t, v: f(t) }
                })
                .collect()
        });
        let rc = interpolate_resample(&tr, 100.0).unwrap();
        let mut worst: f64 = 0.0;
        for (k, v) in rc.channels[4].iter().enumerate() {
            let t = rc.start_t + k as f64 / 100.0;
            worst = worst.max((v - f(t)).abs());
        }
        // linear interpolation error of a unit tone is at most (w h)^2 / 8 for knot gap h
        let h = tr.channels[4].windows(2).map(|w| w[1].t - w[0].t).fold(0.0, f64::max);
        let w = 2.0 * std::f64::consts::PI * 3.0;
        let bound = (w * h).powi(2) / 8.0;
        assert!(worst <= bound, "max deviation {worst} > bound {bound}");
        assert!(worst < 0.11, "max deviation {worst}");
    }

    #[test]
    fn resampling_rejects_short_and_unordered_channels() {
        let mut tr = trace_from(|_, _| vec![Sample { t: 0.0, v: 0.0 }, Sample { t: 1.0, v: 1.0 }]);
        tr.channels[3].pop();
        assert!(matches!(interpolate_resample(&tr, 100.0), Err(Error::Channel { .. })));
        let tr = trace_from(|_, _| {
            vec![
                Sample { t: 0.0, v: 0.0 },
                Sample { t: 1.0, v: 1.0 },
                Sample { t: 1.0, v: 2.0 },
            ]
        });
        assert!(interpolate_resample(&tr, 100.0).is_err());
    }

    #[test]
    fn sum_channels() {
        let rc = ResampledChannels {
            mode: ModeLabel::Bike,
            rate_hz: 100.0,
            start_t: 0.0,
            channels: (0..9).map(|c| vec![(c % 3 + 1) as f64, 0.0]).collect(),
        };
        let out = derive_sum_channels(rc.clone(), SumMode::Algebraic).unwrap();
        assert_eq!(out.channels.len(), NUM_CHANNELS);
        for s in 9..12 {
            assert_eq!(out.channels[s], vec![6.0, 0.0]);
        }
        let norm = derive_sum_channels(rc.clone(), SumMode::Norm).unwrap();
        assert!((norm.channels[9][0] - 14f64.sqrt()).abs() < 1e-15);
        let mut missing = rc;
        missing.channels.pop();
        assert!(derive_sum_channels(missing, SumMode::Algebraic).is_err());
    }

    #[test]
    fn sum_matches_elementwise_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rc = ResampledChannels {
            mode: ModeLabel::Bike,
            rate_hz: 100.0,
            start_t: 0.0,
            channels: (0..9).map(|_| (0..57).map(|_| rng.gen_range(-5.0..5.0)).collect()).collect(),
        };
        let out = derive_sum_channels(rc.clone(), SumMode::Algebraic).unwrap();
        for sensor in 0..3 {
            for k in 0..57 {
                let mut acc = 0.0;
                for a in 0..3 {
                    acc += rc.channels[sensor * 3 + a][k];
                }
                assert_eq!(out.channels[9 + sensor][k], acc);
            }
        }
    }

    fn flat(len: usize) -> ResampledChannels {
        ResampledChannels {
            mode: ModeLabel::Walk,
            rate_hz: 100.0,
            start_t: 0.0,
            channels: (0..12).map(|c| (0..len).map(|k| (k * 12 + c) as f64).collect()).collect(),
        }
    }

    #[test]
    fn window_counts() {
        assert_eq!(segment_windows(&flat(350), 1.0).len(), 3);
        let one = segment_windows(&flat(100), 1.0);
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].channels[5], flat(100).channels[5]);
        assert!(segment_windows(&flat(99), 1.0).is_empty());
    }

    #[test]
    fn half_hour_trace_gives_1800_windows() {
        let spec = GenSpec::default();
        let tr = generate_trace(ModeLabel::Bus, 1800.0, &spec).unwrap();
        assert_eq!(windows_from_trace(&tr, SumMode::Algebraic).unwrap().len(), 1800);
    }

    #[test]
    fn derivative_cases() {
        assert_eq!(derivative(&[3.0; 5], 0.01).unwrap(), vec![0.0; 4]);
        let ramp: Vec<f64> = (0..10).map(|k| k as f64 * 0.01).collect();
        for d in derivative(&ramp, 0.01).unwrap() {
            assert!((d - 1.0).abs() < 1e-12);
        }
        assert!(derivative(&[1.0], 0.01).is_err());
    }

    proptest! {
        #[test]
        fn derivative_matches_loop(series in prop::collection::vec(-1e3f64..1e3, 2..200), dt in 1e-3f64..1.0) {
            let d = derivative(&series, dt).unwrap();
            let mut expected = Vec::new();
            let mut k = 0;
            while k + 1 < series.len() {
                expected.push((series[k + 1] - series[k]) / dt);
                k += 1;
            }
            prop_assert_eq!(d, expected);
        }

        #[test]
        fn windows_tile_the_stream(len in 0usize..1000) {
            let rc = flat(len);
            let ws = segment_windows(&rc, 1.0);
            prop_assert_eq!(ws.len() * 100 + len % 100, len);
            for c in 0..12 {
                let joined: Vec<f64> = ws.iter().flat_map(|w| w.channels[c].iter().copied()).collect();
                prop_assert_eq!(&joined[..], &rc.channels[c][..ws.len() * 100]);
            }
        }

        #[test]
        fn resampling_never_extrapolates(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tr = trace_from(|_, _| {
                let off = rng.gen_range(0.0..0.3);
                let mut t = off;
                (0..40).map(|_| { t += rng.gen_range(0.01..0.08); Sample { t, v: rng.gen_range(-1.0..1.0) } }).collect()
            });
            let rc = interpolate_resample(&tr, 100.0).unwrap();
            let first = tr.channels.iter().map(|c| c[0].t).fold(f64::MIN, f64::max);
            let last = tr.channels.iter().map(|c| c.last().unwrap().t).fold(f64::MAX, f64::min);
            prop_assert!(rc.start_t >= first);
            let end = rc.start_t + (rc.len() - 1) as f64 / 100.0;
            prop_assert!(end <= last);
            // interpolated values stay inside the hull of each channel's samples
            for (c, ch) in rc.channels.iter().enumerate() {
                let lo = tr.channels[c].iter().map(|s| s.v).fold(f64::MAX, f64::min);
                let hi = tr.channels[c].iter().map(|s| s.v).fold(f64::MIN, f64::max);
                prop_assert!(ch.iter().all(|v| *v >= lo - 1e-12 && *v <= hi + 1e-12));
            }
        }
    }
}
