use std::sync::{Arc, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::signal::WINDOW_SAMPLES;

/// Number of one-sided bins for a 100-sample window (0..=50).
pub const NUM_BINS: usize = WINDOW_SAMPLES / 2 + 1;

fn plan() -> &'static Arc<dyn Fft<f64>> {
    static PLAN: OnceLock<Arc<dyn Fft<f64>>> = OnceLock::new();
    PLAN.get_or_init(|| FftPlanner::new().plan_fft_forward(WINDOW_SAMPLES))
}

/// Unnormalized two-sided DFT, `X[k] = sum_n s[n] e^{-2 pi i k n / N}`.
pub fn dft(series: &[f64]) -> Result<Vec<Complex<f64>>> {
    if series.len() != WINDOW_SAMPLES {
        return Err(Error::input(format!(
            "DFT expects {WINDOW_SAMPLES} samples, got {}",
            series.len()
        )));
    }
    let mut buf: Vec<Complex<f64>> = series.iter().map(|&v| Complex::new(v, 0.0)).collect();
    plan().process(&mut buf);
    Ok(buf)
}

/// `|X[k]|` for k = 0..=50.
pub fn dft_magnitudes(series: &[f64]) -> Result<Vec<f64>> {
    let spec = dft(series)?;
    Ok(spec[..NUM_BINS].iter().map(|c| c.norm()).collect())
}

/// Shannon entropy of the one-sided power spectrum (DC excluded), normalized
/// by the log of the bin count so the result lies in [0, 1]. A spectrum with
/// no power has entropy 0.
///
/// Magnitudes below `1e-12` times the largest magnitude (DC included) are FFT
/// round-off and count as zero power.
pub fn spectral_entropy(mags: &[f64]) -> f64 {
    let floor = 1e-12 * mags.iter().copied().fold(0.0, f64::max);
    let power: Vec<f64> = mags[1..]
        .iter()
        .map(|&m| if m > floor { m * m } else { 0.0 })
        .collect();
    let total: f64 = power.iter().sum();
    if total <= 0.0 || power.len() < 2 {
        return 0.0;
    }
    let h: f64 = power
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| {
            let q = p / total;
            -q * q.ln()
        })
        .sum();
    (h / (power.len() as f64).ln()).clamp(0.0, 1.0)
}
