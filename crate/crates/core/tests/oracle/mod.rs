//! Slow, obvious reference implementations used to check the fast paths.
#![allow(dead_code)]

use std::f64::consts::PI;

use modesense_core::features::Measure;
use modesense_core::signal::Window;
use modesense_core::ModeLabel;
use rand::Rng;

/// O(N^2) DFT, `(re, im)` per bin.
pub fn naive_dft(x: &[f64]) -> Vec<(f64, f64)> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let mut re = 0.0;
            let mut im = 0.0;
            for (j, &v) in x.iter().enumerate() {
                let a = -2.0 * PI * ((k * j) % n) as f64 / n as f64;
                re += v * a.cos();
                im += v * a.sin();
            }
            (re, im)
        })
        .collect()
}

pub fn naive_magnitudes(x: &[f64]) -> Vec<f64> {
    naive_dft(x)[..x.len() / 2 + 1]
        .iter()
        .map(|(re, im)| (re * re + im * im).sqrt())
        .collect()
}

fn sorted(x: &[f64]) -> Vec<f64> {
    let mut s = x.to_vec();
    for i in 1..s.len() {
        let mut j = i;
        while j > 0 && s[j - 1] > s[j] {
            s.swap(j - 1, j);
            j -= 1;
        }
    }
    s
}

fn quantile(x: &[f64], p: f64) -> f64 {
    let s = sorted(x);
    let pos = p * (s.len() - 1) as f64;
    let below = pos.floor();
    let frac = pos - below;
    let i = below as usize;
    if i + 1 >= s.len() {
        s[i]
    } else {
        s[i] * (1.0 - frac) + s[i + 1] * frac
    }
}

fn naive_mean(x: &[f64]) -> f64 {
    let mut t = 0.0;
    for v in x {
        t += v;
    }
    t / x.len() as f64
}

fn naive_var(x: &[f64]) -> f64 {
    let m = naive_mean(x);
    let mut t = 0.0;
    for v in x {
        t += (v - m).powi(2);
    }
    t / x.len() as f64
}

fn naive_entropy(x: &[f64]) -> f64 {
    let mags = naive_magnitudes(x);
    let power: Vec<f64> = mags[1..].iter().map(|m| m * m).collect();
    let total: f64 = power.iter().sum();
    let mut h = 0.0;
    for p in &power {
        if *p > 0.0 {
            let q = p / total;
            h -= q * q.ln();
        }
    }
    h / (power.len() as f64).ln()
}

/// One time-domain measure straight from its definition.
pub fn naive_measure(m: Measure, x: &[f64], dt: f64) -> f64 {
    let d: Vec<f64> = (1..x.len()).map(|i| (x[i] - x[i - 1]) / dt).collect();
    let s: &[f64] = if m.on_derivative() { &d } else { x };
    let max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    match m {
        Measure::Mean | Measure::DerivMean => naive_mean(s),
        Measure::Max | Measure::DerivMax => max,
        Measure::Min | Measure::DerivMin => min,
        Measure::Variance | Measure::DerivVariance => naive_var(s),
        Measure::StdDev | Measure::DerivStdDev => naive_var(s).sqrt(),
        Measure::Range | Measure::DerivRange => max - min,
        Measure::Iqr | Measure::DerivIqr => quantile(s, 0.75) - quantile(s, 0.25),
        Measure::SignChange | Measure::DerivSignChange => {
            let mut c = 0;
            for i in 0..s.len() - 1 {
                if s[i] * s[i + 1] < 0.0 {
                    c += 1;
                }
            }
            c as f64
        }
        Measure::Energy => s.iter().map(|v| v * v).sum(),
        Measure::SpectralEntropy => naive_entropy(s),
    }
}

/// Class fractions among the k nearest rows, scanning every row and breaking
/// distance ties by the lower row index.
pub fn knn_scan(x: &[Vec<f64>], y: &[usize], n_classes: usize, k: usize, q: &[f64]) -> Vec<f64> {
    let mut taken = vec![false; x.len()];
    let mut votes = vec![0.0; n_classes];
    for _ in 0..k {
        let mut best: Option<(f64, usize)> = None;
        for (i, row) in x.iter().enumerate() {
            if taken[i] {
                continue;
            }
            let d: f64 = row.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, i));
            }
        }
        let (_, i) = best.unwrap();
        taken[i] = true;
        votes[y[i]] += 1.0;
    }
    votes.iter().map(|v| v / k as f64).collect()
}

pub fn random_series(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect()
}

pub fn random_window(rng: &mut impl Rng) -> Window {
    Window {
        mode: ModeLabel::Walk,
        channels: (0..12).map(|_| random_series(rng, 100)).collect(),
        dt: 0.01,
    }
}

/// |a - b| / |b|; absolute when b is exactly zero.
pub fn rel_err(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}
