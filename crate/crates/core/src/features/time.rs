use super::catalog::Measure;

pub(crate) fn mean(s: &[f64]) -> f64 {
    s.iter().sum::<f64>() / s.len() as f64
}

/// Population variance.
pub(crate) fn variance(s: &[f64]) -> f64 {
    let m = mean(s);
    s.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / s.len() as f64
}

/// Quantile with linear interpolation between order statistics of the
/// sorted sample (position `(n - 1) p`).
pub(crate) fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub(crate) fn sign_changes(s: &[f64]) -> f64 {
    s.windows(2).filter(|w| w[0] * w[1] < 0.0).count() as f64
}

/// Summary statistics of one series, computed once and shared by the
/// measures that need them.
pub(crate) struct Summary {
    mean: f64,
    max: f64,
    min: f64,
    variance: f64,
    iqr: f64,
    sign_changes: f64,
    energy: f64,
}

impl Summary {
    pub(crate) fn of(s: &[f64]) -> Summary {
        let mut sorted = s.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        Summary {
            mean: mean(s),
            max: sorted[sorted.len() - 1],
            min: sorted[0],
            variance: variance(s),
            iqr: quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25),
            sign_changes: sign_changes(s),
            energy: s.iter().map(|v| v * v).sum(),
        }
    }
}

/// Value of `m` given the summaries of the raw series and its derivative.
/// `entropy` is only consulted for [`Measure::SpectralEntropy`].
pub(crate) fn measure_value(m: Measure, raw: &Summary, deriv: &Summary, entropy: impl FnOnce() -> f64) -> f64 {
    let s = if m.on_derivative() { deriv } else { raw };
    match m {
        Measure::Mean | Measure::DerivMean => s.mean,
        Measure::Max | Measure::DerivMax => s.max,
        Measure::Min | Measure::DerivMin => s.min,
        Measure::Variance | Measure::DerivVariance => s.variance,
        Measure::StdDev | Measure::DerivStdDev => s.variance.sqrt(),
        Measure::Range | Measure::DerivRange => s.max - s.min,
        Measure::Iqr | Measure::DerivIqr => s.iqr,
        Measure::SignChange | Measure::DerivSignChange => s.sign_changes,
        Measure::Energy => s.energy,
        Measure::SpectralEntropy => entropy(),
    }
}
