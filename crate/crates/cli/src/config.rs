//! Flat `key = value` run configuration. A config file is applied first,
//! then `--set key=value` overrides, then the dedicated flags.

use std::path::Path;
use std::str::FromStr;

use modesense_core::datagen::GenSpec;
use modesense_core::eval::{CvConfig, SweepAxis};
use modesense_core::features::FeatureConfig;
use modesense_core::hierarchy::BetaPrior;
use modesense_core::ModeLabel;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub gen: GenSpec,
    pub features: FeatureConfig,
    pub cv: CvConfig,
    pub axis: Option<SweepAxis>,
    /// Sweep values; the axis defaults when empty.
    pub values: Vec<usize>,
    pub prior: BetaPrior,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            gen: GenSpec::default(),
            features: FeatureConfig::default(),
            cv: CvConfig::default(),
            axis: None,
            values: Vec::new(),
            prior: BetaPrior::default(),
        }
    }
}

pub const KEYS: &[&str] = &[
    "seed",
    "duration_s",
    "duration_bike",
    "duration_car",
    "duration_walk",
    "duration_run",
    "duration_bus",
    "base_rate_hz",
    "jitter",
    "noise",
    "traces_per_mode",
    "sum_mode",
    "freq_select",
    "domain",
    "framework",
    "algorithm",
    "second_layer",
    "knn_k",
    "cart_pruning",
    "cart_min_leaf",
    "rf_trees",
    "rf_mtry",
    "svm_c",
    "svm_gamma",
    "svm_tol",
    "svm_max_passes",
    "subset_size",
    "ranking_trees",
    "folds",
    "fold_strategy",
    "axis",
    "values",
    "prior_a",
    "prior_b",
];

fn num<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("`{key}`: cannot parse `{value}`"))
}

fn parsed<T: FromStr<Err = modesense_core::Error>>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|e| format!("`{key}`: {e}"))
}

/// `auto` or a number.
fn auto<T: FromStr>(key: &str, value: &str) -> Result<Option<T>, String> {
    if value == "auto" {
        Ok(None)
    } else {
        num(key, value).map(Some)
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        let p = &mut self.cv.params;
        match key {
            "seed" => {
                let seed = num(key, v)?;
                self.gen.seed = seed;
                self.cv.seed = seed;
            }
            "duration_s" => self.gen.durations_s = [num(key, v)?; 5],
            "base_rate_hz" => self.gen.base_rate_hz = num(key, v)?,
            "jitter" => self.gen.jitter = num(key, v)?,
            "noise" => self.gen.noise = num(key, v)?,
            "traces_per_mode" => self.gen.traces_per_mode = num(key, v)?,
            "sum_mode" => self.features.sum_mode = parsed(key, v)?,
            "freq_select" => self.features.freq_select = parsed(key, v)?,
            "domain" => self.cv.domain = parsed(key, v)?,
            "framework" => self.cv.framework = parsed(key, v)?,
            "algorithm" => self.cv.algorithm = parsed(key, v)?,
            "second_layer" => self.cv.second_layer = parsed(key, v)?,
            "knn_k" => p.knn_k = num(key, v)?,
            "cart_pruning" => p.cart.pruning_level = num(key, v)?,
            "cart_min_leaf" => p.cart.min_leaf = num(key, v)?,
            "rf_trees" => p.rf.n_trees = num(key, v)?,
            "rf_mtry" => p.rf.mtry = auto(key, v)?,
            "svm_c" => p.svm.c = num(key, v)?,
            "svm_gamma" => p.svm.gamma = auto(key, v)?,
            "svm_tol" => p.svm.tol = num(key, v)?,
            "svm_max_passes" => p.svm.max_passes = num(key, v)?,
            "subset_size" => self.cv.subset_size = num(key, v)?,
            "ranking_trees" => self.cv.ranking_trees = num(key, v)?,
            "folds" => self.cv.k = num(key, v)?,
            "fold_strategy" => self.cv.folds = parsed(key, v)?,
            "axis" => self.axis = Some(parsed(key, v)?),
            "values" => {
                self.values = if v == "default" {
                    Vec::new()
                } else {
                    v.split(',').map(|s| num(key, s.trim())).collect::<Result<_, _>>()?
                }
            }
            "prior_a" => self.prior.a = num(key, v)?,
            "prior_b" => self.prior.b = num(key, v)?,
            _ => match key.strip_prefix("duration_").map(ModeLabel::from_str) {
                Some(Ok(m)) => self.gen.durations_s[m.index()] = num(key, v)?,
                _ => {
                    return Err(format!(
                        "unknown key `{key}` (known keys: {})",
                        KEYS.join(", ")
                    ))
                }
            },
        }
        Ok(())
    }

    /// Parses `key=value`.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), String> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got `{pair}`"))?;
        self.set(k.trim(), v)
    }

    /// Applies a flat config file; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.set_pair(line)
                .map_err(|e| format!("{}:{}: {e}", path.display(), n + 1))?;
        }
        Ok(())
    }

    pub fn sweep_values(&self) -> Vec<usize> {
        match (self.axis, self.values.is_empty()) {
            (Some(a), true) => a.default_values(),
            _ => self.values.clone(),
        }
    }
}
