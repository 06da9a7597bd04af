//! Cross-validation, confusion matrices and hyperparameter sweeps.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{Algorithm, ClassifierParams};
use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};
use crate::features::{FeatureCatalog, FeatureDomain};
use crate::hierarchy::{
    top_two, train_hierarchy, train_task, HierarchicalModel, HierarchyConfig, TaskModel,
};
use crate::mode::{ModeLabel, NUM_MODES};
use crate::seed::{derive_seed, fnv1a_bytes, rng_for};
use crate::selection::{TaskId, DEFAULT_RANKING_TREES, DEFAULT_SUBSET_SIZE};

pub const DEFAULT_FOLDS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FoldStrategy {
    /// Windows dealt to folds per mode.
    #[default]
    Stratified,
    /// Whole traces dealt to folds per mode, so no trace spans two folds.
    GroupByTrace,
}

impl FoldStrategy {
    pub fn name(self) -> &'static str {
        match self {
            FoldStrategy::Stratified => "stratified",
            FoldStrategy::GroupByTrace => "group-by-trace",
        }
    }
}

impl std::str::FromStr for FoldStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stratified" => Ok(FoldStrategy::Stratified),
            "group-by-trace" => Ok(FoldStrategy::GroupByTrace),
            _ => Err(Error::input(format!(
                "unknown fold strategy `{s}` (expected stratified or group-by-trace)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub strategy: FoldStrategy,
    /// Test rows of each fold, ascending.
    pub folds: Vec<Vec<usize>>,
}

impl FoldPlan {
    pub fn n_rows(&self) -> usize {
        self.folds.iter().map(Vec::len).sum()
    }

    /// Every row not in fold `f`, ascending.
    pub fn train_rows(&self, f: usize) -> Vec<usize> {
        let mut rows: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|(g, _)| *g != f)
            .flat_map(|(_, r)| r.iter().copied())
            .collect();
        rows.sort_unstable();
        rows
    }

    /// Checks that the folds partition `0..n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for row in self.folds.iter().flatten() {
            match seen.get_mut(*row) {
                Some(s) if !*s => *s = true,
                Some(_) => return Err(Error::input(format!("row {row} is in two folds"))),
                None => return Err(Error::input(format!("row {row} is out of range"))),
            }
        }
        if let Some(r) = seen.iter().position(|s| !s) {
            return Err(Error::input(format!("row {r} is in no fold")));
        }
        Ok(())
    }

    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("fold plan serializes");
        format!("{:016x}", fnv1a_bytes(&json))
    }
}

fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::input(format!("need at least 2 folds, got {k}")));
    }
    Ok(())
}

/// Shuffles each mode's rows by seed and deals them round-robin. Dealing
/// continues across modes, so fold sizes also differ by at most one.
pub fn stratified_kfold(labels: &[ModeLabel], k: usize, seed: u64) -> Result<FoldPlan> {
    check_k(k)?;
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for mode in ModeLabel::ALL {
        let mut rows: Vec<usize> = (0..labels.len()).filter(|&r| labels[r] == mode).collect();
        if rows.is_empty() {
            continue;
        }
        if rows.len() < k {
            return Err(Error::input(format!(
                "mode {mode} has {} rows, fewer than {k} folds",
                rows.len()
            )));
        }
        rows.shuffle(&mut rng_for(seed, "fold", mode.index() as u64));
        for r in rows {
            folds[next].push(r);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(FoldPlan {
        k,
        seed,
        strategy: FoldStrategy::Stratified,
        folds,
    })
}

/// Like [`stratified_kfold`] but deals whole groups (traces). Each mode needs
/// at least `k` groups.
pub fn group_kfold(labels: &[ModeLabel], groups: &[usize], k: usize, seed: u64) -> Result<FoldPlan> {
    check_k(k)?;
    if labels.len() != groups.len() {
        return Err(Error::input("labels and groups differ in length"));
    }
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for mode in ModeLabel::ALL {
        let mut ids: Vec<usize> = (0..labels.len())
            .filter(|&r| labels[r] == mode)
            .map(|r| groups[r])
            .collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.is_empty() {
            continue;
        }
        if ids.len() < k {
            return Err(Error::input(format!(
                "mode {mode} has {} traces, fewer than {k} folds",
                ids.len()
            )));
        }
        ids.shuffle(&mut rng_for(seed, "group-fold", mode.index() as u64));
        for g in ids {
            folds[next].extend((0..labels.len()).filter(|&r| labels[r] == mode && groups[r] == g));
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(FoldPlan {
        k,
        seed,
        strategy: FoldStrategy::GroupByTrace,
        folds,
    })
}

/// Counts indexed `[predicted][actual]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; NUM_MODES]; NUM_MODES],
    /// Per mode, percent.
    pub precision: [f64; NUM_MODES],
    pub recall: [f64; NUM_MODES],
    /// Set when the row (precision) or column (recall) is empty; the value is then 0.
    pub precision_degenerate: [bool; NUM_MODES],
    pub recall_degenerate: [bool; NUM_MODES],
}

impl ConfusionMatrix {
    pub fn from_counts(counts: [[u64; NUM_MODES]; NUM_MODES]) -> ConfusionMatrix {
        let mut m = ConfusionMatrix {
            counts,
            precision: [0.0; NUM_MODES],
            recall: [0.0; NUM_MODES],
            precision_degenerate: [false; NUM_MODES],
            recall_degenerate: [false; NUM_MODES],
        };
        for i in 0..NUM_MODES {
            let row = m.predicted_count(i);
            let col = m.actual_count(i);
            let diag = counts[i][i] as f64;
            if row == 0 {
                m.precision_degenerate[i] = true;
            } else {
                m.precision[i] = 100.0 * diag / row as f64;
            }
            if col == 0 {
                m.recall_degenerate[i] = true;
            } else {
                m.recall[i] = 100.0 * diag / col as f64;
            }
        }
        m
    }

    pub fn predicted_count(&self, mode: usize) -> u64 {
        self.counts[mode].iter().sum()
    }

    pub fn actual_count(&self, mode: usize) -> u64 {
        self.counts.iter().map(|r| r[mode]).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..NUM_MODES).map(|i| self.counts[i][i]).sum()
    }

    /// Percent of windows on the diagonal.
    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => 100.0 * self.correct() as f64 / t as f64,
        }
    }
}

pub fn confusion(predictions: &[ModeLabel], truths: &[ModeLabel]) -> Result<ConfusionMatrix> {
    if predictions.len() != truths.len() {
        return Err(Error::input(format!(
            "{} predictions but {} truths",
            predictions.len(),
            truths.len()
        )));
    }
    let mut counts = [[0u64; NUM_MODES]; NUM_MODES];
    for (p, t) in predictions.iter().zip(truths) {
        counts[p.index()][t.index()] += 1;
    }
    Ok(ConfusionMatrix::from_counts(counts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Framework {
    Traditional,
    Hierarchical,
}

impl Framework {
    pub fn name(self) -> &'static str {
        match self {
            Framework::Traditional => "traditional",
            Framework::Hierarchical => "hierarchical",
        }
    }
}

impl std::str::FromStr for Framework {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "traditional" => Ok(Framework::Traditional),
            "hierarchical" => Ok(Framework::Hierarchical),
            _ => Err(Error::input(format!(
                "unknown framework `{s}` (expected traditional or hierarchical)"
            ))),
        }
    }
}

/// Everything needed to rerun a cross-validation bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub framework: Framework,
    /// The single classifier (traditional) or the first layer (hierarchical).
    pub algorithm: Algorithm,
    /// Pair specialists; unused by the traditional framework.
    pub second_layer: Algorithm,
    pub domain: FeatureDomain,
    pub params: ClassifierParams,
    pub subset_size: usize,
    pub ranking_trees: usize,
    pub k: usize,
    pub folds: FoldStrategy,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            framework: Framework::Hierarchical,
            algorithm: Algorithm::Rf,
            second_layer: Algorithm::Svm,
            domain: FeatureDomain::Pooled,
            params: ClassifierParams::default(),
            subset_size: DEFAULT_SUBSET_SIZE,
            ranking_trees: DEFAULT_RANKING_TREES,
            k: DEFAULT_FOLDS,
            folds: FoldStrategy::Stratified,
            seed: 0,
        }
    }
}

impl CvConfig {
    pub fn hierarchy(&self) -> HierarchyConfig {
        HierarchyConfig {
            first_layer: self.algorithm,
            second_layer: self.second_layer,
            params: self.params.clone(),
            subset_size: self.subset_size,
            ranking_trees: self.ranking_trees,
        }
    }

    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        format!("{:016x}", fnv1a_bytes(&json))
    }

    /// Algorithms that are actually trained.
    pub fn algorithms(&self) -> Vec<Algorithm> {
        match self.framework {
            Framework::Traditional => vec![self.algorithm],
            Framework::Hierarchical => vec![self.algorithm, self.second_layer],
        }
    }
}

/// Fingerprint of the matrix contents (ids, values, labels, groups).
pub fn data_fingerprint(matrix: &FeatureMatrix) -> String {
    let mut bytes = Vec::with_capacity(matrix.len() * matrix.n_features() * 8);
    for id in &matrix.feature_ids {
        bytes.extend_from_slice(&(*id as u64).to_le_bytes());
    }
    for ((row, label), group) in matrix.rows.iter().zip(&matrix.labels).zip(&matrix.groups) {
        bytes.push(label.index() as u8);
        bytes.extend_from_slice(&(*group as u64).to_le_bytes());
        for v in row {
            bytes.extend_from_slice(&v.to_bits().to_le_bytes());
        }
    }
    format!("{:016x}", fnv1a_bytes(&bytes))
}

/// Columns of `matrix` that belong to `domain`.
pub fn domain_matrix(matrix: &FeatureMatrix, domain: FeatureDomain) -> Result<FeatureMatrix> {
    matrix.validate()?;
    let m = matrix.restrict(&FeatureCatalog::standard(), domain);
    if m.n_features() == 0 {
        return Err(Error::input(format!(
            "matrix has no {} features",
            domain.name()
        )));
    }
    Ok(m)
}

pub fn fold_plan(matrix: &FeatureMatrix, config: &CvConfig) -> Result<FoldPlan> {
    match config.folds {
        FoldStrategy::Stratified => stratified_kfold(&matrix.labels, config.k, config.seed),
        FoldStrategy::GroupByTrace => {
            group_kfold(&matrix.labels, &matrix.groups, config.k, config.seed)
        }
    }
}

/// What was trained for one fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "framework", rename_all = "lowercase")]
pub enum FoldModel {
    Traditional(TaskModel),
    Hierarchical(HierarchicalModel),
}

/// Per-window outcome: the truth, the first layer's top two and the final call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub row: usize,
    pub fold: usize,
    pub truth: ModeLabel,
    pub top1: ModeLabel,
    pub top2: ModeLabel,
    pub predicted: ModeLabel,
}

impl FoldModel {
    fn record(&self, x: &[f64]) -> Result<(ModeLabel, ModeLabel, ModeLabel)> {
        match self {
            FoldModel::Traditional(m) => {
                let (a, b) = top_two(&m.predict_modes(x)?);
                Ok((a, b, a))
            }
            FoldModel::Hierarchical(m) => {
                let out = m.classify(x)?;
                Ok((out.candidates.0, out.candidates.1, out.mode))
            }
        }
    }
}

/// Trains on every row outside fold `fold`. The matrix must already be
/// restricted to the configured domain.
pub fn train_fold(
    matrix: &FeatureMatrix,
    plan: &FoldPlan,
    fold: usize,
    config: &CvConfig,
) -> Result<FoldModel> {
    if fold >= plan.k {
        return Err(Error::input(format!("fold {fold} out of range 0..{}", plan.k)));
    }
    let rows = plan.train_rows(fold);
    let seed = derive_seed(config.seed, "cv-fold", fold as u64);
    let hc = config.hierarchy();
    let trained = match config.framework {
        Framework::Traditional => {
            train_task(matrix, &rows, TaskId::AllModes, config.algorithm, &hc, seed)
                .map(FoldModel::Traditional)
        }
        Framework::Hierarchical => {
            train_hierarchy(matrix, &rows, &hc, seed).map(FoldModel::Hierarchical)
        }
    };
    trained.map_err(|e| Error::Fold {
        fold,
        source: Box::new(e),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSummary {
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    pub confusion: ConfusionMatrix,
}

impl LayerSummary {
    fn from_records(records: &[WindowRecord], k: usize, pick: fn(&WindowRecord) -> ModeLabel) -> Result<Self> {
        let mut hits = vec![(0usize, 0usize); k];
        for r in records {
            hits[r.fold].1 += 1;
            if pick(r) == r.truth {
                hits[r.fold].0 += 1;
            }
        }
        let fold_accuracies: Vec<f64> = hits
            .iter()
            .map(|&(c, n)| if n == 0 { 0.0 } else { 100.0 * c as f64 / n as f64 })
            .collect();
        let mean_accuracy = fold_accuracies.iter().sum::<f64>() / k as f64;
        let predicted: Vec<ModeLabel> = records.iter().map(pick).collect();
        let truths: Vec<ModeLabel> = records.iter().map(|r| r.truth).collect();
        Ok(LayerSummary {
            fold_accuracies,
            mean_accuracy,
            confusion: confusion(&predicted, &truths)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub config: CvConfig,
    pub fingerprint: String,
    pub data_fingerprint: String,
    pub fold_plan_fingerprint: String,
    pub n_windows: usize,
    pub n_features: usize,
    pub fold_sizes: Vec<usize>,
    /// Percent, one per fold.
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    pub confusion: ConfusionMatrix,
    /// The first layer alone; present for the hierarchical framework.
    pub first_layer: Option<LayerSummary>,
    pub records: Vec<WindowRecord>,
}

pub fn cross_validate(matrix: &FeatureMatrix, config: &CvConfig) -> Result<CvReport> {
    let m = domain_matrix(matrix, config.domain)?;
    let plan = fold_plan(&m, config)?;
    run_folds(&m, config, &plan)
}

/// Cross-validation over a fixed fold plan, e.g. one shared by a sweep.
pub fn cross_validate_with_plan(
    matrix: &FeatureMatrix,
    config: &CvConfig,
    plan: &FoldPlan,
) -> Result<CvReport> {
    let m = domain_matrix(matrix, config.domain)?;
    run_folds(&m, config, plan)
}

fn run_folds(m: &FeatureMatrix, config: &CvConfig, plan: &FoldPlan) -> Result<CvReport> {
    plan.validate(m.len())?;
    if plan.k != config.k {
        return Err(Error::input(format!(
            "fold plan has {} folds but the config asks for {}",
            plan.k, config.k
        )));
    }
    let per_fold: Vec<Vec<WindowRecord>> = (0..plan.k)
        .into_par_iter()
        .map(|f| {
            let model = train_fold(m, plan, f, config)?;
            plan.folds[f]
                .iter()
                .map(|&row| {
                    let (top1, top2, predicted) = model.record(&m.rows[row]).map_err(|e| Error::Fold {
                        fold: f,
                        source: Box::new(e),
                    })?;
                    Ok(WindowRecord {
                        row,
                        fold: f,
                        truth: m.labels[row],
                        top1,
                        top2,
                        predicted,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<WindowRecord> = per_fold.into_iter().flatten().collect();
    let final_layer = LayerSummary::from_records(&records, plan.k, |r| r.predicted)?;
    let first_layer = match config.framework {
        Framework::Traditional => None,
        Framework::Hierarchical => Some(LayerSummary::from_records(&records, plan.k, |r| r.top1)?),
    };
    Ok(CvReport {
        config: config.clone(),
        fingerprint: config.fingerprint(),
        data_fingerprint: data_fingerprint(m),
        fold_plan_fingerprint: plan.fingerprint(),
        n_windows: m.len(),
        n_features: m.n_features(),
        fold_sizes: plan.folds.iter().map(Vec::len).collect(),
        fold_accuracies: final_layer.fold_accuracies,
        mean_accuracy: final_layer.mean_accuracy,
        confusion: final_layer.confusion,
        first_layer,
        records,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    KnnK,
    CartPruning,
    RfTrees,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::KnnK => "knn_k",
            SweepAxis::CartPruning => "cart_pruning",
            SweepAxis::RfTrees => "rf_trees",
        }
    }

    pub fn algorithm(self) -> Algorithm {
        match self {
            SweepAxis::KnnK => Algorithm::Knn,
            SweepAxis::CartPruning => Algorithm::Cart,
            SweepAxis::RfTrees => Algorithm::Rf,
        }
    }

    /// K in 1..=15, pruning level in 2..=20, trees 200..=400 by 50.
    pub fn default_values(self) -> Vec<usize> {
        match self {
            SweepAxis::KnnK => (1..=15).collect(),
            SweepAxis::CartPruning => (2..=20).collect(),
            SweepAxis::RfTrees => (200..=400).step_by(50).collect(),
        }
    }

    pub fn apply(self, params: &mut ClassifierParams, value: usize) {
        match self {
            SweepAxis::KnnK => params.knn_k = value,
            SweepAxis::CartPruning => params.cart.pruning_level = value,
            SweepAxis::RfTrees => params.rf.n_trees = value,
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "knn_k" => Ok(SweepAxis::KnnK),
            "cart_pruning" => Ok(SweepAxis::CartPruning),
            "rf_trees" => Ok(SweepAxis::RfTrees),
            _ => Err(Error::input(format!(
                "unknown sweep axis `{s}` (expected knn_k, cart_pruning or rf_trees)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: usize,
    pub report: CvReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    /// Value with the highest mean accuracy, first one on ties.
    pub best_value: usize,
    pub points: Vec<SweepPoint>,
}

/// One cross-validation per axis value, all over the same fold plan.
pub fn sweep(
    matrix: &FeatureMatrix,
    axis: SweepAxis,
    values: &[usize],
    config: &CvConfig,
) -> Result<SweepResult> {
    if !config.algorithms().contains(&axis.algorithm()) {
        return Err(Error::input(format!(
            "sweep axis {} needs algorithm {}, but the {} configuration trains {}",
            axis.name(),
            axis.algorithm().name(),
            config.framework.name(),
            config
                .algorithms()
                .iter()
                .map(|a| a.name())
                .collect::<Vec<_>>()
                .join(" and ")
        )));
    }
    if values.is_empty() {
        return Err(Error::input("sweep has no values"));
    }
    let m = domain_matrix(matrix, config.domain)?;
    let plan = fold_plan(&m, config)?;
    let mut points = Vec::with_capacity(values.len());
    for &value in values {
        let mut c = config.clone();
        axis.apply(&mut c.params, value);
        points.push(SweepPoint {
            value,
            report: run_folds(&m, &c, &plan)?,
        });
    }
    let best = points
        .iter()
        .fold(&points[0], |b, p| if p.report.mean_accuracy > b.report.mean_accuracy { p } else { b });
    Ok(SweepResult {
        axis,
        best_value: best.value,
        points,
    })
}

/// Per-fold accuracies with the average as the last line.
pub fn fold_table(report: &CvReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<8} {:>12}", "Fold", "Accuracy (%)");
    for (i, a) in report.fold_accuracies.iter().enumerate() {
        let _ = writeln!(s, "{:<8} {:>12.2}", i + 1, a);
    }
    let _ = writeln!(s, "{:<8} {:>12.2}", "Average", report.mean_accuracy);
    s
}

/// Predicted modes as rows, actual modes as columns, precision on the right
/// and recall along the bottom.
pub fn confusion_table(m: &ConfusionMatrix) -> String {
    let pct = |v: f64, degenerate: bool| {
        if degenerate {
            format!("{:>9}", "n/a")
        } else {
            format!("{v:>9.2}")
        }
    };
    let mut s = format!("{:<14}", "pred \\ actual");
    for mode in ModeLabel::ALL {
        let _ = write!(s, "{:>9}", mode.name());
    }
    let _ = writeln!(s, "{:>15}", "Precision (%)");
    for mode in ModeLabel::ALL {
        let i = mode.index();
        let _ = write!(s, "{:<14}", mode.name());
        for c in m.counts[i] {
            let _ = write!(s, "{c:>9}");
        }
        let _ = writeln!(s, "      {}", pct(m.precision[i], m.precision_degenerate[i]));
    }
    let _ = write!(s, "{:<14}", "Recall (%)");
    for i in 0..NUM_MODES {
        s.push_str(&pct(m.recall[i], m.recall_degenerate[i]));
    }
    s.push('\n');
    s
}

pub fn sweep_table(result: &SweepResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<14} {:>18}", result.axis.name(), "Mean accuracy (%)");
    for p in &result.points {
        let _ = writeln!(s, "{:<14} {:>18.2}", p.value, p.report.mean_accuracy);
    }
    let _ = writeln!(s, "best {} = {}", result.axis.name(), result.best_value);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use ModeLabel::*;

    fn balanced(per_class: usize) -> Vec<ModeLabel> {
        (0..per_class * 5)
            .map(|i| ModeLabel::from_index(i % 5).unwrap())
            .collect()
    }

    #[test]
    fn folds_are_stratified() {
        let labels = balanced(20);
        let plan = stratified_kfold(&labels, 10, 3).unwrap();
        plan.validate(100).unwrap();
        for f in &plan.folds {
            assert_eq!(f.len(), 10);
            for m in ModeLabel::ALL {
                assert_eq!(f.iter().filter(|&&r| labels[r] == m).count(), 2);
            }
        }
        assert_eq!(plan, stratified_kfold(&labels, 10, 3).unwrap());
        assert_ne!(plan, stratified_kfold(&labels, 10, 4).unwrap());
    }

    #[test]
    fn uneven_classes_differ_by_one() {
        let mut labels = balanced(13);
        labels.extend([Walk, Walk, Run]);
        let plan = stratified_kfold(&labels, 4, 0).unwrap();
        plan.validate(labels.len()).unwrap();
        for m in ModeLabel::ALL {
            let c: Vec<usize> = plan
                .folds
                .iter()
                .map(|f| f.iter().filter(|&&r| labels[r] == m).count())
                .collect();
            assert!(c.iter().max().unwrap() - c.iter().min().unwrap() <= 1);
        }
        let sizes: Vec<usize> = plan.folds.iter().map(Vec::len).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn small_class_or_k_is_rejected() {
        assert!(stratified_kfold(&balanced(3), 4, 0).is_err());
        assert!(stratified_kfold(&balanced(3), 1, 0).is_err());
    }

    #[test]
    fn group_folds_keep_traces_together() {
        let labels = balanced(12);
        let groups: Vec<usize> = (0..60).map(|r| (r % 5) * 10 + (r / 5) % 4).collect();
        let plan = group_kfold(&labels, &groups, 4, 1).unwrap();
        plan.validate(60).unwrap();
        for (f, rows) in plan.folds.iter().enumerate() {
            for (g, other) in plan.folds.iter().enumerate() {
                if f != g {
                    assert!(rows.iter().all(|&a| other.iter().all(|&b| groups[a] != groups[b])));
                }
            }
        }
        assert!(group_kfold(&labels, &groups, 5, 1).is_err());
    }

    #[test]
    fn confusion_counts() {
        let truths = [Bike, Car, Walk, Run, Bus];
        let c = confusion(&truths, &truths).unwrap();
        assert_eq!(c.total(), 5);
        assert!(c.precision.iter().chain(&c.recall).all(|&v| v == 100.0));

        let mut truths = vec![Bike; 8];
        truths.extend([Car, Car]);
        let predicted = vec![Bike; 10];
        let c = confusion(&predicted, &truths).unwrap();
        assert_eq!(c.precision[0], 80.0);
        assert_eq!(c.recall[0], 100.0);
        assert_eq!(c.recall[1], 0.0);
        assert!(!c.recall_degenerate[1]);
        assert!(c.precision_degenerate[1]);
        assert_eq!(c.precision[1], 0.0);
        assert!(confusion(&predicted, &truths[1..]).is_err());
    }

    #[test]
    fn axis_must_match_algorithm() {
        let m = FeatureMatrix {
            feature_ids: vec![0],
            rows: vec![vec![0.0]; 50],
            labels: balanced(10),
            groups: vec![0; 50],
        };
        let config = CvConfig::default();
        assert!(sweep(&m, SweepAxis::KnnK, &[1], &config).is_err());
        assert_eq!(SweepAxis::RfTrees.default_values(), vec![200, 250, 300, 350, 400]);
        assert_eq!(SweepAxis::KnnK.default_values().len(), 15);
        assert_eq!(SweepAxis::CartPruning.default_values().len(), 19);
    }
}
