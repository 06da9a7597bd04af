//! Two-layer classifier. The first layer scores all five modes and proposes
//! its top two; the specialist for that pair scores the two candidates; the
//! layers are fused with Bayes' rule (first layer as prior, pair specialist
//! as likelihood).

mod benefit;

pub use benefit::{
    collect_benefit_outcomes, estimate_benefit, estimate_beta_posterior, framework_success,
    framework_success_via_errors, BenefitEstimate, BenefitOutcomes, BetaPosterior, BetaPrior,
};

use serde::{Deserialize, Serialize};

use crate::classifiers::{Algorithm, ClassifierParams, Model, ProbabilityVector};
use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};
use crate::features::{fit_scaler, Scaler};
use crate::mode::{ModeLabel, ModePair, NUM_MODES, NUM_PAIRS};
use crate::seed::derive_seed;
use crate::selection::{
    rank_features, select_top_k, FeatureSubset, ImportanceRanking, TaskId, DEFAULT_RANKING_TREES,
    DEFAULT_SUBSET_SIZE,
};

pub const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyConfig {
    pub first_layer: Algorithm,
    pub second_layer: Algorithm,
    pub params: ClassifierParams,
    pub subset_size: usize,
    pub ranking_trees: usize,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        HierarchyConfig {
            first_layer: Algorithm::Rf,
            second_layer: Algorithm::Svm,
            params: ClassifierParams::default(),
            subset_size: DEFAULT_SUBSET_SIZE,
            ranking_trees: DEFAULT_RANKING_TREES,
        }
    }
}

/// A classifier for one task with its own feature subset and scaler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskModel {
    pub task: TaskId,
    pub ranking: ImportanceRanking,
    pub subset: FeatureSubset,
    /// Positions of the subset ids in the input vector.
    pub columns: Vec<usize>,
    pub scaler: Scaler,
    /// Mode of each model class index.
    pub classes: Vec<ModeLabel>,
    pub model: Model,
}

impl TaskModel {
    fn prepare(&self, x: &[f64]) -> Result<Vec<f64>> {
        let picked: Vec<f64> = self
            .columns
            .iter()
            .map(|&c| {
                x.get(c)
                    .copied()
                    .ok_or_else(|| Error::input(format!("input vector has no column {c}")))
            })
            .collect::<Result<_>>()?;
        Ok(self.scaler.transform(&picked))
    }

    /// Probabilities over `self.classes`.
    pub fn predict(&self, x: &[f64]) -> Result<ProbabilityVector> {
        self.model.predict(&self.prepare(x)?)
    }

    /// Probabilities spread over all five modes.
    pub fn predict_modes(&self, x: &[f64]) -> Result<ProbabilityVector> {
        let p = self.predict(x)?;
        let mut out = vec![0.0; NUM_MODES];
        for (c, m) in self.classes.iter().enumerate() {
            out[m.index()] = p.get(c);
        }
        Ok(ProbabilityVector(out))
    }
}

fn task_classes(task: TaskId) -> Vec<ModeLabel> {
    match task {
        TaskId::AllModes => ModeLabel::ALL.to_vec(),
        TaskId::Pair(p) => vec![p.lo(), p.hi()],
    }
}

/// Rows of the task's modes with labels as indices into `classes`.
fn task_data(
    matrix: &FeatureMatrix,
    rows: &[usize],
    classes: &[ModeLabel],
) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for &r in rows {
        if let Some(c) = classes.iter().position(|m| *m == matrix.labels[r]) {
            x.push(matrix.rows[r].clone());
            y.push(c);
        }
    }
    for (c, m) in classes.iter().enumerate() {
        if !y.contains(&c) {
            return Err(Error::MissingMode(*m));
        }
    }
    Ok((x, y))
}

/// Impurity ranking of every matrix column for `task`, fitted on `rows`.
pub fn rank_task(
    matrix: &FeatureMatrix,
    rows: &[usize],
    task: TaskId,
    n_trees: usize,
    seed: u64,
) -> Result<ImportanceRanking> {
    let classes = task_classes(task);
    let (x, y) = task_data(matrix, rows, &classes)?;
    rank_features(
        task,
        &x,
        &y,
        classes.len(),
        &matrix.feature_ids,
        n_trees,
        derive_seed(seed, "rank", task.index() as u64),
    )
}

/// Ranks features on `rows`, keeps the top `subset_size`, fits the scaler and
/// trains `algorithm` for `task`. Only `rows` of the task's modes are read.
pub fn train_task(
    matrix: &FeatureMatrix,
    rows: &[usize],
    task: TaskId,
    algorithm: Algorithm,
    config: &HierarchyConfig,
    seed: u64,
) -> Result<TaskModel> {
    let classes = task_classes(task);
    let (full, y) = task_data(matrix, rows, &classes)?;
    let t = task.index() as u64;
    let ranking = rank_features(
        task,
        &full,
        &y,
        classes.len(),
        &matrix.feature_ids,
        config.ranking_trees,
        derive_seed(seed, "rank", t),
    )?;
    let subset = select_top_k(&ranking, config.subset_size.min(ranking.feature_ids.len()))?;
    let columns = matrix.positions(&subset.ids)?;
    let picked: Vec<Vec<f64>> = full
        .iter()
        .map(|r| columns.iter().map(|&c| r[c]).collect())
        .collect();
    let scaler = fit_scaler(&picked)?;
    let scaled: Vec<Vec<f64>> = picked.iter().map(|r| scaler.transform(r)).collect();
    let model = Model::train(
        algorithm,
        &config.params,
        &scaled,
        &y,
        classes.len(),
        derive_seed(seed, "model", t),
    )?;
    Ok(TaskModel {
        task,
        ranking,
        subset,
        columns,
        scaler,
        classes,
        model,
    })
}

/// What each layer said about one input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerOutcome {
    /// First-layer probabilities over the five modes.
    pub first: ProbabilityVector,
    /// (top, runner-up) of the first layer.
    pub candidates: (ModeLabel, ModeLabel),
    /// Pair specialist probabilities for (top, runner-up).
    pub second: [f64; 2],
    /// Fused posterior for (top, runner-up).
    pub posterior: [f64; 2],
    pub mode: ModeLabel,
}

impl LayerOutcome {
    pub fn first_layer_mode(&self) -> ModeLabel {
        self.candidates.0
    }
}

/// Top two modes of `p`, ties to the lower mode index.
pub fn top_two(p: &ProbabilityVector) -> (ModeLabel, ModeLabel) {
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p.get(b).total_cmp(&p.get(a)).then(a.cmp(&b)));
    (
        ModeLabel::from_index(order[0]).expect("five-mode vector"),
        ModeLabel::from_index(order[1]).expect("five-mode vector"),
    )
}

/// Bayes fusion over the two candidates: `post(m) ∝ p(m) q(m)`. The final
/// mode is the posterior argmax, ties to the first-layer winner.
pub fn fuse(first: ProbabilityVector, second: [f64; 2]) -> LayerOutcome {
    let (i, j) = top_two(&first);
    let (pi, pj) = (first.get(i.index()), first.get(j.index()));
    let (ui, uj) = (pi * second[0], pj * second[1]);
    let posterior = if ui + uj > 0.0 {
        [ui / (ui + uj), uj / (ui + uj)]
    } else if pi + pj > 0.0 {
        [pi / (pi + pj), pj / (pi + pj)]
    } else {
        [0.5, 0.5]
    };
    let mode = if posterior[1] > posterior[0] { j } else { i };
    LayerOutcome {
        first,
        candidates: (i, j),
        second,
        posterior,
        mode,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalModel {
    pub version: u32,
    /// Catalog ids of the expected input vector, in order.
    pub feature_ids: Vec<usize>,
    pub config: HierarchyConfig,
    pub first: TaskModel,
    /// Pair specialists indexed by [`ModePair::index`].
    pub pairs: Vec<TaskModel>,
    /// Balance constant c = 1 / number of pair classifiers.
    pub balance_c: f64,
}

pub fn check_all_modes(matrix: &FeatureMatrix, rows: &[usize]) -> Result<[usize; NUM_MODES]> {
    let counts = matrix.mode_counts(rows.iter().copied());
    if let Some(m) = ModeLabel::ALL.into_iter().find(|m| counts[m.index()] == 0) {
        return Err(Error::MissingMode(m));
    }
    Ok(counts)
}

/// Trains the first layer on all modes and one specialist per mode pair, each
/// with its own ranking, subset and scaler fitted on `rows` only.
pub fn train_hierarchy(
    matrix: &FeatureMatrix,
    rows: &[usize],
    config: &HierarchyConfig,
    seed: u64,
) -> Result<HierarchicalModel> {
    matrix.validate()?;
    let counts = check_all_modes(matrix, rows)?;
    let mean = rows.len() as f64 / NUM_MODES as f64;
    if counts.iter().any(|&c| (c as f64 - mean).abs() > 0.05 * mean) {
        log::warn!("training data is imbalanced ({counts:?}); keeping c = 1/{NUM_PAIRS}");
    }
    let first = train_task(matrix, rows, TaskId::AllModes, config.first_layer, config, seed)?;
    let pairs = ModePair::all()
        .into_iter()
        .map(|p| train_task(matrix, rows, TaskId::Pair(p), config.second_layer, config, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(HierarchicalModel {
        version: BUNDLE_VERSION,
        feature_ids: matrix.feature_ids.clone(),
        config: config.clone(),
        first,
        pairs,
        balance_c: 1.0 / NUM_PAIRS as f64,
    })
}

impl HierarchicalModel {
    pub fn pair_model(&self, pair: ModePair) -> &TaskModel {
        &self.pairs[pair.index()]
    }

    /// Runs both layers on an unscaled feature vector laid out as
    /// `self.feature_ids`.
    pub fn classify(&self, x: &[f64]) -> Result<LayerOutcome> {
        if x.len() != self.feature_ids.len() {
            return Err(Error::input(format!(
                "expected {} features, got {}",
                self.feature_ids.len(),
                x.len()
            )));
        }
        let first = self.first.predict_modes(x)?;
        let (i, j) = top_two(&first);
        let pair = ModePair::new(i, j).expect("distinct candidates");
        let q = self.pair_model(pair).predict_modes(x)?;
        Ok(fuse(first, [q.get(i.index()), q.get(j.index())]))
    }
}
