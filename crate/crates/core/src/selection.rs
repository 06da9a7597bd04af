//! Random-forest impurity ranking and top-k feature subsets per
//! classification task.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classifiers::{rf_train, RfParams};
use crate::error::{Error, Result};
use crate::mode::ModePair;

/// A classification task: all five modes, or one unordered pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskId {
    AllModes,
    Pair(ModePair),
}

impl TaskId {
    /// 0 for the all-modes task, `1 + pair index` for pairs.
    pub fn index(self) -> usize {
        match self {
            TaskId::AllModes => 0,
            TaskId::Pair(p) => 1 + p.index(),
        }
    }

    pub fn all() -> Vec<TaskId> {
        std::iter::once(TaskId::AllModes)
            .chain(ModePair::all().into_iter().map(TaskId::Pair))
            .collect()
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskId::AllModes => f.write_str("all-modes"),
            TaskId::Pair(p) => p.fmt(f),
        }
    }
}

impl std::str::FromStr for TaskId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "all-modes" {
            Ok(TaskId::AllModes)
        } else {
            Ok(TaskId::Pair(s.parse()?))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceRanking {
    pub task: TaskId,
    /// Catalog id per score.
    pub feature_ids: Vec<usize>,
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSubset {
    pub task: TaskId,
    /// Catalog ids, strongest first.
    pub ids: Vec<usize>,
}

pub const DEFAULT_SUBSET_SIZE: usize = 100;
pub const DEFAULT_RANKING_TREES: usize = 200;

/// Mean decrease in Gini impurity of each column of `x`, from a forest of
/// `n_trees` trees. `feature_ids` names the columns.
pub fn rank_features(
    task: TaskId,
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    feature_ids: &[usize],
    n_trees: usize,
    seed: u64,
) -> Result<ImportanceRanking> {
    let mut seen = vec![false; n_classes];
    for &c in y {
        if c < n_classes {
            seen[c] = true;
        }
    }
    let present = seen.iter().filter(|&&s| s).count();
    let required = match task {
        TaskId::AllModes => n_classes,
        TaskId::Pair(_) => 2,
    };
    if present < required.max(2) {
        return Err(Error::input(format!(
            "ranking for {task} needs {} classes, found {present}",
            required.max(2)
        )));
    }
    if x.first().is_some_and(|r| r.len() != feature_ids.len()) {
        return Err(Error::input("feature id list does not match the matrix width"));
    }
    let rf = rf_train(
        x,
        y,
        n_classes,
        &RfParams {
            n_trees,
            mtry: None,
            bootstrap: true,
        },
        seed,
    )?;
    Ok(ImportanceRanking {
        task,
        feature_ids: feature_ids.to_vec(),
        scores: rf.impurity_importance(),
    })
}

/// The `k` highest-scoring ids, ordered by descending score then ascending id.
pub fn select_top_k(ranking: &ImportanceRanking, k: usize) -> Result<FeatureSubset> {
    if k > ranking.feature_ids.len() {
        return Err(Error::input(format!(
            "cannot select {k} features from {}",
            ranking.feature_ids.len()
        )));
    }
    let mut order: Vec<(f64, usize)> = ranking
        .scores
        .iter()
        .copied()
        .zip(ranking.feature_ids.iter().copied())
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(FeatureSubset {
        task: ranking.task,
        ids: order.into_iter().take(k).map(|(_, id)| id).collect(),
    })
}
