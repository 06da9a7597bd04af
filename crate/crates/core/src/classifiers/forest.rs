use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cart::{grow_tree, CartModel, Columns, GrowParams};
use super::{check_dim, check_training, ProbabilityVector};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_for};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfParams {
    pub n_trees: usize,
    /// Candidate features per split; `None` means `floor(sqrt(features))`.
    pub mtry: Option<usize>,
    pub bootstrap: bool,
}

impl Default for RfParams {
    fn default() -> Self {
        RfParams {
            n_trees: 200,
            mtry: None,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfModel {
    pub n_classes: usize,
    pub n_features: usize,
    pub mtry: usize,
    pub trees: Vec<CartModel>,
    /// Seed of each tree's bootstrap and feature-sampling stream.
    pub tree_seeds: Vec<u64>,
}

pub fn default_mtry(n_features: usize) -> usize {
    ((n_features as f64).sqrt().floor() as usize).max(1)
}

/// Trains `n_trees` unpruned trees (min leaf 1) on bootstrap resamples with
/// `mtry` candidate features per split. Trees are seeded by
/// `(seed, "rf-tree", t)`, so the result does not depend on thread count.
pub fn rf_train(x: &[Vec<f64>], y: &[usize], n_classes: usize, params: &RfParams, seed: u64) -> Result<RfModel> {
    let dim = check_training(x, y, n_classes)?;
    if params.n_trees == 0 {
        return Err(Error::input("a forest needs at least one tree"));
    }
    let mtry = params.mtry.unwrap_or_else(|| default_mtry(dim));
    if mtry == 0 || mtry > dim {
        return Err(Error::input(format!("mtry must lie in 1..={dim}, got {mtry}")));
    }
    let data = Columns::new(x, y, n_classes);
    let n = x.len();
    let tree_seeds: Vec<u64> = (0..params.n_trees as u64)
        .map(|t| derive_seed(seed, "rf-tree", t))
        .collect();
    let trees = tree_seeds
        .par_iter()
        .map(|&ts| {
            let mut rng = rng_for(ts, "tree", 0);
            let idx: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grow_tree(
                &data,
                idx,
                GrowParams {
                    min_leaf: 1,
                    mtry: Some(mtry),
                    rng: Some(&mut rng),
                },
            )
        })
        .collect();
    Ok(RfModel {
        n_classes,
        n_features: dim,
        mtry,
        trees,
        tree_seeds,
    })
}

impl RfModel {
    /// Fraction of trees voting for each class.
    pub fn predict(&self, x: &[f64]) -> Result<ProbabilityVector> {
        check_dim(self.n_features, x)?;
        let mut votes = vec![0.0; self.n_classes];
        for t in &self.trees {
            votes[t.vote(x)] += 1.0;
        }
        let n = self.trees.len() as f64;
        votes.iter_mut().for_each(|v| *v /= n);
        Ok(ProbabilityVector(votes))
    }

    /// Mean decrease in Gini impurity per feature, averaged over trees.
    pub fn impurity_importance(&self) -> Vec<f64> {
        let mut total = vec![0.0; self.n_features];
        for t in &self.trees {
            for (acc, v) in total.iter_mut().zip(t.impurity_importance()) {
                *acc += v;
            }
        }
        let n = self.trees.len() as f64;
        total.iter_mut().for_each(|v| *v /= n);
        total
    }
}
