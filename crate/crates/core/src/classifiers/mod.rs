//! From-scratch base classifiers. Every model predicts a
//! [`ProbabilityVector`] over class indices `0..n_classes`.

mod cart;
mod forest;
mod knn;
mod platt;
mod svm;

pub use cart::{cart_train, CartModel, CartParams, Node, Split};
pub use forest::{rf_train, RfModel, RfParams};
pub use knn::{knn_train, KnnModel};
pub use platt::{platt_fit, platt_probability, PlattParams};
pub use svm::{
    smo_solve, svm_train, BinarySvm, RbfKernel, SmoParams, SmoSolution, SvmModel, SvmParams,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Class probabilities; entries are non-negative and sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityVector(pub Vec<f64>);

impl ProbabilityVector {
    /// Normalizes non-negative scores; an all-zero score vector becomes uniform.
    pub fn from_scores(mut scores: Vec<f64>) -> ProbabilityVector {
        let total: f64 = scores.iter().sum();
        if total > 0.0 {
            scores.iter_mut().for_each(|s| *s /= total);
        } else {
            let n = scores.len() as f64;
            scores.iter_mut().for_each(|s| *s = 1.0 / n);
        }
        ProbabilityVector(scores)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, class: usize) -> f64 {
        self.0[class]
    }

    /// Index of the largest probability, lowest index on ties.
    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }

    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|p| p.is_finite() && *p >= 0.0)
            && (self.0.iter().sum::<f64>() - 1.0).abs() <= 1e-9
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Knn,
    Cart,
    Rf,
    Svm,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Knn => "knn",
            Algorithm::Cart => "cart",
            Algorithm::Rf => "rf",
            Algorithm::Svm => "svm",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "knn" => Ok(Algorithm::Knn),
            "cart" => Ok(Algorithm::Cart),
            "rf" => Ok(Algorithm::Rf),
            "svm" => Ok(Algorithm::Svm),
            _ => Err(Error::input(format!(
                "unknown algorithm `{s}` (expected knn, cart, rf or svm)"
            ))),
        }
    }
}

/// Hyperparameters for all four algorithms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierParams {
    pub knn_k: usize,
    pub cart: CartParams,
    pub rf: RfParams,
    pub svm: SvmParams,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        ClassifierParams {
            knn_k: 7,
            cart: CartParams::default(),
            rf: RfParams::default(),
            svm: SvmParams::default(),
        }
    }
}

/// A trained model of any of the four kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "lowercase")]
pub enum Model {
    Knn(KnnModel),
    Cart(CartModel),
    Rf(RfModel),
    Svm(SvmModel),
}

impl Model {
    pub fn train(
        algorithm: Algorithm,
        params: &ClassifierParams,
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        seed: u64,
    ) -> Result<Model> {
        Ok(match algorithm {
            Algorithm::Knn => Model::Knn(knn_train(x, y, n_classes, params.knn_k)?),
            Algorithm::Cart => Model::Cart(cart_train(x, y, n_classes, &params.cart)?),
            Algorithm::Rf => Model::Rf(rf_train(x, y, n_classes, &params.rf, seed)?),
            Algorithm::Svm => Model::Svm(svm_train(x, y, n_classes, &params.svm)?),
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<ProbabilityVector> {
        match self {
            Model::Knn(m) => m.predict(x),
            Model::Cart(m) => m.predict(x),
            Model::Rf(m) => m.predict(x),
            Model::Svm(m) => m.predict(x),
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            Model::Knn(_) => Algorithm::Knn,
            Model::Cart(_) => Algorithm::Cart,
            Model::Rf(_) => Algorithm::Rf,
            Model::Svm(_) => Algorithm::Svm,
        }
    }
}

pub(crate) fn check_training(x: &[Vec<f64>], y: &[usize], n_classes: usize) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::input("training set is empty"));
    }
    if x.len() != y.len() {
        return Err(Error::input(format!(
            "{} training rows but {} labels",
            x.len(),
            y.len()
        )));
    }
    let dim = x[0].len();
    if x.iter().any(|r| r.len() != dim) {
        return Err(Error::input("ragged training matrix"));
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(Error::input(format!("label {bad} outside 0..{n_classes}")));
    }
    Ok(dim)
}

pub(crate) fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::input(format!(
            "query has {} features, model expects {expected}",
            x.len()
        )));
    }
    Ok(())
}
