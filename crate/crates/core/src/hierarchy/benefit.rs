//! Beta-Bernoulli reliability estimates and the two-layer benefit test.

use serde::{Deserialize, Serialize};

use super::HierarchicalModel;
use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};
use crate::mode::{ModePair, NUM_PAIRS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPrior {
    pub a: f64,
    pub b: f64,
}

impl Default for BetaPrior {
    /// Uniform prior, mean 1/2.
    fn default() -> Self {
        BetaPrior { a: 1.0, b: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPosterior {
    pub prior: BetaPrior,
    pub successes: u64,
    pub trials: u64,
    /// Posterior Beta parameters `(successes + a, trials - successes + b)`.
    pub alpha: f64,
    pub beta: f64,
    pub mean: f64,
}

/// Conjugate update of a Beta prior with 0/1 outcomes; the posterior mean is
/// `(sum y + a) / (a + b + N)`.
pub fn estimate_beta_posterior(outcomes: &[u8], prior: BetaPrior) -> Result<BetaPosterior> {
    if !(prior.a > 0.0 && prior.b > 0.0) {
        return Err(Error::input(format!(
            "Beta prior parameters must be positive, got a = {}, b = {}",
            prior.a, prior.b
        )));
    }
    if let Some(bad) = outcomes.iter().find(|&&o| o > 1) {
        return Err(Error::input(format!("outcome {bad} is not 0 or 1")));
    }
    let successes = outcomes.iter().map(|&o| u64::from(o)).sum::<u64>();
    let trials = outcomes.len() as u64;
    let alpha = successes as f64 + prior.a;
    let beta = (trials - successes) as f64 + prior.b;
    Ok(BetaPosterior {
        prior,
        successes,
        trials,
        alpha,
        beta,
        mean: alpha / (prior.a + prior.b + trials as f64),
    })
}

/// Held-out correctness records for the first layer and every pair specialist.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenefitOutcomes {
    /// First-layer winner equals the truth.
    pub top1: Vec<u8>,
    /// Truth is one of the two first-layer candidates.
    pub top2: Vec<u8>,
    /// Per pair (by [`ModePair::index`]): specialist correct on a sample of its pair.
    pub pairs: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenefitEstimate {
    #[serde(rename = "P1")]
    pub p1: f64,
    #[serde(rename = "Delta")]
    pub delta: f64,
    #[serde(rename = "Pk")]
    pub pk: Vec<f64>,
    pub c: f64,
    /// Second-layer error terms `1 - P_k`.
    pub ek: Vec<f64>,
    pub threshold: f64,
    pub beneficial: bool,
}

impl BenefitEstimate {
    /// Evaluates the benefit inequality `Delta > P1 (1 - c sum P_k) / (c sum P_k)`.
    pub fn from_parameters(p1: f64, delta: f64, pk: &[f64], c: f64) -> Result<BenefitEstimate> {
        let cs = c * pk.iter().sum::<f64>();
        if cs == 0.0 {
            return Err(Error::DegenerateSecondLayer);
        }
        let threshold = p1 * (1.0 - cs) / cs;
        Ok(BenefitEstimate {
            p1,
            delta,
            pk: pk.to_vec(),
            c,
            ek: pk.iter().map(|p| 1.0 - p).collect(),
            threshold,
            beneficial: delta > threshold,
        })
    }
}

/// Probability that the two-layer framework returns the true mode,
/// `(P1 + Delta) c sum P_k`.
pub fn framework_success(p1: f64, delta: f64, pk: &[f64], c: f64) -> f64 {
    (p1 + delta) * c * pk.iter().sum::<f64>()
}

/// The same quantity written through the second-layer errors,
/// `P1 + Delta - (P1 + Delta) c sum e_k` with `e_k = 1 - P_k`.
pub fn framework_success_via_errors(p1: f64, delta: f64, pk: &[f64], c: f64) -> f64 {
    let errors: f64 = pk.iter().map(|p| 1.0 - p).sum();
    p1 + delta - (p1 + delta) * c * errors
}

/// Posterior-mean estimates of P1, Delta (top-2 minus top-1, floored at 0)
/// and each P_k, then the benefit test with `c = 1/10`.
pub fn estimate_benefit(outcomes: &BenefitOutcomes, prior: BetaPrior) -> Result<BenefitEstimate> {
    if outcomes.pairs.len() != NUM_PAIRS {
        return Err(Error::input(format!(
            "expected outcomes for {NUM_PAIRS} pair classifiers, got {}",
            outcomes.pairs.len()
        )));
    }
    let p1 = estimate_beta_posterior(&outcomes.top1, prior)?.mean;
    let p12 = estimate_beta_posterior(&outcomes.top2, prior)?.mean;
    let pk = outcomes
        .pairs
        .iter()
        .map(|o| estimate_beta_posterior(o, prior).map(|b| b.mean))
        .collect::<Result<Vec<_>>>()?;
    BenefitEstimate::from_parameters(p1, (p12 - p1).max(0.0), &pk, 1.0 / NUM_PAIRS as f64)
}

/// Classifies `rows` and records the correctness outcomes the benefit test
/// needs. Each specialist is scored on the rows whose truth is in its pair.
pub fn collect_benefit_outcomes(
    model: &HierarchicalModel,
    matrix: &FeatureMatrix,
    rows: &[usize],
) -> Result<BenefitOutcomes> {
    let mut out = BenefitOutcomes {
        pairs: vec![Vec::new(); NUM_PAIRS],
        ..BenefitOutcomes::default()
    };
    for &r in rows {
        let x = &matrix.rows[r];
        let truth = matrix.labels[r];
        let outcome = model.classify(x)?;
        out.top1.push(u8::from(outcome.candidates.0 == truth));
        out.top2.push(u8::from(
            outcome.candidates.0 == truth || outcome.candidates.1 == truth,
        ));
        for pair in ModePair::all().into_iter().filter(|p| p.contains(truth)) {
            let spec = model.pair_model(pair);
            let p = spec.predict(x)?;
            let predicted = spec.classes[p.argmax()];
            out.pairs[pair.index()].push(u8::from(predicted == truth));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn beta_posterior_cases() {
        let prior = BetaPrior::default();
        assert_eq!(estimate_beta_posterior(&[], prior).unwrap().mean, 0.5);
        let eight_of_ten = [1, 1, 1, 1, 1, 1, 1, 1, 0, 0];
        let b = estimate_beta_posterior(&eight_of_ten, prior).unwrap();
        assert_eq!(b.mean, 0.75);
        assert_eq!((b.alpha, b.beta), (9.0, 3.0));
        let all = vec![1u8; 1000];
        let m = estimate_beta_posterior(&all, prior).unwrap().mean;
        assert_eq!(m, 1001.0 / 1002.0);
        assert!(m > 0.999);
        assert!(estimate_beta_posterior(&[0, 2], prior).is_err());
        assert!(estimate_beta_posterior(&[0], BetaPrior { a: 0.0, b: 1.0 }).is_err());
    }

    #[test]
    fn benefit_boundaries() {
        let perfect = [1.0; 10];
        let e = BenefitEstimate::from_parameters(0.9, 0.0, &perfect, 0.1).unwrap();
        assert_eq!(e.threshold, 0.0);
        assert!(!e.beneficial);

        let pk = [0.95; 10];
        let yes = BenefitEstimate::from_parameters(0.9, 0.05, &pk, 0.1).unwrap();
        assert!((yes.threshold - 0.9 * 0.05 / 0.95).abs() < 1e-12);
        assert!((yes.threshold - 0.04737).abs() < 1e-5);
        assert!(yes.beneficial);
        let no = BenefitEstimate::from_parameters(0.9, 0.04, &pk, 0.1).unwrap();
        assert!(!no.beneficial);

        assert!(matches!(
            BenefitEstimate::from_parameters(0.9, 0.1, &[0.0; 10], 0.1),
            Err(Error::DegenerateSecondLayer)
        ));
    }

    #[test]
    fn benefit_from_outcomes() {
        let outcomes = BenefitOutcomes {
            top1: vec![1, 1, 1, 0],
            top2: vec![1, 1, 1, 1],
            pairs: vec![vec![1, 1]; 10],
        };
        let e = estimate_benefit(&outcomes, BetaPrior::default()).unwrap();
        assert!((e.p1 - 4.0 / 6.0).abs() < 1e-15);
        assert!((e.delta - (5.0 / 6.0 - 4.0 / 6.0)).abs() < 1e-15);
        assert!(e.pk.iter().all(|&p| (p - 0.75).abs() < 1e-15));
        let short = BenefitOutcomes {
            pairs: vec![vec![]; 9],
            ..outcomes
        };
        assert!(estimate_benefit(&short, BetaPrior::default()).is_err());
    }

    proptest! {
        #[test]
        fn posterior_mean_sits_between_prior_and_data(
            outcomes in prop::collection::vec(0u8..=1, 1..200),
            a in 0.1f64..10.0,
            b in 0.1f64..10.0,
        ) {
            let post = estimate_beta_posterior(&outcomes, BetaPrior { a, b }).unwrap();
            let prior_mean = a / (a + b);
            let rate = post.successes as f64 / post.trials as f64;
            let (lo, hi) = if prior_mean <= rate { (prior_mean, rate) } else { (rate, prior_mean) };
            prop_assert!(post.mean >= lo - 1e-15 && post.mean <= hi + 1e-15);
            if prior_mean != rate {
                prop_assert!(post.mean > lo && post.mean < hi);
            }
        }

        #[test]
        fn success_identity(p1 in 0.0f64..1.0, delta in 0.0f64..1.0, pk in prop::collection::vec(0.0f64..1.0, 10)) {
            let a = framework_success(p1, delta, &pk, 0.1);
            let b = framework_success_via_errors(p1, delta, &pk, 0.1);
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}
