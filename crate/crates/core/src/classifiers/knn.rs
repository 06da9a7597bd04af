use serde::{Deserialize, Serialize};

use super::{check_dim, check_training, ProbabilityVector};
use crate::error::{Error, Result};

/// Brute-force k-nearest-neighbour vote over stored training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub n_classes: usize,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

pub fn knn_train(x: &[Vec<f64>], y: &[usize], n_classes: usize, k: usize) -> Result<KnnModel> {
    check_training(x, y, n_classes)?;
    if k == 0 || k > x.len() {
        return Err(Error::input(format!(
            "K must lie in 1..={}, got {k}",
            x.len()
        )));
    }
    Ok(KnnModel {
        k,
        n_classes,
        rows: x.to_vec(),
        labels: y.to_vec(),
    })
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

impl KnnModel {
    /// Indices of the K nearest rows by Euclidean distance, ties to the lower
    /// row index, nearest first.
    pub fn neighbors(&self, x: &[f64]) -> Result<Vec<usize>> {
        check_dim(self.rows[0].len(), x)?;
        let mut scored: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (sq_dist(r, x), i))
            .collect();
        let order = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < scored.len() {
            scored.select_nth_unstable_by(self.k - 1, order);
            scored.truncate(self.k);
        }
        scored.sort_unstable_by(order);
        Ok(scored.into_iter().map(|(_, i)| i).collect())
    }

    pub fn predict(&self, x: &[f64]) -> Result<ProbabilityVector> {
        let mut votes = vec![0.0; self.n_classes];
        for i in self.neighbors(x)? {
            votes[self.labels[i]] += 1.0;
        }
        votes.iter_mut().for_each(|v| *v /= self.k as f64);
        Ok(ProbabilityVector(votes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_match_with_k1() {
        let x = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![5.0, 5.0]];
        let m = knn_train(&x, &[0, 1, 2], 3, 1).unwrap();
        assert_eq!(m.predict(&[1.0, 1.0]).unwrap().0, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn vote_fractions() {
        let x: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64]).collect();
        let y = [0, 0, 0, 1, 1, 1, 1];
        let m = knn_train(&x, &y, 2, 5).unwrap();
        let p = m.predict(&[0.0]).unwrap();
        assert!((p.get(0) - 0.6).abs() < 1e-15 && (p.get(1) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn distance_ties_go_to_lower_rows() {
        let x = vec![vec![1.0], vec![-1.0], vec![1.0]];
        let m = knn_train(&x, &[1, 0, 2], 3, 2).unwrap();
        assert_eq!(m.neighbors(&[0.0]).unwrap(), vec![0, 1]);
    }

    #[test]
    fn errors() {
        let x = vec![vec![0.0, 1.0]];
        assert!(knn_train(&x, &[0], 1, 2).is_err());
        assert!(knn_train(&x, &[0], 1, 0).is_err());
        let m = knn_train(&x, &[0], 1, 1).unwrap();
        assert!(m.predict(&[0.0]).is_err());
    }
}
