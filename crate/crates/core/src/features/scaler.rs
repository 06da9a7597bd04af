use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-feature min/max learned from training rows; maps them onto [-1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

pub fn fit_scaler<R: AsRef<[f64]>>(rows: &[R]) -> Result<Scaler> {
    let first = rows
        .first()
        .ok_or_else(|| Error::input("cannot fit a scaler on an empty matrix"))?
        .as_ref();
    let mut min = first.to_vec();
    let mut max = first.to_vec();
    for row in rows {
        let row = row.as_ref();
        if row.len() != min.len() {
            return Err(Error::input("ragged training matrix"));
        }
        for (j, &v) in row.iter().enumerate() {
            min[j] = min[j].min(v);
            max[j] = max[j].max(v);
        }
    }
    Ok(Scaler { min, max })
}

impl Scaler {
    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// `2 (v - min) / (max - min) - 1`, clamped to [-1, 1]; 0 for constant features.
    pub fn scale_value(&self, j: usize, v: f64) -> f64 {
        let (lo, hi) = (self.min[j], self.max[j]);
        if hi == lo {
            0.0
        } else {
            (2.0 * (v - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0)
        }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter().enumerate().map(|(j, &v)| self.scale_value(j, v)).collect()
    }
}

pub fn apply_scaler(scaler: &Scaler, row: &[f64]) -> Result<Vec<f64>> {
    if row.len() != scaler.dim() {
        return Err(Error::input(format!(
            "scaler expects {} features, got {}",
            scaler.dim(),
            row.len()
        )));
    }
    Ok(scaler.transform(row))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn scaling_rules() {
        let s = fit_scaler(&[vec![0.0, 4.0], vec![5.0, 4.0], vec![10.0, 4.0]]).unwrap();
        assert_eq!(s.transform(&[0.0, 4.0]), vec![-1.0, 0.0]);
        assert_eq!(s.transform(&[5.0, 9.0]), vec![0.0, 0.0]);
        assert_eq!(s.transform(&[10.0, 4.0]), vec![1.0, 0.0]);
        assert_eq!(s.transform(&[20.0, 4.0])[0], 1.0);
        assert_eq!(s.transform(&[-3.0, 4.0])[0], -1.0);
        assert!(fit_scaler::<Vec<f64>>(&[]).is_err());
        assert!(apply_scaler(&s, &[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn scaling_is_monotone_and_hits_the_ends(col in prop::collection::vec(-1e6f64..1e6, 2..50), a in -2e6f64..2e6, b in -2e6f64..2e6) {
            let rows: Vec<Vec<f64>> = col.iter().map(|v| vec![*v]).collect();
            let s = fit_scaler(&rows).unwrap();
            let (lo, hi) = (s.min[0], s.max[0]);
            if hi > lo {
                prop_assert_eq!(s.scale_value(0, lo), -1.0);
                prop_assert_eq!(s.scale_value(0, hi), 1.0);
            }
            let (x, y) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(s.scale_value(0, x) <= s.scale_value(0, y));
        }
    }
}
