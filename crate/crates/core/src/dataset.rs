//! Labelled feature matrices: one row per window, columns identified by
//! catalog id.

use serde::{Deserialize, Serialize};

use crate::datagen::SensorTrace;
use crate::error::{Error, Result};
use crate::features::{extract, FeatureCatalog, FeatureConfig, FeatureDomain};
use crate::mode::{ModeLabel, NUM_MODES};
use crate::signal::windows_from_trace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    /// Catalog id of each column.
    pub feature_ids: Vec<usize>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<ModeLabel>,
    /// Index of the trace each window was cut from.
    pub groups: Vec<usize>,
}

impl FeatureMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_ids.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.rows.len();
        if self.labels.len() != n || self.groups.len() != n {
            return Err(Error::input("matrix rows, labels and groups differ in length"));
        }
        if let Some(r) = self.rows.iter().position(|r| r.len() != self.feature_ids.len()) {
            return Err(Error::input(format!(
                "row {r} has {} values for {} columns",
                self.rows[r].len(),
                self.feature_ids.len()
            )));
        }
        Ok(())
    }

    /// Column positions of the given catalog ids.
    pub fn positions(&self, ids: &[usize]) -> Result<Vec<usize>> {
        ids.iter()
            .map(|id| {
                self.feature_ids
                    .iter()
                    .position(|f| f == id)
                    .ok_or_else(|| Error::input(format!("feature id {id} is not a column of the matrix")))
            })
            .collect()
    }

    /// Keeps only the columns belonging to `domain`.
    pub fn restrict(&self, catalog: &FeatureCatalog, domain: FeatureDomain) -> FeatureMatrix {
        let keep: Vec<usize> = self
            .feature_ids
            .iter()
            .enumerate()
            .filter(|(_, &id)| catalog.get(id).is_some_and(|d| domain.includes(d.domain)))
            .map(|(pos, _)| pos)
            .collect();
        FeatureMatrix {
            feature_ids: keep.iter().map(|&p| self.feature_ids[p]).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| keep.iter().map(|&p| r[p]).collect())
                .collect(),
            labels: self.labels.clone(),
            groups: self.groups.clone(),
        }
    }

    pub fn mode_counts(&self, rows: impl IntoIterator<Item = usize>) -> [usize; NUM_MODES] {
        let mut counts = [0; NUM_MODES];
        for r in rows {
            counts[self.labels[r].index()] += 1;
        }
        counts
    }

    /// Copy with labels replaced.
    pub fn with_labels(&self, labels: Vec<ModeLabel>) -> Result<FeatureMatrix> {
        if labels.len() != self.len() {
            return Err(Error::input("label count does not match row count"));
        }
        Ok(FeatureMatrix {
            labels,
            ..self.clone()
        })
    }
}

/// Resamples, windows and featurizes every trace.
pub fn extract_matrix(
    traces: &[SensorTrace],
    catalog: &FeatureCatalog,
    domain: FeatureDomain,
    config: FeatureConfig,
) -> Result<FeatureMatrix> {
    let feature_ids = catalog.ids(domain);
    let mut m = FeatureMatrix {
        feature_ids,
        rows: Vec::new(),
        labels: Vec::new(),
        groups: Vec::new(),
    };
    for (g, trace) in traces.iter().enumerate() {
        for w in windows_from_trace(trace, config.sum_mode)? {
            let fv = extract(&w, catalog, domain, config)?;
            m.rows.push(fv.values);
            m.labels.push(w.mode);
            m.groups.push(g);
        }
    }
    Ok(m)
}
