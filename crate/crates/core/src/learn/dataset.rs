use crate::error::{Error, Result};
use crate::features::{FeatureMask, FeatureVector};

/// A labelled feature matrix. Rows are posts, columns are named features.
/// Missing values (NaN) are imputed as 0 on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_names: Vec<String>,
    rows: Vec<Vec<f64>>,
    labels: Vec<u8>,
    ids: Vec<String>,
}

impl Dataset {
    pub fn new(feature_names: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self> {
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::with_ids(feature_names, rows, labels, ids)
    }

    pub fn with_ids(
        feature_names: Vec<String>,
        mut rows: Vec<Vec<f64>>,
        labels: Vec<u8>,
        ids: Vec<String>,
    ) -> Result<Self> {
        if rows.len() != labels.len() || rows.len() != ids.len() {
            return Err(Error::InvalidParameter(format!(
                "{} rows, {} labels, {} ids",
                rows.len(),
                labels.len(),
                ids.len()
            )));
        }
        let d = feature_names.len();
        for (i, r) in rows.iter_mut().enumerate() {
            if r.len() != d {
                return Err(Error::InvalidParameter(format!(
                    "row {i} has {} values, expected {d}",
                    r.len()
                )));
            }
            for x in r.iter_mut() {
                if x.is_nan() {
                    *x = 0.0;
                }
            }
        }
        if let Some(bad) = labels.iter().find(|&&y| y > 1) {
            return Err(Error::InvalidParameter(format!("label {bad} is not 0 or 1")));
        }
        Ok(Dataset {
            feature_names,
            rows,
            labels,
            ids,
        })
    }

    /// Selects the columns active in `mask`. Every vector must be labelled.
    pub fn from_vectors(vectors: &[FeatureVector], mask: FeatureMask) -> Result<Self> {
        let active = mask.active();
        let mut rows = Vec::with_capacity(vectors.len());
        let mut labels = Vec::with_capacity(vectors.len());
        let mut ids = Vec::with_capacity(vectors.len());
        for v in vectors {
            let y = v
                .label
                .ok_or_else(|| Error::InvalidParameter(format!("post {} has no label", v.post_id)))?;
            rows.push(active.iter().map(|&f| v.get(f)).collect());
            labels.push(u8::from(y));
            ids.push(v.post_id.clone());
        }
        Self::with_ids(mask.names(), rows, labels, ids)
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// `Some(label)` when every row has the same label.
    pub fn single_class(&self) -> Option<u8> {
        let first = *self.labels.first()?;
        self.labels.iter().all(|&y| y == first).then_some(first)
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
        }
    }

    /// Copy with column `j` replaced.
    pub fn with_column(&self, j: usize, values: &[f64]) -> Dataset {
        let mut out = self.clone();
        for (r, &x) in out.rows.iter_mut().zip(values) {
            r[j] = x;
        }
        out
    }

    /// Reorders columns to `names`; errors listing missing and extra names.
    pub fn aligned_to(&self, names: &[String]) -> Result<Dataset> {
        if self.feature_names == names {
            return Ok(self.clone());
        }
        let missing: Vec<String> = names
            .iter()
            .filter(|n| !self.feature_names.contains(n))
            .cloned()
            .collect();
        let extra: Vec<String> = self
            .feature_names
            .iter()
            .filter(|n| !names.contains(n))
            .cloned()
            .collect();
        if !missing.is_empty() || !extra.is_empty() {
            return Err(Error::FeatureMismatch { missing, extra });
        }
        let pos: Vec<usize> = names
            .iter()
            .map(|n| self.feature_names.iter().position(|m| m == n).expect("checked above"))
            .collect();
        let rows = self
            .rows
            .iter()
            .map(|r| pos.iter().map(|&p| r[p]).collect())
            .collect();
        Ok(Dataset {
            feature_names: names.to_vec(),
            rows,
            labels: self.labels.clone(),
            ids: self.ids.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_is_imputed() {
        let d = Dataset::new(vec!["a".into()], vec![vec![f64::NAN]], vec![0]).unwrap();
        assert_eq!(d.rows()[0][0], 0.0);
    }

    #[test]
    fn reorders_by_name() {
        let d = Dataset::new(vec!["a".into(), "b".into()], vec![vec![1.0, 2.0]], vec![1]).unwrap();
        let r = d.aligned_to(&["b".into(), "a".into()]).unwrap();
        assert_eq!(r.rows()[0], vec![2.0, 1.0]);
    }

    #[test]
    fn rejects_ragged_rows_and_bad_labels() {
        assert!(Dataset::new(vec!["a".into()], vec![vec![1.0, 2.0]], vec![0]).is_err());
        assert!(Dataset::new(vec!["a".into()], vec![vec![1.0]], vec![2]).is_err());
    }
}
