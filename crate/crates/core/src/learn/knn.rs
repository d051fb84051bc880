use serde::{Deserialize, Serialize};

use super::{Dataset, Standardizer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnConfig {
    pub k: usize,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig { k: 5 }
    }
}

/// k nearest neighbours by Euclidean distance on z-scored features. The
/// score is the share of positive neighbours; distance ties go to the
/// lower training row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub standardizer: Standardizer,
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

impl KnnModel {
    pub fn fit(data: &Dataset, cfg: &KnnConfig) -> Result<Self> {
        if cfg.k == 0 {
            return Err(Error::InvalidParameter("knn k must be at least 1".into()));
        }
        if cfg.k > data.len() {
            return Err(Error::InvalidParameter(format!(
                "knn k = {} exceeds {} training rows",
                cfg.k,
                data.len()
            )));
        }
        let standardizer = Standardizer::fit(data);
        let points = data.rows().iter().map(|r| standardizer.apply(r)).collect();
        Ok(KnnModel {
            k: cfg.k,
            standardizer,
            points,
            labels: data.labels().to_vec(),
        })
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        let z = self.standardizer.apply(row);
        let mut dist: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .collect();
        let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        let k = self.k;
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, by_dist);
        }
        let positives = dist[..k].iter().filter(|(_, i)| self.labels[*i] == 1).count();
        positives as f64 / k as f64
    }
}
