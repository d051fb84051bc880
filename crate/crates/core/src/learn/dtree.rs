use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DTreeConfig {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for DTreeConfig {
    fn default() -> Self {
        DTreeConfig {
            max_depth: 6,
            min_samples_leaf: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum CartNode {
    Leaf {
        /// Share of positive training rows in the leaf.
        purity: f64,
        count: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        gain: f64,
        left: usize,
        right: usize,
    },
}

/// A CART classification tree grown depth-first on Gini impurity with
/// exact thresholds (midpoints between consecutive distinct values).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DTreeModel {
    pub nodes: Vec<CartNode>,
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

struct Best {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl DTreeModel {
    pub fn fit(data: &Dataset, cfg: &DTreeConfig) -> Result<Self> {
        if cfg.min_samples_leaf == 0 {
            return Err(Error::InvalidParameter("min_samples_leaf must be at least 1".into()));
        }
        let mut model = DTreeModel { nodes: Vec::new() };
        let idx: Vec<usize> = (0..data.len()).collect();
        model.grow(data, cfg, idx, 0);
        Ok(model)
    }

    fn grow(&mut self, data: &Dataset, cfg: &DTreeConfig, idx: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let pos = idx.iter().filter(|&&i| data.labels()[i] == 1).count();
        self.nodes.push(CartNode::Leaf {
            purity: pos as f64 / idx.len().max(1) as f64,
            count: idx.len(),
        });
        if depth >= cfg.max_depth || pos == 0 || pos == idx.len() {
            return id;
        }
        let Some(best) = best_split(data, &idx, pos, cfg.min_samples_leaf) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| data.rows()[i][best.feature] <= best.threshold);
        let left = self.grow(data, cfg, l, depth + 1);
        let right = self.grow(data, cfg, r, depth + 1);
        self.nodes[id] = CartNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            gain: best.gain,
            left,
            right,
        };
        id
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                CartNode::Leaf { purity, .. } => return *purity,
                CartNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => at = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn split_gains(&self, n_features: usize) -> Vec<f64> {
        let mut g = vec![0.0; n_features];
        for node in &self.nodes {
            if let CartNode::Split { feature, gain, .. } = node {
                g[*feature] += gain;
            }
        }
        g
    }
}

/// Weighted impurity decrease; ties keep the lowest feature, then the
/// lowest threshold.
fn best_split(data: &Dataset, idx: &[usize], pos: usize, min_leaf: usize) -> Option<Best> {
    let n = idx.len();
    let parent = gini(pos, n) * n as f64;
    let mut best: Option<Best> = None;
    for j in 0..data.n_features() {
        let mut vals: Vec<(f64, u8)> = idx.iter().map(|&i| (data.rows()[i][j], data.labels()[i])).collect();
        vals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left_pos = 0;
        for k in 0..n - 1 {
            left_pos += usize::from(vals[k].1);
            if vals[k].0 == vals[k + 1].0 {
                continue;
            }
            let nl = k + 1;
            let nr = n - nl;
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let child = gini(left_pos, nl) * nl as f64 + gini(pos - left_pos, nr) * nr as f64;
            let gain = parent - child;
            if gain > 1e-12 && best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(Best {
                    feature: j,
                    threshold: 0.5 * (vals[k].0 + vals[k + 1].0),
                    gain,
                });
            }
        }
    }
    best
}
