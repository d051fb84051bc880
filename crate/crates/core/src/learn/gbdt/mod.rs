//! Histogram gradient-boosted trees for binary classification.
//!
//! Logistic loss, leaf-wise growth, L2-regularised leaf values. Optional
//! gradient-based one-side sampling picks the rows of each round and
//! optional exclusive feature bundling merges sparse columns before
//! histograms are built.

mod binning;
mod efb;
mod goss;
mod grow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{sigmoid, Dataset};
use crate::error::{Error, Result};

pub use efb::{conflict_graph, efb_bundle, Bundle};
pub use goss::goss_sample;
pub use grow::{Tree, TreeNode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbdtConfig {
    pub num_trees: usize,
    pub learning_rate: f64,
    pub max_leaves: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub histogram_bins: usize,
    /// L2 penalty on leaf values.
    pub lambda: f64,
    pub goss: bool,
    /// Share of rows kept by largest gradient.
    pub goss_a: f64,
    /// Share of rows drawn from the remainder.
    pub goss_b: f64,
    pub efb: bool,
    /// Conflicted rows tolerated per bundle.
    pub efb_max_conflicts: usize,
}

impl Default for GbdtConfig {
    fn default() -> Self {
        GbdtConfig {
            num_trees: 100,
            learning_rate: 0.1,
            max_leaves: 15,
            max_depth: 6,
            min_samples_leaf: 5,
            histogram_bins: 64,
            lambda: 1.0,
            goss: true,
            goss_a: 0.2,
            goss_b: 0.1,
            efb: true,
            efb_max_conflicts: 0,
        }
    }
}

impl GbdtConfig {
    /// The same booster with sampling and bundling switched off.
    pub fn plain(&self) -> GbdtConfig {
        GbdtConfig {
            goss: false,
            efb: false,
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("gbdt: {m}")));
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if self.max_leaves < 1 {
            return bad("max_leaves must be at least 1");
        }
        if self.min_samples_leaf < 1 {
            return bad("min_samples_leaf must be at least 1");
        }
        if self.histogram_bins < 2 {
            return bad("histogram_bins must be at least 2");
        }
        if !(self.lambda >= 0.0) {
            return bad("lambda must be non-negative");
        }
        if self.goss {
            goss_sample(&[0.0], self.goss_a, self.goss_b, 0)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    /// Initial log-odds.
    pub base_score: f64,
    pub trees: Vec<Tree>,
    /// Upper bin edges per feature.
    pub bin_edges: Vec<Vec<f64>>,
    pub bundles: Vec<Bundle>,
    /// Mean training log-loss before the first tree and after each tree.
    pub train_loss: Vec<f64>,
}

fn log_loss(raw: &[f64], y: &[f64]) -> f64 {
    let total: f64 = raw
        .iter()
        .zip(y)
        .map(|(&f, &y)| {
            // log(1 + e^f) - y f, stable for large |f|
            let softplus = if f > 0.0 { f + (-f).exp().ln_1p() } else { f.exp().ln_1p() };
            softplus - y * f
        })
        .sum();
    total / raw.len() as f64
}

impl GbdtModel {
    pub fn fit(data: &Dataset, cfg: &GbdtConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let n = data.len();
        let d = data.n_features();
        let y: Vec<f64> = data.labels().iter().map(|&l| f64::from(l)).collect();

        let mut edges = Vec::with_capacity(d);
        let mut columns = Vec::with_capacity(d);
        for j in 0..d {
            let col = data.column(j);
            let e = binning::fit_edges(&col, cfg.histogram_bins);
            columns.push(col.iter().map(|&x| binning::bin_of(x, &e)).collect::<Vec<u32>>());
            edges.push(e);
        }
        let n_bins: Vec<u32> = edges.iter().map(|e| e.len() as u32 + 1).collect();
        let bundles = if cfg.efb {
            efb::bundle_with_bins(&columns, &n_bins, cfg.efb_max_conflicts)
        } else {
            efb::singletons(&n_bins)
        };
        let merged = efb::encode(&bundles, &columns);

        let prior = (y.iter().sum::<f64>() / n as f64).clamp(1e-12, 1.0 - 1e-12);
        let base_score = (prior / (1.0 - prior)).ln();
        let mut raw = vec![base_score; n];
        let mut train_loss = vec![log_loss(&raw, &y)];
        let mut model = GbdtModel {
            base_score,
            trees: Vec::with_capacity(cfg.num_trees),
            bin_edges: edges,
            bundles,
            train_loss: Vec::new(),
        };

        if data.single_class().is_some() {
            model.trees = vec![Tree::constant(0.0); cfg.num_trees];
            model.train_loss = vec![train_loss[0]; cfg.num_trees + 1];
            return Ok(model);
        }

        let binned = grow::Binned {
            columns: &columns,
            n_bins: &n_bins,
            edges: &model.bin_edges,
            bundles: &model.bundles,
            merged: &merged,
        };
        let params = grow::GrowParams {
            max_leaves: cfg.max_leaves,
            max_depth: cfg.max_depth,
            min_samples_leaf: cfg.min_samples_leaf,
            lambda: cfg.lambda,
            learning_rate: cfg.learning_rate,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut trees = Vec::with_capacity(cfg.num_trees);
        let mut g = vec![0.0; n];
        let mut h = vec![0.0; n];
        for _ in 0..cfg.num_trees {
            for r in 0..n {
                let p = sigmoid(raw[r]);
                g[r] = p - y[r];
                h[r] = (p * (1.0 - p)).max(1e-16);
            }
            let round_seed: u64 = rng.random();
            let rows: Vec<u32> = if cfg.goss {
                let (idx, w) = goss_sample(&g, cfg.goss_a, cfg.goss_b, round_seed)?;
                for (&r, &w) in idx.iter().zip(&w) {
                    g[r] *= w;
                    h[r] *= w;
                }
                idx.into_iter().map(|r| r as u32).collect()
            } else {
                (0..n as u32).collect()
            };
            let tree = grow::grow(&binned, rows, &g, &h, &params);
            for (r, f) in raw.iter_mut().enumerate() {
                *f += tree.predict_binned(&columns, r);
            }
            train_loss.push(log_loss(&raw, &y));
            trees.push(tree);
        }
        model.trees = trees;
        model.train_loss = train_loss;
        Ok(model)
    }

    pub fn raw_score(&self, row: &[f64]) -> f64 {
        self.base_score + self.trees.iter().map(|t| t.predict(row)).sum::<f64>()
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        sigmoid(self.raw_score(row))
    }

    /// Columns scanned when building one histogram.
    pub fn histogram_columns(&self) -> usize {
        self.bundles.len()
    }

    pub fn split_gains(&self, n_features: usize) -> Vec<f64> {
        let mut out = vec![0.0; n_features];
        for t in &self.trees {
            for node in &t.nodes {
                if let TreeNode::Split { feature, gain, .. } = node {
                    out[*feature] += gain;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn and_data() -> Dataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..40 {
            let a = (i % 2) as f64;
            let b = ((i / 2) % 2) as f64;
            rows.push(vec![a, b, (i % 7) as f64]);
            labels.push(u8::from(a == 1.0 && b == 1.0));
        }
        Dataset::new(vec!["a".into(), "b".into(), "noise".into()], rows, labels).unwrap()
    }

    #[test]
    fn learns_conjunction() {
        let data = and_data();
        let cfg = GbdtConfig {
            min_samples_leaf: 1,
            ..GbdtConfig::default()
        }
        .plain();
        let m = GbdtModel::fit(&data, &cfg, 0).unwrap();
        for (r, &y) in data.rows().iter().zip(data.labels()) {
            assert_eq!(u8::from(m.score(r) >= 0.5), y);
        }
    }

    #[test]
    fn plain_training_loss_never_increases() {
        let m = GbdtModel::fit(&and_data(), &GbdtConfig::default().plain(), 3).unwrap();
        assert_eq!(m.train_loss.len(), 101);
        for w in m.train_loss.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn single_class_gives_constant_model() {
        let data = Dataset::new(vec!["x".into()], vec![vec![1.0], vec![2.0]], vec![1, 1]).unwrap();
        let m = GbdtModel::fit(&data, &GbdtConfig::default(), 0).unwrap();
        assert!(m.score(&[5.0]) > 0.999);
        assert!(m.split_gains(1).iter().all(|&g| g == 0.0));
    }

    #[test]
    fn full_goss_and_no_bundling_matches_plain_bitwise() {
        let data = and_data();
        let plain = GbdtModel::fit(&data, &GbdtConfig::default().plain(), 11).unwrap();
        let cfg = GbdtConfig {
            goss: true,
            goss_a: 0.6,
            goss_b: 0.4,
            ..GbdtConfig::default().plain()
        };
        let sampled = GbdtModel::fit(&data, &cfg, 11).unwrap();
        assert_eq!(plain.trees, sampled.trees);
    }

    #[test]
    fn bundling_disjoint_columns_matches_plain_bitwise() {
        // one-hot encoding of a 4-level factor
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|i| (0..4).map(|k| f64::from(u8::from(i % 4 == k))).collect())
            .collect();
        let labels = (0..60).map(|i| u8::from(i % 4 >= 2)).collect();
        let names = (0..4).map(|k| format!("f{k}")).collect();
        let data = Dataset::new(names, rows, labels).unwrap();
        let plain = GbdtModel::fit(&data, &GbdtConfig::default().plain(), 0).unwrap();
        let cfg = GbdtConfig {
            efb: true,
            ..GbdtConfig::default().plain()
        };
        let bundled = GbdtModel::fit(&data, &cfg, 0).unwrap();
        assert_eq!(bundled.histogram_columns(), 1);
        assert_eq!(plain.histogram_columns(), 4);
        assert_eq!(plain.trees, bundled.trees);
    }

    #[test]
    fn seeds_are_reproducible() {
        let data = and_data();
        let a = GbdtModel::fit(&data, &GbdtConfig::default(), 5).unwrap();
        let b = GbdtModel::fit(&data, &GbdtConfig::default(), 5).unwrap();
        assert_eq!(a, b);
    }
}
