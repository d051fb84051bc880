//! Binary classifiers over feature matrices.
//!
//! Every learner is a deterministic function of its data, config and seed.
//! Models carry the names of the columns they were trained on and refuse
//! inputs with a different column set.

mod dataset;
mod dtree;
pub mod gbdt;
mod knn;
mod logreg;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::FeatureManifest;

pub use dataset::Dataset;
pub use dtree::{DTreeConfig, DTreeModel};
pub use gbdt::{efb_bundle, goss_sample, Bundle, GbdtConfig, GbdtModel};
pub use knn::{KnnConfig, KnnModel};
pub use logreg::{LogRegConfig, LogRegModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[serde(rename = "logreg")]
    LogReg,
    Knn,
    #[serde(rename = "dtree")]
    DTree,
    Gbdt,
    GbdtGossEfb,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::LogReg,
        Algorithm::Knn,
        Algorithm::DTree,
        Algorithm::Gbdt,
        Algorithm::GbdtGossEfb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::LogReg => "logreg",
            Algorithm::Knn => "knn",
            Algorithm::DTree => "dtree",
            Algorithm::Gbdt => "gbdt",
            Algorithm::GbdtGossEfb => "gbdt_goss_efb",
        }
    }

    fn needs_both_classes(self) -> bool {
        matches!(self, Algorithm::LogReg | Algorithm::Gbdt | Algorithm::GbdtGossEfb)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "logreg" | "lr" => Ok(Algorithm::LogReg),
            "knn" => Ok(Algorithm::Knn),
            "dtree" | "dt" => Ok(Algorithm::DTree),
            "gbdt" => Ok(Algorithm::Gbdt),
            "gbdt_goss_efb" | "lightgbm" => Ok(Algorithm::GbdtGossEfb),
            other => Err(format!(
                "unknown algorithm `{other}` (expected logreg, knn, dtree, gbdt or gbdt_goss_efb)"
            )),
        }
    }
}

/// Hyperparameters for every learner; each algorithm reads its own section.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub seed: u64,
    pub logreg: LogRegConfig,
    pub knn: KnnConfig,
    pub dtree: DTreeConfig,
    pub gbdt: GbdtConfig,
}

impl TrainConfig {
    /// Hex SHA-256 of the JSON form of the config.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Params {
    LogReg(LogRegModel),
    Knn(KnnModel),
    DTree(DTreeModel),
    Gbdt(GbdtModel),
}

/// A trained classifier with everything needed to reload and audit it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub algorithm: Algorithm,
    pub features: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<FeatureManifest>,
    pub params: Params,
    pub config: TrainConfig,
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: bool,
    /// Probability of the controversial class.
    pub score: f64,
}

impl Prediction {
    pub(crate) fn from_score(score: f64) -> Self {
        Prediction {
            label: score >= 0.5,
            score,
        }
    }
}

pub fn train(algorithm: Algorithm, data: &Dataset, config: &TrainConfig) -> Result<Model> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if algorithm.needs_both_classes() {
        if let Some(only) = data.single_class() {
            return Err(Error::SingleClass(only));
        }
    }
    let params = match algorithm {
        Algorithm::LogReg => Params::LogReg(LogRegModel::fit(data, &config.logreg)?),
        Algorithm::Knn => Params::Knn(KnnModel::fit(data, &config.knn)?),
        Algorithm::DTree => Params::DTree(DTreeModel::fit(data, &config.dtree)?),
        Algorithm::Gbdt => Params::Gbdt(GbdtModel::fit(data, &config.gbdt.plain(), config.seed)?),
        Algorithm::GbdtGossEfb => Params::Gbdt(GbdtModel::fit(data, &config.gbdt, config.seed)?),
    };
    Ok(Model {
        algorithm,
        features: data.feature_names().to_vec(),
        manifest: None,
        params,
        config: config.clone(),
        seed: config.seed,
        config_hash: config.hash(),
    })
}

impl Model {
    pub fn with_manifest(mut self, manifest: FeatureManifest) -> Self {
        self.manifest = Some(manifest);
        self
    }

    /// Scores rows whose columns already follow the model's feature order.
    pub fn predict_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<Prediction>> {
        if let Some(bad) = rows.iter().find(|r| r.len() != self.features.len()) {
            return Err(Error::InvalidParameter(format!(
                "row has {} values, model expects {}",
                bad.len(),
                self.features.len()
            )));
        }
        Ok(rows
            .iter()
            .map(|r| {
                let r: Vec<f64> = r.iter().map(|&x| if x.is_nan() { 0.0 } else { x }).collect();
                Prediction::from_score(self.score(&r))
            })
            .collect())
    }

    /// Scores a dataset, matching its columns to the model's by name.
    pub fn predict(&self, data: &Dataset) -> Result<Vec<Prediction>> {
        let aligned = data.aligned_to(&self.features)?;
        self.predict_rows(aligned.rows())
    }

    pub fn accuracy(&self, data: &Dataset) -> Result<f64> {
        let preds = self.predict(data)?;
        Ok(accuracy(&preds, data.labels()))
    }

    fn score(&self, row: &[f64]) -> f64 {
        match &self.params {
            Params::LogReg(m) => m.score(row),
            Params::Knn(m) => m.score(row),
            Params::DTree(m) => m.score(row),
            Params::Gbdt(m) => m.score(row),
        }
    }

    /// Per-feature total split gain for tree models.
    pub fn split_gains(&self) -> Result<Vec<f64>> {
        match &self.params {
            Params::DTree(m) => Ok(m.split_gains(self.features.len())),
            Params::Gbdt(m) => Ok(m.split_gains(self.features.len())),
            Params::LogReg(_) => Err(Error::NotTreeModel("logreg")),
            Params::Knn(_) => Err(Error::NotTreeModel("knn")),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn accuracy(preds: &[Prediction], labels: &[u8]) -> f64 {
    if preds.is_empty() {
        return 0.0;
    }
    let hits = preds
        .iter()
        .zip(labels)
        .filter(|(p, &y)| u8::from(p.label) == y)
        .count();
    hits as f64 / preds.len() as f64
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Column means and standard deviations; zero-variance columns get 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(data: &Dataset) -> Self {
        let n = data.len() as f64;
        let d = data.n_features();
        let mut mean = vec![0.0; d];
        for r in data.rows() {
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for r in data.rows() {
            for ((v, x), m) in var.iter_mut().zip(r).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > 1e-12 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((x, m), s)| (x - m) / s)
            .collect()
    }
}
