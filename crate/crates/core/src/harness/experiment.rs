use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::protocols::{one_page_filter, time_slice};
use super::split::stratified_split;
use super::synth::{generate_synthetic, SyntheticParams};
use crate::error::{Error, Result};
use crate::features::{feature_vector_with, Feature, FeatureConfig, FeatureMask, FeatureVector, Lexicon, Mode};
use crate::learn::{train, Algorithm, Dataset, TrainConfig};
use crate::stats::{gain_importance, ks_table, permutation_importance, GroupBy, ImportanceReport, KsRow};
use crate::thread::{build_all, parse_dataset, CommentTree, ParseOptions, RepairPolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub posts: PathBuf,
    pub comments: PathBuf,
    #[serde(default)]
    pub repair_policy: RepairPolicy,
    #[serde(default)]
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub train_fraction: f64,
    /// One split and one training run per seed; results are averaged.
    pub seeds: Vec<u64>,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train_fraction: 0.7,
            seeds: vec![0, 1, 2, 3, 4],
        }
    }
}

/// Everything one experiment run depends on. Exactly one of `data` and
/// `synthetic` names the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub output_dir: PathBuf,
    pub data: Option<DataConfig>,
    pub synthetic: Option<SyntheticParams>,
    /// Lexicon TSV; the built-in demo lexicon when absent.
    pub lexicon: Option<PathBuf>,
    pub case_folding: bool,
    pub split: SplitConfig,
    pub algorithms: Vec<Algorithm>,
    pub modes: Vec<Mode>,
    /// Learner for the early-detection, one-page and importance runs.
    pub primary_algorithm: Algorithm,
    pub one_page_ratio: f64,
    /// Early-detection windows in seconds after the post.
    pub time_horizons: Vec<i64>,
    pub importance_repeats: usize,
    pub features: FeatureConfig,
    pub train: TrainConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "experiment".into(),
            output_dir: PathBuf::from("out"),
            data: None,
            synthetic: None,
            lexicon: None,
            case_folding: true,
            split: SplitConfig::default(),
            algorithms: Algorithm::ALL.to_vec(),
            modes: Mode::ALL.to_vec(),
            primary_algorithm: Algorithm::GbdtGossEfb,
            one_page_ratio: 0.2,
            time_horizons: vec![3 * 3600, 6 * 3600, 9 * 3600, 24 * 3600],
            importance_repeats: 10,
            features: FeatureConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Reads a TOML config. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(d) = cfg.data.as_mut() {
            resolve(&mut d.posts);
            resolve(&mut d.comments);
        }
        if let Some(l) = cfg.lexicon.as_mut() {
            resolve(l);
        }
        resolve(&mut cfg.output_dir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        match (&self.data, &self.synthetic) {
            (Some(_), Some(_)) => return bad("set either [data] or [synthetic], not both"),
            (None, None) => return bad("no corpus: set [data] or [synthetic]"),
            _ => {}
        }
        if let Some(s) = &self.synthetic {
            s.validate()?;
        }
        if !(self.split.train_fraction > 0.0 && self.split.train_fraction < 1.0) {
            return bad("split.train_fraction must lie in (0, 1)");
        }
        if self.split.seeds.is_empty() {
            return bad("split.seeds is empty");
        }
        if self.algorithms.is_empty() || self.modes.is_empty() {
            return bad("algorithms and modes must be non-empty");
        }
        if !(self.one_page_ratio > 0.0 && self.one_page_ratio <= 1.0) {
            return bad("one_page_ratio must lie in (0, 1]");
        }
        if self.time_horizons.iter().any(|&h| h <= 0) || self.time_horizons.windows(2).any(|w| w[0] >= w[1]) {
            return bad("time_horizons must be positive and strictly increasing");
        }
        if self.importance_repeats < 1 {
            return bad("importance_repeats must be at least 1");
        }
        Ok(())
    }

    /// Hex SHA-256 of the config's JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn run_id(&self) -> String {
        self.hash()[..12].to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub posts: usize,
    pub comments: usize,
    pub controversial: usize,
    pub non_controversial: usize,
    /// Posts left out: unlabelled or rejected while building the tree.
    pub skipped_posts: usize,
    pub skipped_lines: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub algorithm: Algorithm,
    pub mode: Mode,
    pub n_features: usize,
    /// Held-out accuracy per split seed, in seed order.
    pub accuracy: Vec<f64>,
    pub mean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonCell {
    pub horizon_secs: i64,
    #[serde(flatten)]
    pub cell: Cell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnePageCell {
    pub ratio: f64,
    #[serde(flatten)]
    pub cell: Cell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceSummary {
    pub algorithm: Algorithm,
    pub mode: Mode,
    /// Averaged over split seeds.
    pub permutation: ImportanceReport,
    pub permutation_by_seed: Vec<ImportanceReport>,
    /// Absent for learners without split gains.
    pub gain: Option<ImportanceReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicDistribution {
    pub topic: String,
    pub feature: String,
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub run_id: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub corpus: CorpusSummary,
    pub matrix: Vec<Cell>,
    pub early_detection: Vec<HorizonCell>,
    pub one_page: Vec<OnePageCell>,
    pub importance: ImportanceSummary,
    pub ks_by_label: Vec<KsRow>,
    pub ks_by_topic: Vec<KsRow>,
    pub topic_distributions: Vec<TopicDistribution>,
}

impl Report {
    pub fn accuracy(&self, algorithm: Algorithm, mode: Mode) -> Option<f64> {
        self.matrix
            .iter()
            .find(|c| c.algorithm == algorithm && c.mode == mode)
            .map(|c| c.mean_accuracy)
    }

    pub fn early_accuracy(&self, horizon_secs: i64, mode: Mode) -> Option<f64> {
        self.early_detection
            .iter()
            .find(|c| c.horizon_secs == horizon_secs && c.cell.mode == mode)
            .map(|c| c.cell.mean_accuracy)
    }

    pub fn one_page_accuracy(&self, ratio: f64) -> Option<f64> {
        self.one_page.iter().find(|c| c.ratio == ratio).map(|c| c.cell.mean_accuracy)
    }
}

/// Labelled trees and corpus counts for a config.
pub fn load_corpus(cfg: &ExperimentConfig) -> Result<(Vec<CommentTree>, CorpusSummary)> {
    let (threads, policy, skipped_lines) = match (&cfg.data, &cfg.synthetic) {
        (Some(d), _) => {
            let parsed = parse_dataset(&d.posts, &d.comments, ParseOptions { strict: d.strict })?;
            let skipped = parsed.report.skipped();
            (parsed.threads, d.repair_policy, skipped)
        }
        (None, Some(s)) => {
            let corpus = generate_synthetic(s)?;
            let mut threads: Vec<_> = corpus.posts.into_iter().map(|p| (p, Vec::new())).collect();
            let slot: std::collections::HashMap<String, usize> =
                threads.iter().enumerate().map(|(i, (p, _))| (p.post_id.clone(), i)).collect();
            for c in corpus.comments {
                threads[slot[&c.post_id]].1.push(c);
            }
            (threads, RepairPolicy::Drop, 0)
        }
        (None, None) => return Err(Error::Config("no corpus: set [data] or [synthetic]".into())),
    };
    let total = threads.len();
    let (trees, errors) = build_all(threads, policy);
    for e in &errors {
        warn!("skipping post: {e}");
    }
    let (labelled, unlabelled): (Vec<CommentTree>, Vec<CommentTree>) =
        trees.into_iter().partition(|t| t.post().controversy_label.is_some());
    if !unlabelled.is_empty() {
        warn!("{} unlabelled posts left out of the experiment", unlabelled.len());
    }
    let controversial = labelled.iter().filter(|t| t.post().controversy_label == Some(true)).count();
    let summary = CorpusSummary {
        posts: labelled.len(),
        comments: labelled.iter().map(CommentTree::len).sum(),
        controversial,
        non_controversial: labelled.len() - controversial,
        skipped_posts: total - labelled.len(),
        skipped_lines,
    };
    if labelled.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok((labelled, summary))
}

fn load_lexicon(cfg: &ExperimentConfig) -> Result<Lexicon> {
    match &cfg.lexicon {
        Some(p) => Lexicon::load(p, cfg.case_folding),
        None => Ok(Lexicon::builtin()),
    }
}

/// Held-out accuracy of one learner on one feature view, per seed.
fn evaluate(
    vectors: &[FeatureVector],
    mode: Mode,
    mask: FeatureMask,
    algorithm: Algorithm,
    cfg: &ExperimentConfig,
) -> Result<Cell> {
    let data = Dataset::from_vectors(vectors, mask)?;
    let accuracy = cfg
        .split
        .seeds
        .par_iter()
        .map(|&seed| {
            let (tr, te) = stratified_split(data.labels(), cfg.split.train_fraction, seed)?;
            let tc = TrainConfig {
                seed,
                ..cfg.train.clone()
            };
            let model = train(algorithm, &data.subset(&tr), &tc)?;
            model.accuracy(&data.subset(&te))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Cell {
        algorithm,
        mode,
        n_features: mask.len(),
        mean_accuracy: accuracy.iter().sum::<f64>() / accuracy.len() as f64,
        accuracy,
    })
}

fn importance(vectors: &[FeatureVector], cfg: &ExperimentConfig) -> Result<ImportanceSummary> {
    let mode = Mode::Psychology;
    let data = Dataset::from_vectors(vectors, FeatureMask::for_mode(mode))?;
    let per_seed = cfg
        .split
        .seeds
        .par_iter()
        .map(|&seed| {
            let (tr, te) = stratified_split(data.labels(), cfg.split.train_fraction, seed)?;
            let tc = TrainConfig {
                seed,
                ..cfg.train.clone()
            };
            let model = train(cfg.primary_algorithm, &data.subset(&tr), &tc)?;
            let perm = permutation_importance(&model, &data.subset(&te), cfg.importance_repeats, seed)?;
            let gain = gain_importance(&model).ok();
            Ok((perm, gain))
        })
        .collect::<Result<Vec<_>>>()?;
    let (perm, gain): (Vec<ImportanceReport>, Vec<Option<ImportanceReport>>) = per_seed.into_iter().unzip();
    let gain: Option<Vec<ImportanceReport>> = gain.into_iter().collect();
    Ok(ImportanceSummary {
        algorithm: cfg.primary_algorithm,
        mode,
        permutation: ImportanceReport::average(&perm)?,
        permutation_by_seed: perm,
        gain: gain.map(|g| ImportanceReport::average(&g)).transpose()?,
    })
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn topic_distributions(vectors: &[FeatureVector], features: &[Feature]) -> Vec<TopicDistribution> {
    let mut topics: Vec<&str> = vectors.iter().map(|v| v.topic.as_str()).collect();
    topics.sort_unstable();
    topics.dedup();
    let mut out = Vec::new();
    for &f in features {
        for &t in &topics {
            let mut xs: Vec<f64> = vectors.iter().filter(|v| v.topic == t).map(|v| v.get(f)).collect();
            xs.sort_by(f64::total_cmp);
            out.push(TopicDistribution {
                topic: t.to_string(),
                feature: f.name().to_string(),
                n: xs.len(),
                min: xs[0],
                q1: quantile(&xs, 0.25),
                median: quantile(&xs, 0.5),
                q3: quantile(&xs, 0.75),
                max: xs[xs.len() - 1],
                mean: xs.iter().sum::<f64>() / xs.len() as f64,
            });
        }
    }
    out
}

/// Runs the learner matrix, early-detection and one-page protocols,
/// importance and KS tables for one config. Independent cells run in
/// parallel; the report does not depend on scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let (trees, corpus) = load_corpus(cfg)?;
    let lexicon = load_lexicon(cfg)?;
    info!(
        "{} labelled posts ({} controversial), {} comments",
        corpus.posts, corpus.controversial, corpus.comments
    );
    let all = FeatureMask::for_mode(Mode::Psychology);
    let full: Vec<FeatureVector> = trees
        .par_iter()
        .map(|t| feature_vector_with(t, &lexicon, all, &cfg.features))
        .collect();

    let cells: Vec<(Algorithm, Mode)> = cfg
        .algorithms
        .iter()
        .flat_map(|&a| cfg.modes.iter().map(move |&m| (a, m)))
        .collect();
    let matrix = cells
        .par_iter()
        .map(|&(a, m)| evaluate(&full, m, FeatureMask::for_mode(m), a, cfg))
        .collect::<Result<Vec<Cell>>>()?;
    info!("learner matrix done");

    let early_detection = cfg
        .time_horizons
        .par_iter()
        .map(|&h| {
            let sliced = trees
                .iter()
                .map(|t| Ok(feature_vector_with(&time_slice(t, h)?, &lexicon, all, &cfg.features)))
                .collect::<Result<Vec<FeatureVector>>>()?;
            cfg.modes
                .iter()
                .map(|&m| {
                    Ok(HorizonCell {
                        horizon_secs: h,
                        cell: evaluate(&sliced, m, FeatureMask::for_mode(m), cfg.primary_algorithm, cfg)?,
                    })
                })
                .collect::<Result<Vec<HorizonCell>>>()
        })
        .collect::<Result<Vec<Vec<HorizonCell>>>>()?
        .into_iter()
        .flatten()
        .collect();
    info!("early detection done");

    let mut ratios = vec![cfg.one_page_ratio];
    if cfg.one_page_ratio != 1.0 {
        ratios.push(1.0);
    }
    let one_page = ratios
        .par_iter()
        .map(|&r| {
            let vs = trees
                .iter()
                .map(|t| one_page_filter(t, r, &lexicon, Mode::Psychology, &cfg.features))
                .collect::<Result<Vec<FeatureVector>>>()?;
            Ok(OnePageCell {
                ratio: r,
                cell: evaluate(
                    &vs,
                    Mode::Psychology,
                    FeatureMask::one_page(Mode::Psychology),
                    cfg.primary_algorithm,
                    cfg,
                )?,
            })
        })
        .collect::<Result<Vec<OnePageCell>>>()?;
    info!("one-page protocol done");

    let importance = importance(&full, cfg)?;
    let ks_by_label = ks_table(&full, &Feature::ALL, GroupBy::Label);
    let ks_by_topic = ks_table(&full, &Feature::ALL, GroupBy::Topic);
    let topic_distributions = topic_distributions(
        &full,
        &[Feature::AscendingGradient, Feature::TierAscendingGradient],
    );

    Ok(Report {
        run_id: cfg.run_id(),
        config_hash: cfg.hash(),
        config: cfg.clone(),
        corpus,
        matrix,
        early_detection,
        one_page,
        importance,
        ks_by_label,
        ks_by_topic,
        topic_distributions,
    })
}
