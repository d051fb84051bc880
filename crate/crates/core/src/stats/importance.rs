use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learn::{Dataset, Model};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceKind {
    Permutation,
    Gain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub kind: ImportanceKind,
    pub features: Vec<String>,
    pub scores: Vec<f64>,
    /// Feature names from most to least important; ties keep column order.
    pub ranking: Vec<String>,
    pub seeds: Vec<u64>,
    /// Shuffles per feature; 0 for gain reports.
    pub repeats: usize,
}

impl ImportanceReport {
    fn new(kind: ImportanceKind, features: Vec<String>, scores: Vec<f64>, seeds: Vec<u64>, repeats: usize) -> Self {
        let mut order: Vec<usize> = (0..features.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        let ranking = order.iter().map(|&i| features[i].clone()).collect();
        ImportanceReport {
            kind,
            features,
            scores,
            ranking,
            seeds,
            repeats,
        }
    }

    pub fn score(&self, feature: &str) -> Option<f64> {
        self.features.iter().position(|f| f == feature).map(|i| self.scores[i])
    }

    pub fn top(&self) -> Option<&str> {
        self.ranking.first().map(String::as_str)
    }

    /// Mean scores of reports over the same features and kind.
    pub fn average(reports: &[ImportanceReport]) -> Result<ImportanceReport> {
        let first = reports
            .first()
            .ok_or_else(|| Error::InvalidParameter("no importance reports to average".into()))?;
        if reports.iter().any(|r| r.features != first.features || r.kind != first.kind) {
            return Err(Error::InvalidParameter("importance reports cover different features".into()));
        }
        let k = reports.len() as f64;
        let scores = (0..first.features.len())
            .map(|i| reports.iter().map(|r| r.scores[i]).sum::<f64>() / k)
            .collect();
        let seeds = reports.iter().flat_map(|r| r.seeds.iter().copied()).collect();
        Ok(Self::new(first.kind, first.features.clone(), scores, seeds, first.repeats))
    }
}

/// Drop in accuracy on `data` when one column is shuffled, averaged over
/// `repeats` shuffles. Shuffle `r` of column `j` uses stream
/// `j * repeats + r` of a ChaCha8 generator seeded with `seed`.
pub fn permutation_importance(model: &Model, data: &Dataset, repeats: usize, seed: u64) -> Result<ImportanceReport> {
    if repeats < 1 {
        return Err(Error::InvalidParameter("permutation importance needs at least one repeat".into()));
    }
    let data = data.aligned_to(&model.features)?;
    let baseline = model.accuracy(&data)?;
    let scores = (0..data.n_features())
        .into_par_iter()
        .map(|j| {
            let column = data.column(j);
            let mut drop = 0.0;
            for r in 0..repeats {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream((j * repeats + r) as u64);
                let mut shuffled = column.clone();
                shuffled.shuffle(&mut rng);
                drop += baseline - model.accuracy(&data.with_column(j, &shuffled))?;
            }
            Ok(drop / repeats as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ImportanceReport::new(
        ImportanceKind::Permutation,
        model.features.clone(),
        scores,
        vec![seed],
        repeats,
    ))
}

/// Summed split gain per feature, normalised to sum to 1. A model without
/// splits gets all zeros.
pub fn gain_importance(model: &Model) -> Result<ImportanceReport> {
    let gains = model.split_gains()?;
    let total: f64 = gains.iter().sum();
    let scores = if total > 0.0 {
        gains.iter().map(|g| g / total).collect()
    } else {
        vec![0.0; gains.len()]
    };
    Ok(ImportanceReport::new(
        ImportanceKind::Gain,
        model.features.clone(),
        scores,
        vec![model.seed],
        0,
    ))
}

#[derive(Serialize)]
struct CsvRow<'a> {
    kind: ImportanceKind,
    feature: &'a str,
    score: f64,
    rank: usize,
}

pub fn write_importance_csv<W: std::io::Write>(out: W, reports: &[ImportanceReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Config(format!("csv output: {e}"));
    for rep in reports {
        for (f, &s) in rep.features.iter().zip(&rep.scores) {
            let rank = rep.ranking.iter().position(|r| r == f).expect("ranked") + 1;
            w.serialize(CsvRow {
                kind: rep.kind,
                feature: f,
                score: s,
                rank,
            })
            .map_err(err)?;
        }
    }
    w.flush().map_err(|e| Error::Config(format!("csv output: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::{train, Algorithm, TrainConfig};

    fn label_copy_data() -> Dataset {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![1.0, f64::from(u8::from(i % 3 == 0)), ((i * 7) % 11) as f64])
            .collect();
        let labels = (0..40).map(|i| u8::from(i % 3 == 0)).collect();
        Dataset::new(vec!["const".into(), "copy".into(), "noise".into()], rows, labels).unwrap()
    }

    #[test]
    fn label_copy_ranks_first_and_constant_is_zero() {
        let data = label_copy_data();
        let model = train(Algorithm::DTree, &data, &TrainConfig::default()).unwrap();
        let rep = permutation_importance(&model, &data, 10, 3).unwrap();
        assert_eq!(rep.top(), Some("copy"));
        assert_eq!(rep.score("const"), Some(0.0));
        assert_eq!(rep.ranking.len(), 3);
        assert_eq!(permutation_importance(&model, &data, 10, 3).unwrap(), rep);
    }

    #[test]
    fn zero_repeats_rejected() {
        let data = label_copy_data();
        let model = train(Algorithm::DTree, &data, &TrainConfig::default()).unwrap();
        assert!(permutation_importance(&model, &data, 0, 0).is_err());
    }

    #[test]
    fn single_split_tree_has_unit_gain() {
        let data = label_copy_data();
        let model = train(Algorithm::DTree, &data, &TrainConfig::default()).unwrap();
        let rep = gain_importance(&model).unwrap();
        assert_eq!(rep.scores, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn gain_needs_tree_model() {
        let data = label_copy_data();
        let model = train(Algorithm::Knn, &data, &TrainConfig::default()).unwrap();
        assert!(matches!(gain_importance(&model), Err(Error::NotTreeModel("knn"))));
    }

    #[test]
    fn constant_model_gain_is_all_zero() {
        let data = Dataset::new(vec!["x".into()], vec![vec![1.0], vec![2.0], vec![3.0]], vec![0, 0, 0]).unwrap();
        let model = train(Algorithm::DTree, &data, &TrainConfig::default()).unwrap();
        assert_eq!(gain_importance(&model).unwrap().scores, vec![0.0]);
    }
}
