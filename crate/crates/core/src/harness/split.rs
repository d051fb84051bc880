use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Stratified train/test split of row indices. Each class contributes
/// `round(train_fraction * class_size)` rows to training, and at least one
/// row to each side when it has two or more. Both index lists ascend.
pub fn stratified_split(labels: &[u8], train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction {train_fraction} is outside (0, 1)"
        )));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::from(class));
        idx.shuffle(&mut rng);
        let n = idx.len();
        let mut k = (train_fraction * n as f64).round() as usize;
        if n >= 2 {
            k = k.clamp(1, n - 1);
        }
        train.extend_from_slice(&idx[..k]);
        test.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    let has_both = |rows: &[usize]| rows.iter().any(|&i| labels[i] == 0) && rows.iter().any(|&i| labels[i] == 1);
    if !has_both(&train) {
        return Err(Error::DegenerateSplit(format!(
            "seed {seed}, train fraction {train_fraction}: the training split lacks a class; \
             add posts of both labels or change the fraction or seed"
        )));
    }
    Ok((train, test))
}
