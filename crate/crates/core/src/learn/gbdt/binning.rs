//! Per-feature quantile binning.
//!
//! A feature with `edges = [e0, e1, ..]` maps `x` to the first bin `i` with
//! `x <= e_i`, or to the last bin when `x` exceeds every edge. A split "at
//! bin `t`" therefore sends `x <= e_t` left, on binned and raw data alike.

/// Upper bin edges for one feature. With at most `max_bins` distinct values
/// every distinct value gets its own bin.
pub(crate) fn fit_edges(values: &[f64], max_bins: usize) -> Vec<f64> {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();
    if distinct.len() <= 1 {
        return Vec::new();
    }
    if distinct.len() <= max_bins {
        distinct.pop();
        return distinct;
    }
    let n = sorted.len();
    let max = *distinct.last().expect("non-empty");
    let mut edges: Vec<f64> = (1..max_bins)
        .map(|i| sorted[(i * n).div_ceil(max_bins) - 1])
        .filter(|&e| e < max)
        .collect();
    edges.dedup();
    edges
}

pub(crate) fn bin_of(x: f64, edges: &[f64]) -> u32 {
    edges.partition_point(|&e| e < x) as u32
}
