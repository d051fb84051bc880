//! Exclusive feature bundling.
//!
//! Bin 0 of every binned feature is its "zero" bin. Two features conflict
//! on a row where both are outside bin 0. Features that rarely conflict
//! share one histogram column: each keeps its non-zero bins, shifted by an
//! offset, and bin 0 of the merged column means "all members at zero".

use serde::{Deserialize, Serialize};

/// A group of features stored in one merged column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bundle {
    pub features: Vec<usize>,
    /// Merged bin of feature `features[i]` at raw bin `b >= 1` is
    /// `offsets[i] + b`.
    pub offsets: Vec<u32>,
    /// Bins in the merged column.
    pub n_bins: u32,
    /// Rows where two or more members are non-zero.
    pub conflicts: usize,
}

impl Bundle {
    fn singleton(feature: usize, n_bins: u32) -> Self {
        Bundle {
            features: vec![feature],
            offsets: vec![0],
            n_bins: n_bins.max(1),
            conflicts: 0,
        }
    }
}

/// Conflict counts between every pair of columns.
pub fn conflict_graph(columns: &[Vec<u32>]) -> Vec<Vec<usize>> {
    let f = columns.len();
    let n = columns.first().map_or(0, Vec::len);
    let mut w = vec![vec![0usize; f]; f];
    let mut nonzero = Vec::with_capacity(f);
    for r in 0..n {
        nonzero.clear();
        nonzero.extend((0..f).filter(|&j| columns[j][r] != 0));
        for (x, &i) in nonzero.iter().enumerate() {
            for &j in &nonzero[x + 1..] {
                w[i][j] += 1;
                w[j][i] += 1;
            }
        }
    }
    w
}

/// Greedy bundling with conflict budget `k`.
///
/// Features are visited by descending conflict-graph degree (ties by
/// index). Each joins the first bundle whose conflicted-row count would
/// stay within `k`, otherwise it opens a new bundle. The number of bins of
/// each column is `max + 1` of its values.
pub fn efb_bundle(columns: &[Vec<u32>], k: usize) -> Vec<Bundle> {
    let n_bins: Vec<u32> = columns
        .iter()
        .map(|c| c.iter().copied().max().map_or(1, |m| m + 1))
        .collect();
    bundle_with_bins(columns, &n_bins, k)
}

pub(crate) fn bundle_with_bins(columns: &[Vec<u32>], n_bins: &[u32], k: usize) -> Vec<Bundle> {
    let n = columns.first().map_or(0, Vec::len);
    let graph = conflict_graph(columns);
    let degree: Vec<usize> = graph.iter().map(|row| row.iter().filter(|&&c| c > 0).count()).collect();
    let mut order: Vec<usize> = (0..columns.len()).collect();
    order.sort_by(|&a, &b| degree[b].cmp(&degree[a]).then(a.cmp(&b)));

    struct Open {
        bundle: Bundle,
        // non-zero members per row
        load: Vec<u16>,
    }
    let mut open: Vec<Open> = Vec::new();
    for f in order {
        let col = &columns[f];
        let mut placed = false;
        for o in open.iter_mut() {
            let added = (0..n).filter(|&r| col[r] != 0 && o.load[r] == 1).count();
            if o.bundle.conflicts + added <= k {
                let offset = o.bundle.n_bins - 1;
                o.bundle.features.push(f);
                o.bundle.offsets.push(offset);
                o.bundle.n_bins += n_bins[f].max(1) - 1;
                o.bundle.conflicts += added;
                for r in 0..n {
                    if col[r] != 0 {
                        o.load[r] = o.load[r].saturating_add(1);
                    }
                }
                placed = true;
                break;
            }
        }
        if !placed {
            open.push(Open {
                bundle: Bundle::singleton(f, n_bins[f]),
                load: col.iter().map(|&b| u16::from(b != 0)).collect(),
            });
        }
    }
    open.into_iter().map(|o| o.bundle).collect()
}

/// One bundle per feature, merged bins equal to raw bins.
pub(crate) fn singletons(n_bins: &[u32]) -> Vec<Bundle> {
    n_bins
        .iter()
        .enumerate()
        .map(|(f, &b)| Bundle::singleton(f, b))
        .collect()
}

/// Merged columns. On a conflicted row the earliest member wins.
pub(crate) fn encode(bundles: &[Bundle], columns: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let n = columns.first().map_or(0, Vec::len);
    bundles
        .iter()
        .map(|b| {
            (0..n)
                .map(|r| {
                    b.features
                        .iter()
                        .zip(&b.offsets)
                        .find_map(|(&f, &off)| {
                            let raw = columns[f][r];
                            (raw != 0).then_some(off + raw)
                        })
                        .unwrap_or(0)
                })
                .collect()
        })
        .collect()
}
