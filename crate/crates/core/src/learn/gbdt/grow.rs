//! Leaf-wise growth of one regression tree from gradient histograms.

use serde::{Deserialize, Serialize};

use super::efb::Bundle;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        /// Rows with bin `<= bin` go left.
        bin: u32,
        /// Raw-value form of `bin`: `x <= threshold` goes left.
        threshold: f64,
        gain: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub(crate) fn constant(value: f64) -> Self {
        Tree {
            nodes: vec![TreeNode::Leaf { value }],
        }
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => at = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub(crate) fn predict_binned(&self, binned: &[Vec<u32>], r: usize) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    bin,
                    left,
                    right,
                    ..
                } => at = if binned[*feature][r] <= *bin { *left } else { *right },
            }
        }
    }
}

/// Everything about the training matrix that stays fixed across rounds.
pub(crate) struct Binned<'a> {
    /// Raw bin per feature and row.
    pub columns: &'a [Vec<u32>],
    pub n_bins: &'a [u32],
    pub edges: &'a [Vec<f64>],
    pub bundles: &'a [Bundle],
    /// Merged bin per bundle and row.
    pub merged: &'a [Vec<u32>],
}

pub(crate) struct GrowParams {
    pub max_leaves: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub lambda: f64,
    pub learning_rate: f64,
}

#[derive(Clone, Copy, Default)]
struct Cell {
    g: f64,
    h: f64,
    n: u32,
}

struct Candidate {
    feature: usize,
    bin: u32,
    gain: f64,
}

struct Leaf {
    node: usize,
    rows: Vec<u32>,
    depth: usize,
    g: f64,
    h: f64,
    split: Option<Candidate>,
}

fn score(g: f64, h: f64, lambda: f64) -> f64 {
    g * g / (h + lambda)
}

/// Per-feature histograms of one leaf, decoded from bundle histograms.
/// Bin 0 of each feature is the leaf total minus its other bins.
fn feature_histograms(m: &Binned<'_>, rows: &[u32], g: &[f64], h: &[f64], tot: Cell) -> Vec<Vec<Cell>> {
    let mut out: Vec<Vec<Cell>> = m.n_bins.iter().map(|&b| vec![Cell::default(); b as usize]).collect();
    for (bundle, col) in m.bundles.iter().zip(m.merged) {
        let mut hist = vec![Cell::default(); bundle.n_bins as usize];
        for &r in rows {
            let r = r as usize;
            let b = col[r] as usize;
            if b != 0 {
                let c = &mut hist[b];
                c.g += g[r];
                c.h += h[r];
                c.n += 1;
            }
        }
        for (&f, &off) in bundle.features.iter().zip(&bundle.offsets) {
            let fh = &mut out[f];
            let mut rest = tot;
            for b in 1..fh.len() {
                let c = hist[off as usize + b];
                fh[b] = c;
                rest.g -= c.g;
                rest.h -= c.h;
                rest.n -= c.n;
            }
            fh[0] = rest;
        }
    }
    out
}

fn best_split(m: &Binned<'_>, leaf: &Leaf, g: &[f64], h: &[f64], p: &GrowParams) -> Option<Candidate> {
    if leaf.depth >= p.max_depth || leaf.rows.len() < 2 * p.min_samples_leaf {
        return None;
    }
    let tot = Cell {
        g: leaf.g,
        h: leaf.h,
        n: leaf.rows.len() as u32,
    };
    let parent = score(tot.g, tot.h, p.lambda);
    let min_n = p.min_samples_leaf as u32;
    let mut best: Option<Candidate> = None;
    for (f, hist) in feature_histograms(m, &leaf.rows, g, h, tot).iter().enumerate() {
        let mut left = Cell::default();
        for (t, c) in hist.iter().enumerate().take(hist.len().saturating_sub(1)) {
            left.g += c.g;
            left.h += c.h;
            left.n += c.n;
            let rn = tot.n - left.n;
            if left.n < min_n || rn < min_n {
                continue;
            }
            let gain = 0.5
                * (score(left.g, left.h, p.lambda) + score(tot.g - left.g, tot.h - left.h, p.lambda)
                    - parent);
            if gain > 0.0 && best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(Candidate {
                    feature: f,
                    bin: t as u32,
                    gain,
                });
            }
        }
    }
    best
}

fn leaf_of(node: usize, rows: Vec<u32>, depth: usize, g: &[f64], h: &[f64]) -> Leaf {
    let (gs, hs) = rows
        .iter()
        .fold((0.0, 0.0), |(a, b), &r| (a + g[r as usize], b + h[r as usize]));
    Leaf {
        node,
        rows,
        depth,
        g: gs,
        h: hs,
        split: None,
    }
}

/// Grows one tree over `rows` (ascending) with weighted gradients.
pub(crate) fn grow(m: &Binned<'_>, rows: Vec<u32>, g: &[f64], h: &[f64], p: &GrowParams) -> Tree {
    let mut nodes = vec![TreeNode::Leaf { value: 0.0 }];
    let mut root = leaf_of(0, rows, 0, g, h);
    root.split = best_split(m, &root, g, h, p);
    let mut leaves = vec![root];

    while leaves.len() < p.max_leaves {
        let mut pick: Option<(usize, f64)> = None;
        for (i, l) in leaves.iter().enumerate() {
            if let Some(c) = &l.split {
                if pick.is_none_or(|(_, best)| c.gain > best) {
                    pick = Some((i, c.gain));
                }
            }
        }
        let Some((i, _)) = pick else { break };
        let leaf = leaves.swap_remove(i);
        let split = leaf.split.expect("picked leaf has a split");
        let col = &m.columns[split.feature];
        let (lr, rr): (Vec<u32>, Vec<u32>) = leaf.rows.iter().partition(|&&r| col[r as usize] <= split.bin);
        let li = nodes.len();
        nodes.push(TreeNode::Leaf { value: 0.0 });
        nodes.push(TreeNode::Leaf { value: 0.0 });
        nodes[leaf.node] = TreeNode::Split {
            feature: split.feature,
            bin: split.bin,
            threshold: m.edges[split.feature][split.bin as usize],
            gain: split.gain,
            left: li,
            right: li + 1,
        };
        for (node, rows) in [(li, lr), (li + 1, rr)] {
            let mut child = leaf_of(node, rows, leaf.depth + 1, g, h);
            child.split = best_split(m, &child, g, h, p);
            leaves.push(child);
        }
        // keep leaves in creation order so gain ties go to the oldest leaf
        leaves.sort_by_key(|l| l.node);
    }

    for l in &leaves {
        nodes[l.node] = TreeNode::Leaf {
            value: -p.learning_rate * l.g / (l.h + p.lambda),
        };
    }
    Tree { nodes }
}
