use serde::{Deserialize, Serialize};

use crate::thread::{CommentTree, ROOT};

/// Tree-shape features. Only comment nodes are counted; the post is the
/// root and is traversed but never measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralFeatures {
    pub size: usize,
    pub depth: usize,
    pub breadth: usize,
    pub avg_degree: f64,
    pub virality: f64,
}

pub fn structural_features(tree: &CommentTree) -> StructuralFeatures {
    let n = tree.len();
    if n == 0 {
        return StructuralFeatures {
            size: 0,
            depth: 0,
            breadth: 0,
            avg_degree: 0.0,
            virality: 0.0,
        };
    }

    let depth = tree.nodes().map(|v| tree.depth(v)).max().unwrap_or(0);
    let mut per_level = vec![0usize; depth + 1];
    for v in tree.nodes() {
        per_level[tree.depth(v)] += 1;
    }
    let breadth = per_level[1..].iter().copied().max().unwrap_or(0);

    let child_links: usize = tree.nodes().map(|v| tree.children(v).len()).sum();
    let avg_degree = child_links as f64 / n as f64;

    StructuralFeatures {
        size: n,
        depth,
        breadth,
        avg_degree,
        virality: virality(tree),
    }
}

/// Mean shortest-path distance over ordered pairs of distinct comments.
///
/// Every pair path crossing an edge adds one to the total, and the edge
/// above a subtree holding `s` of the `n` comments is crossed by exactly
/// `s * (n - s)` unordered pairs, so the all-pairs sum is linear in `n`.
fn virality(tree: &CommentTree) -> f64 {
    let n = tree.len();
    if n <= 1 {
        return 0.0;
    }
    // Preorder from the root; reversed, every child precedes its parent.
    let mut order = Vec::with_capacity(n + 1);
    let mut stack = vec![ROOT];
    while let Some(u) = stack.pop() {
        order.push(u);
        stack.extend_from_slice(tree.children(u));
    }
    let mut below = vec![0u64; n + 1];
    let mut total: u128 = 0;
    for &v in order.iter().rev() {
        if v == ROOT {
            continue;
        }
        below[v] += 1;
        let s = below[v];
        total += u128::from(s) * u128::from(n as u64 - s);
        let p = tree.parent(v).expect("comment has a parent");
        below[p] += s;
    }
    (2 * total) as f64 / (n as f64 * (n as f64 - 1.0))
}
