use serde::{Deserialize, Serialize};

use super::view::ReplyGraph;
use super::FeatureConfig;
use crate::thread::CommentTree;

/// Reply-time, density and like statistics of a thread.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionFeatures {
    /// Shortest reply interval, seconds.
    pub t_min: f64,
    /// Mean reply interval, seconds.
    pub t_avg: f64,
    /// Comments per second between the post and its latest comment.
    pub density: f64,
    /// Mean like count per comment.
    pub avg_ups: f64,
    /// Seconds from the post to its latest comment.
    pub delta: f64,
    /// Links whose child predates its parent; their interval counts as 0.
    pub clamped_links: usize,
}

impl InteractionFeatures {
    pub const ZERO: InteractionFeatures = InteractionFeatures {
        t_min: 0.0,
        t_avg: 0.0,
        density: 0.0,
        avg_ups: 0.0,
        delta: 0.0,
        clamped_links: 0,
    };
}

pub fn interaction_features(tree: &CommentTree, config: &FeatureConfig) -> InteractionFeatures {
    compute(&ReplyGraph::from_tree(tree), config)
}

pub(crate) fn compute(g: &ReplyGraph<'_>, config: &FeatureConfig) -> InteractionFeatures {
    let n = g.nodes.len();
    if n == 0 {
        return InteractionFeatures::ZERO;
    }

    let mut clamped = 0;
    let mut sum = 0i64;
    let mut min = i64::MAX;
    let mut count = 0usize;
    for &(p, c) in &g.links {
        if p.is_none() && !config.include_root_links {
            continue;
        }
        let raw = g.time_of(Some(c)) - g.time_of(p);
        let dt = if raw < 0 {
            clamped += 1;
            0
        } else {
            raw
        };
        sum += dt;
        min = min.min(dt);
        count += 1;
    }
    let (t_min, t_avg) = if count == 0 {
        (0.0, 0.0)
    } else {
        (min as f64, sum as f64 / count as f64)
    };

    let latest = g.nodes.iter().map(|c| c.comment_time).max().expect("n > 0");
    let delta = (latest - g.post_time).max(0);
    // a zero span counts as one second
    let density = n as f64 / delta.max(1) as f64;
    let likes: u64 = g.nodes.iter().map(|c| c.likes).sum();

    InteractionFeatures {
        t_min,
        t_avg,
        density,
        avg_ups: likes as f64 / n as f64,
        delta: delta as f64,
        clamped_links: clamped,
    }
}
