use serde::{Deserialize, Serialize};

use super::view::ReplyGraph;
use crate::thread::CommentTree;

/// Ascending-gradient features over comment-to-comment reply links.
///
/// A link `parent -> reply` ascends in likes when the reply has strictly
/// more likes than its parent, and ascends in tiers when the reply has
/// strictly more direct replies. Links from the post are never counted
/// because the post has no like count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsychFeatures {
    /// `p_a`, share of links ascending in likes.
    pub ascending_gradient: f64,
    /// `p_t`, share of links ascending in reply count.
    pub tier_ascending_gradient: f64,
    /// `m`, number of comment-to-comment links.
    pub link_count: usize,
}

pub fn psych_features(tree: &CommentTree) -> PsychFeatures {
    compute(&ReplyGraph::from_tree(tree))
}

pub fn ascending_gradient(tree: &CommentTree) -> f64 {
    psych_features(tree).ascending_gradient
}

pub fn tier_ascending_gradient(tree: &CommentTree) -> f64 {
    psych_features(tree).tier_ascending_gradient
}

pub(crate) fn compute(g: &ReplyGraph<'_>) -> PsychFeatures {
    let replies = g.reply_counts();
    let mut m = 0usize;
    let mut likes_up = 0usize;
    let mut tiers_up = 0usize;
    for (p, c) in g.comment_links() {
        m += 1;
        if g.nodes[p].likes < g.nodes[c].likes {
            likes_up += 1;
        }
        if replies[p] < replies[c] {
            tiers_up += 1;
        }
    }
    if m == 0 {
        return PsychFeatures {
            ascending_gradient: 0.0,
            tier_ascending_gradient: 0.0,
            link_count: 0,
        };
    }
    PsychFeatures {
        ascending_gradient: likes_up as f64 / m as f64,
        tier_ascending_gradient: tiers_up as f64 / m as f64,
        link_count: m,
    }
}
