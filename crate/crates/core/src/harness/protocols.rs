use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::features::view::ReplyGraph;
use crate::features::{graph_vector, FeatureConfig, FeatureMask, FeatureVector, Lexicon, Mode};
use crate::thread::{CommentTree, NodeId, ROOT};

/// Nodes of the `ceil(ratio * n)` most-liked comments. Equal like counts
/// go to the lexicographically lower comment id.
pub fn hot_comments(tree: &CommentTree, ratio: f64) -> Result<Vec<NodeId>> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::InvalidParameter(format!("one-page ratio {ratio} is outside (0, 1]")));
    }
    let n = tree.len();
    let keep = ((ratio * n as f64) - 1e-9).ceil().max(0.0) as usize;
    let mut nodes: Vec<NodeId> = tree.nodes().collect();
    nodes.sort_by(|&a, &b| {
        let (ca, cb) = (tree.comment(a), tree.comment(b));
        cb.likes.cmp(&ca.likes).then_with(|| ca.comment_id.cmp(&cb.comment_id))
    });
    nodes.truncate(keep.min(n));
    nodes.sort_unstable();
    Ok(nodes)
}

/// The reply graph seen on a thread's first page: the hot comments, their
/// direct replies, and only the links that leave a hot comment (plus the
/// post link of top-level hot comments).
fn one_page_graph<'a>(tree: &'a CommentTree, hot: &[NodeId]) -> ReplyGraph<'a> {
    let mut retained: Vec<NodeId> = hot.to_vec();
    for &h in hot {
        retained.extend_from_slice(tree.children(h));
    }
    retained.sort_unstable();
    retained.dedup();
    let slot: HashMap<NodeId, usize> = retained.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    let mut links = Vec::new();
    for &h in hot {
        if tree.parent(h) == Some(ROOT) {
            links.push((None, slot[&h]));
        }
        for &c in tree.children(h) {
            links.push((Some(slot[&h]), slot[&c]));
        }
    }
    links.sort_by_key(|&(_, c)| c);
    ReplyGraph {
        post_time: tree.post().post_time,
        nodes: retained.iter().map(|&v| tree.comment(v)).collect(),
        links,
    }
}

/// Features of the one-page view of `tree` under `mode`, without the
/// global-structure features (depth, breadth, average degree, virality).
pub fn one_page_filter(
    tree: &CommentTree,
    ratio: f64,
    lexicon: &Lexicon,
    mode: Mode,
    config: &FeatureConfig,
) -> Result<FeatureVector> {
    let hot = hot_comments(tree, ratio)?;
    let graph = one_page_graph(tree, &hot);
    Ok(graph_vector(tree, &graph, lexicon, FeatureMask::one_page(mode), config))
}

/// The thread as it stood `horizon` seconds after the post. Comments
/// outside the window are dropped along with any reply whose parent is
/// outside it.
pub fn time_slice(tree: &CommentTree, horizon: i64) -> Result<CommentTree> {
    if horizon <= 0 {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
    }
    let cutoff = tree.post().post_time.saturating_add(horizon);
    Ok(tree.retain(|c| c.comment_time <= cutoff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{feature_vector, Feature};
    use crate::thread::tests_support::{comment, post, t1};
    use crate::thread::{build_tree, RepairPolicy};

    #[test]
    fn t1_time_slice_25s() {
        let s = time_slice(&t1(), 25).unwrap();
        assert_eq!(s.len(), 2);
        let ids: Vec<&str> = s.comments().iter().map(|c| c.comment_id.as_str()).collect();
        assert_eq!(ids, vec!["v1", "v2"]);
    }

    #[test]
    fn horizon_edges() {
        let t = t1();
        assert_eq!(time_slice(&t, 1_000).unwrap(), t);
        assert!(time_slice(&t, 5).unwrap().is_empty());
        assert!(time_slice(&t, 0).is_err());
    }

    #[test]
    fn full_ratio_keeps_gradients() {
        let t = t1();
        let lex = Lexicon::builtin();
        let full = feature_vector(&t, &lex, Mode::Psychology);
        let page = one_page_filter(&t, 1.0, &lex, Mode::Psychology, &FeatureConfig::default()).unwrap();
        for f in [
            Feature::Size,
            Feature::AscendingGradient,
            Feature::TierAscendingGradient,
            Feature::AvgUps,
            Feature::AvgReplyTime,
        ] {
            assert_eq!(page.get(f), full.get(f), "{f:?}");
        }
        assert_eq!(page.mask.len(), 9);
    }

    #[test]
    fn ten_comment_tree_at_one_fifth() {
        // c01..c10, likes 10..1; c01 and c02 are the two hottest
        // c01 <- c03, c04 ; c02 <- c05 ; c03 <- c06 ; others top level
        let parents = ["p", "p", "c01", "c01", "c02", "c03", "p", "p", "p", "p"];
        let comments = (0..10)
            .map(|i| {
                let id = format!("c{:02}", i + 1);
                comment("p", &id, parents[i], 10 * (i as i64 + 1), 10 - i as u64)
            })
            .collect();
        let tree = build_tree(post("p", 0), comments, RepairPolicy::Drop).unwrap();
        let hot = hot_comments(&tree, 0.2).unwrap();
        let hot_ids: Vec<&str> = hot.iter().map(|&v| tree.comment(v).comment_id.as_str()).collect();
        assert_eq!(hot_ids, vec!["c01", "c02"]);

        let g = one_page_graph(&tree, &hot);
        let ids: Vec<&str> = g.nodes.iter().map(|c| c.comment_id.as_str()).collect();
        assert_eq!(ids, vec!["c01", "c02", "c03", "c04", "c05"]);
        let pairs: Vec<(&str, &str)> = g
            .comment_links()
            .map(|(p, c)| (g.nodes[p].comment_id.as_str(), g.nodes[c].comment_id.as_str()))
            .collect();
        assert_eq!(pairs, vec![("c01", "c03"), ("c01", "c04"), ("c02", "c05")]);

        let v = one_page_filter(&tree, 0.2, &Lexicon::builtin(), Mode::Psychology, &FeatureConfig::default()).unwrap();
        assert_eq!(v.get(Feature::Size), 5.0);
        // every reply has fewer likes than its hot parent
        assert_eq!(v.get(Feature::AscendingGradient), 0.0);
        assert_eq!(v.get(Feature::Depth), 0.0);
    }

    #[test]
    fn like_ties_go_to_lower_id() {
        let comments = vec![
            comment("p", "b", "p", 1, 5),
            comment("p", "a", "p", 2, 5),
            comment("p", "c", "p", 3, 1),
        ];
        let tree = build_tree(post("p", 0), comments, RepairPolicy::Drop).unwrap();
        let hot = hot_comments(&tree, 0.2).unwrap();
        assert_eq!(tree.comment(hot[0]).comment_id, "a");
    }

    #[test]
    fn empty_tree_gives_zero_vector() {
        let tree = build_tree(post("p", 0), vec![], RepairPolicy::Drop).unwrap();
        let v = one_page_filter(&tree, 0.2, &Lexicon::builtin(), Mode::Psychology, &FeatureConfig::default()).unwrap();
        assert!(v.values.iter().all(|&x| x == 0.0));
    }
}
