use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Comment, Post};
use crate::error::{Error, Result};

/// Index of a node in a [`CommentTree`]. The post is always node 0.
pub type NodeId = usize;

pub const ROOT: NodeId = 0;

/// What to do with comments whose parent chain never reaches the post.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairPolicy {
    /// Remove the comment and everything below it.
    #[default]
    Drop,
    /// Hang the comment directly under the post.
    ReattachRoot,
}

impl std::str::FromStr for RepairPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "drop" => Ok(RepairPolicy::Drop),
            "reattach" | "reattach_root" | "reattach-root" => Ok(RepairPolicy::ReattachRoot),
            other => Err(format!("unknown repair policy `{other}`")),
        }
    }
}

/// Comments removed or moved while building a tree.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairLog {
    pub dropped: Vec<String>,
    /// `(comment_id, original parent_id)` for comments moved under the post.
    pub reattached: Vec<(String, String)>,
}

impl RepairLog {
    pub fn is_clean(&self) -> bool {
        self.dropped.is_empty() && self.reattached.is_empty()
    }
}

/// The rooted reply tree of one post.
///
/// Comments are stored in canonical `(comment_time, comment_id)` order and
/// addressed as nodes `1..=n`; node 0 is the post. Each stored comment's
/// `parent_id` is its effective parent after repair.
#[derive(Debug, Clone)]
pub struct CommentTree {
    post: Post,
    comments: Vec<Comment>,
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    depth: Vec<usize>,
    repairs: RepairLog,
}

impl PartialEq for CommentTree {
    fn eq(&self, other: &Self) -> bool {
        self.post == other.post && self.comments == other.comments && self.parent == other.parent
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Link {
    Root,
    Node(usize),
    Missing,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mark {
    Unseen,
    OnPath,
    Attached,
    Broken,
}

/// Walks every parent chain. Returns per-comment attachment and the cycles
/// found, each as a list of comment indices.
fn resolve(links: &[Link]) -> (Vec<bool>, Vec<Vec<usize>>) {
    let mut mark = vec![Mark::Unseen; links.len()];
    let mut cycles = Vec::new();
    let mut path = Vec::new();
    for start in 0..links.len() {
        if mark[start] != Mark::Unseen {
            continue;
        }
        path.clear();
        let mut cur = start;
        let outcome = loop {
            match mark[cur] {
                Mark::Attached => break Mark::Attached,
                Mark::Broken => break Mark::Broken,
                Mark::OnPath => {
                    let pos = path.iter().position(|&p| p == cur).expect("node on path");
                    cycles.push(path[pos..].to_vec());
                    break Mark::Broken;
                }
                Mark::Unseen => {}
            }
            mark[cur] = Mark::OnPath;
            path.push(cur);
            match links[cur] {
                Link::Root => break Mark::Attached,
                Link::Missing => break Mark::Broken,
                Link::Node(p) => cur = p,
            }
        };
        for &p in &path {
            mark[p] = outcome;
        }
    }
    (mark.into_iter().map(|m| m == Mark::Attached).collect(), cycles)
}

/// Assembles the reply tree of `post`.
///
/// All comments must belong to `post`. Duplicate comment ids are an error.
/// Comments whose chain to the post is broken (missing parent, self-reply,
/// or a cycle) are handled per `policy`. The result does not depend on the
/// order of `comments`.
pub fn build_tree(post: Post, comments: Vec<Comment>, policy: RepairPolicy) -> Result<CommentTree> {
    if let Some(c) = comments.iter().find(|c| c.post_id != post.post_id) {
        return Err(Error::ForeignComment {
            post_id: post.post_id.clone(),
            comment_id: c.comment_id.clone(),
            owner: c.post_id.clone(),
        });
    }

    let mut comments = comments;
    comments.sort_by(|a, b| {
        (a.comment_time, &a.comment_id).cmp(&(b.comment_time, &b.comment_id))
    });

    let mut index: HashMap<&str, usize> = HashMap::with_capacity(comments.len());
    let mut dups = BTreeSet::new();
    for (i, c) in comments.iter().enumerate() {
        if index.insert(c.comment_id.as_str(), i).is_some() {
            dups.insert(c.comment_id.clone());
        }
    }
    if !dups.is_empty() {
        return Err(Error::DuplicateComments {
            post_id: post.post_id.clone(),
            ids: dups.into_iter().collect(),
        });
    }

    let mut links: Vec<Link> = comments
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if c.parent_id == post.post_id {
                Link::Root
            } else {
                match index.get(c.parent_id.as_str()) {
                    Some(&p) if p != i => Link::Node(p),
                    _ => Link::Missing,
                }
            }
        })
        .collect();
    drop(index);

    let mut repairs = RepairLog::default();
    let (attached, cycles) = resolve(&links);
    let keep: Vec<bool> = match policy {
        RepairPolicy::Drop => {
            repairs.dropped = comments
                .iter()
                .zip(&attached)
                .filter(|(_, &a)| !a)
                .map(|(c, _)| c.comment_id.clone())
                .collect();
            attached
        }
        RepairPolicy::ReattachRoot => {
            let mut moved = Vec::new();
            for (i, l) in links.iter_mut().enumerate() {
                if *l == Link::Missing {
                    *l = Link::Root;
                    moved.push(i);
                }
            }
            for cycle in &cycles {
                let head = *cycle
                    .iter()
                    .min_by(|&&a, &&b| comments[a].comment_id.cmp(&comments[b].comment_id))
                    .expect("cycle is non-empty");
                links[head] = Link::Root;
                moved.push(head);
            }
            moved.sort_unstable();
            repairs.reattached = moved
                .into_iter()
                .map(|i| (comments[i].comment_id.clone(), comments[i].parent_id.clone()))
                .collect();
            debug_assert!(resolve(&links).0.iter().all(|&a| a));
            vec![true; comments.len()]
        }
    };
    repairs.dropped.sort();

    // Renumber the kept comments as nodes 1..=n.
    let mut node_of = vec![None; comments.len()];
    let mut kept = Vec::new();
    for (i, c) in comments.into_iter().enumerate() {
        if keep[i] {
            kept.push(c);
            node_of[i] = Some(kept.len());
        }
    }
    let n = kept.len();
    let mut parent = vec![None; n + 1];
    let mut children = vec![Vec::new(); n + 1];
    for (i, l) in links.iter().enumerate() {
        let Some(node) = node_of[i] else { continue };
        let p = match *l {
            Link::Root => ROOT,
            Link::Node(j) => node_of[j].expect("parent of a kept comment is kept"),
            Link::Missing => unreachable!("missing links are dropped or repaired"),
        };
        parent[node] = Some(p);
    }
    for node in 1..=n {
        let p = parent[node].expect("every comment has a parent");
        children[p].push(node);
        kept[node - 1].parent_id = if p == ROOT {
            post.post_id.clone()
        } else {
            kept[p - 1].comment_id.clone()
        };
    }

    let mut depth = vec![0; n + 1];
    let mut stack = vec![ROOT];
    while let Some(u) = stack.pop() {
        for &v in &children[u] {
            depth[v] = depth[u] + 1;
            stack.push(v);
        }
    }

    Ok(CommentTree {
        post,
        comments: kept,
        parent,
        children,
        depth,
        repairs,
    })
}

/// Builds every tree of a dataset in parallel. Posts whose comments fail
/// validation are returned separately with their error.
pub fn build_all(
    threads: Vec<(Post, Vec<Comment>)>,
    policy: RepairPolicy,
) -> (Vec<CommentTree>, Vec<Error>) {
    let results: Vec<Result<CommentTree>> = threads
        .into_par_iter()
        .map(|(p, cs)| build_tree(p, cs, policy))
        .collect();
    let mut trees = Vec::with_capacity(results.len());
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok(t) => trees.push(t),
            Err(e) => errors.push(e),
        }
    }
    (trees, errors)
}

impl CommentTree {
    pub fn post(&self) -> &Post {
        &self.post
    }

    /// Number of comments `n` (the post is not counted).
    pub fn len(&self) -> usize {
        self.comments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comments.is_empty()
    }

    /// The comment at `node`; `node` must be in `1..=n`.
    pub fn comment(&self, node: NodeId) -> &Comment {
        &self.comments[node - 1]
    }

    pub fn comments(&self) -> &[Comment] {
        &self.comments
    }

    pub fn parent(&self, node: NodeId) -> Option<NodeId> {
        self.parent[node]
    }

    pub fn children(&self, node: NodeId) -> &[NodeId] {
        &self.children[node]
    }

    pub fn depth(&self, node: NodeId) -> usize {
        self.depth[node]
    }

    /// Comment nodes `1..=n`.
    pub fn nodes(&self) -> std::ops::RangeInclusive<NodeId> {
        1..=self.len()
    }

    /// Every reply link `(parent, child)`, including links from the post.
    pub fn links(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes().map(|v| (self.parent[v].expect("comment has a parent"), v))
    }

    /// Timestamp of a node, the post's time for the root.
    pub fn time(&self, node: NodeId) -> i64 {
        if node == ROOT {
            self.post.post_time
        } else {
            self.comments[node - 1].comment_time
        }
    }

    pub fn repairs(&self) -> &RepairLog {
        &self.repairs
    }

    /// Rebuilds the tree from the comments satisfying `keep`; comments whose
    /// parent was filtered out are dropped with their subtree.
    pub fn retain(&self, keep: impl Fn(&Comment) -> bool) -> CommentTree {
        let subset = self.comments.iter().filter(|c| keep(c)).cloned().collect();
        build_tree(self.post.clone(), subset, RepairPolicy::Drop)
            .expect("a subset of a valid tree has no duplicates")
    }

    /// The post and its comments with effective parent ids, the inverse of
    /// [`build_tree`].
    pub fn to_records(&self) -> (Post, Vec<Comment>) {
        (self.post.clone(), self.comments.clone())
    }

    /// `(parent_id, comment_id)` pairs in node order.
    pub fn edge_list(&self) -> Vec<(String, String)> {
        self.comments
            .iter()
            .map(|c| (c.parent_id.clone(), c.comment_id.clone()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thread::tests_support::{comment, post, t1_comments};

    fn depth_of(t: &CommentTree, id: &str) -> usize {
        let node = t.nodes().find(|&v| t.comment(v).comment_id == id).unwrap();
        t.depth(node)
    }

    #[test]
    fn two_node_chain() {
        let t = build_tree(
            post("p", 0),
            vec![comment("p", "c1", "p", 1, 0), comment("p", "c2", "c1", 2, 0)],
            RepairPolicy::Drop,
        )
        .unwrap();
        assert_eq!(depth_of(&t, "c1"), 1);
        assert_eq!(depth_of(&t, "c2"), 2);
    }

    #[test]
    fn fixture_t1_shape() {
        let t = build_tree(post("v0", 0), t1_comments(), RepairPolicy::Drop).unwrap();
        assert_eq!(t.len(), 4);
        let depths: Vec<usize> = ["v1", "v2", "v3", "v4"].iter().map(|id| depth_of(&t, id)).collect();
        assert_eq!(depths, vec![1, 1, 2, 3]);
        assert_eq!(t.depth(ROOT), 0);
        assert!(t.repairs().is_clean());
    }

    #[test]
    fn self_loop_is_dropped() {
        let mut cs = t1_comments();
        cs.push(comment("v0", "bad", "bad", 5, 0));
        let t = build_tree(post("v0", 0), cs, RepairPolicy::Drop).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t.repairs().dropped, vec!["bad".to_string()]);
    }

    #[test]
    fn broken_chain_drops_subtree() {
        let cs = vec![
            comment("p", "a", "p", 1, 0),
            comment("p", "b", "ghost", 2, 0),
            comment("p", "c", "b", 3, 0),
        ];
        let t = build_tree(post("p", 0), cs.clone(), RepairPolicy::Drop).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.repairs().dropped, vec!["b".to_string(), "c".to_string()]);

        let t = build_tree(post("p", 0), cs, RepairPolicy::ReattachRoot).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(depth_of(&t, "b"), 1);
        assert_eq!(depth_of(&t, "c"), 2);
        assert_eq!(t.repairs().reattached, vec![("b".to_string(), "ghost".to_string())]);
    }

    #[test]
    fn cycle_handling() {
        let cs = vec![
            comment("p", "a", "p", 1, 0),
            comment("p", "x", "y", 2, 0),
            comment("p", "y", "z", 3, 0),
            comment("p", "z", "x", 4, 0),
            comment("p", "w", "y", 5, 0),
        ];
        let t = build_tree(post("p", 0), cs.clone(), RepairPolicy::Drop).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.repairs().dropped.len(), 4);

        let t = build_tree(post("p", 0), cs, RepairPolicy::ReattachRoot).unwrap();
        assert_eq!(t.len(), 5);
        // lowest id in the cycle becomes the attachment point
        assert_eq!(depth_of(&t, "x"), 1);
        assert_eq!(depth_of(&t, "z"), 2);
        assert_eq!(depth_of(&t, "y"), 3);
        assert_eq!(depth_of(&t, "w"), 4);
    }

    #[test]
    fn duplicates_are_rejected() {
        let mut cs = t1_comments();
        cs.push(comment("v0", "v2", "v1", 60, 0));
        cs.push(comment("v0", "v1", "v0", 70, 0));
        match build_tree(post("v0", 0), cs, RepairPolicy::Drop) {
            Err(Error::DuplicateComments { ids, .. }) => assert_eq!(ids, vec!["v1", "v2"]),
            other => panic!("expected duplicate error, got {other:?}"),
        }
    }

    #[test]
    fn foreign_comment_rejected() {
        let cs = vec![comment("other", "c", "other", 1, 0)];
        assert!(matches!(
            build_tree(post("p", 0), cs, RepairPolicy::Drop),
            Err(Error::ForeignComment { .. })
        ));
    }

    #[test]
    fn skewed_child_before_parent() {
        let cs = vec![comment("p", "a", "p", 100, 0), comment("p", "b", "a", 50, 0)];
        let t = build_tree(post("p", 0), cs, RepairPolicy::Drop).unwrap();
        assert_eq!(depth_of(&t, "b"), 2);
    }

    #[test]
    fn retain_drops_orphans() {
        let t = build_tree(post("v0", 0), t1_comments(), RepairPolicy::Drop).unwrap();
        let sub = t.retain(|c| c.comment_id != "v3");
        let ids: Vec<&str> = sub.comments().iter().map(|c| c.comment_id.as_str()).collect();
        assert_eq!(ids, vec!["v1", "v2"]);
    }

    #[test]
    fn edge_count_matches_child_counts() {
        let t = build_tree(post("v0", 0), t1_comments(), RepairPolicy::Drop).unwrap();
        let total: usize = (0..=t.len()).map(|v| t.children(v).len()).sum();
        assert_eq!(total, t.links().count());
        assert_eq!(t.edge_list().len(), t.len());
    }
}
