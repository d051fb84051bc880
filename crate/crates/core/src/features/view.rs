use crate::thread::{Comment, CommentTree, ROOT};

/// A set of comments and the reply links between them that the
/// interaction, text and gradient features are computed over. For a full
/// tree this is every comment and every edge; the hot-comment view keeps
/// only part of both.
pub(crate) struct ReplyGraph<'a> {
    pub post_time: i64,
    pub nodes: Vec<&'a Comment>,
    /// `(parent, child)` indices into `nodes`; `None` is the post.
    pub links: Vec<(Option<usize>, usize)>,
}

impl<'a> ReplyGraph<'a> {
    pub fn from_tree(tree: &'a CommentTree) -> Self {
        ReplyGraph {
            post_time: tree.post().post_time,
            nodes: tree.comments().iter().collect(),
            links: tree
                .links()
                .map(|(p, c)| (if p == ROOT { None } else { Some(p - 1) }, c - 1))
                .collect(),
        }
    }

    /// Number of in-graph replies to each node.
    pub fn reply_counts(&self) -> Vec<usize> {
        let mut r = vec![0; self.nodes.len()];
        for &(p, _) in &self.links {
            if let Some(p) = p {
                r[p] += 1;
            }
        }
        r
    }

    pub fn time_of(&self, node: Option<usize>) -> i64 {
        match node {
            None => self.post_time,
            Some(i) => self.nodes[i].comment_time,
        }
    }

    /// Comment-to-comment links only.
    pub fn comment_links(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.links.iter().filter_map(|&(p, c)| p.map(|p| (p, c)))
    }
}
