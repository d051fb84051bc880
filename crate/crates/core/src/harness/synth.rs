//! Seeded synthetic corpora with a known ascending-gradient signal.
//!
//! Each thread grows breadth-first from planned reply counts. A reply's
//! like count exceeds its parent's with probability `pi` of the post's
//! class and is otherwise drawn at or below it, so the expected share of
//! ascending comment links is exactly `pi`. Everything else (sizes,
//! shapes, timing, wording) is drawn the same way for both classes.

use std::collections::VecDeque;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Geometric, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Lexicon;
use crate::thread::{write_jsonl, Comment, Post};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeShape {
    /// Planned reply counts, breadth-first.
    Branching,
    /// Each comment replies to the previous one.
    Chain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticParams {
    pub posts_per_class: usize,
    /// Smallest thread.
    pub min_comments: usize,
    /// Mean thread size; sizes above the minimum are geometric.
    pub mean_comments: f64,
    pub shape: TreeShape,
    /// Mean planned replies of a top-level comment.
    pub top_level_replies: f64,
    /// Chance that a reply plans more replies than its parent, per class.
    pub reply_ascension_controversial: f64,
    pub reply_ascension_non_controversial: f64,
    /// Chance that a reply out-likes its parent, per class.
    pub like_ascension_controversial: f64,
    pub like_ascension_non_controversial: f64,
    /// Median likes of a top-level comment; each post scales it by a
    /// log-normal popularity factor.
    pub median_likes: f64,
    pub popularity_sigma: f64,
    /// Mean delay of a top-level comment after the post, seconds.
    pub top_level_delay: f64,
    /// Mean delay of a reply after its parent, seconds.
    pub reply_delay: f64,
    /// Share of comment words taken from the lexicon.
    pub emotive_share: f64,
    pub controversial_topics: Vec<String>,
    pub non_controversial_topics: Vec<String>,
    pub start_time: i64,
    pub seed: u64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            posts_per_class: 200,
            min_comments: 51,
            mean_comments: 203.0,
            shape: TreeShape::Branching,
            top_level_replies: 2.0,
            reply_ascension_controversial: 0.3,
            reply_ascension_non_controversial: 0.3,
            like_ascension_controversial: 0.6,
            like_ascension_non_controversial: 0.3,
            median_likes: 20.0,
            popularity_sigma: 1.0,
            top_level_delay: 7_200.0,
            reply_delay: 5_400.0,
            emotive_share: 0.3,
            controversial_topics: vec!["gun_control".into(), "war".into(), "religion".into()],
            non_controversial_topics: vec!["shopping".into(), "scenery".into(), "music".into()],
            start_time: 1_600_000_000,
            seed: 7,
        }
    }
}

impl SyntheticParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(format!("synthetic: {m}")));
        for (name, p) in [
            ("reply_ascension_controversial", self.reply_ascension_controversial),
            ("reply_ascension_non_controversial", self.reply_ascension_non_controversial),
            ("like_ascension_controversial", self.like_ascension_controversial),
            ("like_ascension_non_controversial", self.like_ascension_non_controversial),
            ("emotive_share", self.emotive_share),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        if self.min_comments == 0 || !(self.mean_comments >= self.min_comments as f64) {
            return bad("need 1 <= min_comments <= mean_comments".into());
        }
        for (name, x) in [
            ("top_level_replies", self.top_level_replies),
            ("median_likes", self.median_likes),
            ("top_level_delay", self.top_level_delay),
            ("reply_delay", self.reply_delay),
        ] {
            if !(x > 0.0) {
                return bad(format!("{name} must be positive"));
            }
        }
        if !(self.popularity_sigma >= 0.0) {
            return bad("popularity_sigma must be non-negative".into());
        }
        if self.controversial_topics.is_empty() || self.non_controversial_topics.is_empty() {
            return bad("each class needs at least one topic".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub posts: Vec<Post>,
    pub comments: Vec<Comment>,
}

impl SyntheticCorpus {
    pub fn write(&self, posts_path: &Path, comments_path: &Path) -> Result<()> {
        write_jsonl(posts_path, &self.posts)?;
        write_jsonl(comments_path, &self.comments)
    }
}

// Geometric count with the given mean.
fn geometric(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Geometric::new(1.0 / (1.0 + mean)).expect("valid p").sample(rng)
}

fn delay(rng: &mut ChaCha8Rng, mean: f64) -> i64 {
    Exp::new(1.0 / mean).expect("positive rate").sample(rng).round() as i64
}

struct Words {
    emotive: Vec<String>,
    filler: Vec<&'static str>,
}

impl Words {
    fn sentence(&self, rng: &mut ChaCha8Rng, share: f64) -> String {
        let len = rng.random_range(4..=10);
        (0..len)
            .map(|_| {
                if !self.emotive.is_empty() && rng.random_bool(share) {
                    self.emotive[rng.random_range(0..self.emotive.len())].as_str()
                } else {
                    self.filler[rng.random_range(0..self.filler.len())]
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

struct Node {
    likes: u64,
    time: i64,
    planned: u64,
    id: String,
}

fn thread(rng: &mut ChaCha8Rng, p: &SyntheticParams, post: &Post, pi: f64, rho: f64, words: &Words) -> Vec<Comment> {
    let size = p.min_comments + geometric(rng, p.mean_comments - p.min_comments as f64) as usize;
    let scale = LogNormal::new(p.median_likes.ln(), p.popularity_sigma)
        .expect("valid log-normal")
        .sample(rng);
    let step = (scale / 4.0).max(1.0);
    let width = size.to_string().len().max(4);
    let mut out: Vec<Comment> = Vec::with_capacity(size);
    let mut nodes: Vec<Node> = Vec::with_capacity(size);
    let mut queue: VecDeque<usize> = VecDeque::new();

    let push = |rng: &mut ChaCha8Rng, parent: Option<usize>, nodes: &mut Vec<Node>, out: &mut Vec<Comment>| {
        let id = format!("{}-c{:0width$}", post.post_id, nodes.len() + 1);
        let (likes, time, planned, parent_id) = match parent {
            None => (
                geometric(rng, scale),
                post.post_time + delay(rng, p.top_level_delay),
                1 + geometric(rng, p.top_level_replies),
                post.post_id.clone(),
            ),
            Some(q) => {
                let up = &nodes[q];
                let likes = if rng.random_bool(pi) {
                    up.likes + 1 + geometric(rng, step)
                } else {
                    rng.random_range(0..=up.likes)
                };
                let planned = if rng.random_bool(rho) {
                    up.planned + 1 + geometric(rng, 0.5)
                } else {
                    rng.random_range(0..=up.planned)
                };
                (likes, up.time + delay(rng, p.reply_delay), planned, up.id.clone())
            }
        };
        out.push(Comment {
            post_id: post.post_id.clone(),
            comment_id: id.clone(),
            comment_time: time,
            likes,
            text: words.sentence(rng, p.emotive_share),
            parent_id,
        });
        nodes.push(Node {
            likes,
            time,
            planned,
            id,
        });
        nodes.len() - 1
    };

    match p.shape {
        TreeShape::Chain => {
            let mut last = None;
            for _ in 0..size {
                last = Some(push(rng, last, &mut nodes, &mut out));
            }
        }
        TreeShape::Branching => {
            while out.len() < size {
                match queue.pop_front() {
                    None => {
                        let v = push(rng, None, &mut nodes, &mut out);
                        queue.push_back(v);
                    }
                    Some(v) => {
                        for _ in 0..nodes[v].planned {
                            if out.len() >= size {
                                break;
                            }
                            let c = push(rng, Some(v), &mut nodes, &mut out);
                            queue.push_back(c);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Generates `posts_per_class` labelled posts per class with their
/// comments. Posts alternate between classes; ids encode the seed.
pub fn generate_synthetic(params: &SyntheticParams) -> Result<SyntheticCorpus> {
    params.validate()?;
    let lex = Lexicon::builtin();
    let words = Words {
        emotive: lex.tokens().into_iter().map(|(t, _)| t.to_string()).collect(),
        filler: vec![
            "the", "a", "this", "that", "people", "thread", "post", "think", "really", "just", "about", "with",
            "again", "today", "many", "some", "still", "here", "there", "because",
        ],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut posts = Vec::with_capacity(2 * params.posts_per_class);
    let mut comments = Vec::new();
    let mut clock = params.start_time;
    for i in 0..params.posts_per_class {
        for controversial in [true, false] {
            let (topics, pi, rho) = if controversial {
                (
                    &params.controversial_topics,
                    params.like_ascension_controversial,
                    params.reply_ascension_controversial,
                )
            } else {
                (
                    &params.non_controversial_topics,
                    params.like_ascension_non_controversial,
                    params.reply_ascension_non_controversial,
                )
            };
            let topic = topics[rng.random_range(0..topics.len())].clone();
            clock += rng.random_range(60..3_600);
            let post = Post {
                post_id: format!("s{}-{}{:05}", params.seed, if controversial { 'c' } else { 'n' }, i),
                post_time: clock,
                text: format!("{} {}", topic.replace('_', " "), words.sentence(&mut rng, params.emotive_share)),
                topic,
                controversy_label: Some(controversial),
            };
            comments.extend(thread(&mut rng, params, &post, pi, rho, &words));
            posts.push(post);
        }
    }
    Ok(SyntheticCorpus { posts, comments })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::ascending_gradient;
    use crate::thread::{build_tree, RepairPolicy};

    fn trees(c: &SyntheticCorpus) -> Vec<crate::thread::CommentTree> {
        c.posts
            .iter()
            .map(|p| {
                let cs = c.comments.iter().filter(|x| x.post_id == p.post_id).cloned().collect();
                build_tree(p.clone(), cs, RepairPolicy::Drop).unwrap()
            })
            .collect()
    }

    #[test]
    fn forced_ascension_on_chains() {
        let p = SyntheticParams {
            posts_per_class: 3,
            shape: TreeShape::Chain,
            min_comments: 20,
            mean_comments: 30.0,
            like_ascension_controversial: 1.0,
            like_ascension_non_controversial: 1.0,
            ..SyntheticParams::default()
        };
        for t in trees(&generate_synthetic(&p).unwrap()) {
            assert!(t.repairs().is_clean());
            assert_eq!(ascending_gradient(&t), 1.0);
        }
    }

    #[test]
    fn same_seed_same_corpus() {
        let p = SyntheticParams {
            posts_per_class: 4,
            min_comments: 20,
            mean_comments: 40.0,
            ..SyntheticParams::default()
        };
        assert_eq!(generate_synthetic(&p).unwrap(), generate_synthetic(&p).unwrap());
    }

    #[test]
    fn sizes_and_labels() {
        let p = SyntheticParams {
            posts_per_class: 5,
            min_comments: 20,
            mean_comments: 50.0,
            ..SyntheticParams::default()
        };
        let c = generate_synthetic(&p).unwrap();
        assert_eq!(c.posts.len(), 10);
        assert_eq!(c.posts.iter().filter(|p| p.controversy_label == Some(true)).count(), 5);
        for t in trees(&c) {
            assert!(t.len() >= 20);
            assert!(t.repairs().is_clean());
        }
    }

    #[test]
    fn rejects_bad_probability() {
        let p = SyntheticParams {
            like_ascension_controversial: 1.5,
            ..SyntheticParams::default()
        };
        assert!(generate_synthetic(&p).is_err());
    }
}
