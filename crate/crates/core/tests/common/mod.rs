//! Random threads and brute-force feature oracles shared by the
//! integration tests. The oracles read the raw records only.
#![allow(dead_code)]

use std::collections::HashMap;

use controversy_core::features::{Feature, Lexicon, FEATURE_COUNT};
use controversy_core::thread::{build_tree, Comment, CommentTree, Post, RepairPolicy};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const WORDS: [&str; 16] = [
    "good", "Great", "HATE", "wrong", "liar", "nice", "the", "post", "idiot", "agree", "is", "so", "Terrible",
    "happy", "why", "ok",
];

#[derive(Debug, Clone)]
pub struct Thread {
    pub post: Post,
    pub comments: Vec<Comment>,
}

impl Thread {
    pub fn tree(&self) -> CommentTree {
        build_tree(self.post.clone(), self.comments.clone(), RepairPolicy::Drop).expect("valid thread")
    }

    pub fn map_likes(&self, f: impl Fn(u64) -> u64) -> Thread {
        let mut t = self.clone();
        for c in &mut t.comments {
            c.likes = f(c.likes);
        }
        t
    }

    pub fn shift_times(&self, by: i64) -> Thread {
        let mut t = self.clone();
        t.post.post_time += by;
        for c in &mut t.comments {
            c.comment_time += by;
        }
        t
    }

    pub fn shuffled(&self, seed: u64) -> Thread {
        let mut t = self.clone();
        t.comments.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        t
    }
}

fn sentence(rng: &mut impl Rng) -> String {
    let k = rng.random_range(0..6);
    let mut s = String::new();
    for i in 0..k {
        if i > 0 {
            s.push_str(if rng.random_bool(0.2) { ", " } else { " " });
        }
        s.push_str(WORDS[rng.random_range(0..WORDS.len())]);
    }
    if rng.random_bool(0.3) {
        s.push('!');
    }
    s
}

/// A thread of `0..=max_n` comments. Each comment replies to the post or to
/// an earlier comment; reply delays are mostly positive with some ties and
/// a few negative ones; likes are uniform in `0..=10`.
pub fn random_thread(seed: u64, max_n: usize) -> Thread {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let post_id = format!("p{seed}");
    let post_time = rng.random_range(0..1_000_000i64);
    let post = Post {
        topic: ["war", "music"][rng.random_range(0..2)].to_string(),
        post_id: post_id.clone(),
        post_time,
        text: sentence(&mut rng),
        controversy_label: Some(rng.random_bool(0.5)),
    };
    let n = rng.random_range(0..=max_n);
    let mut comments: Vec<Comment> = Vec::with_capacity(n);
    for i in 0..n {
        let p = rng.random_range(0..=i);
        let (parent_id, parent_time) = if p == 0 {
            (post_id.clone(), post_time)
        } else {
            (comments[p - 1].comment_id.clone(), comments[p - 1].comment_time)
        };
        let delay = match rng.random_range(0..10) {
            0 => -rng.random_range(1..100),
            1 => 0,
            _ => rng.random_range(1..5000),
        };
        comments.push(Comment {
            post_id: post_id.clone(),
            comment_id: format!("c{:03}", rng.random_range(0..1000) * 100 + i),
            comment_time: parent_time + delay,
            likes: rng.random_range(0..=10),
            text: sentence(&mut rng),
            parent_id,
        });
    }
    Thread { post, comments }
}

/// A thread whose comments form a single reply chain.
pub fn chain(n: usize) -> Thread {
    shaped(n, |i| i)
}

/// A thread whose comments all reply to the post.
pub fn star(n: usize) -> Thread {
    shaped(n, |_| 0)
}

fn shaped(n: usize, parent: impl Fn(usize) -> usize) -> Thread {
    let post = Post {
        topic: "t".into(),
        post_id: "p".into(),
        post_time: 0,
        text: String::new(),
        controversy_label: None,
    };
    let comments = (1..=n)
        .map(|i| Comment {
            post_id: "p".into(),
            comment_id: format!("c{i:03}"),
            comment_time: i as i64,
            likes: 0,
            text: String::new(),
            parent_id: match parent(i - 1) {
                0 => "p".into(),
                j => format!("c{j:03}"),
            },
        })
        .collect();
    Thread { post, comments }
}

fn oracle_score(text: &str, lexicon: &HashMap<String, f64>) -> f64 {
    let mut hits = Vec::new();
    let mut word = String::new();
    for ch in text.chars().chain(std::iter::once(' ')) {
        if ch.is_alphanumeric() {
            word.push(ch);
        } else if !word.is_empty() {
            if let Some(v) = lexicon.get(&word.to_lowercase()) {
                hits.push(*v);
            }
            word.clear();
        }
    }
    if hits.is_empty() {
        0.0
    } else {
        hits.iter().sum::<f64>() / hits.len() as f64
    }
}

/// All 13 features of a complete thread, computed independently:
/// depths by walking parent pointers, virality by Floyd–Warshall, the
/// reply statistics and gradients by enumerating the edge list.
pub fn oracle(t: &Thread, lexicon: &Lexicon) -> [f64; FEATURE_COUNT] {
    let lex: HashMap<String, f64> = lexicon.tokens().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    let n = t.comments.len();
    let mut out = [0.0; FEATURE_COUNT];
    out[Feature::PostEmotion.index()] = oracle_score(&t.post.text, &lex);
    if n == 0 {
        return out;
    }

    // node 0 is the post
    let mut id = HashMap::new();
    id.insert(t.post.post_id.as_str(), 0usize);
    for (i, c) in t.comments.iter().enumerate() {
        id.insert(c.comment_id.as_str(), i + 1);
    }
    let parent: Vec<usize> = t.comments.iter().map(|c| id[c.parent_id.as_str()]).collect();
    let time = |v: usize| if v == 0 { t.post.post_time } else { t.comments[v - 1].comment_time };
    let edges: Vec<(usize, usize)> = (1..=n).map(|v| (parent[v - 1], v)).collect();

    let depth = |mut v: usize| {
        let mut d = 0;
        while v != 0 {
            v = parent[v - 1];
            d += 1;
        }
        d
    };
    let depths: Vec<usize> = (1..=n).map(depth).collect();
    let max_depth = *depths.iter().max().unwrap();
    let breadth = (1..=max_depth).map(|l| depths.iter().filter(|&&d| d == l).count()).max().unwrap();

    let inf = usize::MAX / 4;
    let mut dist = vec![vec![inf; n + 1]; n + 1];
    for (v, row) in dist.iter_mut().enumerate() {
        row[v] = 0;
    }
    for &(p, c) in &edges {
        dist[p][c] = 1;
        dist[c][p] = 1;
    }
    for k in 0..=n {
        for i in 0..=n {
            for j in 0..=n {
                if dist[i][k] + dist[k][j] < dist[i][j] {
                    dist[i][j] = dist[i][k] + dist[k][j];
                }
            }
        }
    }
    let mut pair_sum = 0usize;
    for i in 1..=n {
        for j in 1..=n {
            if i != j {
                pair_sum += dist[i][j];
            }
        }
    }
    let virality = if n > 1 { pair_sum as f64 / (n * (n - 1)) as f64 } else { 0.0 };

    let gaps: Vec<i64> = edges.iter().map(|&(p, c)| (time(c) - time(p)).max(0)).collect();
    let latest = t.comments.iter().map(|c| c.comment_time).max().unwrap();
    let span = (latest - t.post.post_time).max(0).max(1);
    let likes: u64 = t.comments.iter().map(|c| c.likes).sum();
    let scores: Vec<f64> = t.comments.iter().map(|c| oracle_score(&c.text, &lex)).collect();

    let replies = |v: usize| edges.iter().filter(|&&(p, _)| p == v).count();
    let inner: Vec<(usize, usize)> = edges.iter().copied().filter(|&(p, _)| p != 0).collect();
    let like = |v: usize| t.comments[v - 1].likes;
    let up = inner.iter().filter(|&&(p, c)| like(p) < like(c)).count();
    let tier_up = inner.iter().filter(|&&(p, c)| replies(p) < replies(c)).count();
    let frac = |k: usize| if inner.is_empty() { 0.0 } else { k as f64 / inner.len() as f64 };

    out[Feature::Size.index()] = n as f64;
    out[Feature::Depth.index()] = max_depth as f64;
    out[Feature::Breadth.index()] = breadth as f64;
    out[Feature::AvgDegree.index()] = inner.len() as f64 / n as f64;
    out[Feature::Virality.index()] = virality;
    out[Feature::MinReplyTime.index()] = *gaps.iter().min().unwrap() as f64;
    out[Feature::AvgReplyTime.index()] = gaps.iter().sum::<i64>() as f64 / gaps.len() as f64;
    out[Feature::Density.index()] = n as f64 / span as f64;
    out[Feature::AvgUps.index()] = likes as f64 / n as f64;
    out[Feature::CommentEmotion.index()] = scores.iter().sum::<f64>() / n as f64;
    out[Feature::AscendingGradient.index()] = frac(up);
    out[Feature::TierAscendingGradient.index()] = frac(tier_up);
    out
}

/// Empirical CDF distance by a double loop over the pooled points.
pub fn ks_oracle(a: &[f64], b: &[f64]) -> f64 {
    let cdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
    a.iter()
        .chain(b)
        .map(|&x| (cdf(a, x) - cdf(b, x)).abs())
        .fold(0.0, f64::max)
}
