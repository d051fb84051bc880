//! The thirteen per-post features and the cumulative feature modes.
//!
//! Slot order is fixed: structure (`n d b k v`), interaction
//! (`t_min t_avg c q`), text (`s_c s_p`), psychology (`p_a p_t`). Each mode
//! activates a prefix of that order, so the modes hold 5, 9, 11 and 13
//! features.

mod interaction;
mod psych;
mod structural;
mod text;
pub(crate) mod view;

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::thread::CommentTree;

pub use interaction::{interaction_features, InteractionFeatures};
pub use psych::{ascending_gradient, psych_features, tier_ascending_gradient, PsychFeatures};
pub use structural::{structural_features, StructuralFeatures};
pub use text::{score_text, text_features, tokenize, Lexicon, TextFeatures};

pub const FEATURE_COUNT: usize = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Feature {
    Size,
    Depth,
    Breadth,
    AvgDegree,
    Virality,
    MinReplyTime,
    AvgReplyTime,
    Density,
    AvgUps,
    CommentEmotion,
    PostEmotion,
    AscendingGradient,
    TierAscendingGradient,
}

impl Feature {
    pub const ALL: [Feature; FEATURE_COUNT] = [
        Feature::Size,
        Feature::Depth,
        Feature::Breadth,
        Feature::AvgDegree,
        Feature::Virality,
        Feature::MinReplyTime,
        Feature::AvgReplyTime,
        Feature::Density,
        Feature::AvgUps,
        Feature::CommentEmotion,
        Feature::PostEmotion,
        Feature::AscendingGradient,
        Feature::TierAscendingGradient,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Column name used in CSV output and model manifests.
    pub fn name(self) -> &'static str {
        match self {
            Feature::Size => "n",
            Feature::Depth => "d",
            Feature::Breadth => "b",
            Feature::AvgDegree => "k",
            Feature::Virality => "v",
            Feature::MinReplyTime => "t_min",
            Feature::AvgReplyTime => "t_avg",
            Feature::Density => "c",
            Feature::AvgUps => "q",
            Feature::CommentEmotion => "s_c",
            Feature::PostEmotion => "s_p",
            Feature::AscendingGradient => "p_a",
            Feature::TierAscendingGradient => "p_t",
        }
    }

    pub fn from_name(name: &str) -> Option<Feature> {
        Feature::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn mode(self) -> Mode {
        match self.index() {
            0..=4 => Mode::Structure,
            5..=8 => Mode::Interaction,
            9..=10 => Mode::Text,
            _ => Mode::Psychology,
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Cumulative feature sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Structure,
    Interaction,
    Text,
    Psychology,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Structure, Mode::Interaction, Mode::Text, Mode::Psychology];

    /// Number of active features.
    pub fn feature_count(self) -> usize {
        match self {
            Mode::Structure => 5,
            Mode::Interaction => 9,
            Mode::Text => 11,
            Mode::Psychology => 13,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Structure => "structure",
            Mode::Interaction => "interaction",
            Mode::Text => "text",
            Mode::Psychology => "psychology",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown mode `{s}` (expected structure, interaction, text or psychology)"))
    }
}

/// Which of the 13 slots are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureMask([bool; FEATURE_COUNT]);

impl FeatureMask {
    pub fn for_mode(mode: Mode) -> Self {
        let mut m = [false; FEATURE_COUNT];
        m[..mode.feature_count()].fill(true);
        FeatureMask(m)
    }

    /// Hot-comment view of `mode`: the global-shape features (depth,
    /// breadth, average degree, virality) are removed, size is kept.
    pub fn one_page(mode: Mode) -> Self {
        let mut m = Self::for_mode(mode);
        for f in [Feature::Depth, Feature::Breadth, Feature::AvgDegree, Feature::Virality] {
            m.0[f.index()] = false;
        }
        m
    }

    pub fn from_features(features: &[Feature]) -> Self {
        let mut m = [false; FEATURE_COUNT];
        for f in features {
            m[f.index()] = true;
        }
        FeatureMask(m)
    }

    pub fn contains(&self, f: Feature) -> bool {
        self.0[f.index()]
    }

    pub fn active(&self) -> Vec<Feature> {
        Feature::ALL.into_iter().filter(|f| self.contains(*f)).collect()
    }

    pub fn len(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn names(&self) -> Vec<String> {
        self.active().into_iter().map(|f| f.name().to_string()).collect()
    }
}

/// Conventions that the data does not settle on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    /// Count post-to-top-level links in the reply-time statistics.
    pub include_root_links: bool,
    /// Average `|c_i|` instead of signed scores for `s_c`.
    pub absolute_comment_emotion: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            include_root_links: true,
            absolute_comment_emotion: false,
        }
    }
}

/// Records how a set of feature columns was produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureManifest {
    pub features: Vec<String>,
    pub reply_time_includes_root_links: bool,
    /// Always false: the post has no like count, so `p_a`/`p_t` only use
    /// comment-to-comment links.
    pub gradients_include_root_links: bool,
    pub absolute_comment_emotion: bool,
    pub lexicon: String,
}

impl FeatureManifest {
    pub fn new(mask: FeatureMask, config: &FeatureConfig, lexicon: &Lexicon) -> Self {
        FeatureManifest {
            features: mask.names(),
            reply_time_includes_root_links: config.include_root_links,
            gradients_include_root_links: false,
            absolute_comment_emotion: config.absolute_comment_emotion,
            lexicon: lexicon.name().to_string(),
        }
    }
}

/// The feature values of one post. Inactive slots hold 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub post_id: String,
    pub topic: String,
    pub label: Option<bool>,
    pub values: [f64; FEATURE_COUNT],
    pub mask: FeatureMask,
}

impl FeatureVector {
    pub fn get(&self, f: Feature) -> f64 {
        self.values[f.index()]
    }

    pub fn active_values(&self) -> Vec<f64> {
        self.mask.active().into_iter().map(|f| self.get(f)).collect()
    }

    /// Restricts to a narrower mask; slots outside it are zeroed.
    pub fn masked(&self, mask: FeatureMask) -> FeatureVector {
        let mut v = self.clone();
        for f in Feature::ALL {
            if !mask.contains(f) {
                v.values[f.index()] = 0.0;
            }
        }
        v.mask = mask;
        v
    }

    pub(crate) fn assemble(
        tree: &CommentTree,
        values: [f64; FEATURE_COUNT],
        mask: FeatureMask,
    ) -> FeatureVector {
        let post = tree.post();
        FeatureVector {
            post_id: post.post_id.clone(),
            topic: post.topic.clone(),
            label: post.controversy_label,
            values,
            mask,
        }
        .masked(mask)
    }
}

/// All 13 features of `tree`, masked to `mode`.
pub fn feature_vector(tree: &CommentTree, lexicon: &Lexicon, mode: Mode) -> FeatureVector {
    feature_vector_with(tree, lexicon, FeatureMask::for_mode(mode), &FeatureConfig::default())
}

pub fn feature_vector_with(
    tree: &CommentTree,
    lexicon: &Lexicon,
    mask: FeatureMask,
    config: &FeatureConfig,
) -> FeatureVector {
    let s = structural_features(tree);
    let i = interaction_features(tree, config);
    let t = text_features(tree, lexicon, config);
    let p = psych_features(tree);
    let values = [
        s.size as f64,
        s.depth as f64,
        s.breadth as f64,
        s.avg_degree,
        s.virality,
        i.t_min,
        i.t_avg,
        i.density,
        i.avg_ups,
        t.comment_emotion,
        t.post_emotion,
        p.ascending_gradient,
        p.tier_ascending_gradient,
    ];
    FeatureVector::assemble(tree, values, mask)
}

/// Non-structural features over a partial reply graph. `n` is the number
/// of comments in the graph; the other structural slots stay 0.
pub(crate) fn graph_vector(
    tree: &CommentTree,
    graph: &view::ReplyGraph<'_>,
    lexicon: &Lexicon,
    mask: FeatureMask,
    config: &FeatureConfig,
) -> FeatureVector {
    let i = interaction::compute(graph, config);
    let t = text::compute(graph, &tree.post().text, lexicon, config);
    let p = psych::compute(graph);
    let mut values = [0.0; FEATURE_COUNT];
    values[Feature::Size.index()] = graph.nodes.len() as f64;
    values[Feature::MinReplyTime.index()] = i.t_min;
    values[Feature::AvgReplyTime.index()] = i.t_avg;
    values[Feature::Density.index()] = i.density;
    values[Feature::AvgUps.index()] = i.avg_ups;
    values[Feature::CommentEmotion.index()] = t.comment_emotion;
    values[Feature::PostEmotion.index()] = t.post_emotion;
    values[Feature::AscendingGradient.index()] = p.ascending_gradient;
    values[Feature::TierAscendingGradient.index()] = p.tier_ascending_gradient;
    FeatureVector::assemble(tree, values, mask)
}

pub const CSV_HEADER: [&str; FEATURE_COUNT + 2] = [
    "post_id", "label", "n", "d", "b", "k", "v", "t_min", "t_avg", "c", "q", "s_c", "s_p", "p_a", "p_t",
];

/// Writes the feature matrix as CSV; inactive slots are left empty.
pub fn write_csv<W: Write>(out: W, rows: &[FeatureVector]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Config(format!("csv output: {e}"));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for row in rows {
        let mut rec = Vec::with_capacity(FEATURE_COUNT + 2);
        rec.push(row.post_id.clone());
        rec.push(match row.label {
            Some(true) => "1".into(),
            Some(false) => "0".into(),
            None => String::new(),
        });
        for f in Feature::ALL {
            rec.push(if row.mask.contains(f) {
                format!("{}", row.get(f))
            } else {
                String::new()
            });
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Config(format!("csv output: {e}")))?;
    Ok(())
}

/// Reads a feature matrix written by [`write_csv`]. A column is active
/// when any row fills it. Topics are not part of the format and come back
/// empty.
pub fn read_csv<R: std::io::Read>(input: R, path: &Path) -> Result<Vec<FeatureVector>> {
    let schema = |line: usize, reason: String| Error::Schema {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| schema(1, e.to_string()))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(schema(1, format!("expected header {}", CSV_HEADER.join(","))));
    }
    let mut out = Vec::new();
    let mut seen = [false; FEATURE_COUNT];
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| schema(line, e.to_string()))?;
        let label = match &rec[1] {
            "" => None,
            "0" => Some(false),
            "1" => Some(true),
            other => return Err(schema(line, format!("label `{other}` is not 0 or 1"))),
        };
        let mut values = [0.0; FEATURE_COUNT];
        for (k, cell) in rec.iter().skip(2).enumerate() {
            if !cell.is_empty() {
                values[k] = cell
                    .parse()
                    .map_err(|_| schema(line, format!("{}: `{cell}` is not a number", CSV_HEADER[k + 2])))?;
                seen[k] = true;
            }
        }
        out.push(FeatureVector {
            post_id: rec[0].to_string(),
            topic: String::new(),
            label,
            values,
            mask: FeatureMask([false; FEATURE_COUNT]),
        });
    }
    let mask = FeatureMask(seen);
    for v in &mut out {
        v.mask = mask;
    }
    Ok(out)
}
