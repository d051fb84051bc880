use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use super::view::ReplyGraph;
use super::FeatureConfig;
use crate::error::{Error, Result};
use crate::thread::CommentTree;

/// Token valences in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    name: String,
    case_folding: bool,
    entries: HashMap<String, f64>,
}

const DEMO: &str = "\
# demo sentiment lexicon
good\t0.5
great\t0.8
excellent\t0.9
love\t0.8
like\t0.3
agree\t0.4
nice\t0.5
thanks\t0.4
helpful\t0.5
beautiful\t0.7
fair\t0.3
right\t0.2
happy\t0.6
bad\t-0.5
terrible\t-0.8
awful\t-0.8
hate\t-0.8
wrong\t-0.4
stupid\t-0.7
liar\t-0.7
disagree\t-0.4
nonsense\t-0.6
ridiculous\t-0.6
angry\t-0.6
worst\t-0.9
lie\t-0.5
shame\t-0.5
idiot\t-0.8
";

impl Lexicon {
    pub fn new(name: impl Into<String>, case_folding: bool, entries: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let mut lex = Lexicon {
            name: name.into(),
            case_folding,
            entries: HashMap::new(),
        };
        for (tok, score) in entries {
            lex.insert(tok, score)?;
        }
        Ok(lex)
    }

    fn insert(&mut self, token: String, score: f64) -> Result<()> {
        if token.is_empty() {
            return Err(Error::InvalidParameter("empty lexicon token".into()));
        }
        if !(-1.0..=1.0).contains(&score) {
            return Err(Error::InvalidParameter(format!(
                "lexicon score {score} for `{token}` outside [-1, 1]"
            )));
        }
        let key = if self.case_folding { token.to_lowercase() } else { token };
        if self.entries.insert(key.clone(), score).is_some() {
            warn!("lexicon {}: duplicate token `{key}`, keeping the last score", self.name);
        }
        Ok(())
    }

    /// The small English lexicon bundled for demos and tests.
    pub fn builtin() -> Self {
        Self::from_tsv(DEMO.as_bytes(), "builtin-demo", true).expect("bundled lexicon is valid")
    }

    /// Parses `token<TAB>score` lines. Blank lines and lines starting with
    /// `#` are ignored.
    pub fn from_tsv(reader: impl BufRead, name: &str, case_folding: bool) -> Result<Self> {
        let mut lex = Lexicon {
            name: name.to_string(),
            case_folding,
            entries: HashMap::new(),
        };
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(name, e))?;
            let schema = |reason: String| Error::Schema {
                path: name.into(),
                line: i + 1,
                reason,
            };
            let trimmed = line.trim_end_matches(['\r', '\n']);
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (tok, score) = trimmed
                .split_once('\t')
                .ok_or_else(|| schema("expected token<TAB>score".into()))?;
            let score: f64 = score
                .trim()
                .parse()
                .map_err(|_| schema(format!("bad score `{}`", score.trim())))?;
            lex.insert(tok.trim().to_string(), score)
                .map_err(|e| schema(e.to_string()))?;
        }
        Ok(lex)
    }

    pub fn load(path: &Path, case_folding: bool) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let name = path.display().to_string();
        Self::from_tsv(BufReader::new(file), &name, case_folding)
    }

    /// Same tokens with every score multiplied by -1.
    pub fn negated(&self) -> Self {
        Lexicon {
            name: format!("-{}", self.name),
            case_folding: self.case_folding,
            entries: self.entries.iter().map(|(k, v)| (k.clone(), -v)).collect(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn case_folding(&self) -> bool {
        self.case_folding
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<f64> {
        if self.case_folding {
            self.entries.get(&token.to_lowercase()).copied()
        } else {
            self.entries.get(token).copied()
        }
    }

    /// Tokens sorted, for deterministic iteration.
    pub fn tokens(&self) -> Vec<(&str, f64)> {
        let mut v: Vec<(&str, f64)> = self.entries.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }
}

/// Splits on anything that is not a letter or digit.
pub fn tokenize(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty())
}

/// Mean valence of the tokens found in `lexicon`, 0 when none match.
pub fn score_text(text: &str, lexicon: &Lexicon) -> f64 {
    let mut sum = 0.0;
    let mut hits = 0usize;
    for tok in tokenize(text) {
        if let Some(v) = lexicon.get(tok) {
            sum += v;
            hits += 1;
        }
    }
    if hits == 0 {
        0.0
    } else {
        sum / hits as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextFeatures {
    /// `s_c`, mean comment score.
    pub comment_emotion: f64,
    /// `s_p`, score of the post text.
    pub post_emotion: f64,
}

pub fn text_features(tree: &CommentTree, lexicon: &Lexicon, config: &FeatureConfig) -> TextFeatures {
    compute(&ReplyGraph::from_tree(tree), &tree.post().text, lexicon, config)
}

pub(crate) fn compute(g: &ReplyGraph<'_>, post_text: &str, lexicon: &Lexicon, config: &FeatureConfig) -> TextFeatures {
    let comment_emotion = if g.nodes.is_empty() {
        0.0
    } else {
        let sum: f64 = g
            .nodes
            .iter()
            .map(|c| {
                let s = score_text(&c.text, lexicon);
                if config.absolute_comment_emotion {
                    s.abs()
                } else {
                    s
                }
            })
            .sum();
        sum / g.nodes.len() as f64
    };
    TextFeatures {
        comment_emotion,
        post_emotion: score_text(post_text, lexicon),
    }
}
