//! Posts, comments and the comment trees built from them.
//!
//! A post is the root `v0` of its tree; every comment hangs under the
//! record named by its `parent_id`. Trees are immutable once built.

mod parse;
mod tree;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use parse::{
    parse_comments, parse_dataset, parse_posts, write_jsonl, ParseOptions, ParsedDataset, SkipReport,
    SkippedLine,
};
pub use tree::{build_all, build_tree, CommentTree, NodeId, RepairLog, RepairPolicy, ROOT};

/// A root content item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub topic: String,
    pub post_id: String,
    #[serde(deserialize_with = "de_timestamp")]
    pub post_time: i64,
    #[serde(default)]
    pub text: String,
    #[serde(
        rename = "label",
        default,
        deserialize_with = "de_label",
        serialize_with = "ser_label",
        skip_serializing_if = "Option::is_none"
    )]
    pub controversy_label: Option<bool>,
}

/// A reply node. `parent_id` is the post id for top-level comments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    pub post_id: String,
    pub comment_id: String,
    #[serde(deserialize_with = "de_timestamp")]
    pub comment_time: i64,
    pub likes: u64,
    #[serde(default)]
    pub text: String,
    pub parent_id: String,
}

impl Post {
    pub(crate) fn validate(&self) -> Result<(), String> {
        if self.post_id.is_empty() {
            return Err("empty post_id".into());
        }
        if self.post_time < 0 {
            return Err(format!("negative post_time {}", self.post_time));
        }
        Ok(())
    }
}

impl Comment {
    pub(crate) fn validate(&self) -> Result<(), String> {
        if self.comment_id.is_empty() {
            return Err("empty comment_id".into());
        }
        if self.post_id.is_empty() {
            return Err("empty post_id".into());
        }
        if self.parent_id.is_empty() {
            return Err("empty parent_id".into());
        }
        Ok(())
    }
}

// Timestamps are whole seconds; fractional inputs are truncated.
fn de_timestamp<'de, D: Deserializer<'de>>(d: D) -> Result<i64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Float(f64),
    }
    match Raw::deserialize(d)? {
        Raw::Int(v) => Ok(v),
        Raw::Float(v) if v.is_finite() => Ok(v.trunc() as i64),
        Raw::Float(v) => Err(serde::de::Error::custom(format!("non-finite timestamp {v}"))),
    }
}

fn de_label<'de, D: Deserializer<'de>>(d: D) -> Result<Option<bool>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Bool(bool),
        Int(i64),
    }
    match Option::<Raw>::deserialize(d)? {
        None => Ok(None),
        Some(Raw::Bool(b)) => Ok(Some(b)),
        Some(Raw::Int(0)) => Ok(Some(false)),
        Some(Raw::Int(1)) => Ok(Some(true)),
        Some(Raw::Int(v)) => Err(serde::de::Error::custom(format!("label must be 0 or 1, got {v}"))),
    }
}

fn ser_label<S: Serializer>(label: &Option<bool>, s: S) -> Result<S::Ok, S::Error> {
    match label {
        Some(b) => s.serialize_u8(u8::from(*b)),
        None => s.serialize_none(),
    }
}
