use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use log::warn;
use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{Comment, Post};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Fail on the first malformed line instead of skipping it.
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedLine {
    pub file: PathBuf,
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SkipReport {
    pub malformed: Vec<SkippedLine>,
    /// Comments whose `post_id` matches no post.
    pub orphan_comments: Vec<String>,
    pub duplicate_posts: Vec<String>,
    pub empty_comments_file: bool,
}

impl SkipReport {
    pub fn skipped(&self) -> usize {
        self.malformed.len() + self.orphan_comments.len() + self.duplicate_posts.len()
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParsedDataset {
    /// Posts in file order, each with its comments in file order.
    pub threads: Vec<(Post, Vec<Comment>)>,
    pub report: SkipReport,
}

impl ParsedDataset {
    pub fn comment_count(&self) -> usize {
        self.threads.iter().map(|(_, c)| c.len()).sum()
    }
}

fn read_jsonl<T, R>(
    reader: R,
    path: &Path,
    opts: ParseOptions,
    check: impl Fn(&T) -> Result<(), String>,
    report: &mut SkipReport,
) -> Result<Vec<T>>
where
    T: DeserializeOwned,
    R: BufRead,
{
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<T>(&line)
            .map_err(|e| e.to_string())
            .and_then(|rec| check(&rec).map(|_| rec));
        match parsed {
            Ok(rec) => out.push(rec),
            Err(reason) if opts.strict => {
                return Err(Error::Schema {
                    path: path.to_path_buf(),
                    line: lineno,
                    reason,
                })
            }
            Err(reason) => {
                warn!("{}:{lineno}: skipping malformed record: {reason}", path.display());
                report.malformed.push(SkippedLine {
                    file: path.to_path_buf(),
                    line: lineno,
                    reason,
                });
            }
        }
    }
    Ok(out)
}

pub fn parse_posts(
    reader: impl BufRead,
    path: &Path,
    opts: ParseOptions,
    report: &mut SkipReport,
) -> Result<Vec<Post>> {
    read_jsonl(reader, path, opts, Post::validate, report)
}

pub fn parse_comments(
    reader: impl BufRead,
    path: &Path,
    opts: ParseOptions,
    report: &mut SkipReport,
) -> Result<Vec<Comment>> {
    read_jsonl(reader, path, opts, Comment::validate, report)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

/// Reads a posts file and a comments file (JSON Lines) and groups comments
/// under their posts.
///
/// Malformed lines are skipped and reported unless `opts.strict` is set.
/// Duplicate posts keep their first occurrence; comments naming an unknown
/// post are dropped and listed in the report.
pub fn parse_dataset(posts_path: &Path, comments_path: &Path, opts: ParseOptions) -> Result<ParsedDataset> {
    let mut report = SkipReport::default();
    let posts = parse_posts(open(posts_path)?, posts_path, opts, &mut report)?;
    let comments = parse_comments(open(comments_path)?, comments_path, opts, &mut report)?;
    if comments.is_empty() {
        warn!("{}: no comments; every post will have an empty tree", comments_path.display());
        report.empty_comments_file = true;
    }

    let mut slot: HashMap<String, usize> = HashMap::with_capacity(posts.len());
    let mut threads: Vec<(Post, Vec<Comment>)> = Vec::with_capacity(posts.len());
    for post in posts {
        if slot.contains_key(&post.post_id) {
            if opts.strict {
                return Err(Error::Schema {
                    path: posts_path.to_path_buf(),
                    line: 0,
                    reason: format!("duplicate post_id {}", post.post_id),
                });
            }
            warn!("duplicate post {}; keeping the first", post.post_id);
            report.duplicate_posts.push(post.post_id);
            continue;
        }
        slot.insert(post.post_id.clone(), threads.len());
        threads.push((post, Vec::new()));
    }

    let mut orphans = BTreeMap::new();
    for c in comments {
        match slot.get(&c.post_id) {
            Some(&i) => threads[i].1.push(c),
            None => {
                orphans.insert(c.comment_id.clone(), ());
            }
        }
    }
    if !orphans.is_empty() {
        warn!("{} comments reference unknown posts and were dropped", orphans.len());
    }
    report.orphan_comments = orphans.into_keys().collect();

    Ok(ParsedDataset { threads, report })
}

/// Writes records as JSON Lines.
pub fn write_jsonl<T: Serialize>(path: &Path, records: impl IntoIterator<Item = T>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for rec in records {
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn empty_comments_file() {
        let dir = tempfile::tempdir().unwrap();
        let posts = write(
            dir.path(),
            "p.jsonl",
            "{\"topic\":\"t\",\"post_id\":\"a\",\"post_time\":0,\"text\":\"\"}\n",
        );
        let comments = write(dir.path(), "c.jsonl", "");
        let ds = parse_dataset(&posts, &comments, ParseOptions::default()).unwrap();
        assert_eq!(ds.threads.len(), 1);
        assert!(ds.threads[0].1.is_empty());
        assert!(ds.report.empty_comments_file);
    }

    #[test]
    fn orphan_comment_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let posts = write(
            dir.path(),
            "p.jsonl",
            "{\"topic\":\"t\",\"post_id\":\"a\",\"post_time\":0,\"text\":\"\"}\n",
        );
        let comments = write(
            dir.path(),
            "c.jsonl",
            "{\"post_id\":\"zz\",\"comment_id\":\"c1\",\"comment_time\":3,\"likes\":0,\"text\":\"\",\"parent_id\":\"zz\"}\n",
        );
        let ds = parse_dataset(&posts, &comments, ParseOptions::default()).unwrap();
        assert_eq!(ds.report.orphan_comments, vec!["c1".to_string()]);
        assert_eq!(ds.comment_count(), 0);
    }

    #[test]
    fn malformed_line_lenient_vs_strict() {
        let dir = tempfile::tempdir().unwrap();
        let posts = write(
            dir.path(),
            "p.jsonl",
            "{\"topic\":\"t\",\"post_id\":\"a\",\"post_time\":0,\"text\":\"\"}\nnot json\n{\"topic\":\"t\",\"post_id\":\"\",\"post_time\":0}\n",
        );
        let comments = write(dir.path(), "c.jsonl", "");
        let ds = parse_dataset(&posts, &comments, ParseOptions::default()).unwrap();
        assert_eq!(ds.threads.len(), 1);
        let lines: Vec<usize> = ds.report.malformed.iter().map(|s| s.line).collect();
        assert_eq!(lines, vec![2, 3]);

        match parse_dataset(&posts, &comments, ParseOptions { strict: true }) {
            Err(Error::Schema { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.jsonl");
        let err = parse_dataset(&missing, &missing, ParseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("nope.jsonl"));
    }

    #[test]
    fn duplicate_post_keeps_first() {
        let dir = tempfile::tempdir().unwrap();
        let posts = write(
            dir.path(),
            "p.jsonl",
            "{\"topic\":\"x\",\"post_id\":\"a\",\"post_time\":0}\n{\"topic\":\"y\",\"post_id\":\"a\",\"post_time\":0}\n",
        );
        let comments = write(dir.path(), "c.jsonl", "");
        let ds = parse_dataset(&posts, &comments, ParseOptions::default()).unwrap();
        assert_eq!(ds.threads.len(), 1);
        assert_eq!(ds.threads[0].0.topic, "x");
        assert_eq!(ds.report.duplicate_posts, vec!["a".to_string()]);
    }
}
