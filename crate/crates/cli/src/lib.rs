//! The `controversy` command line.
//!
//! Machine-readable output goes to stdout or `--out`; logs go to stderr.
//! Exit codes: 0 on success, 1 for usage errors, 2 for bad input data.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use controversy_core::features::{
    read_csv, write_csv, Feature, FeatureConfig, FeatureMask, FeatureVector, Lexicon, Mode,
};
use controversy_core::harness::{
    generate_synthetic, one_page_filter, read_report, render_plots, run_experiment, time_slice, write_outputs,
    ExperimentConfig, SyntheticParams, TreeShape,
};
use controversy_core::learn::{train, Algorithm, Dataset, Model, TrainConfig};
use controversy_core::stats::{gain_importance, ks_table, permutation_importance, write_importance_csv, write_ks_csv, GroupBy};
use controversy_core::thread::{build_all, parse_dataset, CommentTree, ParseOptions, RepairPolicy};

#[derive(Debug, Parser)]
#[command(name = "controversy", version, about = "Controversy detection from comment trees")]
pub struct Cli {
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate posts and comments and print per-post tree statistics.
    Ingest(Ingest),
    /// Compute the feature matrix as CSV.
    Features(Features),
    /// Train a model on a feature CSV.
    Train(Train),
    /// Score a feature CSV with a trained model.
    Evaluate(Evaluate),
    /// Permutation or gain importance of a trained model.
    Importance(Importance),
    /// Two-sample Kolmogorov-Smirnov tables per feature.
    Ks(Ks),
    /// Write a synthetic labelled corpus.
    Synth(Synth),
    /// Run a full experiment from a TOML config.
    Experiment(Experiment),
    /// Redraw the charts of a saved report.
    Plot(Plot),
}

#[derive(Debug, Args)]
pub struct Corpus {
    /// Posts file (JSON Lines).
    #[arg(long)]
    pub posts: PathBuf,
    /// Comments file (JSON Lines).
    #[arg(long)]
    pub comments: PathBuf,
    /// What to do with comments whose parent is missing: drop or reattach.
    #[arg(long, default_value = "drop")]
    pub policy: RepairPolicy,
    /// Fail on the first malformed line instead of skipping it.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct LexiconArgs {
    /// Sentiment lexicon (token<TAB>score); the built-in demo lexicon if absent.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Match lexicon tokens case-sensitively.
    #[arg(long)]
    pub case_sensitive: bool,
}

#[derive(Debug, Args)]
pub struct Ingest {
    #[command(flatten)]
    pub corpus: Corpus,
    /// Write the statistics here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Features {
    #[command(flatten)]
    pub corpus: Corpus,
    #[command(flatten)]
    pub lexicon: LexiconArgs,
    /// Feature set: structure, interaction, text or psychology.
    #[arg(long, default_value = "psychology")]
    pub mode: Mode,
    /// Keep only this share of most-liked comments and their replies.
    #[arg(long)]
    pub one_page_ratio: Option<f64>,
    /// Keep only comments posted within this many seconds of the post.
    #[arg(long)]
    pub horizon: Option<i64>,
    /// Leave post-to-comment links out of the reply-time statistics.
    #[arg(long)]
    pub exclude_root_links: bool,
    /// Average absolute comment scores for s_c.
    #[arg(long)]
    pub absolute_emotion: bool,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Train {
    /// Feature CSV with labels.
    #[arg(long)]
    pub features: PathBuf,
    /// logreg, knn, dtree, gbdt or gbdt_goss_efb.
    #[arg(long, default_value = "gbdt_goss_efb")]
    pub algorithm: Algorithm,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Learner hyperparameters (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Where to write the model (JSON).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct Evaluate {
    /// Model written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    /// Write per-post predictions to this CSV.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Importance {
    #[arg(long)]
    pub model: PathBuf,
    /// Labelled feature CSV to permute.
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also report normalised split gain (tree models only).
    #[arg(long)]
    pub gain: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Ks {
    #[command(flatten)]
    pub corpus: Corpus,
    #[command(flatten)]
    pub lexicon: LexiconArgs,
    /// Feature to test; repeat for several. All 13 if absent.
    #[arg(long = "feature")]
    pub features: Vec<String>,
    /// Compare by label or by topic.
    #[arg(long, default_value = "label")]
    pub group_by: GroupBy,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Synth {
    /// Directory for posts.jsonl and comments.jsonl.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub posts_per_class: Option<usize>,
    /// Like-ascension probability of controversial posts.
    #[arg(long)]
    pub pi_controversial: Option<f64>,
    /// Like-ascension probability of non-controversial posts.
    #[arg(long)]
    pub pi_non_controversial: Option<f64>,
    #[arg(long)]
    pub min_comments: Option<usize>,
    #[arg(long)]
    pub mean_comments: Option<f64>,
    /// Grow every thread as a single reply chain.
    #[arg(long)]
    pub chain: bool,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct Experiment {
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Args)]
pub struct Plot {
    /// report.json of a finished run.
    #[arg(long)]
    pub report: PathBuf,
    /// Directory for the SVG files.
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args`, runs the command and maps failures to exit codes.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .try_init();

    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<controversy_core::Error>() {
        Some(core) if !core.is_data_error() => 1,
        _ => 2,
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Ingest(a) => ingest(a),
        Command::Features(a) => features(a),
        Command::Train(a) => train_cmd(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Importance(a) => importance(a),
        Command::Ks(a) => ks(a),
        Command::Synth(a) => synth(a),
        Command::Experiment(a) => experiment(a),
        Command::Plot(a) => plot(a),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn load_trees(c: &Corpus) -> Result<Vec<CommentTree>> {
    let parsed = parse_dataset(&c.posts, &c.comments, ParseOptions { strict: c.strict })?;
    let skipped = parsed.report.skipped();
    if skipped > 0 {
        log::warn!("skipped {skipped} malformed or orphaned records");
    }
    let (trees, errors) = build_all(parsed.threads, c.policy);
    if let Some(e) = errors.into_iter().next() {
        return Err(e.into());
    }
    info!("built {} trees", trees.len());
    Ok(trees)
}

fn lexicon(a: &LexiconArgs) -> Result<Lexicon> {
    Ok(match &a.lexicon {
        Some(p) => Lexicon::load(p, !a.case_sensitive)?,
        None => Lexicon::builtin(),
    })
}

fn ingest(a: Ingest) -> Result<()> {
    let trees = load_trees(&a.corpus)?;
    let mut w = csv::Writer::from_writer(output(a.out.as_deref())?);
    w.write_record(["post_id", "topic", "label", "comments", "depth", "breadth", "dropped", "reattached"])?;
    for t in &trees {
        let s = controversy_core::features::structural_features(t);
        let label = t.post().controversy_label.map_or(String::new(), |l| u8::from(l).to_string());
        w.write_record([
            t.post().post_id.clone(),
            t.post().topic.clone(),
            label,
            s.size.to_string(),
            s.depth.to_string(),
            s.breadth.to_string(),
            t.repairs().dropped.len().to_string(),
            t.repairs().reattached.len().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn compute_vectors(
    trees: &[CommentTree],
    lex: &Lexicon,
    mode: Mode,
    ratio: Option<f64>,
    horizon: Option<i64>,
    config: &FeatureConfig,
) -> Result<Vec<FeatureVector>> {
    use rayon::prelude::*;
    trees
        .par_iter()
        .map(|t| {
            let sliced;
            let t = match horizon {
                Some(h) => {
                    sliced = time_slice(t, h)?;
                    &sliced
                }
                None => t,
            };
            Ok(match ratio {
                Some(r) => one_page_filter(t, r, lex, mode, config)?,
                None => {
                    controversy_core::features::feature_vector_with(t, lex, FeatureMask::for_mode(mode), config)
                }
            })
        })
        .collect()
}

fn features(a: Features) -> Result<()> {
    let trees = load_trees(&a.corpus)?;
    let lex = lexicon(&a.lexicon)?;
    let config = FeatureConfig {
        include_root_links: !a.exclude_root_links,
        absolute_comment_emotion: a.absolute_emotion,
    };
    let rows = compute_vectors(&trees, &lex, a.mode, a.one_page_ratio, a.horizon, &config)?;
    write_csv(output(a.out.as_deref())?, &rows)?;
    Ok(())
}

fn read_features(path: &Path) -> Result<Vec<FeatureVector>> {
    let f = File::open(path).map_err(|e| controversy_core::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let rows = read_csv(f, path)?;
    if rows.is_empty() {
        return Err(controversy_core::Error::EmptyDataset.into());
    }
    Ok(rows)
}

fn labelled(rows: &[FeatureVector]) -> Result<Dataset> {
    Ok(Dataset::from_vectors(rows, rows[0].mask)?)
}

fn load_model(path: &Path) -> Result<Model> {
    let text = fs::read_to_string(path).map_err(|e| controversy_core::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(serde_json::from_str(&text).map_err(controversy_core::Error::from)?)
}

fn train_cmd(a: Train) -> Result<()> {
    let rows = read_features(&a.features)?;
    let data = labelled(&rows)?;
    let mut config = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| controversy_core::Error::Io {
                path: p.clone(),
                source: e,
            })?;
            toml::from_str::<TrainConfig>(&text)
                .map_err(|e| controversy_core::Error::Config(format!("{}: {e}", p.display())))?
        }
        None => TrainConfig::default(),
    };
    config.seed = a.seed;
    let model = train(a.algorithm, &data, &config)?;
    let accuracy = model.accuracy(&data)?;
    let mut text = serde_json::to_string_pretty(&model)?;
    text.push('\n');
    fs::write(&a.out, text).with_context(|| format!("cannot write {}", a.out.display()))?;
    info!("{} trained on {} rows", a.algorithm, data.len());
    let summary = serde_json::json!({
        "algorithm": a.algorithm.name(),
        "rows": data.len(),
        "features": model.features,
        "train_accuracy": accuracy,
        "config_hash": model.config_hash,
        "model": a.out,
    });
    println!("{summary:#}");
    Ok(())
}

/// Rows in the model's column order; labels are optional here.
fn model_rows(model: &Model, rows: &[FeatureVector]) -> Result<Vec<Vec<f64>>> {
    let have = rows[0].mask.names();
    let missing: Vec<String> = model.features.iter().filter(|f| !have.contains(f)).cloned().collect();
    let extra: Vec<String> = have.iter().filter(|f| !model.features.contains(f)).cloned().collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(controversy_core::Error::FeatureMismatch { missing, extra }.into());
    }
    let cols: Vec<Feature> = model
        .features
        .iter()
        .map(|n| Feature::from_name(n).ok_or_else(|| anyhow!("model has unknown feature `{n}`")))
        .collect::<Result<_>>()?;
    Ok(rows.iter().map(|v| cols.iter().map(|&f| v.get(f)).collect()).collect())
}

fn evaluate(a: Evaluate) -> Result<()> {
    let model = load_model(&a.model)?;
    let rows = read_features(&a.features)?;
    let preds = model.predict_rows(&model_rows(&model, &rows)?)?;
    if let Some(p) = &a.predictions {
        let mut w = csv::Writer::from_writer(output(Some(p))?);
        w.write_record(["post_id", "label", "predicted", "score"])?;
        for (v, pr) in rows.iter().zip(&preds) {
            let label = v.label.map_or(String::new(), |l| u8::from(l).to_string());
            w.write_record([
                v.post_id.clone(),
                label,
                u8::from(pr.label).to_string(),
                pr.score.to_string(),
            ])?;
        }
        w.flush()?;
    }
    let scored: Vec<(bool, bool)> = rows
        .iter()
        .zip(&preds)
        .filter_map(|(v, p)| v.label.map(|l| (l, p.label)))
        .collect();
    let correct = scored.iter().filter(|(l, p)| l == p).count();
    let accuracy = (!scored.is_empty()).then(|| correct as f64 / scored.len() as f64);
    let summary = serde_json::json!({
        "algorithm": model.algorithm.name(),
        "rows": rows.len(),
        "labelled": scored.len(),
        "accuracy": accuracy,
    });
    println!("{summary:#}");
    Ok(())
}

fn importance(a: Importance) -> Result<()> {
    let model = load_model(&a.model)?;
    let rows = read_features(&a.features)?;
    let data = labelled(&rows)?;
    let mut reports = vec![permutation_importance(&model, &data, a.repeats, a.seed)?];
    if a.gain {
        reports.push(gain_importance(&model)?);
    }
    write_importance_csv(output(a.out.as_deref())?, &reports)?;
    Ok(())
}

fn ks(a: Ks) -> Result<()> {
    let features: Vec<Feature> = if a.features.is_empty() {
        Feature::ALL.to_vec()
    } else {
        a.features
            .iter()
            .map(|n| {
                Feature::from_name(n).ok_or_else(|| {
                    controversy_core::Error::InvalidParameter(format!("unknown feature `{n}`")).into()
                })
            })
            .collect::<Result<_>>()?
    };
    let trees = load_trees(&a.corpus)?;
    let lex = lexicon(&a.lexicon)?;
    let vectors = compute_vectors(&trees, &lex, Mode::Psychology, None, None, &FeatureConfig::default())?;
    let rows = ks_table(&vectors, &features, a.group_by);
    write_ks_csv(output(a.out.as_deref())?, &rows)?;
    Ok(())
}

fn synth(a: Synth) -> Result<()> {
    let d = SyntheticParams::default();
    let params = SyntheticParams {
        posts_per_class: a.posts_per_class.unwrap_or(d.posts_per_class),
        like_ascension_controversial: a.pi_controversial.unwrap_or(d.like_ascension_controversial),
        like_ascension_non_controversial: a.pi_non_controversial.unwrap_or(d.like_ascension_non_controversial),
        min_comments: a.min_comments.unwrap_or(d.min_comments),
        mean_comments: a.mean_comments.unwrap_or(d.mean_comments),
        shape: if a.chain { TreeShape::Chain } else { d.shape },
        seed: a.seed.unwrap_or(d.seed),
        ..d
    };
    let corpus = generate_synthetic(&params)?;
    fs::create_dir_all(&a.out_dir).with_context(|| format!("cannot create {}", a.out_dir.display()))?;
    corpus.write(&a.out_dir.join("posts.jsonl"), &a.out_dir.join("comments.jsonl"))?;
    info!("{} posts, {} comments", corpus.posts.len(), corpus.comments.len());
    println!("{}", a.out_dir.display());
    Ok(())
}

fn experiment(a: Experiment) -> Result<()> {
    let start = Instant::now();
    let cfg = ExperimentConfig::load(&a.config)?;
    let report = run_experiment(&cfg)?;
    let dir = write_outputs(&report, start.elapsed().as_secs_f64())?;
    info!("run {} finished in {:.1}s", report.run_id, start.elapsed().as_secs_f64());
    println!("{}", dir.display());
    Ok(())
}

fn plot(a: Plot) -> Result<()> {
    let report = read_report(&a.report)?;
    for p in render_plots(&report, &a.out)? {
        println!("{}", p.display());
    }
    Ok(())
}
