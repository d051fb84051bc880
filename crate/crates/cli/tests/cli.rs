use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use clap::CommandFactory;
use controversy_cli::Cli;

fn controversy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_controversy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_t1(dir: &Path) -> (String, String) {
    let posts = dir.join("posts.jsonl");
    let comments = dir.join("comments.jsonl");
    fs::write(
        &posts,
        concat!(
            r#"{"topic":"demo","post_id":"v0","post_time":0,"text":"good post","label":1}"#,
            "\n",
            r#"{"topic":"demo","post_id":"e0","post_time":5,"label":0}"#,
            "\n"
        ),
    )
    .unwrap();
    let c = |id: &str, parent: &str, t: i64, likes: u64| {
        format!(r#"{{"post_id":"v0","comment_id":"{id}","comment_time":{t},"likes":{likes},"text":"","parent_id":"{parent}"}}"#)
    };
    let lines = [c("v1", "v0", 10, 5), c("v2", "v0", 20, 1), c("v3", "v1", 30, 7), c("v4", "v3", 50, 2)];
    fs::write(&comments, lines.join("\n") + "\n").unwrap();
    (posts.display().to_string(), comments.display().to_string())
}

#[test]
fn t1_psychology_row() {
    let dir = tempfile::tempdir().unwrap();
    let (posts, comments) = write_t1(dir.path());
    let out = controversy(&["features", "--posts", &posts, "--comments", &comments, "--mode", "psychology"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 15);
    let row: Vec<&str> = lines.find(|l| l.starts_with("v0,")).unwrap().split(',').collect();
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()].parse::<f64>().unwrap();
    assert_eq!(col("p_a"), 0.5);
    assert_eq!(col("p_t"), 0.0);
    assert_eq!(col("n"), 4.0);
    assert_eq!(col("t_avg"), 17.5);
}

#[test]
fn ingest_reports_tree_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let (posts, comments) = write_t1(dir.path());
    let out = controversy(&["ingest", "--posts", &posts, "--comments", &comments]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("v0,demo,1,4,3,2,")), "{text}");
    assert!(text.lines().any(|l| l.starts_with("e0,demo,0,0,0,0,")), "{text}");
}

#[test]
fn missing_config_is_a_data_error() {
    let out = controversy(&["experiment", "--config", "missing.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("missing.toml"), "{}", stderr(&out));
}

#[test]
fn bad_usage_exits_one() {
    assert_eq!(controversy(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(controversy(&["features", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(controversy(&["train", "--features", "x.csv", "--out", "m.json", "--algorithm", "svm"]).status.code(), Some(1));
    assert_eq!(controversy(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_input_exits_two_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let posts = dir.path().join("p.jsonl");
    let comments = dir.path().join("c.jsonl");
    fs::write(&posts, "{\"topic\":\"t\",\"post_id\":\"p\",\"post_time\":0}\n{not json\n").unwrap();
    fs::write(&comments, "").unwrap();
    let out = controversy(&[
        "ingest",
        "--strict",
        "--posts",
        posts.to_str().unwrap(),
        "--comments",
        comments.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains(":2:"), "{}", stderr(&out));
}

#[test]
fn help_lists_every_flag() {
    let root = Cli::command();
    let help = stdout(&controversy(&["--help"]));
    for sub in root.get_subcommands() {
        assert!(help.contains(sub.get_name()), "top-level help misses {}", sub.get_name());
        let text = stdout(&controversy(&[sub.get_name(), "--help"]));
        for arg in sub.get_arguments() {
            if let Some(long) = arg.get_long() {
                assert!(text.contains(&format!("--{long}")), "{} --help misses --{long}", sub.get_name());
            }
        }
    }
}

#[test]
fn ks_separates_synthetic_classes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = controversy(&["synth", "--out-dir", d, "--posts-per-class", "60", "--seed", "3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let posts = format!("{d}/posts.jsonl");
    let comments = format!("{d}/comments.jsonl");
    let out = controversy(&[
        "ks", "--posts", &posts, "--comments", &comments, "--feature", "p_a", "--group-by", "label",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let p: f64 = row[header.iter().position(|h| *h == "p_value").unwrap()].parse().unwrap();
    assert_eq!(row[0], "p_a");
    assert!(p < 0.05, "p = {p}");
}

#[test]
fn train_evaluate_importance_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(controversy(&["synth", "--out-dir", d, "--posts-per-class", "40", "--seed", "5"]).status.success());
    let csv = format!("{d}/features.csv");
    let model = format!("{d}/model.json");
    let posts = format!("{d}/posts.jsonl");
    let comments = format!("{d}/comments.jsonl");
    let out = controversy(&["features", "--posts", &posts, "--comments", &comments, "--out", &csv]);
    assert!(out.status.success(), "{}", stderr(&out));

    let out = controversy(&["train", "--features", &csv, "--algorithm", "gbdt", "--seed", "1", "--out", &model]);
    assert!(out.status.success(), "{}", stderr(&out));
    let first = fs::read(&model).unwrap();
    assert!(controversy(&["train", "--features", &csv, "--algorithm", "gbdt", "--seed", "1", "--out", &model]).status.success());
    assert_eq!(first, fs::read(&model).unwrap());

    let out = controversy(&["evaluate", "--model", &model, "--features", &csv]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(summary["accuracy"].as_f64().unwrap() > 0.9);

    let out = controversy(&["importance", "--model", &model, "--features", &csv, "--repeats", "3", "--gain"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).lines().any(|l| l.starts_with("gain,")));

    let narrow = format!("{d}/structure.csv");
    assert!(controversy(&["features", "--posts", &posts, "--comments", &comments, "--mode", "structure", "--out", &narrow])
        .status
        .success());
    let out = controversy(&["evaluate", "--model", &model, "--features", &narrow]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("p_a"), "{}", stderr(&out));
}

#[test]
fn experiment_reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(
        &cfg,
        "name = \"cli\"\noutput_dir = \"out\"\nalgorithms = [\"logreg\", \"gbdt_goss_efb\"]\nimportance_repeats = 2\n\n[split]\nseeds = [0, 1]\n\n[synthetic]\nposts_per_class = 40\n",
    )
    .unwrap();
    let run = || {
        let out = controversy(&["experiment", "--config", cfg.to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
        let run_dir = stdout(&out).trim().to_string();
        fs::read(Path::new(&run_dir).join("report.json")).unwrap()
    };
    let a = run();
    assert_eq!(a, run());

    let report = dir.path().join("out");
    let run_dir = fs::read_dir(&report).unwrap().next().unwrap().unwrap().path();
    for f in ["matrix.csv", "importance.csv", "ks.csv", "timing.json", "plots/accuracy.svg"] {
        assert!(run_dir.join(f).exists(), "missing {f}");
    }
    let plots = dir.path().join("replot");
    let out = controversy(&[
        "plot",
        "--report",
        run_dir.join("report.json").to_str().unwrap(),
        "--out",
        plots.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        fs::read(plots.join("accuracy.svg")).unwrap(),
        fs::read(run_dir.join("plots/accuracy.svg")).unwrap()
    );
}
