//! Static SVG charts of a report.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::experiment::{Report, TopicDistribution};
use crate::error::{Error, Result};

const PALETTE: [&str; 6] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1", "#76b7b2"];
const W: f64 = 720.0;
const H: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    s
}

fn y_axis(s: &mut String, lo: f64, hi: f64) -> impl Fn(f64) -> f64 {
    let plot_h = H - TOP - BOTTOM;
    let y = move |v: f64| TOP + plot_h * (1.0 - (v - lo) / (hi - lo));
    for k in 0..=5 {
        let v = lo + (hi - lo) * k as f64 / 5.0;
        let yy = y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" x2="{}" y1="{yy:.1}" y2="{yy:.1}" stroke="#ddd"/><text x="{}" y="{:.1}" text-anchor="end">{v:.2}</text>"##,
            W - RIGHT,
            LEFT - 6.0,
            yy + 4.0
        );
    }
    y
}

fn legend(s: &mut String, names: &[String]) {
    for (i, n) in names.iter().enumerate() {
        let y = TOP + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{y}" width="12" height="12" fill="{}"/><text x="{}" y="{}">{}</text>"#,
            W - RIGHT + 14.0,
            PALETTE[i % PALETTE.len()],
            W - RIGHT + 32.0,
            y + 10.0,
            escape(n)
        );
    }
}

/// `values[g][s]` is series `s` in group `g`.
pub fn grouped_bars(title: &str, groups: &[String], series: &[String], values: &[Vec<f64>], lo: f64, hi: f64) -> String {
    let mut s = open(title);
    let y = y_axis(&mut s, lo, hi);
    let slot = (W - LEFT - RIGHT) / groups.len().max(1) as f64;
    let bar = slot * 0.8 / series.len().max(1) as f64;
    for (g, name) in groups.iter().enumerate() {
        let x0 = LEFT + slot * g as f64 + slot * 0.1;
        for (k, &v) in values[g].iter().enumerate() {
            let top = y(v.clamp(lo, hi));
            let _ = writeln!(
                s,
                r#"<rect x="{:.1}" y="{top:.1}" width="{:.1}" height="{:.1}" fill="{}"><title>{v:.4}</title></rect>"#,
                x0 + bar * k as f64,
                bar.max(1.0) - 1.0,
                y(lo) - top,
                PALETTE[k % PALETTE.len()]
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            x0 + slot * 0.4,
            H - BOTTOM + 18.0,
            escape(name)
        );
    }
    legend(&mut s, series);
    s.push_str("</svg>\n");
    s
}

/// One horizontal bar per label, longest first as given.
pub fn horizontal_bars(title: &str, labels: &[String], values: &[f64]) -> String {
    let mut s = open(title);
    let hi = values.iter().copied().fold(0.0, f64::max).max(1e-9);
    let lo = values.iter().copied().fold(0.0, f64::min);
    let row = (H - TOP - BOTTOM) / labels.len().max(1) as f64;
    let span = W - LEFT - RIGHT;
    let x = |v: f64| LEFT + 40.0 + (span - 40.0) * (v - lo) / (hi - lo);
    for (i, (l, &v)) in labels.iter().zip(values).enumerate() {
        let yy = TOP + row * i as f64;
        let (a, b) = if v >= 0.0 { (x(0.0), x(v)) } else { (x(v), x(0.0)) };
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text><rect x="{a:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{}"/><text x="{:.1}" y="{:.1}">{v:.4}</text>"#,
            LEFT + 34.0,
            yy + row * 0.6,
            escape(l),
            yy + row * 0.15,
            (b - a).max(0.5),
            row * 0.7,
            PALETTE[0],
            b + 4.0,
            yy + row * 0.6
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn box_plot(title: &str, boxes: &[&TopicDistribution]) -> String {
    let mut s = open(title);
    let lo = boxes.iter().map(|b| b.min).fold(f64::INFINITY, f64::min).min(0.0);
    let mut hi = boxes.iter().map(|b| b.max).fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        hi = lo + 1.0;
    }
    let y = y_axis(&mut s, lo, hi);
    let slot = (W - LEFT - RIGHT) / boxes.len().max(1) as f64;
    for (i, b) in boxes.iter().enumerate() {
        let cx = LEFT + slot * (i as f64 + 0.5);
        let half = slot * 0.25;
        let _ = writeln!(
            s,
            r##"<line x1="{cx:.1}" x2="{cx:.1}" y1="{:.1}" y2="{:.1}" stroke="#333"/><rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{}" stroke="#333"/><line x1="{:.1}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="#333" stroke-width="2"/><text x="{cx:.1}" y="{}" text-anchor="middle">{}</text>"##,
            y(b.max),
            y(b.min),
            cx - half,
            y(b.q3),
            2.0 * half,
            (y(b.q1) - y(b.q3)).max(0.5),
            PALETTE[i % PALETTE.len()],
            cx - half,
            cx + half,
            y(b.median),
            y(b.median),
            H - BOTTOM + 18.0,
            escape(&b.topic)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn hours(secs: i64) -> String {
    if secs % 3600 == 0 {
        format!("{}h", secs / 3600)
    } else {
        format!("{secs}s")
    }
}

/// Writes every chart of `report` into `dir` and returns the paths.
pub fn render_plots(report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut charts: Vec<(String, String)> = Vec::new();

    let algs = &report.config.algorithms;
    let modes = &report.config.modes;
    let mode_names: Vec<String> = modes.iter().map(|m| m.name().to_string()).collect();
    let values: Vec<Vec<f64>> = algs
        .iter()
        .map(|&a| modes.iter().map(|&m| report.accuracy(a, m).unwrap_or(0.0)).collect())
        .collect();
    charts.push((
        "accuracy.svg".into(),
        grouped_bars(
            "Held-out accuracy by learner and feature mode",
            &algs.iter().map(|a| a.name().to_string()).collect::<Vec<_>>(),
            &mode_names,
            &values,
            0.0,
            1.0,
        ),
    ));

    let horizons = &report.config.time_horizons;
    if !horizons.is_empty() {
        let values: Vec<Vec<f64>> = horizons
            .iter()
            .map(|&h| modes.iter().map(|&m| report.early_accuracy(h, m).unwrap_or(0.0)).collect())
            .collect();
        charts.push((
            "early_detection.svg".into(),
            grouped_bars(
                &format!("Early detection ({})", report.importance.algorithm),
                &horizons.iter().map(|&h| hours(h)).collect::<Vec<_>>(),
                &mode_names,
                &values,
                0.0,
                1.0,
            ),
        ));
    }

    let imp = &report.importance.permutation;
    let scores: Vec<f64> = imp.ranking.iter().map(|f| imp.score(f).unwrap_or(0.0)).collect();
    charts.push((
        "importance.svg".into(),
        horizontal_bars("Permutation importance (accuracy drop)", &imp.ranking, &scores),
    ));

    let mut features: Vec<&str> = report.topic_distributions.iter().map(|d| d.feature.as_str()).collect();
    features.dedup();
    for f in features {
        let boxes: Vec<&TopicDistribution> = report.topic_distributions.iter().filter(|d| d.feature == f).collect();
        charts.push((format!("topic_{f}.svg"), box_plot(&format!("{f} by topic"), &boxes)));
    }

    let mut out = Vec::new();
    for (name, svg) in charts {
        let p = dir.join(name);
        fs::write(&p, svg).map_err(|e| Error::io(&p, e))?;
        out.push(p);
    }
    Ok(out)
}
