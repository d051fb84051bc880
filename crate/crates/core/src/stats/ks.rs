use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Feature, FeatureVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

/// Two-sample Kolmogorov-Smirnov test.
///
/// `D` is the largest gap between the two empirical CDFs over the pooled
/// values. The two-sided p-value uses the asymptotic Kolmogorov
/// distribution at `sqrt(n1 n2 / (n1 + n2)) * D`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter("ks: both samples must be non-empty".into()));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(Error::InvalidParameter("ks: NaN in sample".into()));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n1, n2) = (xs.len(), ys.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n1 || j < n2 {
        let v = match (xs.get(i), ys.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < n1 && xs[i] <= v {
            i += 1;
        }
        while j < n2 && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    let ne = (n1 * n2) as f64 / (n1 + n2) as f64;
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf(ne.sqrt() * d),
        n1,
        n2,
    })
}

/// `P(K > lambda)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let p = if lambda < 1.18 {
        // theta-function form converges fast for small lambda
        let c = PI * PI / (8.0 * lambda * lambda);
        let cdf: f64 = (1..=20)
            .map(|k| {
                let m = (2 * k - 1) as f64;
                (-m * m * c).exp()
            })
            .sum::<f64>()
            * (2.0 * PI).sqrt()
            / lambda;
        1.0 - cdf
    } else {
        2.0 * (1..=100)
            .map(|k| {
                let k = k as f64;
                let sign = if k as u64 % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * k * k * lambda * lambda).exp()
            })
            .sum::<f64>()
    };
    p.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    /// Controversial against non-controversial posts.
    Label,
    /// Every pair of topics.
    Topic,
}

impl FromStr for GroupBy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "label" => Ok(GroupBy::Label),
            "topic" => Ok(GroupBy::Topic),
            other => Err(format!("unknown grouping `{other}` (expected label or topic)")),
        }
    }
}

impl fmt::Display for GroupBy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupBy::Label => "label",
            GroupBy::Topic => "topic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsRow {
    pub feature: String,
    pub group_a: String,
    pub group_b: String,
    pub statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

/// KS tests of each feature between groups of posts. Label grouping
/// compares `controversial` with `non_controversial` (unlabelled posts are
/// skipped); topic grouping compares every pair of topics in name order.
/// Pairs with an empty side are left out.
pub fn ks_table(vectors: &[FeatureVector], features: &[Feature], group_by: GroupBy) -> Vec<KsRow> {
    let mut groups: BTreeMap<String, Vec<&FeatureVector>> = BTreeMap::new();
    for v in vectors {
        let key = match group_by {
            GroupBy::Label => match v.label {
                Some(true) => "controversial".to_string(),
                Some(false) => "non_controversial".to_string(),
                None => continue,
            },
            GroupBy::Topic => v.topic.clone(),
        };
        groups.entry(key).or_default().push(v);
    }
    let pairs: Vec<(&String, &String)> = match group_by {
        GroupBy::Label => {
            let c = groups.get_key_value("controversial").map(|(k, _)| k);
            let n = groups.get_key_value("non_controversial").map(|(k, _)| k);
            c.zip(n).into_iter().collect()
        }
        GroupBy::Topic => {
            let keys: Vec<&String> = groups.keys().collect();
            let mut p = Vec::new();
            for (x, a) in keys.iter().enumerate() {
                for b in &keys[x + 1..] {
                    p.push((*a, *b));
                }
            }
            p
        }
    };
    let mut rows = Vec::new();
    for &f in features {
        for &(a, b) in &pairs {
            let xa: Vec<f64> = groups[a].iter().map(|v| v.get(f)).collect();
            let xb: Vec<f64> = groups[b].iter().map(|v| v.get(f)).collect();
            if let Ok(r) = ks_two_sample(&xa, &xb) {
                rows.push(KsRow {
                    feature: f.name().to_string(),
                    group_a: a.clone(),
                    group_b: b.clone(),
                    statistic: r.statistic,
                    p_value: r.p_value,
                    n1: r.n1,
                    n2: r.n2,
                });
            }
        }
    }
    rows
}

pub fn write_ks_csv<W: std::io::Write>(out: W, rows: &[KsRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Config(format!("csv output: {e}")))?;
    }
    w.flush().map_err(|e| Error::Config(format!("csv output: {e}")))?;
    Ok(())
}
