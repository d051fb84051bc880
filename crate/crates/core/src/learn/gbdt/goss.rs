use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

// Guards ceil() against products like 0.7 * 10 = 7.000000000000001.
fn ceil_frac(frac: f64, n: usize) -> usize {
    ((frac * n as f64) - 1e-9).ceil().max(0.0) as usize
}

/// Gradient-based one-side sampling.
///
/// Keeps the `ceil(a * N)` rows with the largest `|gradient|` at weight 1
/// and draws `ceil(b * N)` of the rest uniformly without replacement at
/// weight `(1 - a) / b`. When the draw covers every remaining row nothing
/// is dropped and the weight is exactly 1. Returns row indices in
/// ascending order with their weights.
pub fn goss_sample(gradients: &[f64], a: f64, b: f64, seed: u64) -> Result<(Vec<usize>, Vec<f64>)> {
    if gradients.is_empty() {
        return Err(Error::InvalidParameter("goss: no gradients".into()));
    }
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a + b > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "goss: need 0 <= a, b and a + b <= 1 (a = {a}, b = {b})"
        )));
    }
    if a == 0.0 && b == 0.0 {
        return Err(Error::InvalidParameter("goss: a = b = 0 keeps no rows".into()));
    }

    let n = gradients.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| gradients[j].abs().total_cmp(&gradients[i].abs()).then(i.cmp(&j)));

    let top_n = ceil_frac(a, n).min(n);
    let rest = &order[top_n..];
    let draw_n = if b == 0.0 { 0 } else { ceil_frac(b, n).min(rest.len()) };
    let small_weight = if draw_n == rest.len() { 1.0 } else { (1.0 - a) / b };

    let mut picked: Vec<(usize, f64)> = order[..top_n].iter().map(|&i| (i, 1.0)).collect();
    if draw_n > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        picked.extend(
            index::sample(&mut rng, rest.len(), draw_n)
                .into_iter()
                .map(|k| (rest[k], small_weight)),
        );
    }
    picked.sort_by_key(|&(i, _)| i);
    Ok(picked.into_iter().unzip())
}
