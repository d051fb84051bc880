mod common;

use std::collections::HashMap;

use common::{chain, oracle, random_thread, star, Thread};
use controversy_core::features::{
    feature_vector, feature_vector_with, score_text, tokenize, Feature, FeatureConfig, FeatureMask, Lexicon, Mode,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn all(t: &Thread, lex: &Lexicon) -> [f64; 13] {
    feature_vector(&t.tree(), lex, Mode::Psychology).values
}

/// Renames comments so that siblings with equal timestamps change order.
fn relabel(t: &Thread, seed: u64) -> Thread {
    let mut ids: Vec<String> = t.comments.iter().map(|c| c.comment_id.clone()).collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let map: HashMap<String, String> =
        t.comments.iter().zip(&ids).map(|(c, new)| (c.comment_id.clone(), format!("r{new}"))).collect();
    let mut out = t.clone();
    for c in &mut out.comments {
        c.comment_id = map[&c.comment_id].clone();
        if let Some(p) = map.get(&c.parent_id) {
            c.parent_id = p.clone();
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn features_match_brute_force(seed in any::<u64>()) {
        let lex = Lexicon::builtin();
        let t = random_thread(seed, 50);
        let got = all(&t, &lex);
        let want = oracle(&t, &lex);
        for f in Feature::ALL {
            prop_assert!((got[f.index()] - want[f.index()]).abs() <= 1e-12, "{}: {} vs {}", f.name(), got[f.index()], want[f.index()]);
        }
    }

    #[test]
    fn insertion_order_changes_nothing(seed in any::<u64>(), shuffle in any::<u64>()) {
        let lex = Lexicon::builtin();
        let t = random_thread(seed, 50);
        prop_assert_eq!(all(&t, &lex), all(&t.shuffled(shuffle), &lex));
    }

    #[test]
    fn gradients_ignore_sibling_order(seed in any::<u64>(), perm in any::<u64>()) {
        let lex = Lexicon::builtin();
        let t = random_thread(seed, 50);
        let a = all(&t, &lex);
        let b = all(&relabel(&t, perm), &lex);
        prop_assert_eq!(a[Feature::AscendingGradient.index()], b[Feature::AscendingGradient.index()]);
        prop_assert_eq!(a[Feature::TierAscendingGradient.index()], b[Feature::TierAscendingGradient.index()]);
    }

    #[test]
    fn time_translation_changes_nothing(seed in any::<u64>(), shift in 0i64..1_000_000_000) {
        let lex = Lexicon::builtin();
        let t = random_thread(seed, 50);
        prop_assert_eq!(all(&t, &lex), all(&t.shift_times(shift), &lex));
    }

    #[test]
    fn like_scaling_scales_q(seed in any::<u64>(), k in 1u64..1000) {
        let lex = Lexicon::builtin();
        let t = random_thread(seed, 50);
        let q = all(&t, &lex)[Feature::AvgUps.index()];
        let scaled = all(&t.map_likes(|x| x * k), &lex)[Feature::AvgUps.index()];
        prop_assert!((scaled - k as f64 * q).abs() <= 1e-12 * scaled.max(1.0));
    }

    #[test]
    fn gradients_only_see_like_order(seed in any::<u64>(), a in 1u64..50, b in 0u64..1000) {
        let lex = Lexicon::builtin();
        let t = random_thread(seed, 50);
        let base = all(&t, &lex);
        for u in [t.map_likes(|x| a * x + b), t.map_likes(|x| x * x * x + b), t.map_likes(|x| 1 << x)] {
            let v = all(&u, &lex);
            prop_assert_eq!(base[Feature::AscendingGradient.index()], v[Feature::AscendingGradient.index()]);
            prop_assert_eq!(base[Feature::TierAscendingGradient.index()], v[Feature::TierAscendingGradient.index()]);
        }
        for f in [Feature::AscendingGradient, Feature::TierAscendingGradient] {
            prop_assert!((0.0..=1.0).contains(&base[f.index()]));
        }
    }

    #[test]
    fn negated_lexicon_negates_emotion(seed in any::<u64>()) {
        let lex = Lexicon::builtin();
        let t = random_thread(seed, 50);
        let a = all(&t, &lex);
        let b = all(&t, &lex.negated());
        for f in [Feature::CommentEmotion, Feature::PostEmotion] {
            prop_assert_eq!(a[f.index()], -b[f.index()]);
        }
    }

    #[test]
    fn comment_emotion_is_mean_of_scores(seed in any::<u64>(), absolute in any::<bool>()) {
        let lex = Lexicon::builtin();
        let t = random_thread(seed, 50);
        let cfg = FeatureConfig { absolute_comment_emotion: absolute, ..FeatureConfig::default() };
        let got = feature_vector_with(&t.tree(), &lex, FeatureMask::for_mode(Mode::Psychology), &cfg)
            .get(Feature::CommentEmotion);
        let scores: Vec<f64> = t
            .comments
            .iter()
            .map(|c| score_text(&c.text, &lex))
            .map(|s| if absolute { s.abs() } else { s })
            .collect();
        let want = if scores.is_empty() { 0.0 } else { scores.iter().sum::<f64>() / scores.len() as f64 };
        prop_assert!((got - want).abs() <= 1e-12);
    }

    #[test]
    fn token_order_does_not_change_scores(words in prop::collection::vec(prop::sample::select(common::WORDS.to_vec()), 0..12), seed in any::<u64>()) {
        let lex = Lexicon::builtin();
        let text = words.join(" ");
        let mut shuffled: Vec<&str> = tokenize(&text).collect();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = score_text(&text, &lex);
        prop_assert!((a - score_text(&shuffled.join(" "), &lex)).abs() <= 1e-12);
        prop_assert_eq!(a.to_bits(), score_text(&text, &lex).to_bits());
    }
}

#[test]
fn chains_and_stars() {
    let lex = Lexicon::builtin();
    for n in 1..=30 {
        let c = all(&chain(n), &lex);
        assert_eq!(c[Feature::Depth.index()], n as f64);
        assert_eq!(c[Feature::Breadth.index()], 1.0);
        let s = all(&star(n), &lex);
        assert_eq!(s[Feature::Depth.index()], 1.0);
        assert_eq!(s[Feature::Breadth.index()], n as f64);
        assert_eq!(s[Feature::AscendingGradient.index()], 0.0);
    }
}
