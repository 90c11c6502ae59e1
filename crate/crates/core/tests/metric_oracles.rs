//! Metric values checked against hand-computed results.

use approx::assert_abs_diff_eq;
use eventstory_core::corpus::{validate_splits, Dataset, DatasetManifest, Split};
use eventstory_core::metrics::{
    bleu_n, distinct_n, intra_story_repetition, lexical_repetition, perplexity, rouge_l, rouge_n,
};
use eventstory_core::text::tokenize;

fn one(s: &str) -> Vec<Vec<String>> {
    vec![tokenize(s)]
}

#[test]
fn one_word_substitution() {
    // 2 of 3 unigrams shared: P = R = F = 2/3; 1 of 2 bigrams shared.
    let c = one("the cat sat");
    let r = one("the cat ran");
    assert_abs_diff_eq!(rouge_n(&c, &r, 1).unwrap(), 200.0 / 3.0, epsilon = 1e-9);
    assert_abs_diff_eq!(rouge_n(&c, &r, 2).unwrap(), 50.0, epsilon = 1e-9);
    assert_abs_diff_eq!(rouge_l(&c, &r).unwrap(), 200.0 / 3.0, epsilon = 1e-9);
    assert_abs_diff_eq!(bleu_n(&c, &r, 1).unwrap(), 2.0 / 3.0, epsilon = 1e-12);
    // sqrt(2/3 * 1/2)
    assert_abs_diff_eq!(bleu_n(&c, &r, 2).unwrap(), (1.0f64 / 3.0).sqrt(), epsilon = 1e-12);
}

#[test]
fn brevity_penalty() {
    // candidate 2 tokens, reference 4: bp = exp(1 - 2) and all unigrams match
    let v = bleu_n(&one("a b"), &one("a b c d"), 1).unwrap();
    assert_abs_diff_eq!(v, (-1.0f64).exp(), epsilon = 1e-12);
}

#[test]
fn three_sentence_intra_repetition() {
    // context "a b c d": trigrams {abc, bcd}
    // s1 "b c d e": {bcd, cde} -> 1/2
    // s2 "x y z":   {xyz}      -> 0
    let ctx = tokenize("a b c d");
    let rep = intra_story_repetition(&ctx, &[tokenize("b c d e"), tokenize("x y z")]);
    assert_eq!(rep.ratios, vec![0.5, 0.0]);
    assert_abs_diff_eq!(rep.aggregate(), 0.25, epsilon = 1e-12);
}

#[test]
fn perplexity_of_two_tokens() {
    // probabilities 1/2 and 1/4: exp((ln 2 + ln 4) / 2) = sqrt(8)
    let p = perplexity(&[2f64.ln(), 4f64.ln()]).unwrap();
    assert_abs_diff_eq!(p, 2.828_427_124_746_19, epsilon = 1e-12);
}

#[test]
fn lexical_repetition_thresholds() {
    let stories = vec![
        tokenize("a b c d a b c d a b c d"),
        tokenize("a b c d a b c d"),
        tokenize("a b c d e"),
    ];
    assert_abs_diff_eq!(lexical_repetition(&stories, 2).unwrap(), 2.0 / 3.0, epsilon = 1e-12);
    assert_abs_diff_eq!(lexical_repetition(&stories, 3).unwrap(), 1.0 / 3.0, epsilon = 1e-12);
    assert_eq!(lexical_repetition(&stories, 4).unwrap(), 0.0);
}

#[test]
fn distinct_counts() {
    // "a b a b": unigrams {a, b} of 4, bigrams {ab, ba} of 3
    let s = one("a b a b");
    assert_abs_diff_eq!(distinct_n(&s, 1).unwrap(), 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(distinct_n(&s, 2).unwrap(), 2.0 / 3.0, epsilon = 1e-12);
}

#[test]
fn published_split_sizes() {
    let mut m = DatasetManifest::empty(Dataset::Roc);
    m.counts.insert(Split::Train, 88344);
    m.counts.insert(Split::Dev, 4908);
    m.counts.insert(Split::Test, 4909);
    assert!(validate_splits(&m).all_match());
    m.counts.insert(Split::Test, 4900);
    let bad: Vec<_> = validate_splits(&m).mismatches().map(|c| c.split).collect();
    assert_eq!(bad, vec![Split::Test]);

    let mut wp = DatasetManifest::empty(Dataset::Wp);
    wp.counts.insert(Split::Train, 26758);
    wp.counts.insert(Split::Dev, 2000);
    wp.counts.insert(Split::Test, 2000);
    assert!(validate_splits(&wp).all_match());
}
