//! Oracles and generators shared by the integration tests.
//!
//! Nothing in here calls into the code paths it is used to check: CDFs come
//! from statrs, the document-distribution oracle enumerates ordered outputs
//! directly, and random instances are built from plain vectors.

#![allow(dead_code)]

use std::collections::BTreeMap;

use docpriv::{BowDocument, EmbeddingTable, WordOutputDistribution};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, Gamma, Laplace};

/// Two-sided one-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Asymptotic KS critical value `sqrt(-ln(alpha / 2) / 2) / sqrt(n)`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// CDF of Gamma with the given shape and scale.
pub fn gamma_cdf(shape: f64, scale: f64) -> impl Fn(f64) -> f64 {
    let g = Gamma::new(shape, 1.0 / scale).unwrap();
    move |x| g.cdf(x)
}

pub fn laplace_cdf(location: f64, scale: f64) -> impl Fn(f64) -> f64 {
    let l = Laplace::new(location, scale).unwrap();
    move |x| l.cdf(x)
}

/// Upper `alpha` quantile of chi-squared with `df` degrees of freedom.
pub fn chi2_critical(df: usize, alpha: f64) -> f64 {
    ChiSquared::new(df as f64).unwrap().inverse_cdf(1.0 - alpha)
}

/// Random table of `size` words `w0..` with components uniform in `[-scale, scale]`.
pub fn random_table<R: Rng>(rng: &mut R, size: usize, dim: usize, scale: f64) -> EmbeddingTable {
    EmbeddingTable::from_entries((0..size).map(|i| {
        (
            format!("w{i}"),
            (0..dim)
                .map(|_| rng.random_range(-scale..scale))
                .collect::<Vec<f64>>(),
        )
    }))
    .unwrap()
}

pub fn random_doc<R: Rng>(rng: &mut R, table: &EmbeddingTable, len: usize) -> BowDocument {
    let vocab: Vec<&str> = table.words().collect();
    BowDocument::from_words((0..len).map(|_| vocab[rng.random_range(0..vocab.len())])).unwrap()
}

/// Random probability vector over `vocab`, strictly positive entries.
pub fn random_word_distribution<R: Rng>(
    rng: &mut R,
    input: &str,
    vocab: &[String],
) -> WordOutputDistribution {
    let raw: Vec<f64> = vocab.iter().map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    WordOutputDistribution {
        input_word: input.to_owned(),
        probabilities: vocab
            .iter()
            .cloned()
            .zip(raw.iter().map(|p| p / total))
            .collect(),
    }
}

/// Document output distribution by brute force: enumerate every ordered output
/// sequence, multiply per-slot probabilities, and collect by multiset.
pub fn ordered_collapse_oracle(
    dists: &BTreeMap<String, WordOutputDistribution>,
    doc: &BowDocument,
) -> BTreeMap<BowDocument, f64> {
    let inputs: Vec<&WordOutputDistribution> = doc.words().into_iter().map(|w| &dists[w]).collect();
    let mut vocab: Vec<&str> = inputs
        .iter()
        .flat_map(|d| d.probabilities.keys().map(String::as_str))
        .collect();
    vocab.sort_unstable();
    vocab.dedup();
    let n = inputs.len();
    let v = vocab.len();
    let mut out = BTreeMap::new();
    for code in 0..v.pow(n as u32) {
        let mut rest = code;
        let mut seq = Vec::with_capacity(n);
        let mut p = 1.0;
        for d in &inputs {
            let word = vocab[rest % v];
            rest /= v;
            p *= d.probability(word);
            seq.push(word);
        }
        *out.entry(BowDocument::from_words(seq).unwrap())
            .or_insert(0.0) += p;
    }
    out
}

/// Laplace(x, 1/eps) mass of `[lo, hi]` as a plain CDF difference.
pub fn cdf_cell_probability(x: f64, lo: f64, hi: f64, eps: f64) -> f64 {
    let cdf = laplace_cdf(x, 1.0 / eps);
    let hi_v = if hi.is_infinite() { 1.0 } else { cdf(hi) };
    let lo_v = if lo.is_infinite() { 0.0 } else { cdf(lo) };
    hi_v - lo_v
}
