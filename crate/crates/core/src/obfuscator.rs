//! Document obfuscation.
//!
//! Pipeline per document: tokenize and drop stopwords, drop out-of-vocabulary
//! tokens, resample to a fixed length from the empirical word frequencies,
//! then replace every word by the vocabulary word nearest to its noisy vector.

use std::collections::HashSet;
use std::io::BufRead;

use rand::Rng;
use rayon::prelude::*;

use crate::laplace::{Epsilon, NoiseSample};
use crate::transport::BowDocument;
use crate::{seeded_rng, CorpusError, EmbeddingTable, Error, Result};

/// What to do with tokens missing from the embedding table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OovPolicy {
    /// Drop them and list them in the report.
    #[default]
    Skip,
    /// Fail the document.
    Strict,
}

#[derive(Debug, Clone)]
pub struct PreprocessConfig {
    fixed_length: usize,
    lowercase: bool,
    stopwords: HashSet<String>,
    oov: OovPolicy,
}

impl PreprocessConfig {
    /// Lowercasing on, no stopwords, OOV tokens skipped.
    pub fn new(fixed_length: usize) -> Result<Self> {
        if fixed_length == 0 {
            return Err(Error::ZeroLength);
        }
        Ok(Self {
            fixed_length,
            lowercase: true,
            stopwords: HashSet::new(),
            oov: OovPolicy::Skip,
        })
    }

    /// Stopwords are compared after lowercasing when lowercasing is on.
    pub fn with_stopwords<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.stopwords = words.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_lowercase(mut self, lowercase: bool) -> Self {
        self.lowercase = lowercase;
        self
    }

    pub fn with_oov_policy(mut self, oov: OovPolicy) -> Self {
        self.oov = oov;
        self
    }

    pub fn fixed_length(&self) -> usize {
        self.fixed_length
    }

    pub fn lowercase(&self) -> bool {
        self.lowercase
    }

    pub fn oov_policy(&self) -> OovPolicy {
        self.oov
    }

    fn is_stopword(&self, token: &str) -> bool {
        if self.lowercase {
            self.stopwords
                .iter()
                .any(|s| s == token || s.to_lowercase() == token)
        } else {
            self.stopwords.contains(token)
        }
    }
}

/// Reads a stopword list, one token per line. Blank lines are ignored.
pub fn load_stopwords<R: BufRead>(source: R) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for line in source.lines() {
        let line = line?;
        let word = line.trim();
        if !word.is_empty() {
            out.push(word.to_owned());
        }
    }
    Ok(out)
}

/// Splits on whitespace and trims non-alphanumeric characters from both ends
/// of each piece. Pieces that trim to nothing are dropped.
pub fn tokenize(raw: &str, lowercase: bool) -> Vec<String> {
    raw.split_whitespace()
        .map(|piece| piece.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|t| !t.is_empty())
        .map(|t| {
            if lowercase {
                t.to_lowercase()
            } else {
                t.to_owned()
            }
        })
        .collect()
}

/// Tokenizes and removes stopwords.
pub fn preprocess(raw: &str, config: &PreprocessConfig) -> Result<BowDocument> {
    let tokens = tokenize(raw, config.lowercase)
        .into_iter()
        .filter(|t| !config.is_stopword(t));
    BowDocument::from_words(tokens)
}

/// Draws `m` words i.i.d. from the word frequencies of `d`.
pub fn fix_length<R: Rng + ?Sized>(d: &BowDocument, m: usize, rng: &mut R) -> Result<BowDocument> {
    if m == 0 {
        return Err(Error::ZeroLength);
    }
    let words = d.words();
    BowDocument::from_words((0..m).map(|_| words[rng.random_range(0..words.len())]))
}

/// Perturbs one word's vector with Laplace noise and snaps back to the vocabulary.
pub fn obfuscate_word<'t, R: Rng + ?Sized>(
    table: &'t EmbeddingTable,
    word: &str,
    eps: Epsilon,
    rng: &mut R,
) -> Result<&'t str> {
    let mut z = Vec::with_capacity(table.dimension());
    obfuscate_into(table, word, eps, rng, &mut z)
}

fn obfuscate_into<'t, R: Rng + ?Sized>(
    table: &'t EmbeddingTable,
    word: &str,
    eps: Epsilon,
    rng: &mut R,
    scratch: &mut Vec<f64>,
) -> Result<&'t str> {
    let x = table.vector(word)?;
    let noise = NoiseSample::draw(table.dimension(), eps, rng)?;
    noise.apply_into(x, scratch);
    table.nearest_word(scratch)
}

/// Obfuscates a word sequence slot by slot, preserving order.
pub fn obfuscate_words<'t, R: Rng + ?Sized>(
    table: &'t EmbeddingTable,
    words: &[&str],
    eps: Epsilon,
    rng: &mut R,
) -> Result<Vec<&'t str>> {
    let mut scratch = Vec::with_capacity(table.dimension());
    words
        .iter()
        .map(|w| obfuscate_into(table, w, eps, rng, &mut scratch))
        .collect()
}

/// Result of obfuscating one document.
#[derive(Debug, Clone, PartialEq)]
pub struct ObfuscationReport {
    /// Tokens left after stopword removal, before OOV filtering.
    pub input_length: usize,
    pub output_words: BowDocument,
    /// Skipped out-of-vocabulary tokens, one entry per occurrence.
    pub oov_words: Vec<String>,
    pub seed: u64,
    pub epsilon: Epsilon,
}

/// Runs the full pipeline on one document with an RNG seeded from `seed`.
pub fn obfuscate_document(
    table: &EmbeddingTable,
    raw: &str,
    config: &PreprocessConfig,
    eps: Epsilon,
    seed: u64,
) -> Result<ObfuscationReport> {
    let bow = preprocess(raw, config)?;
    let mut known = Vec::with_capacity(bow.len());
    let mut oov_words = Vec::new();
    // walk the raw token order so the OOV list reads like the input
    for token in tokenize(raw, config.lowercase) {
        if config.is_stopword(&token) {
            continue;
        }
        if table.contains(&token) {
            known.push(token);
        } else if config.oov == OovPolicy::Strict {
            return Err(Error::OutOfVocabulary(token));
        } else {
            oov_words.push(token);
        }
    }
    let known = match BowDocument::from_words(known) {
        Ok(d) => d,
        Err(Error::EmptyDocument) => return Err(Error::NoKnownWords),
        Err(e) => return Err(e),
    };

    let mut rng = seeded_rng(seed);
    let fixed = fix_length(&known, config.fixed_length, &mut rng)?;
    let noisy = obfuscate_words(table, &fixed.words(), eps, &mut rng)?;
    Ok(ObfuscationReport {
        input_length: bow.len(),
        output_words: BowDocument::from_words(noisy)?,
        oov_words,
        seed,
        epsilon: eps,
    })
}

/// Obfuscates every document independently; document `i` uses seed
/// `base_seed + i` (wrapping). Output order matches input order and does not
/// depend on how the work is scheduled.
pub fn obfuscate_corpus<S: AsRef<str> + Sync>(
    table: &EmbeddingTable,
    docs: &[S],
    config: &PreprocessConfig,
    eps: Epsilon,
    base_seed: u64,
) -> std::result::Result<Vec<ObfuscationReport>, CorpusError> {
    let results: Vec<Result<ObfuscationReport>> = docs
        .par_iter()
        .enumerate()
        .map(|(i, doc)| {
            obfuscate_document(
                table,
                doc.as_ref(),
                config,
                eps,
                base_seed.wrapping_add(i as u64),
            )
        })
        .collect();
    let mut reports = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(report) => reports.push(report),
            Err(e) => failures.push((i, e)),
        }
    }
    if failures.is_empty() {
        Ok(reports)
    } else {
        Err(CorpusError { failures })
    }
}
