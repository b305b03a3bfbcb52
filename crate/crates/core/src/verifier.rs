//! Exact privacy checks on small instances.
//!
//! On a 1-dimensional vocabulary the snap-to-nearest-word step partitions the
//! line into intervals, and the probability of each output word is the mass
//! the 1-D Laplace distribution puts on that word's interval. Document output
//! distributions are assembled from per-word distributions by summing over
//! the distinct orderings of each output multiset. Everything here is meant
//! for vocabularies of a handful of words and documents of at most four words.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;

use crate::laplace::Epsilon;
use crate::obfuscator::obfuscate_word;
use crate::transport::{brute_force_min_permutation, cost_matrix, next_permutation, BowDocument};
use crate::{EmbeddingTable, Error, Result};

pub const MAX_EXACT_VOCABULARY: usize = 100;
pub const MAX_DOCUMENT_LENGTH: usize = 4;
pub const MAX_OUTPUT_VOCABULARY: usize = 10;

/// Tolerance on word-level log-ratio excess.
pub const WORD_TOLERANCE: f64 = 1e-9;
/// Tolerance on document-level log-ratio excess.
pub const DOCUMENT_TOLERANCE: f64 = 1e-7;

/// Output distribution of the per-word mechanism for one input word.
#[derive(Debug, Clone, PartialEq)]
pub struct WordOutputDistribution {
    pub input_word: String,
    pub probabilities: BTreeMap<String, f64>,
}

impl WordOutputDistribution {
    pub fn probability(&self, output: &str) -> f64 {
        self.probabilities.get(output).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probabilities.values().sum()
    }
}

/// Monte Carlo estimate of a word output distribution.
#[derive(Debug, Clone)]
pub struct MonteCarloEstimate {
    pub distribution: WordOutputDistribution,
    /// `sqrt(p (1 - p) / trials)` per observed output.
    pub standard_errors: BTreeMap<String, f64>,
    pub trials: usize,
}

/// Output distribution over bag-of-words documents for one input document.
#[derive(Debug, Clone)]
pub struct DocumentOutputDistribution {
    pub input_doc: BowDocument,
    pub probabilities: BTreeMap<BowDocument, f64>,
    log_probabilities: BTreeMap<BowDocument, f64>,
}

impl DocumentOutputDistribution {
    pub fn probability(&self, output: &BowDocument) -> f64 {
        self.probabilities.get(output).copied().unwrap_or(0.0)
    }

    pub fn log_probability(&self, output: &BowDocument) -> f64 {
        self.log_probabilities
            .get(output)
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
    }

    pub fn total(&self) -> f64 {
        self.probabilities.values().sum()
    }
}

/// Where the largest log-ratio excess was observed.
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCase {
    pub input: String,
    pub other: String,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrivacyCheckResult {
    pub pairs_checked: usize,
    /// Max over (x, x', z) of `log K(x)(z) - log K(x')(z) - bound(x, x')`.
    pub max_log_ratio_excess: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub worst: Option<WorstCase>,
}

impl PrivacyCheckResult {
    fn new(tolerance: f64) -> Self {
        Self {
            pairs_checked: 0,
            max_log_ratio_excess: f64::NEG_INFINITY,
            tolerance,
            passed: true,
            worst: None,
        }
    }

    fn record(&mut self, excess: f64, worst: impl FnOnce() -> WorstCase) {
        if excess > self.max_log_ratio_excess {
            self.max_log_ratio_excess = excess;
            self.worst = Some(worst());
        }
    }

    fn finish(mut self) -> Self {
        self.passed = self.max_log_ratio_excess <= self.tolerance;
        self
    }
}

fn require_1d(table: &EmbeddingTable) -> Result<()> {
    if table.dimension() == 1 {
        Ok(())
    } else {
        Err(Error::NotOneDimensional(table.dimension()))
    }
}

/// Mass of `[lo, hi]` under a 1-D Laplace centred at `x` with rate `eps`.
///
/// Each branch avoids subtracting two CDF values that are both close to 1.
fn laplace_interval_mass(x: f64, lo: f64, hi: f64, eps: f64) -> f64 {
    if lo >= x {
        let near = 0.5 * (-eps * (lo - x)).exp();
        if hi.is_infinite() {
            near
        } else {
            near * -(-eps * (hi - lo)).exp_m1()
        }
    } else if hi <= x {
        let near = 0.5 * (-eps * (x - hi)).exp();
        if lo.is_infinite() {
            near
        } else {
            near * -(-eps * (hi - lo)).exp_m1()
        }
    } else {
        let left = if lo.is_infinite() {
            0.0
        } else {
            0.5 * (-eps * (x - lo)).exp()
        };
        let right = if hi.is_infinite() {
            0.0
        } else {
            0.5 * (-eps * (hi - x)).exp()
        };
        1.0 - left - right
    }
}

/// Exact snap probabilities for one input word on a 1-D vocabulary.
///
/// Each word owns the interval of points closer to it than to any other word.
/// Words sharing a coordinate give the whole interval to the smallest token,
/// matching the nearest-word tie rule; the others get probability 0.
pub fn exact_word_distribution_1d(
    table: &EmbeddingTable,
    word: &str,
    eps: Epsilon,
) -> Result<WordOutputDistribution> {
    require_1d(table)?;
    if table.len() > MAX_EXACT_VOCABULARY {
        return Err(Error::TooLarge {
            what: "vocabulary size",
            size: table.len(),
            limit: MAX_EXACT_VOCABULARY,
        });
    }
    let x = table.vector(word)?[0];

    let mut points: Vec<(f64, &str)> = table
        .words()
        .map(|w| (table.vector(w).expect("own word")[0], w))
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));

    let mut probabilities: BTreeMap<String, f64> =
        table.words().map(|w| (w.to_owned(), 0.0)).collect();
    // one cell per distinct coordinate, owned by the first (smallest) token
    let mut owners: Vec<(f64, &str)> = Vec::new();
    for &(c, w) in &points {
        if owners.last().is_none_or(|&(prev, _)| prev != c) {
            owners.push((c, w));
        }
    }
    for (k, &(c, w)) in owners.iter().enumerate() {
        let lo = if k == 0 {
            f64::NEG_INFINITY
        } else {
            0.5 * (owners[k - 1].0 + c)
        };
        let hi = owners
            .get(k + 1)
            .map_or(f64::INFINITY, |&(next, _)| 0.5 * (c + next));
        probabilities.insert(w.to_owned(), laplace_interval_mass(x, lo, hi, eps.value()));
    }
    Ok(WordOutputDistribution {
        input_word: word.to_owned(),
        probabilities,
    })
}

/// Exact distributions for every vocabulary word.
pub fn exact_word_distributions_1d(
    table: &EmbeddingTable,
    eps: Epsilon,
) -> Result<BTreeMap<String, WordOutputDistribution>> {
    table
        .words()
        .map(|w| exact_word_distribution_1d(table, w, eps).map(|d| (w.to_owned(), d)))
        .collect()
}

/// Empirical output frequencies of [`obfuscate_word`] over `trials` runs.
/// Works in any dimension; the result is statistical, not exact.
pub fn mc_word_distribution<R: Rng + ?Sized>(
    table: &EmbeddingTable,
    word: &str,
    eps: Epsilon,
    trials: usize,
    rng: &mut R,
) -> Result<MonteCarloEstimate> {
    if trials == 0 {
        return Err(Error::ZeroTrials);
    }
    table.vector(word)?;
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for _ in 0..trials {
        *counts
            .entry(obfuscate_word(table, word, eps, rng)?)
            .or_insert(0) += 1;
    }
    let n = trials as f64;
    let mut probabilities = BTreeMap::new();
    let mut standard_errors = BTreeMap::new();
    for (w, c) in counts {
        let p = c as f64 / n;
        probabilities.insert(w.to_owned(), p);
        standard_errors.insert(w.to_owned(), (p * (1.0 - p) / n).sqrt());
    }
    Ok(MonteCarloEstimate {
        distribution: WordOutputDistribution {
            input_word: word.to_owned(),
            probabilities,
        },
        standard_errors,
        trials,
    })
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Every multiset of `len` tokens drawn from `vocab` (sorted, deduplicated).
pub fn enumerate_documents<S: AsRef<str>>(vocab: &[S], len: usize) -> Vec<BowDocument> {
    let mut vocab: Vec<&str> = vocab.iter().map(AsRef::as_ref).collect();
    vocab.sort_unstable();
    vocab.dedup();
    let mut out = Vec::new();
    if len == 0 || vocab.is_empty() {
        return out;
    }
    // non-decreasing index sequences
    let mut idx = vec![0usize; len];
    loop {
        out.push(BowDocument::from_words(idx.iter().map(|&i| vocab[i])).expect("len >= 1"));
        let Some(pos) = idx.iter().rposition(|&i| i + 1 < vocab.len()) else {
            break;
        };
        let next = idx[pos] + 1;
        for i in &mut idx[pos..] {
            *i = next;
        }
    }
    out
}

/// Output distribution of the per-word mechanism applied to every word of `d`.
///
/// For an output multiset `z`, its probability is the sum over the distinct
/// orderings `v` of `z` of `prod_j K(w_j)(v_j)`, with the input words `w_j`
/// in canonical order. Sums are accumulated in log space.
pub fn document_distribution(
    word_dists: &BTreeMap<String, WordOutputDistribution>,
    d: &BowDocument,
) -> Result<DocumentOutputDistribution> {
    if d.len() > MAX_DOCUMENT_LENGTH {
        return Err(Error::TooLarge {
            what: "document length",
            size: d.len(),
            limit: MAX_DOCUMENT_LENGTH,
        });
    }
    let inputs: Vec<&WordOutputDistribution> = d
        .words()
        .into_iter()
        .map(|w| {
            word_dists
                .get(w)
                .ok_or_else(|| Error::OutOfVocabulary(w.to_owned()))
        })
        .collect::<Result<_>>()?;
    let mut vocab: Vec<&str> = inputs
        .iter()
        .flat_map(|dist| dist.probabilities.keys().map(String::as_str))
        .collect();
    vocab.sort_unstable();
    vocab.dedup();
    if vocab.len() > MAX_OUTPUT_VOCABULARY {
        return Err(Error::TooLarge {
            what: "output vocabulary size",
            size: vocab.len(),
            limit: MAX_OUTPUT_VOCABULARY,
        });
    }

    // log K(w_j)(v) for every slot j and output index v
    let log_k: Vec<Vec<f64>> = inputs
        .iter()
        .map(|dist| vocab.iter().map(|v| dist.probability(v).ln()).collect())
        .collect();
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    let mut probabilities = BTreeMap::new();
    let mut log_probabilities = BTreeMap::new();
    let mut terms = Vec::new();
    for z in enumerate_documents(&vocab, d.len()) {
        let mut arrangement: Vec<usize> = z.words().iter().map(|w| index[w]).collect();
        terms.clear();
        loop {
            terms.push(
                arrangement
                    .iter()
                    .enumerate()
                    .map(|(slot, &v)| log_k[slot][v])
                    .sum(),
            );
            if !next_permutation(&mut arrangement) {
                break;
            }
        }
        let lp = log_sum_exp(&terms);
        probabilities.insert(z.clone(), lp.exp());
        log_probabilities.insert(z, lp);
    }
    Ok(DocumentOutputDistribution {
        input_doc: d.clone(),
        probabilities,
        log_probabilities,
    })
}

/// `max_v log K(w)(v) - log K(w')(v) - eps * d2(w, w')` for one ordered pair.
pub fn word_pair_excess(
    dist: &WordOutputDistribution,
    other: &WordOutputDistribution,
    distance: f64,
    eps: Epsilon,
) -> (f64, Option<String>) {
    let mut worst = f64::NEG_INFINITY;
    let mut at = None;
    for (v, &p) in &dist.probabilities {
        if p == 0.0 {
            continue;
        }
        let excess = p.ln() - other.probability(v).ln() - eps.value() * distance;
        if excess > worst {
            worst = excess;
            at = Some(v.clone());
        }
    }
    (worst, at)
}

/// Checks `K(w)(v) <= exp(eps * d2(w, w')) K(w')(v)` for all words and outputs
/// of a 1-D vocabulary using exact distributions.
pub fn check_word_privacy(table: &EmbeddingTable, eps: Epsilon) -> Result<PrivacyCheckResult> {
    let dists = exact_word_distributions_1d(table, eps)?;
    let mut result = PrivacyCheckResult::new(WORD_TOLERANCE);
    for (w, dist) in &dists {
        for (w2, other) in &dists {
            let distance = table.word_distance(w, w2)?;
            let (excess, at) = word_pair_excess(dist, other, distance, eps);
            result.pairs_checked += 1;
            result.record(excess, || WorstCase {
                input: w.clone(),
                other: w2.clone(),
                output: at.unwrap_or_default(),
            });
        }
    }
    Ok(result.finish())
}

/// Checks document indistinguishability exactly on a 1-D vocabulary.
///
/// The bound for a pair is `eps * D` where `D` is the minimum whole-word
/// matching cost between the documents (unit mass per word), found by
/// enumerating permutations.
pub fn check_document_indistinguishability(
    table: &EmbeddingTable,
    docs: &[BowDocument],
    eps: Epsilon,
) -> Result<PrivacyCheckResult> {
    check_document_indistinguishability_scaled(table, docs, eps, 1.0)
}

/// As [`check_document_indistinguishability`], with the bound multiplied by
/// `bound_scale`. Scales below 1 should fail; this is how the check's power
/// is demonstrated.
pub fn check_document_indistinguishability_scaled(
    table: &EmbeddingTable,
    docs: &[BowDocument],
    eps: Epsilon,
    bound_scale: f64,
) -> Result<PrivacyCheckResult> {
    require_1d(table)?;
    if let Some(first) = docs.first() {
        if let Some(d) = docs.iter().find(|d| d.len() != first.len()) {
            return Err(Error::UnequalLengths {
                left: first.len(),
                right: d.len(),
            });
        }
    }
    let word_dists = exact_word_distributions_1d(table, eps)?;
    let dists = docs
        .iter()
        .map(|d| document_distribution(&word_dists, d))
        .collect::<Result<Vec<_>>>()?;

    let mut result = PrivacyCheckResult::new(DOCUMENT_TOLERANCE);
    for (d, dist) in docs.iter().zip(&dists) {
        for (d2, other) in docs.iter().zip(&dists) {
            let matching = brute_force_min_permutation(&cost_matrix(table, d, d2)?)?;
            let bound = bound_scale * eps.value() * matching.total_cost;
            result.pairs_checked += 1;
            for (z, &lp) in &dist.log_probabilities {
                if lp == f64::NEG_INFINITY {
                    continue;
                }
                let excess = lp - other.log_probability(z) - bound;
                result.record(excess, || WorstCase {
                    input: d.to_string(),
                    other: d2.to_string(),
                    output: z.to_string(),
                });
            }
        }
    }
    Ok(result.finish())
}
