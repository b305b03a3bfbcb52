//! Metric differential privacy for bag-of-words documents.
//!
//! Documents are obfuscated word by word: each word vector is perturbed with
//! n-dimensional Laplace noise (density proportional to `exp(-eps * d2(x, z))`)
//! and snapped back to the nearest vocabulary word. The resulting mechanism is
//! `eps`-indistinguishable with respect to the Word Mover's Distance between
//! equal-length documents.
//!
//! Modules:
//!
//! * [`embedding`]: word-embedding tables, Euclidean geometry, nearest-word snapping.
//! * [`transport`]: bag-of-words documents, cost/flow matrices, Word Mover's Distance
//!   via a transportation simplex, an assignment solver, and a brute-force oracle.
//! * [`laplace`]: Gamma-radius times uniform-direction Laplace sampling.
//! * [`obfuscator`]: preprocessing, fixed-length resampling and the per-word mechanism.
//! * [`verifier`]: exact word and document output distributions on 1-D vocabularies
//!   and privacy-ratio checks.

pub mod assignment;
pub mod embedding;
mod error;
pub mod laplace;
pub mod obfuscator;
pub mod simplex;
pub mod transport;
pub mod verifier;

pub use embedding::{load_embeddings, EmbeddingTable, WordVector};
pub use error::{CorpusError, Error, Result};
pub use laplace::{
    log_density_unnormalized, sample_noise, sample_radius, sample_unit_sphere, Epsilon, NoiseSample,
};
pub use obfuscator::{
    fix_length, load_stopwords, obfuscate_corpus, obfuscate_document, obfuscate_word,
    obfuscate_words, preprocess, tokenize, ObfuscationReport, OovPolicy, PreprocessConfig,
};
pub use transport::{
    brute_force_min_permutation, cost_matrix, wmd, wmd_assignment, wmd_lp, BowDocument, CostMatrix,
    FlowMatrix, PermutationMatching, WmdSolution,
};
pub use verifier::{
    check_document_indistinguishability, check_document_indistinguishability_scaled,
    check_word_privacy, document_distribution, enumerate_documents, exact_word_distribution_1d,
    exact_word_distributions_1d, mc_word_distribution, DocumentOutputDistribution,
    MonteCarloEstimate, PrivacyCheckResult, WordOutputDistribution,
};

/// Deterministic RNG used everywhere a seed is turned into a random stream.
pub type SeededRng = rand_chacha::ChaCha8Rng;

/// Builds the crate's standard RNG from a 64-bit seed.
pub fn seeded_rng(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    SeededRng::seed_from_u64(seed)
}
