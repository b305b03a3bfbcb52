//! Synthetic fixtures shared by the benchmarks.

use docpriv::{seeded_rng, BowDocument, EmbeddingTable};
use rand::Rng;

/// A table of `size` words `w0..` with components uniform in `[-1, 1)`.
pub fn synthetic_table(size: usize, dim: usize, seed: u64) -> EmbeddingTable {
    let mut rng = seeded_rng(seed);
    EmbeddingTable::from_entries((0..size).map(|i| {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        (format!("w{i}"), v)
    }))
    .expect("well-formed synthetic table")
}

/// A document of `len` words drawn uniformly from the table.
pub fn synthetic_document(table: &EmbeddingTable, len: usize, seed: u64) -> BowDocument {
    let mut rng = seeded_rng(seed);
    let words: Vec<&str> = table.words().collect();
    BowDocument::from_words((0..len).map(|_| words[rng.random_range(0..words.len())]))
        .expect("non-empty document")
}

/// The same document as raw text.
pub fn synthetic_text(table: &EmbeddingTable, len: usize, seed: u64) -> String {
    synthetic_document(table, len, seed).to_string()
}
