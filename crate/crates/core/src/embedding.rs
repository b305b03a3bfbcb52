//! Word-embedding lookup tables.
//!
//! The text format is the one pre-trained vectors ship in: one entry per line,
//! `<token> <f1> ... <fk>`, single spaces, no header.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use crate::{Error, Result};

/// A finite real vector.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVector(Vec<f64>);

impl WordVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::ZeroDimension);
        }
        if let Some(index) = components.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(components))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Euclidean distance. Both vectors must have the same dimension.
    pub fn distance(&self, other: &WordVector) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(euclidean(&self.0, &other.0))
    }
}

impl AsRef<[f64]> for WordVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub(crate) fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_euclidean(a, b).sqrt()
}

/// Immutable vocabulary-to-vector map.
///
/// Entries are kept sorted by token, so a linear scan that keeps the first
/// strict minimum resolves nearest-word ties to the lexicographically
/// smallest token.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dimension: usize,
    words: Vec<String>,
    // row-major, words.len() x dimension
    data: Vec<f64>,
    index: HashMap<String, usize>,
}

impl EmbeddingTable {
    /// Builds a table from `(token, vector)` pairs.
    pub fn from_entries<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut rows = Vec::new();
        for (line, (token, components)) in entries.into_iter().enumerate() {
            let token = token.into();
            if token.is_empty() || token.chars().any(char::is_whitespace) {
                return Err(Error::MissingToken { line: line + 1 });
            }
            rows.push((token, WordVector::new(components)?));
        }
        Self::from_rows(rows)
    }

    fn from_rows(mut rows: Vec<(String, WordVector)>) -> Result<Self> {
        let dimension = match rows.first() {
            Some((_, v)) => v.dim(),
            None => return Err(Error::EmptyTable),
        };
        for (line, (_, v)) in rows.iter().enumerate() {
            if v.dim() != dimension {
                return Err(Error::RowDimension {
                    line: line + 1,
                    expected: dimension,
                    found: v.dim(),
                });
            }
        }
        let mut seen = HashMap::with_capacity(rows.len());
        for (line, (token, _)) in rows.iter().enumerate() {
            if seen.insert(token.as_str(), line).is_some() {
                return Err(Error::DuplicateToken {
                    line: line + 1,
                    token: token.clone(),
                });
            }
        }
        drop(seen);

        rows.sort_by(|a, b| a.0.cmp(&b.0));
        let mut words = Vec::with_capacity(rows.len());
        let mut data = Vec::with_capacity(rows.len() * dimension);
        for (token, v) in rows {
            words.push(token);
            data.extend_from_slice(v.as_slice());
        }
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Ok(Self {
            dimension,
            words,
            data,
            index,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Vocabulary in lexicographic order.
    pub fn words(&self) -> impl ExactSizeIterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    /// Raw components of a word's vector.
    pub fn vector(&self, word: &str) -> Result<&[f64]> {
        let i = self
            .index
            .get(word)
            .ok_or_else(|| Error::OutOfVocabulary(word.to_owned()))?;
        Ok(self.row(*i))
    }

    pub fn lookup(&self, word: &str) -> Result<WordVector> {
        self.vector(word).map(|v| WordVector(v.to_vec()))
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn word_distance(&self, w1: &str, w2: &str) -> Result<f64> {
        Ok(euclidean(self.vector(w1)?, self.vector(w2)?))
    }

    /// Exhaustive nearest-neighbour scan; ties go to the smallest token.
    pub fn nearest_word(&self, v: &[f64]) -> Result<&str> {
        check_dim(self.dimension, v.len())?;
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for i in 0..self.words.len() {
            let d = squared_euclidean(self.row(i), v);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        Ok(&self.words[best])
    }

    /// Groups of distinct words that share an identical vector.
    ///
    /// Such words are legal, but only the smallest token of each group can
    /// ever be produced by [`nearest_word`](Self::nearest_word).
    pub fn duplicate_vectors(&self) -> Vec<Vec<&str>> {
        let mut groups: HashMap<Vec<u64>, Vec<&str>> = HashMap::new();
        for (i, w) in self.words.iter().enumerate() {
            // +0.0 and -0.0 are the same point
            let key = self.row(i).iter().map(|c| (c + 0.0).to_bits()).collect();
            groups.entry(key).or_default().push(w);
        }
        let mut dups: Vec<Vec<&str>> = groups.into_values().filter(|g| g.len() > 1).collect();
        dups.sort();
        dups
    }

    /// Writes the table in the text format accepted by [`load_embeddings`].
    /// Floats are written in shortest round-trip form.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (i, w) in self.words.iter().enumerate() {
            out.write_all(w.as_bytes())?;
            for c in self.row(i) {
                write!(out, " {c:?}")?;
            }
            out.write_all(b"\n")?;
        }
        out.flush()
    }
}

/// Parses an embedding table from its text format.
///
/// Blank lines are ignored. The dimension is taken from the first entry.
pub fn load_embeddings<R: BufRead>(source: R) -> Result<EmbeddingTable> {
    let mut rows: Vec<(String, WordVector)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut dimension = None;
    for (n, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = n + 1;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(' ');
        let token = match fields.next() {
            Some(t) if !t.is_empty() => t,
            _ => return Err(Error::MissingToken { line: lineno }),
        };
        let components = fields
            .map(|f| match f.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(Error::BadFloat {
                    line: lineno,
                    field: f.to_owned(),
                }),
            })
            .collect::<Result<Vec<f64>>>()?;
        let expected = *dimension.get_or_insert(components.len());
        if components.len() != expected {
            return Err(Error::RowDimension {
                line: lineno,
                expected,
                found: components.len(),
            });
        }
        if expected == 0 {
            return Err(Error::ZeroDimension);
        }
        if !seen.insert(token.to_owned()) {
            return Err(Error::DuplicateToken {
                line: lineno,
                token: token.to_owned(),
            });
        }
        rows.push((token.to_owned(), WordVector(components)));
    }
    EmbeddingTable::from_rows(rows)
}
