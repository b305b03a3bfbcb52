//! Word Mover's Distance between bag-of-words documents.
//!
//! Every word instance carries mass `1/a` in a document of length `a`;
//! repeated words are expanded rather than aggregated. Word instances are
//! ordered canonically (tokens sorted, duplicates adjacent) when building
//! cost and flow matrices.

use std::collections::BTreeMap;
use std::fmt;

use crate::embedding::{euclidean, EmbeddingTable};
use crate::{assignment, simplex, Error, Result};

/// Largest matrix handled by [`brute_force_min_permutation`].
pub const MAX_BRUTE_FORCE: usize = 9;

/// Unordered multiset of tokens with at least one word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BowDocument {
    counts: BTreeMap<String, usize>,
    len: usize,
}

impl BowDocument {
    pub fn from_words<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut counts = BTreeMap::new();
        let mut len = 0;
        for w in words {
            let w = w.into();
            if w.is_empty() {
                return Err(Error::EmptyToken);
            }
            *counts.entry(w).or_insert(0) += 1;
            len += 1;
        }
        if len == 0 {
            return Err(Error::EmptyDocument);
        }
        Ok(Self { counts, len })
    }

    /// Total number of word instances.
    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count(&self, word: &str) -> usize {
        self.counts.get(word).copied().unwrap_or(0)
    }

    /// `(token, multiplicity)` pairs in token order.
    pub fn counts(&self) -> impl Iterator<Item = (&str, usize)> {
        self.counts.iter().map(|(w, &c)| (w.as_str(), c))
    }

    /// Word instances in canonical order.
    pub fn words(&self) -> Vec<&str> {
        let mut out = Vec::with_capacity(self.len);
        for (w, &c) in &self.counts {
            out.extend(std::iter::repeat_n(w.as_str(), c));
        }
        out
    }
}

impl fmt::Display for BowDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, w) in self.words().into_iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(w)?;
        }
        Ok(())
    }
}

/// Dense non-negative cost matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::BadMasses(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::BadCost {
                row: k / cols,
                col: k % cols,
                value: data[k],
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Transport plan between word instances.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FlowMatrix {
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.data
            .chunks(self.cols)
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for row in self.data.chunks(self.cols) {
            for (s, x) in sums.iter_mut().zip(row) {
                *s += x;
            }
        }
        sums
    }

    /// Cells carrying more than `tol` flow.
    pub fn support(&self, tol: f64) -> Vec<(usize, usize)> {
        (0..self.rows)
            .flat_map(|i| (0..self.cols).map(move |j| (i, j)))
            .filter(|&(i, j)| self.get(i, j) > tol)
            .collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_raw(
            self.rows,
            self.cols,
            self.data.iter().map(|x| x * factor).collect(),
        )
    }

    pub fn cost(&self, cost: &CostMatrix) -> f64 {
        self.data.iter().zip(cost.data()).map(|(t, c)| t * c).sum()
    }
}

/// A bijection between the rows and columns of a square cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationMatching {
    /// `mapping[i]` is the column matched to row `i`.
    pub mapping: Vec<usize>,
    pub total_cost: f64,
}

impl PermutationMatching {
    fn from_mapping(mapping: Vec<usize>, cost: &CostMatrix) -> Self {
        let total_cost = mapping
            .iter()
            .enumerate()
            .map(|(i, &j)| cost.get(i, j))
            .sum();
        Self {
            mapping,
            total_cost,
        }
    }

    /// The matching as a flow with mass `1/n` per matched cell.
    pub fn flow(&self) -> FlowMatrix {
        let n = self.mapping.len();
        let mut data = vec![0.0; n * n];
        for (i, &j) in self.mapping.iter().enumerate() {
            data[i * n + j] = 1.0 / n as f64;
        }
        FlowMatrix::from_raw(n, n, data)
    }
}

#[derive(Debug, Clone)]
pub struct WmdSolution {
    pub distance: f64,
    pub flow: FlowMatrix,
}

/// Pairwise word distances between the canonical word instances of two documents.
pub fn cost_matrix(
    table: &EmbeddingTable,
    d1: &BowDocument,
    d2: &BowDocument,
) -> Result<CostMatrix> {
    let rows = d1
        .words()
        .into_iter()
        .map(|w| table.vector(w))
        .collect::<Result<Vec<_>>>()?;
    let cols = d2
        .words()
        .into_iter()
        .map(|w| table.vector(w))
        .collect::<Result<Vec<_>>>()?;
    CostMatrix::from_fn(rows.len(), cols.len(), |i, j| euclidean(rows[i], cols[j]))
}

/// Word Mover's Distance with an optimal flow.
///
/// Equal-length documents go through the assignment solver, others through
/// the transportation simplex ([`wmd_lp`]).
pub fn wmd(table: &EmbeddingTable, d1: &BowDocument, d2: &BowDocument) -> Result<WmdSolution> {
    if d1.len() == d2.len() {
        let matching = wmd_assignment(table, d1, d2)?;
        Ok(WmdSolution {
            distance: matching.total_cost / d1.len() as f64,
            flow: matching.flow(),
        })
    } else {
        wmd_lp(table, d1, d2)
    }
}

/// Word Mover's Distance solved as a transportation linear program.
pub fn wmd_lp(table: &EmbeddingTable, d1: &BowDocument, d2: &BowDocument) -> Result<WmdSolution> {
    let cost = cost_matrix(table, d1, d2)?;
    let (a, b) = (d1.len(), d2.len());
    // integer masses (b per source instance, a per sink) keep every pivot exact
    let plan = simplex::solve(&vec![b as f64; a], &vec![a as f64; b], &cost)?;
    let total = (a * b) as f64;
    Ok(WmdSolution {
        distance: plan.cost / total,
        flow: plan.flow.scaled(1.0 / total),
    })
}

/// Minimum-cost whole-word matching between equal-length documents.
///
/// `total_cost / n` equals the Word Mover's Distance.
pub fn wmd_assignment(
    table: &EmbeddingTable,
    d1: &BowDocument,
    d2: &BowDocument,
) -> Result<PermutationMatching> {
    if d1.len() != d2.len() {
        return Err(Error::UnequalLengths {
            left: d1.len(),
            right: d2.len(),
        });
    }
    let cost = cost_matrix(table, d1, d2)?;
    let mapping = assignment::solve(&cost)?;
    Ok(PermutationMatching::from_mapping(mapping, &cost))
}

/// Exact minimum over all `n!` permutations.
///
/// Ties resolve to the lexicographically smallest permutation.
pub fn brute_force_min_permutation(cost: &CostMatrix) -> Result<PermutationMatching> {
    let n = cost.rows();
    if cost.cols() != n {
        return Err(Error::NotSquare {
            rows: n,
            cols: cost.cols(),
        });
    }
    if n > MAX_BRUTE_FORCE {
        return Err(Error::TooLarge {
            what: "brute-force matrix size",
            size: n,
            limit: MAX_BRUTE_FORCE,
        });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_cost = f64::INFINITY;
    loop {
        let c: f64 = perm.iter().enumerate().map(|(i, &j)| cost.get(i, j)).sum();
        if c < best_cost {
            best_cost = c;
            best.copy_from_slice(&perm);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(PermutationMatching::from_mapping(best, cost))
}

/// Advances to the next permutation in lexicographic order.
pub(crate) fn next_permutation<T: Ord>(xs: &mut [T]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let mut i = xs.len() - 1;
    while i > 0 && xs[i - 1] >= xs[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = xs.len() - 1;
    while xs[j] <= xs[i - 1] {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}
