use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("embedding stream contains no entries")]
    EmptyTable,
    #[error("line {line}: expected {expected} vector components, found {found}")]
    RowDimension {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: duplicate token {token:?}")]
    DuplicateToken { line: usize, token: String },
    #[error("line {line}: cannot parse {field:?} as a finite float")]
    BadFloat { line: usize, field: String },
    #[error("line {line}: missing token")]
    MissingToken { line: usize },
    #[error("vector component {index} is not finite")]
    NonFinite { index: usize },
    #[error("word vectors must have at least one component")]
    ZeroDimension,
    #[error("out-of-vocabulary word {0:?}")]
    OutOfVocabulary(String),
    #[error("vector has dimension {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("tokens must be non-empty")]
    EmptyToken,
    #[error("document is empty")]
    EmptyDocument,
    #[error("document contains no in-vocabulary words")]
    NoKnownWords,
    #[error("documents have different lengths ({left} and {right})")]
    UnequalLengths { left: usize, right: usize },
    #[error("{what} is {size}, limit is {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("cost matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("cost matrix entry ({row}, {col}) = {value} is negative or not finite")]
    BadCost { row: usize, col: usize, value: f64 },
    #[error("invalid transport masses: {0}")]
    BadMasses(String),
    #[error("transportation simplex did not converge within {0} pivots")]
    NoConvergence(usize),
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("fixed length must be at least 1")]
    ZeroLength,
    #[error("trial count must be at least 1")]
    ZeroTrials,
    #[error("exact verification needs a 1-dimensional table, got dimension {0}")]
    NotOneDimensional(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Per-document failures collected while obfuscating a corpus.
#[derive(Debug)]
pub struct CorpusError {
    pub failures: Vec<(usize, Error)>,
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} document(s) failed", self.failures.len())?;
        for (index, err) in &self.failures {
            write!(f, "; document {index}: {err}")?;
        }
        Ok(())
    }
}

impl std::error::Error for CorpusError {}
