use thiserror::Error;

/// Every failure the library reports.
///
/// Variants are grouped by the exit-code class the command line maps them to:
/// certificate failures (the geometry did not certify) versus input errors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("element is not hyperbolic (|trace| = {trace})")]
    NotHyperbolic { trace: f64 },

    #[error("unknown generator label `{0}`")]
    UnknownLabel(String),

    #[error("invalid genus {0}: must be at least 2")]
    InvalidGenus(usize),

    #[error("tile enumeration up to word length {cutoff} does not surround base vertex {vertex} (angle sum {angle_sum})")]
    NetIncomplete {
        cutoff: usize,
        vertex: usize,
        angle_sum: f64,
    },

    #[error("degenerate geodesic: endpoints {0} and {1} collide")]
    DegenerateGeodesic(f64, f64),

    #[error("J(v) construction failed at base vertex {vertex}: {reason}")]
    ConstructionFailure { vertex: usize, reason: String },

    #[error("partition interval {0} lies in no branch domain")]
    UncoveredInterval(usize),

    #[error("expansion not certified: {0}")]
    ExpansionFailure(String),

    #[error("Markov property violated: {0}")]
    MarkovFailure(String),

    #[error("transported partition points leave the reference cyclic order at index {0}")]
    OrderViolation(usize),

    #[error("preperiodic code extraction failed for partition point {index}: {reason}")]
    CodeFailure { index: usize, reason: String },

    #[error("word is empty")]
    EmptyWord,

    #[error("word is not admissible at position {0}")]
    Inadmissible(usize),

    #[error("symbol {symbol} out of range for alphabet of size {size}")]
    SymbolOutOfRange { symbol: usize, size: usize },

    #[error("systems have different transition matrices")]
    CombinatoricsMismatch,

    #[error("transition graph is not strongly connected")]
    NotIrreducible,

    #[error("potentials live at different depths ({0} vs {1})")]
    DepthMismatch(usize, usize),

    #[error("invalid quasisymmetry constant M = {0} (need M >= 1)")]
    InvalidM(f64),

    #[error("invalid quasiconformal dilatation K = {0} (need K >= 1)")]
    InvalidK(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("cache format version {found} does not match {expected}")]
    CacheVersion { found: u32, expected: u32 },

    #[error("cache content hash mismatch")]
    CacheHash,

    #[error("serialization: {0}")]
    Serialization(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of a geometric certificate (Markov, expansion, order,
    /// discreteness health checks) as opposed to malformed input.
    pub fn is_certificate_failure(&self) -> bool {
        matches!(
            self,
            Error::NotHyperbolic { .. }
                | Error::NetIncomplete { .. }
                | Error::DegenerateGeodesic(..)
                | Error::ConstructionFailure { .. }
                | Error::UncoveredInterval(_)
                | Error::ExpansionFailure(_)
                | Error::MarkovFailure(_)
                | Error::OrderViolation(_)
                | Error::CodeFailure { .. }
                | Error::NotIrreducible
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
