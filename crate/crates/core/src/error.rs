use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("channel layout sums to {layout_dim} but features have {feature_dim} columns")]
    LayoutMismatch { layout_dim: usize, feature_dim: usize },

    #[error("unknown channel `{0}`")]
    UnknownChannel(String),

    #[error("per-channel bandwidths differ; the product identity requires one shared sigma")]
    SigmaMismatch,

    #[error("zero bandwidth: all points coincide")]
    ZeroBandwidth,

    #[error("K = {k} requires at least {} points, got {n}", k + 1)]
    TooFewPoints { k: usize, n: usize },

    #[error("NNK solver did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("node {node}: {source}")]
    AtNode {
        node: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("channel `{channel}`: {source}")]
    AtChannel {
        channel: String,
        #[source]
        source: Box<Error>,
    },

    #[error("bad magic bytes in {0}")]
    BadMagic(PathBuf),

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),

    #[error("unsupported dtype code {0}")]
    UnsupportedDtype(u16),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("trailing bytes: expected {expected} bytes, found {found}")]
    TrailingBytes { expected: usize, found: usize },

    #[error("manifest disagrees with data: {0}")]
    ManifestMismatch(String),

    #[error("malformed graph file: {0}")]
    MalformedGraph(String),

    #[error("failed to sample a valid configuration after {0} attempts")]
    SamplingExhausted(usize),

    #[error("usage: {0}")]
    Usage(String),

    #[error("{theorem} check found {violations} violation(s)")]
    VerificationFailed { theorem: String, violations: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable identifier, used on the CLI's stderr.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NonFinite { .. } => "non_finite",
            Error::InvalidInput(_) => "invalid_input",
            Error::LayoutMismatch { .. } => "layout_mismatch",
            Error::UnknownChannel(_) => "unknown_channel",
            Error::SigmaMismatch => "sigma_mismatch",
            Error::ZeroBandwidth => "zero_bandwidth",
            Error::TooFewPoints { .. } => "too_few_points",
            Error::NonConvergence { .. } => "non_convergence",
            Error::AtNode { source, .. } | Error::AtChannel { source, .. } => source.code(),
            Error::BadMagic(_) => "bad_magic",
            Error::UnsupportedVersion(_) => "unsupported_version",
            Error::UnsupportedDtype(_) => "unsupported_dtype",
            Error::Truncated { .. } => "truncated",
            Error::TrailingBytes { .. } => "trailing_bytes",
            Error::ManifestMismatch(_) => "manifest_mismatch",
            Error::MalformedGraph(_) => "malformed_graph",
            Error::SamplingExhausted(_) => "sampling_exhausted",
            Error::Usage(_) => "usage",
            Error::VerificationFailed { .. } => "verification_failed",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    /// True for errors caused by bad input files or arguments rather than by a computation.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::Io { source, .. } => source.kind() == std::io::ErrorKind::NotFound,
            Error::AtNode { source, .. } | Error::AtChannel { source, .. } => source.is_usage(),
            Error::UnknownChannel(_) | Error::Usage(_) => true,
            _ => false,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn at_node(node: usize, source: Error) -> Self {
        Error::AtNode { node, source: Box::new(source) }
    }

    pub(crate) fn at_channel(channel: &str, source: Error) -> Self {
        Error::AtChannel { channel: channel.to_string(), source: Box::new(source) }
    }
}
