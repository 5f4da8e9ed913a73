use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed header at line {line}: {msg}")]
    MalformedHeader { line: usize, msg: String },

    #[error("ragged lengths at line {line}: expected {expected} {what}, found {found}")]
    RaggedLengths {
        line: usize,
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("unknown class label {label:?} at line {line}")]
    UnknownClassLabel { line: usize, label: String },

    #[error("non-numeric cell {cell:?} at line {line}, column {column}")]
    NonNumericCell {
        line: usize,
        column: usize,
        cell: String,
    },

    #[error("input length {length} is shorter than the minimum of {min}")]
    InputTooShort { length: usize, min: usize },

    #[error("kernel span {span} exceeds padded input length {padded}")]
    KernelTooWide { span: usize, padded: usize },

    #[error("activation is empty")]
    EmptyActivation,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty series")]
    EmptySeries,

    #[error("warping band admits no path between lengths {p} and {q}")]
    BandTooNarrow { p: usize, q: usize },

    #[error("requested {requested} items from only {available}")]
    TooFewInstances { requested: usize, available: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("row count mismatch: {expected} vs {found}")]
    RowMismatch { expected: usize, found: usize },

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("regularization strengths must be finite and positive, got {0}")]
    DegenerateAlphas(f64),

    #[error("empty table")]
    EmptyTable,

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("missing columns: {0}")]
    MissingColumns(String),

    #[error("unsupported model version {0}")]
    UnsupportedVersion(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable variant name for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDataset(_) => "InvalidDataset",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::MalformedHeader { .. } => "MalformedHeader",
            Error::RaggedLengths { .. } => "RaggedLengths",
            Error::UnknownClassLabel { .. } => "UnknownClassLabel",
            Error::NonNumericCell { .. } => "NonNumericCell",
            Error::InputTooShort { .. } => "InputTooShort",
            Error::KernelTooWide { .. } => "KernelTooWide",
            Error::EmptyActivation => "EmptyActivation",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::EmptySeries => "EmptySeries",
            Error::BandTooNarrow { .. } => "BandTooNarrow",
            Error::TooFewInstances { .. } => "TooFewInstances",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::RowMismatch { .. } => "RowMismatch",
            Error::SingleClass => "SingleClass",
            Error::DegenerateAlphas(_) => "DegenerateAlphas",
            Error::EmptyTable => "EmptyTable",
            Error::Manifest(_) => "ManifestError",
            Error::MissingColumns(_) => "MissingColumns",
            Error::UnsupportedVersion(_) => "UnsupportedVersion",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
            Error::Csv(_) => "Csv",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
