use thiserror::Error;

/// Every failure the engine can report.
///
/// Each variant maps to exactly one machine-readable code via [`Error::code`],
/// which the HTTP layer exposes verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("product `{product}` attribute `{attribute}`: {reason}")]
    SchemaViolation {
        product: String,
        attribute: String,
        reason: String,
    },
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("attribute `{0}` has no values in the catalog")]
    NoData(String),
    #[error("unknown wheel node `{0}`")]
    UnknownNode(String),
    #[error("label `{label}` is not a value of attribute `{attribute}`")]
    UnknownLabel { attribute: String, label: String },
    #[error("invalid clause on `{attribute}`: {reason}")]
    InvalidClause { attribute: String, reason: String },
    #[error("attribute `{0}` is categorical and cannot be compared")]
    NonComparableAttribute(String),
    #[error("both axes use attribute `{0}`")]
    SameAttribute(String),
    #[error("no attributes given")]
    EmptyAttrs,
    #[error("product `{0}` is not in the filtered set")]
    NotInFilteredSet(String),
    #[error("compare bucket is full (cap {0})")]
    BucketFull(usize),
    #[error("unknown product `{0}`")]
    UnknownProduct(String),
    #[error("compare bucket is empty")]
    EmptyBucket,
    #[error("product `{product}` has no value for `{attribute}`")]
    MissingValue { product: String, attribute: String },
    #[error("unknown catalog variant `{0}`")]
    UnknownVariant(String),
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("illegal transition from {from} to {to}")]
    IllegalTransition { from: String, to: String },
    #[error("product `{0}` is not in the compare bucket")]
    NotInBucket(String),
    #[error("operation not allowed in stage {0}")]
    WrongStage(String),
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error("unknown trial `{0}`")]
    UnknownTrial(String),
    #[error("trial is incomplete: {0}")]
    IncompleteTrial(String),
    #[error("survey instrument is {found}, expected {expected}")]
    WrongInstrument { expected: String, found: String },
    #[error("survey response has no answers")]
    EmptyAnswers,
    #[error("responses mix instruments or question counts")]
    MixedInstruments,
    #[error("sample is empty")]
    EmptySample,
    #[error("need at least {needed} observations, got {got}")]
    InsufficientN { needed: usize, got: usize },
    #[error("test mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("count {count} exceeds participant total {participants}")]
    CountExceedsN { count: u64, participants: u64 },
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedInput(_) => "MALFORMED_INPUT",
            Error::InvalidSchema(_) => "INVALID_SCHEMA",
            Error::SchemaViolation { .. } => "SCHEMA_VIOLATION",
            Error::UnknownAttribute(_) => "UNKNOWN_ATTRIBUTE",
            Error::NoData(_) => "NO_DATA",
            Error::UnknownNode(_) => "UNKNOWN_NODE",
            Error::UnknownLabel { .. } => "UNKNOWN_LABEL",
            Error::InvalidClause { .. } => "INVALID_CLAUSE",
            Error::NonComparableAttribute(_) => "NON_COMPARABLE_ATTRIBUTE",
            Error::SameAttribute(_) => "SAME_ATTRIBUTE",
            Error::EmptyAttrs => "EMPTY_ATTRS",
            Error::NotInFilteredSet(_) => "NOT_IN_FILTERED_SET",
            Error::BucketFull(_) => "BUCKET_FULL",
            Error::UnknownProduct(_) => "UNKNOWN_PRODUCT",
            Error::EmptyBucket => "EMPTY_BUCKET",
            Error::MissingValue { .. } => "MISSING_VALUE",
            Error::UnknownVariant(_) => "UNKNOWN_VARIANT",
            Error::UnknownSession(_) => "UNKNOWN_SESSION",
            Error::IllegalTransition { .. } => "ILLEGAL_TRANSITION",
            Error::NotInBucket(_) => "NOT_IN_BUCKET",
            Error::WrongStage(_) => "WRONG_STAGE",
            Error::UnknownTask(_) => "UNKNOWN_TASK",
            Error::UnknownTrial(_) => "UNKNOWN_TRIAL",
            Error::IncompleteTrial(_) => "INCOMPLETE_TRIAL",
            Error::WrongInstrument { .. } => "WRONG_INSTRUMENT",
            Error::EmptyAnswers => "EMPTY_ANSWERS",
            Error::MixedInstruments => "MIXED_INSTRUMENTS",
            Error::EmptySample => "EMPTY_SAMPLE",
            Error::InsufficientN { .. } => "INSUFFICIENT_N",
            Error::ModeMismatch(_) => "MODE_MISMATCH",
            Error::CountExceedsN { .. } => "COUNT_EXCEEDS_N",
            Error::Io(_) => "IO_ERROR",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
