use alloc::string::String;

use crate::series::MonthStamp;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("series must contain at least one observation")]
    EmptySeries,
    #[error("non-finite value at position {index} of series `{name}`")]
    NonFinite { name: String, index: usize },
    #[error("invalid month {year}-{month:02}")]
    InvalidMonth { year: i32, month: u32 },
    #[error("series do not overlap on at least two months")]
    EmptyOverlap,
    #[error("non-positive level {value} at {date} in series `{name}`")]
    NonPositiveLevel { name: String, date: MonthStamp, value: f64 },
    #[error("too short: need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("zero variance in `{0}`")]
    ZeroVariance(String),
    #[error("benchmark series has no positive value in group {group}")]
    DegenerateBenchmark { group: usize },
    #[error("aggregate index is identically zero")]
    AllZero,
    #[error("no data for vocabulary term `{0}`")]
    MissingTerm(String),
    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),
    #[error("invalid query group {group}: {reason}")]
    InvalidGroup { group: usize, reason: String },
    #[error("regressor matrix is rank deficient")]
    RankDeficient,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("residual covariance is singular")]
    SingularSigma,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("instrument is irrelevant: scalar moment {moment:e} below floor {floor:e}")]
    IrrelevantInstrument { moment: f64, floor: f64 },
    #[error("too few reference observations: need {needed}, got {got}")]
    TooFewReferenceObs { needed: usize, got: usize },
    #[error("data-generating process is not stable (spectral radius {radius})")]
    UnstableDgp { radius: f64 },
    #[error("{failed} of {total} replicates failed")]
    TooManyFailures { failed: usize, total: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
