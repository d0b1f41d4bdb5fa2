use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("direction has zero length")]
    ZeroDirection,

    #[error("ray origin lies on the boundary (|t| = {0:e})")]
    OriginOnBoundary(f64),

    #[error("ray origin is outside the body")]
    OriginOutside,

    #[error("length {length} exceeds histogram range {l_max}")]
    Overflow { length: f64, l_max: f64 },

    #[error("invalid crossing list: {0}")]
    InvalidCrossings(String),

    #[error("histogram has no data")]
    NoData,

    #[error("histograms have different binning")]
    BinningMismatch,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("rejection sampling gave up after {attempts} attempts (degenerate body?)")]
    Degenerate { attempts: u64 },

    #[error("kernel evaluation failed: {0}")]
    Kernel(String),

    #[error("mean chord length is not positive ({0})")]
    NonPositiveMeanChord(f64),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("crossing has no zone label")]
    UnlabeledCrossing,
}
