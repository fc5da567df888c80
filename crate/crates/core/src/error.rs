use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("quadrant probability {name} = {value} must be strictly positive")]
    NegativeOrZeroWeight { name: char, value: f64 },
    #[error("quadrant probabilities sum to {sum}, expected 1 within 1e-9")]
    SumOutOfTolerance { sum: f64 },
    #[error("node exponent k = {0} outside [1, 62]")]
    BadExponent(u32),

    #[error("alias table needs at least one weight")]
    EmptyInput,
    #[error("all alias weights are zero")]
    AllZeroWeights,
    #[error("alias weight {value} at index {index} is negative or not finite")]
    NegativeWeight { index: usize, value: f64 },

    #[error("fragment depth {depth} outside [1, {max}]")]
    DepthOutOfRange { depth: u32, max: u32 },
    #[error("table size limit {0} is below 4")]
    SizeLimitTooSmall(usize),
    #[error("noise level {0} outside [0, 1)")]
    NoiseOutOfRange(f64),

    #[error("edge ({u}, {v}) lies outside the declared tile")]
    EdgeOutsideDeclaredTile { u: u64, v: u64 },
    #[error("tile holds {capacity} cells but {count} distinct edges were requested")]
    CountOverflowsTile { count: u64, capacity: u128 },

    #[error("k = {0} too large for exact cell enumeration (max 12)")]
    KTooLargeForEnumeration(u32),
    #[error("invalid expected probability vector: {0}")]
    InvalidExpectedVector(String),
    #[error("sample of {total} too small; classical rule needs at least {needed:.0}")]
    SampleTooSmall { total: u64, needed: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
