use std::path::PathBuf;

/// Errors raised by distribution construction, the reduction algorithms and
/// the file formats.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("probability vector or matrix row sums to {sum}, expected 1 (tolerance 1e-9)")]
    NonStochastic { sum: f64 },

    #[error("negative entry {value} at row {row}, column {col}")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("non-finite entry at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("input alphabet has fewer than two letters with positive probability")]
    DegenerateInput,

    #[error("probability {0} outside [0, 1]")]
    OutOfRange(f64),

    #[error("binary divergence of {p} from {r} is infinite")]
    DivergenceInfinite { p: f64, r: f64 },

    #[error("operation requires a binary input alphabet, got q = {0}")]
    NotBinary(usize),

    #[error("posteriors are not sorted ascending")]
    NotSorted,

    #[error("output budget {budget} is below the minimum {min} for this operation")]
    BudgetTooSmall { budget: usize, min: usize },

    #[error("an extreme (minimum or maximum posterior) symbol is missing from the surviving set")]
    ExtremeRemoved,

    #[error("prefix event for coordinate {0} has zero probability; prune the input alphabet first")]
    DegenerateTail(usize),

    #[error("quantizer does not cover output {0}")]
    PartialQuantizer(usize),

    #[error("zero-mass symbol passed to a merge")]
    ZeroMass,

    #[error("generator would produce {requested} outputs, above the cap of {cap}")]
    TooLarge { requested: u128, cap: u128 },

    #[error("instance with {size} outputs is too large for the oracle (cap {cap})")]
    TooLargeForOracle { size: usize, cap: usize },

    #[error("materializing the full three-way distribution needs {requested} cells, above the gate of {gate}")]
    MaterializationTooLarge { requested: u128, gate: u128 },

    #[error("malformed generator spec `{0}`")]
    BadGeneratorSpec(String),

    #[error("malformed channel file: {0}")]
    FileFormat(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
