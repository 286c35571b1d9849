use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // modmath
    #[error("modulus {0} is not ≥ 2")]
    BadModulus(u64),
    #[error("cofactor {cofactor} has a prime factor above the bound {bound}")]
    PrimeBoundExceeded { cofactor: u64, bound: u64 },
    #[error("moduli {0} and {1} are not coprime")]
    NonCoprimeModuli(u64, u64),
    #[error("linear system has no solution")]
    Inconsistent,
    #[error("linear system does not determine the secret")]
    Underdetermined,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    // statevec
    #[error("dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: u128, cap: u64 },
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("measurement branch has zero probability")]
    ZeroProbabilityBranch,
    #[error("ensemble probabilities sum to {0}, not 1")]
    BadDistribution(f64),
    #[error("target weight exceeds the amplitude weight at index {0}")]
    WeightExceedsAmplitude(usize),

    // coset / qpke
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("phase modulus {modulus} incompatible (cap {cap})")]
    IncompatiblePhaseModulus { modulus: u64, cap: u64 },
    #[error("invalid operation: {0}")]
    InvalidOperation(String),
    #[error("public-key state already consumed")]
    StateAlreadyConsumed,
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),

    // reductions / attacks
    #[error("sample budget of {0} exhausted")]
    SampleBudgetExhausted(u64),
    #[error("oracle shows no gap between hybrid levels")]
    NoGapFound,
    #[error("level {level} exceeds the exponent {exponent}")]
    LevelOverflow { level: u32, exponent: u32 },
    #[error("reduction failed: {0}")]
    ReductionFailed(String),
    #[error("sieve stage {stage} left {survivors} states")]
    PoolExhausted { stage: usize, survivors: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
