use thiserror::Error;

/// Errors surfaced by guarded operations across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument must be a positive integer")]
    ZeroInput,
    #[error("enumeration guard: l = {0} outside 1..={1}")]
    EnumerationGuard(u32, u32),
    #[error("truncation {0} exceeds the supported maximum {1}")]
    TruncationTooLarge(u64, u64),
    #[error("power exponent {0} exceeds the guard {1}")]
    PowerGuard(u32, u32),
    #[error("constant coefficient of the exponent polynomial must vanish")]
    NonzeroConstant,
    #[error("character phase for prime {0} is not unimodular")]
    NonUnimodularPhase(u64),
    #[error("generators must be integers >= 2 and multiplicatively independent")]
    DependentGenerators,
    #[error("coefficient at n = {0} is not generated by the lift basis")]
    IncompatibleLift(u64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("torus dimension {0} exceeds the supported maximum {1}")]
    DimensionGuard(usize, usize),
    #[error("derivative order {0} exceeds the guard {1}")]
    DerivativeGuard(u32, u32),
    #[error("out of domain: {0}")]
    Domain(String),
    #[error("kernel families do not match")]
    FamilyMismatch,
    #[error("unsupported symbol/kernel pairing: {0}")]
    UnsupportedPairing(String),
    #[error("characteristics differ: {0} vs {1}")]
    CharacteristicMismatch(u32, u32),
    #[error("symbol is outside the admissible class: infimum {infimum} below threshold {threshold}")]
    OutsideClass { infimum: f64, threshold: f64 },
    #[error("point is not on the boundary contact set (defect {0})")]
    NotOnBoundary(f64),
    #[error("duplicate symbol in linear combination")]
    DuplicateSymbol,
    #[error("zero coefficient in linear combination")]
    ZeroCoefficient,
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
