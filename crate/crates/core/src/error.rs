use thiserror::Error;

use crate::transfer::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("the two primes must be distinct (got p = q = {0})")]
    EqualPrimes(u64),

    #[error("modulus p^n q^m overflows u64")]
    Overflow,

    #[error("subgroup ({a},{b}) lies outside the box [{n}]x[{m}]")]
    SubgroupOutOfRange { a: u32, b: u32, n: u32, m: u32 },

    #[error("{e} does not divide the modulus {modulus}")]
    NotADivisor { e: u64, modulus: u64 },

    #[error("modulus mismatch: expected {expected}, got {actual}")]
    ModulusMismatch { expected: u64, actual: u64 },

    #[error("residue {residue} is out of range for modulus {modulus}")]
    ResidueOutOfRange { residue: u64, modulus: u64 },

    #[error("not an indexing set: {0}")]
    NotIndexingSet(String),

    #[error("prime {0} is below 5; realization is not available (p = 2 or 3 admits unrealizable saturated systems)")]
    UnsupportedPrime(u64),

    #[error("transfer system is not saturated: {0}")]
    NotSaturated(String),

    #[error("invalid transfer system: {0}")]
    Invalid(Violation),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("(star) property unavailable: {0}")]
    StarViolation(String),

    #[error("postcondition failed: {0}")]
    Postcondition(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("produced set does not realize the requested transfer system: {0}")]
    NotRealized(String),
}

impl From<Violation> for Error {
    fn from(v: Violation) -> Self {
        Error::Invalid(v)
    }
}
