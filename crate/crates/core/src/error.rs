use alloc::string::String;
use core::fmt;

/// Errors reported by the algebra core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    NotPrime(u64),
    DegreeZero,
    /// The base field is larger than the table-driven arithmetic supports.
    FieldTooLarge { q: u64 },
    NotAPrimePower(u64),
    DivisionByZero,
    ContextMismatch,
    NotADivisor { d: u32, n: u32 },
    NotInSubfield { d: u32 },
    FactorizationTimeout,
    BothZero,
    /// Prescribed norms violate the gluing condition for the pair `(i, j)` (0-based).
    NotAdmissible { i: usize, j: usize },
    DiscreteLogBudget,
    BudgetExceeded { budget: u64 },
    InvalidTuple(String),
    RoundingUnstable { value: f64 },
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotPrime(p) => write!(f, "{p} is not prime"),
            Error::DegreeZero => f.write_str("extension degrees must be positive"),
            Error::FieldTooLarge { q } => {
                write!(f, "base field of order {q} exceeds the supported table size")
            }
            Error::NotAPrimePower(q) => write!(f, "{q} is not a prime power"),
            Error::DivisionByZero => f.write_str("division by zero"),
            Error::ContextMismatch => f.write_str("elements belong to different field contexts"),
            Error::NotADivisor { d, n } => write!(f, "{d} does not divide {n}"),
            Error::NotInSubfield { d } => write!(f, "element does not lie in the degree-{d} subfield"),
            Error::FactorizationTimeout => f.write_str("integer factorization budget exceeded"),
            Error::BothZero => f.write_str("gcd of two zero polynomials is undefined"),
            Error::NotAdmissible { i, j } => {
                write!(f, "prescription is not admissible: pair ({}, {}) violates the gluing condition", i + 1, j + 1)
            }
            Error::DiscreteLogBudget => f.write_str("discrete logarithm budget exceeded"),
            Error::BudgetExceeded { budget } => write!(f, "search space exceeds budget {budget}"),
            Error::InvalidTuple(msg) => write!(f, "invalid divisor tuple: {msg}"),
            Error::RoundingUnstable { value } => {
                write!(f, "character-sum indicator {value} is not within 1e-6 of 0 or 1")
            }
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
