use thiserror::Error;

/// Errors shared across the library.
///
/// `BudgetExceeded` and `CapExceeded` signal resource-guard aborts; everything
/// else is an invalid input or an internal consistency failure surfaced to the
/// caller instead of a silent wrong answer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("prime must be at least {min}, got {p}")]
    PrimeTooSmall { p: u64, min: u64 },

    #[error("binomial index {j} exceeds {k}")]
    BinomialIndex { k: u64, j: u64 },

    #[error("enumeration needs {needed} field elements, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("tuple enumeration would visit at least {estimate} tuples, cap is {cap}")]
    CapExceeded { estimate: u128, cap: u128 },

    #[error("polynomial must be monic with integral leading coefficient 1")]
    NotMonic,

    #[error("degree {d} must be at least 2 and coprime to p = {p}")]
    BadDegree { p: u64, d: u64 },

    #[error("coefficient denominator shares a factor with p = {p}")]
    NotPIntegral { p: u64 },

    #[error("element has {got} coordinates, field context expects {expected}")]
    WrongContext { expected: u64, got: u64 },

    #[error("coordinate {value} is not reduced modulo {p}")]
    NotReduced { value: u64, p: u64 },

    #[error("fewer than two finite points, polygon is degenerate")]
    DegeneratePolygon,

    #[error("division of {what} by {divisor} left a remainder; recurrence is inconsistent")]
    InexactDivision { what: &'static str, divisor: String },

    #[error("cyclotomic norm has a nonzero coordinate off the rational line")]
    NonIntegerNorm,

    #[error("k1 = {k1} and a = {a} are not congruent modulo p - 1 = {pm1}")]
    NotCongruent { k1: u64, a: u64, pm1: u64 },

    #[error("index k = {k} has gcd(k - 1, d) != 1 for d = {d}")]
    InadmissibleIndex { k: u64, d: u64 },

    #[error("requested absolute precision {needed} exceeds the {have} digits available")]
    InsufficientPrecision { needed: u64, have: u64 },

    #[error("{0}")]
    InvalidInput(String),
}
