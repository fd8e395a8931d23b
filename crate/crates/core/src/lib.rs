//! Newton polygons and first slopes of Artin-Schreier curves `y^p - y = f(x)`
//! over a prime field, computed two independent ways:
//!
//! * from point counts over field extensions, through the zeta function, and
//! * from exponential sums valued in the cyclotomic ring `Z[zeta_p]`.
//!
//! All arithmetic is exact: big integers, exact rationals, truncated p-adic
//! values with tracked precision, and cyclotomic integers. No floating point
//! is used anywhere.

pub mod coeffs;
pub mod curve;
pub mod cyclotomic;
pub mod error;
pub mod ff;
pub mod hull;
pub mod ktuple;
pub mod padic;
pub mod poly;
pub mod theorem;
pub mod zeta;

pub use error::Error;

/// Exact rational scalar used for slopes, polygon heights and bounds.
pub type Rational = num_rational::BigRational;

/// Newton polygon over exact rationals.
pub type Polygon = hull::NewtonPolygon<Rational>;

/// Dense univariate polynomial with big-integer coefficients.
pub type IntPoly = poly::Poly<num_bigint::BigInt>;

/// Dense univariate polynomial with exact rational coefficients.
pub type RatPoly = poly::Poly<Rational>;

pub(crate) type Result<T> = std::result::Result<T, Error>;
