//! Validated description of a curve `y^p - y = f(x)` over the prime field.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::padic::is_prime;
use crate::poly::Poly;
use crate::{IntPoly, Result};

/// A curve `y^p - y = f(x)` with `f` monic of degree `d`, `gcd(d, p) = 1`,
/// and `d >= 2`. Coefficients are stored reduced into `0..p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveSpec {
    p: u64,
    f: IntPoly,
}

impl CurveSpec {
    /// Validate and reduce. The constant term is dropped: adding a constant
    /// to `f` composes the cover with an automorphism of the base after a
    /// field extension, and every slope invariant computed here is blind to
    /// it, so all pipelines agree on the normalized model.
    pub fn new(p: u64, f: &IntPoly) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let d = match f.degree() {
            Some(d) if d >= 2 => d as u64,
            _ => {
                return Err(Error::BadDegree { p, d: f.degree().map_or(0, |d| d as u64) })
            }
        };
        if d % p == 0 {
            return Err(Error::BadDegree { p, d });
        }
        let pp = BigInt::from(p);
        if f.coeff(d as usize).mod_floor(&pp) != BigInt::one() {
            return Err(Error::NotMonic);
        }
        let mut coeffs: Vec<BigInt> =
            (0..=d as usize).map(|i| f.coeff(i).mod_floor(&pp)).collect();
        coeffs[0] = BigInt::zero();
        Ok(CurveSpec { p, f: Poly::new(coeffs) })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Degree of `f`.
    pub fn d(&self) -> u64 {
        self.f.degree().unwrap() as u64
    }

    /// Genus `(p - 1)(d - 1) / 2`.
    pub fn genus(&self) -> u64 {
        (self.p - 1) * (self.d() - 1) / 2
    }

    /// The reduced polynomial, coefficients in `0..p`, constant term zero.
    pub fn f(&self) -> &IntPoly {
        &self.f
    }

    /// Coefficient of `x^l` as a small nonnegative residue.
    pub fn coeff_u64(&self, l: usize) -> u64 {
        let c = self.f.coeff(l);
        debug_assert!(!c.is_negative());
        let (_, digits) = c.to_u64_digits();
        digits.first().copied().unwrap_or(0)
    }
}
