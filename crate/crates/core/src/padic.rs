//! Base-p digit arithmetic, factorial valuations, and truncated p-adic values.
//!
//! A `TruncatedPadic` stores a value as `p^val * unit` where the unit is kept
//! modulo `p^rel`; the representation is therefore correct modulo
//! `p^(val + rel)`. Sums renormalize through residues at the weakest absolute
//! precision of the operands, so cancellation degrades precision instead of
//! silently inventing digits. A residue that is zero at the working precision
//! is reported as `AtLeast(t)`, never as a concrete valuation.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::Error;
use crate::Result;

/// Trial-division primality check, adequate for desk-scale inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn check_base(p: u64) -> Result<()> {
    if p < 2 {
        return Err(Error::PrimeTooSmall { p, min: 2 });
    }
    Ok(())
}

/// `p^e` as a big integer.
pub fn p_pow(p: u64, e: u64) -> BigUint {
    BigUint::from(p).pow(u32::try_from(e).expect("exponent fits u32"))
}

/// Sum of the base-p digits of `k`.
pub fn digit_sum(k: u64, p: u64) -> Result<u64> {
    check_base(p)?;
    let mut k = k;
    let mut s = 0;
    while k > 0 {
        s += k % p;
        k /= p;
    }
    Ok(s)
}

/// Base-p digits of `k`, least significant first. Empty for `k = 0`.
pub fn digits(k: u64, p: u64) -> Vec<u64> {
    debug_assert!(p >= 2);
    let mut k = k;
    let mut out = Vec::new();
    while k > 0 {
        out.push(k % p);
        k /= p;
    }
    out
}

/// `ord_p(k!)` through the digit-sum identity `(k - s_p(k)) / (p - 1)`.
pub fn ord_factorial(k: u64, p: u64) -> Result<u64> {
    let s = digit_sum(k, p)?;
    Ok((k - s) / (p - 1))
}

/// `ord_p(binom(k, j))` through digit sums: `(s_p(j) + s_p(k-j) - s_p(k)) / (p - 1)`.
pub fn ord_binomial(k: u64, j: u64, p: u64) -> Result<u64> {
    if j > k {
        return Err(Error::BinomialIndex { k, j });
    }
    let s = digit_sum(j, p)? + digit_sum(k - j, p)? - digit_sum(k, p)?;
    Ok(s / (p - 1))
}

/// `ord_p(x)` for a nonzero big natural.
pub(crate) fn ord_big(x: &BigUint, p: u64) -> u64 {
    debug_assert!(!x.is_zero());
    let p = BigUint::from(p);
    let mut x = x.clone();
    let mut v = 0;
    loop {
        let (q, r) = x.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        x = q;
        v += 1;
    }
}

/// `ord_p(x)` for a big integer, `None` when `x = 0`.
pub fn ord_int(x: &BigInt, p: u64) -> Option<u64> {
    if x.is_zero() {
        None
    } else {
        Some(ord_big(x.magnitude(), p))
    }
}

/// Inverse of a unit modulo `p^m` (the modulus is passed in).
pub(crate) fn inv_mod(u: &BigUint, modulus: &BigUint) -> BigUint {
    let a = BigInt::from(u.clone());
    let m = BigInt::from(modulus.clone());
    let g = a.extended_gcd(&m);
    assert!(g.gcd.is_one(), "inverse of a non-unit requested");
    g.x.mod_floor(&m).to_biguint().expect("reduced inverse is nonnegative")
}

/// `k! = p^v * u` with the unit returned modulo `p^precision`.
pub fn factorial_unit(k: u64, p: u64, precision: u64) -> Result<(u64, BigUint)> {
    check_base(p)?;
    let mut cache = FactorialCache::new(p, precision)?;
    Ok(cache.factorial(k))
}

/// Incrementally grown table of factorial valuations and units mod `p^precision`.
pub struct FactorialCache {
    p: u64,
    precision: u64,
    modulus: BigUint,
    vals: Vec<u64>,
    units: Vec<BigUint>,
}

impl FactorialCache {
    pub fn new(p: u64, precision: u64) -> Result<Self> {
        check_base(p)?;
        if precision == 0 {
            return Err(Error::InvalidInput("precision must be at least 1".into()));
        }
        Ok(FactorialCache {
            p,
            precision,
            modulus: p_pow(p, precision),
            vals: vec![0],
            units: vec![BigUint::one()],
        })
    }

    pub fn precision(&self) -> u64 {
        self.precision
    }

    fn ensure(&mut self, k: u64) {
        let k = k as usize;
        while self.vals.len() <= k {
            let n = self.vals.len() as u64;
            let mut m = n;
            let mut v = 0;
            while m % self.p == 0 {
                m /= self.p;
                v += 1;
            }
            let unit = (self.units.last().unwrap() * BigUint::from(m)) % &self.modulus;
            self.vals.push(self.vals.last().unwrap() + v);
            self.units.push(unit);
        }
    }

    /// `(ord_p(k!), unit of k! mod p^precision)`.
    pub fn factorial(&mut self, k: u64) -> (u64, BigUint) {
        self.ensure(k);
        (self.vals[k as usize], self.units[k as usize].clone())
    }

    /// `(ord_p(binom(k, j)), unit of binom(k, j) mod p^precision)`.
    pub fn binomial(&mut self, k: u64, j: u64) -> Result<(u64, BigUint)> {
        if j > k {
            return Err(Error::BinomialIndex { k, j });
        }
        self.ensure(k);
        let val = self.vals[k as usize] - self.vals[j as usize] - self.vals[(k - j) as usize];
        let den = (&self.units[j as usize] * &self.units[(k - j) as usize]) % &self.modulus;
        let unit = (&self.units[k as usize] * inv_mod(&den, &self.modulus)) % &self.modulus;
        Ok((val, unit))
    }
}

/// Valuation of a truncated p-adic value: known exactly, or only bounded below
/// because every visible digit is zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Val {
    Finite(u64),
    AtLeast(u64),
}

/// A p-adic integer known modulo `p^(val + rel)`.
#[derive(Clone, Debug)]
pub struct TruncatedPadic {
    p: u64,
    val: Val,
    unit: BigUint,
    rel: u64,
}

impl TruncatedPadic {
    /// Zero at absolute precision `abs`: all that is known is `ord >= abs`.
    pub fn zero(p: u64, abs: u64) -> Self {
        TruncatedPadic { p, val: Val::AtLeast(abs), unit: BigUint::zero(), rel: 0 }
    }

    pub fn one(p: u64, rel: u64) -> Self {
        TruncatedPadic { p, val: Val::Finite(0), unit: BigUint::one(), rel }
    }

    /// Exact integer reduced to absolute precision `abs`.
    pub fn from_int(x: &BigInt, p: u64, abs: u64) -> Self {
        assert!(abs >= 1, "absolute precision must be at least 1");
        let m = BigInt::from(p_pow(p, abs));
        let r = x.mod_floor(&m).to_biguint().expect("mod_floor is nonnegative");
        Self::from_residue(r, p, abs)
    }

    /// Residue `r` in `[0, p^abs)` interpreted at absolute precision `abs`.
    pub fn from_residue(r: BigUint, p: u64, abs: u64) -> Self {
        assert!(abs >= 1);
        if r.is_zero() {
            return Self::zero(p, abs);
        }
        let v = ord_big(&r, p);
        debug_assert!(v < abs);
        let unit = r / p_pow(p, v);
        TruncatedPadic { p, val: Val::Finite(v), unit, rel: abs - v }
    }

    /// `p^val * unit` where the caller guarantees `unit` is prime to p and
    /// reduced modulo `p^rel`.
    pub fn from_unit(p: u64, val: u64, unit: BigUint, rel: u64) -> Self {
        debug_assert!(rel >= 1 && !(&unit % p).is_zero() && unit < p_pow(p, rel));
        TruncatedPadic { p, val: Val::Finite(val), unit, rel }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn valuation(&self) -> Val {
        self.val
    }

    /// Lower bound on the valuation, exact when `valuation()` is `Finite`.
    pub fn min_valuation(&self) -> u64 {
        match self.val {
            Val::Finite(v) => v,
            Val::AtLeast(t) => t,
        }
    }

    /// True when every digit visible at the working precision is zero.
    pub fn is_zero_here(&self) -> bool {
        matches!(self.val, Val::AtLeast(_))
    }

    /// Modulus exponent through which the value is known.
    pub fn abs_precision(&self) -> u64 {
        match self.val {
            Val::Finite(v) => v + self.rel,
            Val::AtLeast(t) => t,
        }
    }

    /// Residue in `[0, p^abs)`; requires `abs <= abs_precision()`.
    pub fn residue_mod(&self, abs: u64) -> Result<BigUint> {
        if abs > self.abs_precision() {
            return Err(Error::InsufficientPrecision { needed: abs, have: self.abs_precision() });
        }
        Ok(match self.val {
            Val::AtLeast(_) => BigUint::zero(),
            Val::Finite(v) => {
                if v >= abs {
                    BigUint::zero()
                } else {
                    (&self.unit % p_pow(self.p, abs - v)) * p_pow(self.p, v)
                }
            }
        })
    }

    /// Forget digits beyond `p^abs`.
    pub fn cap_absolute(&self, abs: u64) -> Self {
        match self.val {
            Val::AtLeast(t) => Self::zero(self.p, t.min(abs)),
            Val::Finite(v) => {
                if v >= abs {
                    Self::zero(self.p, abs)
                } else {
                    let rel = self.rel.min(abs - v);
                    TruncatedPadic {
                        p: self.p,
                        val: Val::Finite(v),
                        unit: &self.unit % p_pow(self.p, rel),
                        rel,
                    }
                }
            }
        }
    }

    /// Multiply by `p^k`.
    pub fn shift(&self, k: u64) -> Self {
        let mut out = self.clone();
        out.val = match out.val {
            Val::Finite(v) => Val::Finite(v + k),
            Val::AtLeast(t) => Val::AtLeast(t + k),
        };
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p, "mixed primes");
        match (self.val, other.val) {
            (Val::AtLeast(a), Val::AtLeast(b)) => Self::zero(self.p, a + b),
            (Val::AtLeast(a), Val::Finite(v)) | (Val::Finite(v), Val::AtLeast(a)) => {
                Self::zero(self.p, a + v)
            }
            (Val::Finite(v1), Val::Finite(v2)) => {
                let rel = self.rel.min(other.rel);
                let unit = (&self.unit * &other.unit) % p_pow(self.p, rel);
                TruncatedPadic { p: self.p, val: Val::Finite(v1 + v2), unit, rel }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p, "mixed primes");
        let abs = self.abs_precision().min(other.abs_precision());
        if abs == 0 {
            return Self::zero(self.p, 0);
        }
        let m = p_pow(self.p, abs);
        let r = (self.residue_mod(abs).unwrap() + other.residue_mod(abs).unwrap()) % m;
        Self::from_residue(r, self.p, abs)
    }

    pub fn neg(&self) -> Self {
        match self.val {
            Val::AtLeast(_) => self.clone(),
            Val::Finite(_) => {
                let m = p_pow(self.p, self.rel);
                let mut out = self.clone();
                out.unit = m - &self.unit;
                out
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Equality of residues at absolute precision `abs`.
    pub fn congruent_mod(&self, other: &Self, abs: u64) -> Result<bool> {
        Ok(self.residue_mod(abs)? == other.residue_mod(abs)?)
    }
}

impl std::fmt::Display for TruncatedPadic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.val {
            Val::AtLeast(t) => write!(f, "O({}^{})", self.p, t),
            Val::Finite(v) => {
                write!(f, "{}^{} * {} + O({}^{})", self.p, v, self.unit, self.p, v + self.rel)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent oracle: Legendre's sum of floor divisions.
    fn legendre(k: u64, p: u64) -> u64 {
        let mut q = k / p;
        let mut s = 0;
        while q > 0 {
            s += q;
            q /= p;
        }
        s
    }

    /// Independent oracle: carries when adding j and k - j in base p.
    fn kummer_carries(k: u64, j: u64, p: u64) -> u64 {
        let (mut a, mut b) = (j, k - j);
        let mut carry = 0;
        let mut carries = 0;
        while a > 0 || b > 0 || carry > 0 {
            let t = a % p + b % p + carry;
            carry = t / p;
            carries += u64::from(carry > 0);
            a /= p;
            b /= p;
        }
        carries
    }

    fn big_factorial(k: u64) -> BigUint {
        (1..=k).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
    }

    #[test]
    fn digit_sum_values() {
        assert_eq!(digit_sum(0, 5).unwrap(), 0);
        assert_eq!(digit_sum(13, 5).unwrap(), 5);
        assert_eq!(digit_sum(48, 7).unwrap(), 12);
        assert!(digit_sum(3, 1).is_err());
        assert!(digit_sum(3, 0).is_err());
    }

    #[test]
    fn ord_factorial_values() {
        assert_eq!(ord_factorial(10, 5).unwrap(), 2);
        assert_eq!(ord_factorial(48, 7).unwrap(), 6);
    }

    #[test]
    fn ord_factorial_matches_legendre() {
        for p in [2u64, 3, 5, 7, 11] {
            for k in 0..=10_000u64 {
                assert_eq!(ord_factorial(k, p).unwrap(), legendre(k, p), "k={k} p={p}");
            }
        }
    }

    #[test]
    fn ord_binomial_values() {
        assert_eq!(ord_binomial(5, 1, 5).unwrap(), 1);
        // binom(10, 5) = 252 = 2^2 * 3^2 * 7 has no factor of 5.
        let b = &big_factorial(10) / (&big_factorial(5) * &big_factorial(5));
        assert_eq!(b, BigUint::from(252u32));
        assert_eq!(ord_big(&b, 5), 0);
        assert_eq!(ord_binomial(10, 5, 5).unwrap(), 0);
        assert!(ord_binomial(3, 4, 5).is_err());
    }

    #[test]
    fn ord_binomial_matches_carries() {
        for p in [2u64, 3, 5, 7, 11] {
            for k in 0..=2_000u64 {
                for j in (0..=k).step_by(7).chain([0, k]) {
                    assert_eq!(
                        ord_binomial(k, j, p).unwrap(),
                        kummer_carries(k, j, p),
                        "k={k} j={j} p={p}"
                    );
                }
            }
        }
    }

    #[test]
    fn ord_binomial_matches_bigint() {
        for p in [2u64, 5, 7] {
            for k in 0..=200u64 {
                for j in 0..=k {
                    let b = &big_factorial(k) / (&big_factorial(j) * &big_factorial(k - j));
                    assert_eq!(ord_binomial(k, j, p).unwrap(), ord_big(&b, p));
                }
            }
        }
    }

    #[test]
    fn factorial_unit_value() {
        let (v, u) = factorial_unit(10, 5, 3).unwrap();
        assert_eq!((v, u), (2, BigUint::from(27u32)));
    }

    #[test]
    fn factorial_unit_matches_bigint() {
        for p in [3u64, 5, 7] {
            for m in [1u64, 4] {
                let modulus = p_pow(p, m);
                let mut cache = FactorialCache::new(p, m).unwrap();
                for k in 0..=500u64 {
                    let f = big_factorial(k);
                    let v = ord_big(&f, p);
                    let unit = (&f / p_pow(p, v)) % &modulus;
                    assert_eq!(cache.factorial(k), (v, unit), "k={k} p={p} m={m}");
                }
            }
        }
    }

    #[test]
    fn binomial_units_match_bigint() {
        let mut cache = FactorialCache::new(5, 4).unwrap();
        let modulus = p_pow(5, 4);
        for k in 0..=60u64 {
            for j in 0..=k {
                let b = &big_factorial(k) / (&big_factorial(j) * &big_factorial(k - j));
                let v = ord_big(&b, 5);
                let unit = (&b / p_pow(5, v)) % &modulus;
                assert_eq!(cache.binomial(k, j).unwrap(), (v, unit));
            }
        }
    }

    #[test]
    fn truncated_basic_cases() {
        let p = 5;
        let x = TruncatedPadic::from_int(&BigInt::from(50), p, 4);
        assert_eq!(x.valuation(), Val::Finite(2));
        assert_eq!(x.residue_mod(4).unwrap(), BigUint::from(50u32));

        let z = TruncatedPadic::from_int(&BigInt::from(0), p, 3);
        assert!(z.is_zero_here());
        assert_eq!(z.valuation(), Val::AtLeast(3));

        // 625 at absolute precision 3 is indistinguishable from zero.
        let h = TruncatedPadic::from_int(&BigInt::from(625), p, 3);
        assert_eq!(h.valuation(), Val::AtLeast(3));
    }

    #[test]
    fn cancellation_reports_at_least() {
        let p = 5;
        let a = TruncatedPadic::from_int(&BigInt::from(7), p, 3);
        let b = TruncatedPadic::from_int(&BigInt::from(-7), p, 3);
        let s = a.add(&b);
        assert_eq!(s.valuation(), Val::AtLeast(3));

        // Partial cancellation keeps the exact valuation but loses digits.
        let c = TruncatedPadic::from_int(&BigInt::from(2), p, 3);
        let d = TruncatedPadic::from_int(&BigInt::from(23), p, 3);
        let t = c.add(&d); // 25 = 5^2 known mod 5^3
        assert_eq!(t.valuation(), Val::Finite(2));
        assert_eq!(t.abs_precision(), 3);
    }

    #[test]
    fn at_least_absorption() {
        let p = 5;
        let a = TruncatedPadic::zero(p, 2);
        let b = TruncatedPadic::from_int(&BigInt::from(15), p, 4);
        assert_eq!(a.mul(&b).valuation(), Val::AtLeast(3));
        assert_eq!(a.add(&b).abs_precision(), 2);
        assert_eq!(a.add(&b).valuation(), Val::Finite(1));
        assert_eq!(a.mul(&a).valuation(), Val::AtLeast(4));
    }

    proptest! {
        #[test]
        fn add_mul_match_integers(x in -2_000_000i64..2_000_000, y in -2_000_000i64..2_000_000,
                                  pick in 0usize..3) {
            let p = [3u64, 5, 7][pick];
            let abs = 6u64;
            let m = BigInt::from(p_pow(p, abs));
            let tx = TruncatedPadic::from_int(&BigInt::from(x), p, abs);
            let ty = TruncatedPadic::from_int(&BigInt::from(y), p, abs);

            let sum = tx.add(&ty);
            let expect = BigInt::from(x + y).mod_floor(&m).to_biguint().unwrap();
            prop_assert_eq!(sum.residue_mod(abs).unwrap(), expect);

            let prod = tx.mul(&ty);
            let xv = BigInt::from(x);
            let yv = BigInt::from(y);
            // The product is known at least modulo p^abs shifted by valuations.
            let know = prod.abs_precision().min(abs);
            let expect = (xv * yv).mod_floor(&BigInt::from(p_pow(p, know))).to_biguint().unwrap();
            prop_assert_eq!(prod.residue_mod(know).unwrap(), expect);
        }
    }
}
