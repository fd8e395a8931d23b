//! Exact arithmetic in `Z[zeta_p]` for prime p: ring operations in the power
//! basis `1, zeta, ..., zeta^{p-2}`, the valuation at the totally ramified
//! prime `pi = 1 - zeta`, Galois conjugation, and norms down to `Z`.
//!
//! Coordinates are arbitrary-precision integers; all operations are exact.
//! Products reduce through `zeta^p = 1` followed by a single fold of
//! `zeta^{p-1} = -(1 + zeta + ... + zeta^{p-2})`, so every value has a unique
//! coordinate vector and equality is literal.

use crate::error::Error;
use crate::padic::is_prime;
use crate::{IntPoly, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

/// An element of `Z[zeta_p]` in the power basis of length `p - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycInt {
    p: u64,
    coords: Vec<BigInt>,
}

/// Reduces a buffer of coefficients of `zeta^0 .. zeta^{len-1}` (any length)
/// to the canonical power basis: exponents are first folded mod p through
/// `zeta^p = 1`, then the single remaining `zeta^{p-1}` coefficient is
/// rewritten as `-(1 + zeta + ... + zeta^{p-2})`.
fn reduce_buffer(p: u64, buf: Vec<BigInt>) -> Vec<BigInt> {
    let pu = p as usize;
    let mut folded = vec![BigInt::zero(); pu];
    for (e, c) in buf.into_iter().enumerate() {
        if !c.is_zero() {
            folded[e % pu] += c;
        }
    }
    let top = folded.pop().unwrap();
    if !top.is_zero() {
        for slot in folded.iter_mut() {
            *slot -= &top;
        }
    }
    folded
}

impl CycInt {
    fn require_prime(p: u64) -> Result<()> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(())
    }

    pub fn zero(p: u64) -> Result<CycInt> {
        Self::require_prime(p)?;
        Ok(CycInt {
            p,
            coords: vec![BigInt::zero(); (p - 1) as usize],
        })
    }

    pub fn from_int(p: u64, n: &BigInt) -> Result<CycInt> {
        let mut v = CycInt::zero(p)?;
        v.coords[0] = n.clone();
        Ok(v)
    }

    /// `zeta^e` (any exponent; reduced canonically).
    pub fn zeta_pow(p: u64, e: u64) -> Result<CycInt> {
        Self::require_prime(p)?;
        let e = (e % p) as usize;
        let mut buf = vec![BigInt::zero(); e + 1];
        buf[e] = BigInt::from(1);
        Ok(CycInt {
            p,
            coords: {
                let mut b = buf;
                b.resize(p as usize, BigInt::zero());
                reduce_buffer(p, b)
            },
        })
    }

    /// Builds a value from coefficients of `zeta^0 .. zeta^{k}` for any `k`
    /// (reduced canonically). Handy for bucketed exponential sums.
    pub fn from_zeta_coeffs(p: u64, coeffs: Vec<BigInt>) -> Result<CycInt> {
        Self::require_prime(p)?;
        let mut b = coeffs;
        if b.len() < p as usize {
            b.resize(p as usize, BigInt::zero());
        }
        Ok(CycInt {
            p,
            coords: reduce_buffer(p, b),
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Canonical coordinates in the power basis `1, zeta, ..., zeta^{p-2}`.
    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// The rational integer this value equals, if it lies in `Z`.
    pub fn as_int(&self) -> Option<&BigInt> {
        if self.coords[1..].iter().all(|c| c.is_zero()) {
            Some(&self.coords[0])
        } else {
            None
        }
    }

    fn same_ring(&self, other: &CycInt) -> Result<()> {
        if self.p != other.p {
            return Err(Error::WrongContext {
                expected: self.p,
                got: other.p,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &CycInt) -> Result<CycInt> {
        self.same_ring(other)?;
        Ok(CycInt {
            p: self.p,
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &CycInt) -> Result<CycInt> {
        self.same_ring(other)?;
        Ok(CycInt {
            p: self.p,
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn neg(&self) -> CycInt {
        CycInt {
            p: self.p,
            coords: self.coords.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, n: &BigInt) -> CycInt {
        CycInt {
            p: self.p,
            coords: self.coords.iter().map(|a| a * n).collect(),
        }
    }

    pub fn mul(&self, other: &CycInt) -> Result<CycInt> {
        self.same_ring(other)?;
        let m = self.coords.len();
        let mut conv = vec![BigInt::zero(); 2 * m - 1];
        for (i, a) in self.coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coords.iter().enumerate() {
                if !b.is_zero() {
                    conv[i + j] += a * b;
                }
            }
        }
        Ok(CycInt {
            p: self.p,
            coords: reduce_buffer(self.p, conv),
        })
    }

    /// Image under the augmentation `zeta -> 1`, reduced mod p. The value
    /// lies in the ideal `(1 - zeta)` exactly when this is zero.
    pub fn augmentation_mod_p(&self) -> u64 {
        let p = BigInt::from(self.p);
        let mut s = BigInt::zero();
        for c in &self.coords {
            s += c;
        }
        let r = s.mod_floor(&p);
        // r is in [0, p) so the conversion is exact.
        let (_, digits) = r.to_u64_digits();
        *digits.first().unwrap_or(&0)
    }

    /// Exact division by `1 - zeta`, solving the triangular linear system in
    /// the power basis. Errors when the value is not divisible.
    pub fn div_one_minus_zeta(&self) -> Result<CycInt> {
        let p = BigInt::from(self.p);
        let mut total = BigInt::zero();
        for c in &self.coords {
            total += c;
        }
        let (s, rem) = total.div_rem(&p);
        if !rem.is_zero() {
            return Err(Error::InexactDivision {
                what: "cyclotomic integer by 1 - zeta",
                divisor: format!("augmentation {} not divisible by {}", total, self.p),
            });
        }
        // With a = (1 - zeta) b: prefix_sum_a(t) = b_t + (t + 1) s and
        // b_{p-2} = s, where s = (sum of a's coordinates) / p.
        let mut out = Vec::with_capacity(self.coords.len());
        let mut prefix = BigInt::zero();
        for (t, c) in self.coords.iter().enumerate() {
            prefix += c;
            out.push(&prefix - &s * BigInt::from(t as u64 + 1));
        }
        let b = CycInt {
            p: self.p,
            coords: out,
        };
        debug_assert_eq!(
            b.mul(&one_minus_zeta(self.p).unwrap()).unwrap(),
            *self,
            "exact division must multiply back"
        );
        Ok(b)
    }

    /// Exact division by a rational integer, coordinate-wise; errors if any
    /// coordinate is not divisible.
    pub fn div_exact_int(&self, n: &BigInt) -> Result<CycInt> {
        if n.is_zero() {
            return Err(Error::InexactDivision {
                what: "cyclotomic integer by a rational integer",
                divisor: "0".into(),
            });
        }
        let mut out = Vec::with_capacity(self.coords.len());
        for c in &self.coords {
            let (q, r) = c.div_rem(n);
            if !r.is_zero() {
                return Err(Error::InexactDivision {
                    what: "cyclotomic integer by a rational integer",
                    divisor: n.to_string(),
                });
            }
            out.push(q);
        }
        Ok(CycInt {
            p: self.p,
            coords: out,
        })
    }

    /// Valuation at `pi = 1 - zeta`; `None` means +infinity (the zero value).
    /// Note this is the pi-adic valuation: `v(p) = p - 1`, and ord_p is this
    /// divided by `p - 1`.
    pub fn pi_valuation(&self) -> Option<u64> {
        if self.is_zero() {
            return None;
        }
        let mut v = 0u64;
        let mut cur = self.clone();
        while cur.augmentation_mod_p() == 0 {
            cur = cur.div_one_minus_zeta().expect("augmentation said divisible");
            v += 1;
            assert!(v < 1_000_000, "valuation loop runaway on nonzero input");
        }
        Some(v)
    }

    /// The Galois action `zeta -> zeta^j` for `j` coprime to p.
    pub fn galois_conjugate(&self, j: u64) -> Result<CycInt> {
        let p = self.p;
        if j % p == 0 {
            return Err(Error::InvalidInput(format!(
                "conjugation index {j} is divisible by p = {p}"
            )));
        }
        let j = j % p;
        let mut buf = vec![BigInt::zero(); p as usize];
        for (t, c) in self.coords.iter().enumerate() {
            if !c.is_zero() {
                buf[(t as u64 * j % p) as usize] += c;
            }
        }
        Ok(CycInt {
            p,
            coords: reduce_buffer(p, buf),
        })
    }

    /// `N(a) = prod_{j=1}^{p-1} sigma_j(a)`, which must land in `Z`.
    pub fn absolute_norm(&self) -> Result<BigInt> {
        let mut acc = CycInt::from_int(self.p, &BigInt::from(1))?;
        for j in 1..self.p {
            acc = acc.mul(&self.galois_conjugate(j)?)?;
        }
        match acc.as_int() {
            Some(n) => Ok(n.clone()),
            None => Err(Error::NonIntegerNorm),
        }
    }
}

/// The uniformizer `1 - zeta`.
pub fn one_minus_zeta(p: u64) -> Result<CycInt> {
    let one = CycInt::from_int(p, &BigInt::from(1))?;
    one.sub(&CycInt::zeta_pow(p, 1)?)
}

/// A polynomial in `T` with coefficients in `Z[zeta_p]`, lowest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycPoly {
    p: u64,
    coeffs: Vec<CycInt>,
}

impl CycPoly {
    pub fn new(p: u64, coeffs: Vec<CycInt>) -> Result<CycPoly> {
        CycInt::require_prime(p)?;
        for c in &coeffs {
            if c.p() != p {
                return Err(Error::WrongContext {
                    expected: p,
                    got: c.p(),
                });
            }
        }
        let mut coeffs = coeffs;
        while coeffs.last().map(CycInt::is_zero) == Some(true) {
            coeffs.pop();
        }
        Ok(CycPoly { p, coeffs })
    }

    pub fn one(p: u64) -> Result<CycPoly> {
        CycPoly::new(p, vec![CycInt::from_int(p, &BigInt::from(1))?])
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, k: usize) -> CycInt {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| CycInt::zero(self.p).unwrap())
    }

    pub fn coeffs(&self) -> &[CycInt] {
        &self.coeffs
    }

    pub fn mul(&self, other: &CycPoly) -> Result<CycPoly> {
        if self.p != other.p {
            return Err(Error::WrongContext {
                expected: self.p,
                got: other.p,
            });
        }
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return CycPoly::new(self.p, Vec::new());
        }
        let mut out =
            vec![CycInt::zero(self.p)?; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b)?)?;
            }
        }
        CycPoly::new(self.p, out)
    }

    /// Applies `zeta -> zeta^j` to every coefficient.
    pub fn conjugate(&self, j: u64) -> Result<CycPoly> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.galois_conjugate(j))
            .collect::<Result<Vec<_>>>()?;
        CycPoly::new(self.p, coeffs)
    }
}

/// `prod_{j=1}^{p-1} sigma_j(L)`, whose coefficients must all be rational
/// integers; returned as an integer polynomial.
pub fn norm_poly(l: &CycPoly) -> Result<IntPoly> {
    let p = l.p();
    let mut acc = CycPoly::one(p)?;
    for j in 1..p {
        acc = acc.mul(&l.conjugate(j)?)?;
    }
    let mut out = Vec::with_capacity(acc.coeffs().len());
    for c in acc.coeffs() {
        match c.as_int() {
            Some(n) => out.push(n.clone()),
            None => return Err(Error::NonIntegerNorm),
        }
    }
    Ok(IntPoly::new(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn int(p: u64, n: i64) -> CycInt {
        CycInt::from_int(p, &BigInt::from(n)).unwrap()
    }

    /// Independent oracle: evaluate at an element of exact order p in F_q
    /// (q = 1 mod p), where the power-basis relations also hold. Ring
    /// operations must commute with this evaluation.
    fn eval_mod_q(a: &CycInt, q: u64, omega: u64) -> u64 {
        let mut acc = 0u64;
        let mut w = 1u64;
        for c in a.coords() {
            let r = c.mod_floor(&BigInt::from(q));
            let (_, digs) = r.to_u64_digits();
            let cv = *digs.first().unwrap_or(&0);
            acc = (acc + cv * w) % q;
            w = w * omega % q;
        }
        acc
    }

    fn oracle_params(p: u64) -> (u64, u64) {
        match p {
            3 => (7, 2),   // 2^3 = 8 = 1 mod 7, 2 != 1
            5 => (11, 3),  // 3^5 = 243 = 1 mod 11
            7 => (29, 16), // 16 = 2^4, 16^7 = 2^28 = 1 mod 29
            _ => panic!("no oracle parameters for p={p}"),
        }
    }

    #[test]
    fn identities_and_uniformizer_product() {
        for p in [3u64, 5, 7] {
            let a = CycInt::zeta_pow(p, 1).unwrap().scale(&BigInt::from(4));
            assert_eq!(a.add(&CycInt::zero(p).unwrap()).unwrap(), a);
            // (1 - zeta)(1 + zeta + ... + zeta^{p-2}) telescopes to
            // 1 - zeta^{p-1}, an associate of the uniformizer: the second
            // factor has augmentation p - 1, a unit mod p.
            let all_ones =
                CycInt::from_zeta_coeffs(p, vec![BigInt::from(1); (p - 1) as usize]).unwrap();
            let prod = one_minus_zeta(p).unwrap().mul(&all_ones).unwrap();
            let mut tele = vec![BigInt::zero(); p as usize];
            tele[0] = BigInt::from(1);
            tele[(p - 1) as usize] = BigInt::from(-1);
            assert_eq!(prod, CycInt::from_zeta_coeffs(p, tele).unwrap());
            assert_eq!(all_ones.pi_valuation(), Some(0));
            assert_eq!(prod.pi_valuation(), Some(1));
        }
    }

    #[test]
    fn zeta_powers_reduce_canonically() {
        let p = 5;
        // zeta^4 = -(1 + zeta + zeta^2 + zeta^3).
        let z4 = CycInt::zeta_pow(p, 4).unwrap();
        assert_eq!(z4.coords(), vec![BigInt::from(-1); 4].as_slice());
        // zeta^5 = 1.
        assert_eq!(CycInt::zeta_pow(p, 5).unwrap(), int(p, 1));
        // Sum over all p-th roots of unity is zero: 1 + zeta + ... + zeta^{p-1}.
        let mut s = int(p, 1);
        for e in 1..p {
            s = s.add(&CycInt::zeta_pow(p, e).unwrap()).unwrap();
        }
        s = s.add(&CycInt::zeta_pow(p, 4).unwrap()).unwrap();
        // 1 + zeta + zeta^2 + zeta^3 + 2 zeta^4 = zeta^4; the full sum without
        // the doubling is zero:
        let mut full = CycInt::zero(p).unwrap();
        for e in 0..p {
            full = full.add(&CycInt::zeta_pow(p, e).unwrap()).unwrap();
        }
        assert!(full.is_zero());
        assert_eq!(s, CycInt::zeta_pow(p, 4).unwrap());
    }

    #[test]
    fn mismatched_rings_are_rejected() {
        let a = int(5, 1);
        let b = int(7, 1);
        assert!(matches!(
            a.add(&b),
            Err(Error::WrongContext {
                expected: 5,
                got: 7
            })
        ));
        assert!(matches!(CycInt::zero(6), Err(Error::NotPrime(6))));
    }

    #[test]
    fn gauss_sum_valuation_is_two_for_p5() {
        // sum over x in F_5 of zeta^{x^2}: squares are 0,1,4,4,1.
        let mut buckets = vec![BigInt::zero(); 5];
        for x in 0u64..5 {
            buckets[(x * x % 5) as usize] += 1;
        }
        let g = CycInt::from_zeta_coeffs(5, buckets).unwrap();
        assert_eq!(
            g.coords(),
            &[
                BigInt::from(-1),
                BigInt::from(0),
                BigInt::from(-2),
                BigInt::from(-2)
            ][..]
        );
        // ord_p of the quadratic Gauss sum is 1/2, i.e. pi-valuation 2 of 4.
        assert_eq!(g.pi_valuation(), Some(2));
    }

    #[test]
    fn pi_valuation_frozen_values() {
        for p in [3u64, 5, 7] {
            assert_eq!(one_minus_zeta(p).unwrap().pi_valuation(), Some(1));
            // p is totally ramified: p = unit * pi^{p-1}.
            assert_eq!(int(p, p as i64).pi_valuation(), Some(p - 1));
            assert_eq!(int(p, 1).pi_valuation(), Some(0));
            assert_eq!(CycInt::zero(p).unwrap().pi_valuation(), None);
        }
    }

    #[test]
    fn division_examples() {
        // 3 / (1 - zeta) = 2 + zeta for p = 3:
        // (1 - zeta)(2 + zeta) = 2 - zeta - zeta^2 = 3 after folding.
        let q = int(3, 3).div_one_minus_zeta().unwrap();
        assert_eq!(q.coords(), &[BigInt::from(2), BigInt::from(1)][..]);
        // 1 is not divisible.
        assert!(matches!(
            int(5, 1).div_one_minus_zeta(),
            Err(Error::InexactDivision { .. })
        ));
    }

    #[test]
    fn galois_action_and_norms() {
        for p in [3u64, 5, 7] {
            let pi = one_minus_zeta(p).unwrap();
            assert_eq!(pi.galois_conjugate(1).unwrap(), pi);
            assert!(pi.galois_conjugate(p).is_err());
            // Product of all conjugates of the uniformizer is p itself.
            let mut prod = int(p, 1);
            for j in 1..p {
                prod = prod.mul(&pi.galois_conjugate(j).unwrap()).unwrap();
            }
            assert_eq!(prod, int(p, p as i64));
            assert_eq!(pi.absolute_norm().unwrap(), BigInt::from(p));
            // Norm of an integer is its (p-1)-th power.
            assert_eq!(
                int(p, 2).absolute_norm().unwrap(),
                BigInt::from(2).pow(p as u32 - 1)
            );
        }
    }

    #[test]
    fn norm_poly_examples() {
        // Constant 1 stays 1.
        let one = CycPoly::one(5).unwrap();
        let n = norm_poly(&one).unwrap();
        assert_eq!(n.coeffs(), &[BigInt::from(1)][..]);
        // p = 3: (1 + (1-zeta)T)(1 + (1-zeta^2)T) = 1 + 3T + 3T^2, using
        // (1-zeta) + (1-zeta^2) = 2 - (zeta + zeta^2) = 3 and N(1-zeta) = 3.
        let l = CycPoly::new(
            3,
            vec![int(3, 1), one_minus_zeta(3).unwrap()],
        )
        .unwrap();
        let n = norm_poly(&l).unwrap();
        assert_eq!(
            n.coeffs(),
            &[BigInt::from(1), BigInt::from(3), BigInt::from(3)][..]
        );
        // Degree multiplies by p - 1.
        assert_eq!(n.degree(), Some(2));
        let l5 = CycPoly::new(
            5,
            vec![int(5, 1), CycInt::zeta_pow(5, 2).unwrap(), int(5, 1)],
        )
        .unwrap();
        assert_eq!(norm_poly(&l5).unwrap().degree(), Some(8));
    }

    proptest! {
        #[test]
        fn ring_ops_commute_with_modular_evaluation(
            av in proptest::collection::vec(-20i64..20, 4),
            bv in proptest::collection::vec(-20i64..20, 4),
            cv in proptest::collection::vec(-20i64..20, 4),
        ) {
            let p = 5u64;
            let (q, omega) = oracle_params(p);
            let mk = |v: &Vec<i64>| CycInt::from_zeta_coeffs(
                p, v.iter().map(|&x| BigInt::from(x)).collect()).unwrap();
            let (a, b, c) = (mk(&av), mk(&bv), mk(&cv));
            let e = |x: &CycInt| eval_mod_q(x, q, omega);
            prop_assert_eq!(e(&a.add(&b).unwrap()), (e(&a) + e(&b)) % q);
            prop_assert_eq!(e(&a.mul(&b).unwrap()), e(&a) * e(&b) % q);
            // Distributivity exactly, not just through the oracle.
            let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
            let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn valuation_is_additive_and_matches_norm(
            av in proptest::collection::vec(-9i64..9, 4),
            bv in proptest::collection::vec(-9i64..9, 4),
        ) {
            let p = 5u64;
            let mk = |v: &Vec<i64>| CycInt::from_zeta_coeffs(
                p, v.iter().map(|&x| BigInt::from(x)).collect()).unwrap();
            let (a, b) = (mk(&av), mk(&bv));
            prop_assume!(!a.is_zero() && !b.is_zero());
            let va = a.pi_valuation().unwrap();
            let vb = b.pi_valuation().unwrap();
            let vab = a.mul(&b).unwrap().pi_valuation().unwrap();
            prop_assert_eq!(vab, va + vb);
            // Total ramification with residue degree 1: the pi-valuation
            // equals the p-valuation of the absolute norm.
            let na = a.absolute_norm().unwrap();
            prop_assert_eq!(crate::padic::ord_int(&na, p), Some(va));
        }

        #[test]
        fn conjugation_composes(j1 in 1u64..5, j2 in 1u64..5,
                                av in proptest::collection::vec(-9i64..9, 4)) {
            let p = 5u64;
            let a = CycInt::from_zeta_coeffs(
                p, av.iter().map(|&x| BigInt::from(x)).collect()).unwrap();
            let lhs = a.galois_conjugate(j1).unwrap().galois_conjugate(j2).unwrap();
            let rhs = a.galois_conjugate(j1 * j2 % p).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
