//! Expansion coefficients attached to `y^p - y = f(x)`.
//!
//! Everything here lives in one picture. Let `Y(z)` be the power-series
//! solution of `Y^p - Y = z` with `Y(0) = 0`. Three coefficient families are
//! computed, each truncated p-adically at a fixed absolute precision `A`:
//!
//! * `D_k(a)`: the `z^k` coefficient of `Y^a`, from a factorial closed form;
//! * `E_k(i, N)`: the `z^k` coefficient of `Y^i (p Y^{p-1} - 1)^{p^N - 1}`,
//!   as a binomial-weighted sum of `D`'s with the tail beyond `p^A` dropped;
//! * `C_r(i, N)`: the `x^r` coefficient of the same product after
//!   substituting `z = f(x)`, as a sum of `E`'s over weakly decreasing
//!   tuples weighted by binomial products in the coefficients of `f`.
//!
//! Each family also has a slow oracle that knows nothing of the closed
//! forms: `Y` is found by fixed-point iteration on raw residue series, the
//! big power is taken by binary exponentiation, and the substitution is a
//! Horner composition. The two routes share only the ambient arithmetic.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::curve::CurveSpec;
use crate::error::Error;
use crate::ktuple::for_each_tuple;
use crate::padic::{
    digit_sum, is_prime, ord_big, ord_binomial, p_pow, FactorialCache, TruncatedPadic, Val,
};
use crate::Result;

/// Deliberate perturbation of one `E` value, used to demonstrate that the
/// congruence suites actually look at the numbers they claim to check.
#[derive(Clone, Copy, Debug)]
pub struct EFault {
    pub k1: u64,
    pub i: u64,
    pub series_level: u64,
}

/// What the valuation law asserts about one coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValuationClaim {
    Exactly(u64),
    /// Lower bound; may be negative, in which case it is vacuous.
    AtLeast(i64),
}

impl ValuationClaim {
    /// Does an observed valuation satisfy the claim? An `AtLeast`
    /// observation (zero at working precision) has unbounded valuation.
    pub fn admits(&self, observed: Val) -> bool {
        match (*self, observed) {
            (ValuationClaim::Exactly(b), Val::Finite(v)) => v == b,
            (ValuationClaim::Exactly(_), Val::AtLeast(_)) => false,
            (ValuationClaim::AtLeast(b), Val::Finite(v)) => v as i64 >= b,
            (ValuationClaim::AtLeast(_), Val::AtLeast(_)) => true,
        }
    }
}

pub struct CoeffEngine {
    p: u64,
    precision: u64,
    modulus: BigUint,
    fac: FactorialCache,
    e_memo: HashMap<(u64, u64, u64), TruncatedPadic>,
    fault: Option<EFault>,
}

impl CoeffEngine {
    /// Working precision is the absolute modulus exponent: all results are
    /// reported through `p^precision`.
    pub fn new(p: u64, precision: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p < 3 {
            return Err(Error::PrimeTooSmall { p, min: 3 });
        }
        if precision == 0 {
            return Err(Error::InvalidInput("precision must be at least 1".into()));
        }
        Ok(CoeffEngine {
            p,
            precision,
            modulus: p_pow(p, precision),
            fac: FactorialCache::new(p, precision)?,
            e_memo: HashMap::new(),
            fault: None,
        })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u64 {
        self.precision
    }

    /// Install or clear a fault. Clears the memo table so earlier clean
    /// values cannot mask the perturbation (or linger after it).
    pub fn set_fault(&mut self, fault: Option<EFault>) {
        self.fault = fault;
        self.e_memo.clear();
    }

    /// `D_k1(a)`, the `z^k1` coefficient of `Y^a`. Exact up to the working
    /// precision; the valuation is computed from factorials, not residues,
    /// so it is exact even beyond the modulus.
    pub fn d_coeff(&mut self, k1: u64, a: u64) -> TruncatedPadic {
        let p = self.p;
        let aa = self.precision;
        if (a == 0) != (k1 == 0) {
            return TruncatedPadic::zero(p, aa);
        }
        if a == 0 && k1 == 0 {
            return TruncatedPadic::one(p, aa);
        }
        if k1 < a || (k1 - a) % (p - 1) != 0 {
            return TruncatedPadic::zero(p, aa);
        }
        let e = (k1 - a) / (p - 1);
        let (vn, un) = self.fac.factorial(k1 + e - 1);
        let (v1, u1) = self.fac.factorial(k1);
        let (v2, u2) = self.fac.factorial(e);
        let mut va = 0;
        let mut ua = a;
        while ua % p == 0 {
            ua /= p;
            va += 1;
        }
        debug_assert!(vn + va >= v1 + v2, "coefficient of an integral series");
        let val = vn + va - v1 - v2;
        let inv = crate::padic::inv_mod(&((u1 * u2) % &self.modulus), &self.modulus);
        let mut unit = un * ua * inv % &self.modulus;
        // Sign: expanding (y^{p-1} - 1)^{-k1} = (-1)^{k1} sum binom(k1+l-1, l) y^{(p-1)l}
        // gives the sign (-1)^{k1}, which equals (-1)^a for odd p since
        // k1 - a is a multiple of the even number p - 1.
        if a % 2 == 1 {
            unit = &self.modulus - unit;
        }
        TruncatedPadic::from_unit(p, val, unit, aa)
    }

    /// Valuation law for `D_k1(a)` with `k1 >= 1`, `a >= 1`, and
    /// `k1 = a mod (p - 1)`. Writing `a = i + ell (p - 1)` with
    /// `1 <= i <= p - 1`, `s` for the base-p digit sum of `k1`, and
    /// `b = (s - i) / (p - 1)`: the valuation is exactly `b` when `ell = 0`
    /// and at least `b - (ell - 1)` when `ell >= 1`. Returns the claim and
    /// the exact observed valuation.
    pub fn d_valuation_check(&mut self, k1: u64, a: u64) -> Result<(ValuationClaim, Val)> {
        let p = self.p;
        if k1 == 0 || a == 0 {
            return Err(Error::InvalidInput(format!(
                "valuation law needs k1 >= 1 and a >= 1, got k1={k1} a={a}"
            )));
        }
        if k1 % (p - 1) != a % (p - 1) {
            return Err(Error::NotCongruent { k1, a, pm1: p - 1 });
        }
        let i = (a - 1) % (p - 1) + 1;
        let ell = (a - i) / (p - 1);
        let s = digit_sum(k1, p)?;
        debug_assert!(s >= i && (s - i) % (p - 1) == 0);
        let base = ((s - i) / (p - 1)) as i64;
        let claim = if ell == 0 {
            ValuationClaim::Exactly(base as u64)
        } else {
            ValuationClaim::AtLeast(base - (ell as i64 - 1))
        };
        Ok((claim, self.d_coeff(k1, a).valuation()))
    }

    /// `E_k1(i, N)`: the `z^k1` coefficient of `Y^i (p Y^{p-1} - 1)^{p^N - 1}`,
    /// expanded as `sum_t (-1)^t C(p^N - 1, t) p^t D_k1(i + t(p - 1))` with
    /// the sum cut at `t = precision` (each dropped term is divisible by
    /// `p^precision`). The result is capped at the working precision.
    pub fn e_coeff(&mut self, k1: u64, i: u64, n: u64) -> Result<TruncatedPadic> {
        let key = (k1, i, n);
        if let Some(v) = self.e_memo.get(&key) {
            return Ok(v.clone());
        }
        let p = self.p;
        let aa = self.precision;
        let n_big = p_pow(p, n) - 1u32;
        let mut acc = TruncatedPadic::zero(p, aa);
        let mut binom = BigUint::one();
        for t in 0..aa {
            if t > 0 {
                let tb = BigUint::from(t);
                if tb > n_big {
                    break;
                }
                let factor = &n_big - (&tb - 1u32);
                let (q, r) = (binom * factor).div_rem(&tb);
                debug_assert!(r.is_zero(), "binomial row recurrence divides exactly");
                binom = q;
            }
            debug_assert!(ord_big(&binom, p) == 0, "no carries against all-(p-1) digits");
            let d = self.d_coeff(k1, i + t * (p - 1));
            if d.is_zero_here() {
                continue;
            }
            let b = TruncatedPadic::from_unit(p, 0, &binom % &self.modulus, aa);
            let mut term = d.mul(&b).shift(t);
            if t % 2 == 1 {
                term = term.neg();
            }
            acc = acc.add(&term);
        }
        let mut out = acc.cap_absolute(aa);
        if let Some(f) = self.fault {
            if f.k1 == k1 && f.i == i && f.series_level == n {
                out = out.add(&TruncatedPadic::one(p, aa)).cap_absolute(aa);
            }
        }
        self.e_memo.insert(key, out.clone());
        Ok(out)
    }

    /// `C_r(i, N)`: the `x^r` coefficient after substituting `z = f(x)`.
    ///
    /// The sum runs over weakly decreasing tuples `k_1 >= ... >= k_d >= 0`
    /// with `sum k_l = r`; the term for a tuple is
    /// `E_{k_1}(i, N) * prod_{l<d} C(k_l, k_{l+1}) a_l^{k_l - k_{l+1}}`.
    /// Tuples forcing a difference at a vanishing coefficient of `f` are
    /// never generated, and `cap` bounds the exact number of surviving
    /// tuples before any work is done.
    pub fn c_coeff(
        &mut self,
        curve: &CurveSpec,
        r: u64,
        i: u64,
        n: u64,
        cap: u128,
    ) -> Result<TruncatedPadic> {
        if curve.p() != self.p {
            return Err(Error::WrongContext { expected: self.p, got: curve.p() });
        }
        let p = self.p;
        let aa = self.precision;
        let d = curve.d();
        let allowed: Vec<bool> =
            (1..=d).map(|l| l == d || curve.coeff_u64(l as usize) != 0).collect();
        let mut acc = TruncatedPadic::zero(p, aa);
        let mut first_err: Option<Error> = None;
        for_each_tuple(r, d, &allowed, cap, |entries| {
            if first_err.is_some() {
                return;
            }
            let k1 = entries[0];
            if k1 == 0 {
                // Empty substitution: only the constant survives.
                if i == 0 {
                    acc = acc.add(&TruncatedPadic::one(p, aa));
                }
                return;
            }
            if k1 % (p - 1) != i % (p - 1) {
                return; // every D in the E-sum vanishes
            }
            // Valuation from the binomial carries alone already kills the
            // term: skip without touching the caches.
            let mut low = 0;
            for l in 0..d as usize - 1 {
                low += ord_binomial(entries[l], entries[l + 1], p).expect("k_l >= k_{l+1}");
            }
            if low >= aa {
                return;
            }
            let e_val = match self.e_coeff(k1, i, n) {
                Ok(v) => v,
                Err(err) => {
                    first_err = Some(err);
                    return;
                }
            };
            let mut term = e_val;
            for l in 1..d as usize {
                let (kl, kl1) = (entries[l - 1], entries[l]);
                let (v, u) = match self.fac.binomial(kl, kl1) {
                    Ok(b) => b,
                    Err(err) => {
                        first_err = Some(err);
                        return;
                    }
                };
                term = term.mul(&TruncatedPadic::from_unit(p, v, u, aa));
                let m = kl - kl1;
                if m > 0 {
                    let al = curve.coeff_u64(l);
                    debug_assert!(al != 0, "blocked difference slipped through");
                    let pw = BigUint::from(al).modpow(&BigUint::from(m), &self.modulus);
                    term = term.mul(&TruncatedPadic::from_unit(p, 0, pw, aa));
                }
            }
            acc = acc.add(&term);
        })?;
        if let Some(err) = first_err {
            return Err(err);
        }
        Ok(acc.cap_absolute(aa))
    }

    // ------------------------------------------------------------------
    // Series oracles: raw residue power series, no closed forms anywhere.
    // ------------------------------------------------------------------

    /// Solve `Y^p - Y = z` with `Y(0) = 0` by iterating `Y <- Y^p - z`
    /// modulo `(p^precision, z^{k_max+1})`, then verify the equation holds.
    fn solve_y(&self, k_max: usize) -> Vec<BigUint> {
        let m = &self.modulus;
        let mut y = vec![BigUint::zero(); k_max + 1];
        let limit = self.precision as usize + k_max + 16;
        for step in 0.. {
            assert!(step < limit, "fixed point failed to stabilize");
            let mut next = ser_pow(&y, self.p, m, k_max);
            grow(&mut next, k_max);
            if k_max >= 1 {
                next[1] = (&next[1] + (m - 1u32)) % m; // subtract z
            }
            if next == y {
                break;
            }
            y = next;
        }
        // The defining equation, checked on the nose.
        let mut check = ser_pow(&y, self.p, m, k_max);
        grow(&mut check, k_max);
        for (k, c) in check.iter_mut().enumerate() {
            let mut v = (&*c + m - &y[k]) % m;
            if k == 1 {
                v = (v + (m - 1u32)) % m;
            }
            assert!(v.is_zero(), "solution does not satisfy its equation");
        }
        y
    }

    /// `z` coefficients of `Y^a`, as residues through the working modulus.
    pub fn y_power_series(&self, a: u64, k_max: u64) -> Vec<BigUint> {
        let k_max = k_max as usize;
        let y = self.solve_y(k_max);
        let mut out = ser_pow(&y, a, &self.modulus, k_max);
        grow(&mut out, k_max);
        out
    }

    /// `z` coefficients of `Y^i (p Y^{p-1} - 1)^{p^N - 1}`, by binary
    /// exponentiation of the actual base — no binomial expansion.
    pub fn e_oracle_series(&self, i: u64, n: u64, k_max: u64) -> Result<Vec<BigUint>> {
        let k_max = k_max as usize;
        let y = self.solve_y(k_max);
        self.g_series(&y, i, n, k_max)
    }

    fn g_series(&self, y: &[BigUint], i: u64, n: u64, k_max: usize) -> Result<Vec<BigUint>> {
        let m = &self.modulus;
        let exp = self
            .p
            .checked_pow(u32::try_from(n).map_err(|_| level_too_deep(n))?)
            .ok_or_else(|| level_too_deep(n))?
            - 1;
        let mut base = ser_pow(y, self.p - 1, m, k_max);
        grow(&mut base, k_max);
        for c in base.iter_mut() {
            *c = (&*c * self.p) % m;
        }
        base[0] = (&base[0] + (m - 1u32)) % m;
        let mut out = ser_mul(&ser_pow(y, i, m, k_max), &ser_pow(&base, exp, m, k_max), m, k_max);
        grow(&mut out, k_max);
        Ok(out)
    }

    /// `x` coefficients of the substituted product, for every `r <= r_max`
    /// at once, as truncated p-adic values at the working precision.
    pub fn c_oracle_series(
        &self,
        curve: &CurveSpec,
        i: u64,
        n: u64,
        r_max: u64,
    ) -> Result<Vec<TruncatedPadic>> {
        if curve.p() != self.p {
            return Err(Error::WrongContext { expected: self.p, got: curve.p() });
        }
        let m = &self.modulus;
        let z_cap = r_max as usize; // f has positive order in x
        let y = self.solve_y(z_cap);
        let g = self.g_series(&y, i, n, z_cap)?;
        let d = curve.d() as usize;
        let f_ser: Vec<BigUint> =
            (0..=d.min(z_cap.max(1))).map(|l| BigUint::from(curve.coeff_u64(l))).collect();
        let mut h = vec![g[z_cap].clone()];
        for k in (0..z_cap).rev() {
            h = ser_mul(&h, &f_ser, m, r_max as usize);
            h[0] = (&h[0] + &g[k]) % m;
        }
        grow(&mut h, r_max as usize);
        Ok(h
            .into_iter()
            .map(|r| TruncatedPadic::from_residue(r, self.p, self.precision))
            .collect())
    }

    /// Single-coefficient view of the series oracle (criterion-sized r only).
    pub fn c_coeff_oracle(
        &self,
        curve: &CurveSpec,
        r: u64,
        i: u64,
        n: u64,
    ) -> Result<TruncatedPadic> {
        Ok(self.c_oracle_series(curve, i, n, r)?.pop().expect("r present"))
    }
}

/// Index pairs `(i, j)` with `0 <= i <= p - 2`, `j >= 1`, and
/// `d i + p j <= (p - 1)(d - 1) - 2 + p`: the exponent pairs indexing the
/// holomorphic differentials `x^j y^i (p y^{p-1} - 1)^{-1} dx/x`. Their
/// number equals the genus.
pub fn basis_index_range(p: u64, d: u64) -> Vec<(u64, u64)> {
    let cap = (p - 1) * (d - 1) + p - 2;
    let mut out = Vec::new();
    for i in 0..=p - 2 {
        for j in 1.. {
            if d * i + p * j > cap {
                break;
            }
            out.push((i, j));
        }
    }
    debug_assert_eq!(out.len() as u64, (p - 1) * (d - 1) / 2);
    out
}

fn level_too_deep(n: u64) -> Error {
    Error::InvalidInput(format!("series level {n} makes p^N overflow"))
}

fn grow(v: &mut Vec<BigUint>, k_max: usize) {
    v.resize(k_max + 1, BigUint::zero());
}

fn ser_mul(a: &[BigUint], b: &[BigUint], m: &BigUint, cap: usize) -> Vec<BigUint> {
    let n = (a.len() + b.len()).saturating_sub(1).min(cap + 1).max(1);
    let mut out = vec![BigUint::zero(); n];
    for (ia, ca) in a.iter().enumerate() {
        if ca.is_zero() || ia > cap {
            continue;
        }
        for (ib, cb) in b.iter().enumerate() {
            if ia + ib > cap {
                break;
            }
            if cb.is_zero() {
                continue;
            }
            out[ia + ib] = (&out[ia + ib] + ca * cb) % m;
        }
    }
    out
}

fn ser_pow(base: &[BigUint], mut e: u64, m: &BigUint, cap: usize) -> Vec<BigUint> {
    let mut result = vec![BigUint::one()];
    let mut sq = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            result = ser_mul(&result, &sq, m, cap);
        }
        e >>= 1;
        if e > 0 {
            sq = ser_mul(&sq, &sq, m, cap);
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;
    use crate::IntPoly;
    use num_bigint::BigInt;

    fn ipoly(cs: &[i64]) -> IntPoly {
        Poly::new(cs.iter().map(|&c| BigInt::from(c)).collect())
    }

    fn residue(t: &TruncatedPadic, abs: u64) -> u64 {
        let digits = t.residue_mod(abs).unwrap().to_u64_digits();
        digits.first().copied().unwrap_or(0)
    }

    #[test]
    fn d_closed_form_frozen_values() {
        let mut eng = CoeffEngine::new(5, 6).unwrap();
        // Leading coefficient of Y is -1.
        assert_eq!(residue(&eng.d_coeff(1, 1), 6), 5u64.pow(6) - 1);
        // One step up the ladder: [z^5]Y = ([z^1]Y)^5 = -1 by comparing
        // the z^5 coefficients on both sides of Y^5 - Y = z.
        assert_eq!(residue(&eng.d_coeff(5, 1), 6), 5u64.pow(6) - 1);
        // Non-congruent exponent vanishes.
        assert!(eng.d_coeff(2, 1).is_zero_here());
        assert_eq!(residue(&eng.d_coeff(5, 5), 6), 5u64.pow(6) - 1);
        // -5 and -35: valuation 1 values.
        let d91 = eng.d_coeff(9, 1);
        assert_eq!(d91.valuation(), Val::Finite(1));
        assert_eq!(residue(&d91, 6), 5u64.pow(6) - 5);
        let d135 = eng.d_coeff(13, 5);
        assert_eq!(d135.valuation(), Val::Finite(1));
        assert_eq!(residue(&d135, 6), 5u64.pow(6) - 35);
        // Degenerate corners.
        assert_eq!(residue(&eng.d_coeff(0, 0), 6), 1);
        assert!(eng.d_coeff(0, 3).is_zero_here());
        assert!(eng.d_coeff(3, 0).is_zero_here());
        assert!(eng.d_coeff(2, 5).is_zero_here());
    }

    #[test]
    fn d_matches_series_oracle() {
        for p in [5u64, 7] {
            let mut eng = CoeffEngine::new(p, 5).unwrap();
            let abs = 5;
            for a in 0..=6u64 {
                let series = eng.y_power_series(a, 60);
                for k1 in 0..=60u64 {
                    let fast = eng.d_coeff(k1, a).residue_mod(abs).unwrap();
                    assert_eq!(
                        fast, series[k1 as usize],
                        "D mismatch at p={p} a={a} k1={k1}"
                    );
                }
            }
        }
    }

    #[test]
    fn e_frozen_values() {
        for n in [1u64, 2] {
            let mut eng = CoeffEngine::new(5, 3).unwrap();
            assert_eq!(residue(&eng.e_coeff(0, 0, n).unwrap(), 3), 1);
        }
        let mut eng = CoeffEngine::new(5, 3).unwrap();
        // D_5(1) - 4*5*D_5(5) = -1 + 20 = 19, exactly (the t >= 2 terms vanish).
        let e = eng.e_coeff(5, 1, 1).unwrap();
        assert_eq!(e.valuation(), Val::Finite(0));
        assert_eq!(residue(&e, 3), 19);
        let mut eng2 = CoeffEngine::new(5, 2).unwrap();
        assert_eq!(residue(&eng2.e_coeff(5, 1, 1).unwrap(), 2), 19);
    }

    #[test]
    fn e_matches_series_oracle() {
        for p in [5u64, 7] {
            for n in [1u64, 2] {
                let mut eng = CoeffEngine::new(p, 4).unwrap();
                for i in 0..=(p - 2).min(3) {
                    let series = eng.e_oracle_series(i, n, 40).unwrap();
                    for k1 in 0..=40u64 {
                        let fast = eng.e_coeff(k1, i, n).unwrap().residue_mod(4).unwrap();
                        assert_eq!(
                            fast, series[k1 as usize],
                            "E mismatch at p={p} n={n} i={i} k1={k1}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn e_truncation_past_exponent_is_handled() {
        // precision exceeds p^N - 1, so the binomial row runs dry.
        let mut eng = CoeffEngine::new(5, 7).unwrap();
        let series = eng.e_oracle_series(1, 1, 25).unwrap();
        for k1 in 0..=25u64 {
            let fast = eng.e_coeff(k1, 1, 1).unwrap().residue_mod(7).unwrap();
            assert_eq!(fast, series[k1 as usize], "k1={k1}");
        }
    }

    #[test]
    fn c_small_frozen_values() {
        let mut eng = CoeffEngine::new(5, 4).unwrap();
        let cusp = CurveSpec::new(5, &ipoly(&[0, 0, 1])).unwrap(); // x^2
        let node = CurveSpec::new(5, &ipoly(&[0, 1, 1])).unwrap(); // x^2 + x
        // No tuple of weight 1 exists when a_1 = 0.
        assert!(eng.c_coeff(&cusp, 1, 1, 1, 1 << 20).unwrap().is_zero_here());
        // C_1(1, N) = a_1 * E_1(1, N) = -1.
        let c = eng.c_coeff(&node, 1, 1, 1, 1 << 20).unwrap();
        assert_eq!(residue(&c, 4), 5u64.pow(4) - 1);
        // C_0(i, N) is 1 for i = 0 and 0 otherwise.
        assert_eq!(residue(&eng.c_coeff(&node, 0, 0, 1, 4).unwrap(), 4), 1);
        assert!(eng.c_coeff(&node, 0, 1, 1, 4).unwrap().is_zero_here());
        // C_2(2, 1) for x^2 + x: only the tuple (2, 0) is congruent, and
        // E_2(2, 1) = D_2(2) = 1.
        assert_eq!(residue(&eng.c_coeff(&node, 2, 2, 1, 1 << 20).unwrap(), 4), 1);
    }

    #[test]
    fn c_matches_series_oracle() {
        let polys: &[(&[i64], u64)] = &[
            (&[0, 1, 1], 5),
            (&[0, 3, 1], 5),
            (&[0, 0, 1], 5),
            (&[0, 1, 0, 1], 5),
            (&[0, 2, 4, 1], 7),
            (&[0, 1, 0, 1], 7),
        ];
        for &(cs, p) in polys {
            let curve = CurveSpec::new(p, &ipoly(cs)).unwrap();
            let mut eng = CoeffEngine::new(p, 4).unwrap();
            for i in 0..=2u64 {
                for n in [1u64, 2] {
                    let oracle = eng.c_oracle_series(&curve, i, n, 25).unwrap();
                    for r in 0..=25u64 {
                        let fast =
                            eng.c_coeff(&curve, r, i, n, 1 << 30).unwrap().residue_mod(4).unwrap();
                        let slow = oracle[r as usize].residue_mod(4).unwrap();
                        assert_eq!(fast, slow, "C mismatch p={p} f={cs:?} i={i} n={n} r={r}");
                    }
                }
            }
        }
    }

    #[test]
    fn valuation_law_spot_checks() {
        let mut eng = CoeffEngine::new(5, 8).unwrap();
        // ord D_5(1) = (s_5(5) - 1)/4 = 0 exactly.
        let (claim, seen) = eng.d_valuation_check(5, 1).unwrap();
        assert_eq!(claim, ValuationClaim::Exactly(0));
        assert_eq!(seen, Val::Finite(0));
        assert!(claim.admits(seen));
        // ord D_9(1) = (s_5(9) - 1)/4 = 1 exactly.
        let (claim, seen) = eng.d_valuation_check(9, 1).unwrap();
        assert_eq!(claim, ValuationClaim::Exactly(1));
        assert!(claim.admits(seen));
        // a = 5 = 1 + 1*(p-1): lower-bound branch.
        let (claim, seen) = eng.d_valuation_check(13, 5).unwrap();
        assert_eq!(claim, ValuationClaim::AtLeast(1));
        assert_eq!(seen, Val::Finite(1));
        assert!(claim.admits(seen));
        // Incongruent pairs are rejected outright.
        assert!(matches!(
            eng.d_valuation_check(2, 1),
            Err(Error::NotCongruent { k1: 2, a: 1, pm1: 4 })
        ));
    }

    #[test]
    fn fault_injection_changes_c() {
        let curve = CurveSpec::new(5, &ipoly(&[0, 1, 1])).unwrap();
        let mut eng = CoeffEngine::new(5, 4).unwrap();
        let clean = eng.c_coeff(&curve, 2, 2, 1, 1 << 20).unwrap();
        eng.set_fault(Some(EFault { k1: 2, i: 2, series_level: 1 }));
        let dirty = eng.c_coeff(&curve, 2, 2, 1, 1 << 20).unwrap();
        assert!(!clean.congruent_mod(&dirty, 1).unwrap());
        eng.set_fault(None);
        let back = eng.c_coeff(&curve, 2, 2, 1, 1 << 20).unwrap();
        assert!(clean.congruent_mod(&back, 4).unwrap());
    }

    #[test]
    fn cap_propagates() {
        let curve = CurveSpec::new(5, &ipoly(&[0, 1, 1])).unwrap();
        let mut eng = CoeffEngine::new(5, 3).unwrap();
        match eng.c_coeff(&curve, 100, 1, 1, 3) {
            Err(Error::CapExceeded { cap: 3, .. }) => {}
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn basis_pairs_counted_by_genus() {
        assert_eq!(basis_index_range(5, 3), vec![(0, 1), (0, 2), (1, 1), (2, 1)]);
        assert_eq!(basis_index_range(7, 2), vec![(0, 1), (1, 1), (2, 1)]);
        for (p, d) in [(5, 2), (5, 3), (7, 2), (7, 3), (11, 4)] {
            assert_eq!(basis_index_range(p, d).len() as u64, (p - 1) * (d - 1) / 2);
        }
    }

    #[test]
    fn pure_power_reduces_to_e() {
        let curve = CurveSpec::new(5, &ipoly(&[0, 0, 0, 1])).unwrap();
        let mut eng = CoeffEngine::new(5, 4).unwrap();
        for r in 0..=20u64 {
            let c = eng.c_coeff(&curve, r, 2, 1, 1 << 20).unwrap();
            if r % 3 == 0 {
                let e = eng.e_coeff(r / 3, 2, 1).unwrap();
                assert!(c.congruent_mod(&e, 4).unwrap(), "r={r}");
            } else {
                assert!(c.is_zero_here(), "r={r}");
            }
        }
    }

    #[test]
    fn single_r_oracle_view() {
        let curve = CurveSpec::new(5, &ipoly(&[0, 1, 1])).unwrap();
        let mut eng = CoeffEngine::new(5, 4).unwrap();
        let direct = eng.c_coeff(&curve, 4, 1, 1, 1 << 20).unwrap();
        let via_oracle = eng.c_coeff_oracle(&curve, 4, 1, 1).unwrap();
        assert!(direct.congruent_mod(&via_oracle, 4).unwrap());
    }

    #[test]
    fn sparse_support_matches_dense_route() {
        // For f with a_1 = 0 the engine never generates blocked tuples; the
        // oracle knows nothing of tuples at all. Agreement means the
        // support restriction loses no terms.
        let curve = CurveSpec::new(7, &ipoly(&[0, 0, 0, 1])).unwrap(); // x^3
        let mut eng = CoeffEngine::new(7, 3).unwrap();
        let oracle = eng.c_oracle_series(&curve, 1, 1, 21).unwrap();
        for r in 0..=21u64 {
            let fast = eng.c_coeff(&curve, r, 1, 1, 1 << 20).unwrap();
            assert!(fast.congruent_mod(&oracle[r as usize], 3).unwrap(), "r={r}");
        }
    }
}
