//! The density side of the first-slope story: for a fixed monic integer
//! polynomial, the refined bound `ceil((p-1)/d)/(p-1)` tends to `1/d` as the
//! prime grows, and equality holds for all but finitely many primes exactly
//! when finitely many universal polynomials `f_k` are nonzero at the
//! coefficients of `f`. This module builds those `f_k` symbolically, decides
//! membership in the generic set, and sweeps prime ranges comparing the
//! symbolic prediction against the criterion coefficient and the measured
//! slope.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::curve::CurveSpec;
use crate::error::Error;
use crate::padic::is_prime;
use crate::{IntPoly, Rational, Result};

use super::{criterion_coeff, measure_np1, slope_bound, MeasurementRoute};

/// Polynomial with exact rational coefficients in the variables
/// `A_0, ..., A_{arity-1}`. Terms are keyed by exponent vectors of fixed
/// length, so the zero polynomial has no terms and every stored coefficient
/// is nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MPoly {
    arity: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl MPoly {
    pub fn zero(arity: usize) -> Self {
        MPoly { arity, terms: BTreeMap::new() }
    }

    pub fn constant(arity: usize, value: Rational) -> Self {
        let mut out = Self::zero(arity);
        if !value.is_zero() {
            out.terms.insert(vec![0; arity], value);
        }
        out
    }

    pub fn variable(arity: usize, index: usize) -> Self {
        assert!(index < arity, "variable index out of range");
        let mut exps = vec![0u32; arity];
        exps[index] = 1;
        let mut out = Self::zero(arity);
        out.terms.insert(exps, Rational::one());
        out
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    /// Coefficient of the monomial with the given exponent vector.
    pub fn coefficient(&self, exps: &[u32]) -> Rational {
        assert_eq!(exps.len(), self.arity, "exponent vector arity mismatch");
        self.terms.get(exps).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity, "arity mismatch");
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let entry = terms.entry(e.clone()).or_insert_with(Rational::zero);
            *entry += c;
            if entry.is_zero() {
                terms.remove(e);
            }
        }
        MPoly { arity: self.arity, terms }
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        if factor.is_zero() {
            return Self::zero(self.arity);
        }
        MPoly {
            arity: self.arity,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * factor)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity, "arity mismatch");
        let mut out = Self::zero(self.arity);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u32> =
                    ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                let entry = out.terms.entry(exps).or_insert_with(Rational::zero);
                *entry += ca * cb;
                if entry.is_zero() {
                    out.terms.remove(
                        &ea.iter().zip(eb).map(|(x, y)| x + y).collect::<Vec<_>>(),
                    );
                }
            }
        }
        out
    }

    /// Evaluate at the given variable values.
    pub fn eval(&self, values: &[Rational]) -> Result<Rational> {
        if values.len() != self.arity {
            return Err(Error::InvalidInput(format!(
                "expected {} values, got {}",
                self.arity,
                values.len()
            )));
        }
        let mut acc = Rational::zero();
        for (exps, coeff) in &self.terms {
            let mut term = coeff.clone();
            for (value, &e) in values.iter().zip(exps) {
                for _ in 0..e {
                    term *= value;
                }
            }
            acc += term;
        }
        Ok(acc)
    }
}

impl std::fmt::Display for MPoly {
    fn fmt(&self, out: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(out, "0");
        }
        for (idx, (exps, coeff)) in self.terms.iter().enumerate() {
            let negative = coeff.is_negative();
            if idx == 0 {
                if negative {
                    write!(out, "-")?;
                }
            } else if negative {
                write!(out, " - ")?;
            } else {
                write!(out, " + ")?;
            }
            let mag = coeff.abs();
            let vars: Vec<String> = exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(v, &e)| if e == 1 { format!("A{v}") } else { format!("A{v}^{e}") })
                .collect();
            if vars.is_empty() {
                write!(out, "{mag}")?;
            } else if mag.is_one() {
                write!(out, "{}", vars.join("*"))?;
            } else {
                write!(out, "{mag}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// `binom(x, l)` for rational `x`: the degree-`l` falling-factorial product
/// over `l!`.
fn binom_rational(x: &Rational, l: u64) -> Rational {
    let mut acc = Rational::one();
    for t in 0..l {
        acc *= x - Rational::from_integer(BigInt::from(t));
        acc /= Rational::from_integer(BigInt::from(t + 1));
    }
    acc
}

/// Truncated product of polynomials in `T` whose coefficients are `MPoly`s.
fn tpoly_mul(a: &[MPoly], b: &[MPoly], cap: usize, arity: usize) -> Vec<MPoly> {
    let len = (a.len() + b.len()).saturating_sub(1).min(cap + 1).max(1);
    let mut out = vec![MPoly::zero(arity); len];
    for (ia, ca) in a.iter().enumerate() {
        if ca.is_zero() || ia > cap {
            continue;
        }
        for (ib, cb) in b.iter().enumerate() {
            if ia + ib > cap {
                break;
            }
            out[ia + ib] = out[ia + ib].add(&ca.mul(cb));
        }
    }
    out
}

/// Index `k` admits a universal polynomial exactly when `gcd(k-1, d) = 1`
/// (with `k-1` read mod `d`); `k = 1` never qualifies.
pub fn admissible_index(d: u64, k: u64) -> bool {
    k < d && ((k + d - 1) % d).gcd(&d) == 1
}

/// The universal polynomial `f_k` in the coefficient variables
/// `A_0..A_{d-1}` of a monic degree-`d` polynomial.
#[derive(Clone, Debug)]
pub struct GenericPoly {
    pub d: u64,
    pub k: u64,
    pub poly: MPoly,
}

/// Build `f_k = sum_{l=0..k} binom(N, l) * [h(T)^l]_{T^{k-l}}` evaluated at
/// `N = (k-1)/d`, where `h(T) = A_{d-1} + A_{d-2} T + ... + A_0 T^{d-1}`.
/// The coefficient of the pure `A_{d-1}^k` monomial is `binom((k-1)/d, k)`,
/// which is nonzero for every admissible `k`, and `A_0` never appears.
pub fn f_k_polynomial(d: u64, k: u64) -> Result<GenericPoly> {
    if d == 0 {
        return Err(Error::InvalidInput("degree must be positive".into()));
    }
    if !admissible_index(d, k) {
        return Err(Error::InadmissibleIndex { k, d });
    }
    let arity = d as usize;
    let eval_point = Rational::new(BigInt::from(k as i64 - 1), BigInt::from(d));
    let h: Vec<MPoly> =
        (0..arity).map(|j| MPoly::variable(arity, arity - 1 - j)).collect();
    let mut hpow = vec![MPoly::constant(arity, Rational::one())];
    let mut result = MPoly::zero(arity);
    for l in 0..=k {
        if l > 0 {
            hpow = tpoly_mul(&hpow, &h, k as usize, arity);
        }
        if let Some(c) = hpow.get((k - l) as usize) {
            result = result.add(&c.scale(&binom_rational(&eval_point, l)));
        }
    }
    debug_assert!(
        result.terms().all(|(e, _)| e[0] == 0 || arity == 1),
        "A_0 cannot reach T-degree d-1 inside h^l with l >= 1"
    );
    let mut lead = vec![0u32; arity];
    lead[arity - 1] = k as u32;
    let lead_coeff = result.coefficient(&lead);
    debug_assert_eq!(lead_coeff, binom_rational(&eval_point, k));
    debug_assert!(!lead_coeff.is_zero(), "admissible indices give a nonzero leading term");
    Ok(GenericPoly { d, k, poly: result })
}

/// Whether `f` lies in the generic set: every admissible `f_k` is nonzero at
/// the coefficients of `f`. Membership means the criterion coefficient
/// vanishes mod `p` for only finitely many primes, so the first slope
/// approaches `1/d`.
#[derive(Clone, Debug)]
pub struct MembershipReport {
    pub d: u64,
    pub in_u: bool,
    /// Evaluated `f_k(a_0, ..., a_{d-1})` for each admissible `k`.
    pub witnesses: Vec<(u64, Rational)>,
}

pub fn u_membership(f: &IntPoly) -> Result<MembershipReport> {
    let d = match f.degree() {
        Some(d) if d >= 1 => d as u64,
        _ => return Err(Error::InvalidInput("degree must be positive".into())),
    };
    if !f.coeff(d as usize).is_one() {
        return Err(Error::NotMonic);
    }
    let values: Vec<Rational> =
        (0..d as usize).map(|l| Rational::from_integer(f.coeff(l))).collect();
    let mut witnesses = Vec::new();
    for k in 0..d {
        if !admissible_index(d, k) {
            continue;
        }
        let fk = f_k_polynomial(d, k)?;
        witnesses.push((k, fk.poly.eval(&values)?));
    }
    let in_u = witnesses.iter().all(|(_, v)| !v.is_zero());
    Ok(MembershipReport { d, in_u, witnesses })
}

/// Reduce an exact rational mod `p`; `None` when `p` divides the
/// denominator.
fn rational_mod_p(v: &Rational, p: u64) -> Option<u64> {
    let pb = BigInt::from(p);
    let den = v.denom().mod_floor(&pb).to_u64()?;
    if den == 0 {
        return None;
    }
    let num = v.numer().mod_floor(&pb).to_u64()?;
    // Inverse by Fermat: den^(p-2) mod p.
    let mut inv = 1u128;
    let mut base = den as u128 % p as u128;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            inv = inv * base % p as u128;
        }
        base = base * base % p as u128;
        e >>= 1;
    }
    Some((num as u128 * inv % p as u128) as u64)
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub p: u64,
    /// The residue of `1 - p` mod `d`, selecting which `f_k` applies.
    pub k: u64,
    pub criterion_mod_p: u64,
    /// `f_k(a_0..a_{d-1})` reduced mod `p`; absent when the reduction is
    /// impossible (`p` divides a denominator, only possible for `p <= d`).
    pub fk_mod_p: Option<u64>,
    /// The symbolic value agrees with the exact power-expansion residue.
    pub congruence_ok: Option<bool>,
    /// `ceil((p-1)/d)/(p-1)`.
    pub predicted_np1: Rational,
    /// `p > 2d` with nonzero criterion: the prediction is an equality.
    pub equality_expected: bool,
    pub measured_np1: Option<Rational>,
    /// Measured against predicted: equality when expected, otherwise `>=`.
    /// Absent when unmeasured or when `p <= d` (no claim made).
    pub measured_matches: Option<bool>,
    pub route: Option<MeasurementRoute>,
    /// `predicted - 1/d`, which tends to zero.
    pub gap_to_inv_d: Rational,
    /// The gap is within the elementary ceiling estimate `(d-1)/(d(p-1))`.
    pub gap_within_bound: bool,
}

#[derive(Clone, Debug)]
pub struct SweepTable {
    pub f: IntPoly,
    pub d: u64,
    pub rows: Vec<SweepRow>,
    /// Primes in range that were not swept, with the reason.
    pub skipped: Vec<(u64, String)>,
}

/// Sweep all primes in `[p_min, p_max]`: for each prime not dividing `d`,
/// record the criterion coefficient, its symbolic `f_k` counterpart with the
/// congruence verdict, the predicted first slope with its gap to `1/d`, and
/// the measured slope when a route fits the budget. Rows come out sorted by
/// `p` because primes are visited in order.
pub fn prime_sweep(
    f: &IntPoly,
    p_min: u64,
    p_max: u64,
    budget: u128,
) -> Result<SweepTable> {
    let d = match f.degree() {
        Some(d) if d >= 2 => d as u64,
        other => {
            return Err(Error::BadDegree { p: 0, d: other.map_or(0, |d| d as u64) })
        }
    };
    if !f.coeff(d as usize).is_one() {
        return Err(Error::NotMonic);
    }
    let values: Vec<Rational> =
        (0..d as usize).map(|l| Rational::from_integer(f.coeff(l))).collect();
    let inv_d = Rational::new(BigInt::one(), BigInt::from(d));
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for p in p_min..=p_max {
        if !is_prime(p) {
            continue;
        }
        if d % p == 0 {
            skipped.push((p, format!("{p} divides the degree {d}")));
            continue;
        }
        let k = (1 + d - p % d) % d;
        let criterion = criterion_coeff(f, p)?;
        // gcd(k-1, d) = gcd(p, d) = 1 whenever p does not divide d, so the
        // admissible branch always applies here; the guard stays for clarity.
        let (fk_mod_p, congruence_ok) = if admissible_index(d, k) {
            let fk = f_k_polynomial(d, k)?;
            match rational_mod_p(&fk.poly.eval(&values)?, p) {
                Some(res) => (Some(res), Some(res == criterion)),
                None => (None, None),
            }
        } else {
            (None, None)
        };
        let predicted = slope_bound(p, d);
        let equality_expected = p > 2 * d && criterion != 0;
        let measured = measure_np1(&CurveSpec::new(p, f)?, budget)?;
        let measured_matches = measured.as_ref().and_then(|(np1, _)| {
            if equality_expected {
                Some(*np1 == predicted)
            } else if p > d {
                Some(*np1 >= predicted)
            } else {
                None
            }
        });
        let gap = &predicted - &inv_d;
        let gap_cap =
            Rational::new(BigInt::from(d - 1), BigInt::from(d * (p - 1)));
        rows.push(SweepRow {
            p,
            k,
            criterion_mod_p: criterion,
            fk_mod_p,
            congruence_ok,
            predicted_np1: predicted,
            equality_expected,
            measured_np1: measured.as_ref().map(|(v, _)| v.clone()),
            measured_matches,
            route: measured.map(|(_, r)| r),
            gap_within_bound: gap <= gap_cap,
            gap_to_inv_d: gap,
        });
    }
    Ok(SweepTable { f: f.clone(), d, rows, skipped })
}
