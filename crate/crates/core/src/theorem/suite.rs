//! Grid-driven property families for the coefficient series: depth
//! stability, closed-form valuations, digit-sum bounds for tuples, the
//! prime-field power congruence, and the coefficient valuation law with its
//! equality criterion. Failures are report content, not errors, and the
//! first counterexample is printed with every index that pins it down.

use num_traits::One;

use crate::coeffs::{basis_index_range, CoeffEngine, EFault};
use crate::curve::CurveSpec;
use crate::error::Error;
use crate::ktuple::enumerate_k;
use crate::padic::Val;
use crate::poly::Poly;
use crate::Result;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::{ceil_div, criterion_coeff, poly_display};

#[derive(Clone, Debug)]
pub struct FamilyReport {
    pub name: &'static str,
    pub cases: u64,
    pub failures: u64,
    /// Cells whose tuple enumeration outgrew the cap.
    pub skipped: u64,
    pub first_failure: Option<String>,
}

impl FamilyReport {
    fn new(name: &'static str) -> Self {
        FamilyReport { name, cases: 0, failures: 0, skipped: 0, first_failure: None }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(describe());
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub families: Vec<FamilyReport>,
    pub total_cases: u64,
    pub all_pass: bool,
}

impl SuiteReport {
    pub fn family(&self, name: &str) -> Option<&FamilyReport> {
        self.families.iter().find(|f| f.name == name)
    }
}

/// Grid sizes for the five families, plus the optional deliberate fault.
#[derive(Clone, Debug)]
pub struct SuiteOptions {
    /// Depth-stability family: coefficient indices up to this bound.
    pub shift_r_max: u64,
    /// Depth-stability family: `(N, a)` pairs for comparing depth `N+a`
    /// against depth `N` mod `p^{N+1}`.
    pub shift_depths: Vec<(u64, u64)>,
    /// Valuation-law family: largest series index checked per residue class.
    pub d_val_k1_max: u64,
    /// Digit-bound family: largest tuple sum enumerated.
    pub tuple_r_max: u64,
    /// Power-congruence family: largest digit window.
    pub power_a_max: u64,
    /// Coefficient-bound family: digit windows, multipliers, series depths.
    pub c_bound_a_max: u64,
    pub c_bound_m_max: u64,
    pub c_bound_depths: Vec<u64>,
    /// Tuple enumeration cap shared by all families.
    pub cap: u128,
    /// Optional perturbation of one `E` value, to prove the suite can fail.
    pub fault: Option<EFault>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            shift_r_max: 40,
            shift_depths: vec![(1, 1), (1, 2), (2, 1)],
            d_val_k1_max: 200,
            tuple_r_max: 700,
            power_a_max: 3,
            c_bound_a_max: 3,
            c_bound_m_max: 2,
            c_bound_depths: vec![1, 2],
            cap: 10_000_000,
            fault: None,
        }
    }
}

/// A deterministic handful of curves per `(p, d)`: the bare power, the
/// power plus `x`, and a denser model, exercising blocked and unblocked
/// tuple differences alike.
fn suite_curves(p: u64, d: u64) -> Result<Vec<CurveSpec>> {
    let mut coeffs = vec![BigInt::from(0); d as usize + 1];
    coeffs[d as usize] = BigInt::one();
    let mut curves = vec![CurveSpec::new(p, &Poly::new(coeffs.clone()))?];
    coeffs[1] += 1;
    curves.push(CurveSpec::new(p, &Poly::new(coeffs.clone()))?);
    coeffs[d as usize - 1] += 2;
    curves.push(CurveSpec::new(p, &Poly::new(coeffs))?);
    Ok(curves)
}

fn grid_pairs<'a>(
    p_list: &'a [u64],
    d_list: &'a [u64],
) -> impl Iterator<Item = (u64, u64)> + 'a {
    p_list.iter().flat_map(move |&p| {
        d_list.iter().filter_map(move |&d| (d >= 2 && d % p != 0).then_some((p, d)))
    })
}

/// Depth stability: raising the series depth from `N` to `N+a` never moves
/// the coefficient mod `p^{N+1}`.
fn family_depth_stability(
    p_list: &[u64],
    d_list: &[u64],
    o: &SuiteOptions,
) -> Result<FamilyReport> {
    let mut rep = FamilyReport::new("series-shift");
    for (p, d) in grid_pairs(p_list, d_list) {
        let curves = suite_curves(p, d)?;
        for &(n0, a) in &o.shift_depths {
            let modulus = n0 + 1;
            let mut engine = CoeffEngine::new(p, modulus)?;
            engine.set_fault(o.fault);
            for curve in &curves {
                for r in 1..=o.shift_r_max {
                    for i in 0..=p - 2 {
                        let deep = engine.c_coeff(curve, r, i, n0 + a, o.cap)?;
                        let shallow = engine.c_coeff(curve, r, i, n0, o.cap)?;
                        let ok = deep.congruent_mod(&shallow, modulus)?;
                        rep.record(ok, || {
                            format!(
                                "series-shift: p={p} d={d} f={} r={r} i={i} N={n0} a={a}: \
                                 depth {deepn} gives {lhs}, depth {n0} gives {rhs} mod p^{modulus}",
                                poly_display(curve.f()),
                                deepn = n0 + a,
                                lhs = deep.residue_mod(modulus).unwrap(),
                                rhs = shallow.residue_mod(modulus).unwrap(),
                            )
                        });
                    }
                }
            }
        }
    }
    Ok(rep)
}

/// Valuation law for the base series: the closed form claims an exact
/// valuation on the lowest congruent index and a lower bound above it.
fn family_valuation_law(p_list: &[u64], o: &SuiteOptions) -> Result<FamilyReport> {
    let mut rep = FamilyReport::new("d-series-valuation");
    for &p in p_list {
        let mut engine = CoeffEngine::new(p, 8)?;
        engine.set_fault(o.fault);
        for a in 1..=p - 1 {
            let mut k1 = a;
            while k1 <= o.d_val_k1_max {
                let (claim, observed) = engine.d_valuation_check(k1, a)?;
                rep.record(claim.admits(observed), || {
                    format!(
                        "d-series-valuation: p={p} k1={k1} a={a}: claimed {claim:?}, \
                         observed {observed:?}"
                    )
                });
                k1 += p - 1;
            }
        }
    }
    Ok(rep)
}

/// Digit-sum bound for windowed tuples summing to `m p^a - j`, with the
/// forced digit pattern in the boundary case.
fn family_digit_bound(
    p_list: &[u64],
    d_list: &[u64],
    o: &SuiteOptions,
) -> Result<FamilyReport> {
    let mut rep = FamilyReport::new("tuple-digit-bound");
    for (p, d) in grid_pairs(p_list, d_list) {
        if p <= d {
            continue;
        }
        let c = ceil_div(p - 1, d);
        for a in 1..=3u64 {
            let pa = (p as u128).pow(a as u32);
            for j in 1..=p - 1 {
                for m in 1.. {
                    let r128 = pa * m as u128 - j as u128;
                    if r128 > o.tuple_r_max as u128 {
                        break;
                    }
                    let r = r128 as u64;
                    let bound = (m - 1) * p / d + (a - 1) * c + ceil_div(p - j, d);
                    let tuples = match enumerate_k(r, d, p, Some(a), o.cap) {
                        Ok(t) => t,
                        Err(Error::CapExceeded { .. }) => {
                            rep.skipped += 1;
                            continue;
                        }
                        Err(e) => return Err(e),
                    };
                    for t in tuples {
                        rep.record(t.digit_sum >= bound, || {
                            format!(
                                "tuple-digit-bound: p={p} d={d} a={a} m={m} j={j} r={r}: \
                                 tuple {:?} has digit sum {} below {bound}",
                                t.entries, t.digit_sum
                            )
                        });
                        if p > 2 * d && m == 1 && t.digit_sum == bound {
                            let row = &t.dot[0];
                            let digit = |v: usize| row.get(v).copied().unwrap_or(0);
                            let mut pattern_ok = digit(0) == ceil_div(p - j, d);
                            for v in 1..a as usize {
                                pattern_ok &= digit(v) == c;
                            }
                            rep.record(pattern_ok, || {
                                format!(
                                    "tuple-digit-bound: p={p} d={d} a={a} j={j} r={r}: \
                                     boundary tuple {:?} has top digit row {row:?}, \
                                     expected [ceil((p-j)/d), then ceil((p-1)/d)]",
                                    t.entries
                                )
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(rep)
}

/// Prime-field power congruence: the coefficient of `x^{p^a - 1}` in
/// `f^{c(1+p+...+p^{a-1})}` equals the `a`-th power of the coefficient of
/// `x^{p-1}` in `f^c`, mod `p`, where `c = ceil((p-1)/d)`.
fn family_power_congruence(
    p_list: &[u64],
    d_list: &[u64],
    o: &SuiteOptions,
) -> Result<FamilyReport> {
    let mut rep = FamilyReport::new("power-congruence");
    for (p, d) in grid_pairs(p_list, d_list) {
        if p <= d {
            continue;
        }
        let c = ceil_div(p - 1, d);
        for curve in suite_curves(p, d)? {
            let base = criterion_coeff(curve.f(), p)?;
            for a in 1..=o.power_a_max {
                let mut geom = 0u64;
                let mut pw = 1u64;
                for _ in 0..a {
                    geom += pw;
                    pw *= p;
                }
                let exponent = c * geom;
                let target = (pw - 1) as usize;
                let lhs = curve
                    .f()
                    .pow(exponent)
                    .coeff(target)
                    .mod_floor(&BigInt::from(p))
                    .to_u64()
                    .expect("residue fits");
                let mut rhs = 1u64;
                for _ in 0..a {
                    rhs = rhs * base % p;
                }
                rep.record(lhs == rhs, || {
                    format!(
                        "power-congruence: p={p} d={d} f={} a={a}: \
                         [f^{exponent}]_({target}) = {lhs} but \
                         ([f^{c}]_(p-1))^{a} = {rhs} mod {p}",
                        poly_display(curve.f())
                    )
                });
            }
        }
    }
    Ok(rep)
}

/// Coefficient valuation bound with its equality criterion: for indices
/// `m p^a - j` the valuation clears the digit-window bound, and for `j = 1`
/// with `p > 2d` it sits exactly at `(a c - i)/(p-1)` precisely when `m = 1`,
/// the residue classes match, and the criterion coefficient is a unit.
fn family_coefficient_bound(
    p_list: &[u64],
    d_list: &[u64],
    o: &SuiteOptions,
) -> Result<FamilyReport> {
    let mut rep = FamilyReport::new("c-series-bound");
    for (p, d) in grid_pairs(p_list, d_list) {
        if p <= d {
            continue;
        }
        let c = ceil_div(p - 1, d);
        let pairs = basis_index_range(p, d);
        // Working precision: past every target, with room to decide equality.
        let max_target = (o.c_bound_a_max * c) / (p - 1) + 2;
        let mut engine = CoeffEngine::new(p, max_target + 2)?;
        engine.set_fault(o.fault);
        for curve in suite_curves(p, d)? {
            let criterion = criterion_coeff(curve.f(), p)?;
            for a in 1..=o.c_bound_a_max {
                let pa = (p as u128).pow(a as u32);
                for m in 1..=o.c_bound_m_max {
                    for &(i, j) in &pairs {
                        let r = (pa * m as u128 - j as u128)
                            .to_u64()
                            .expect("grid indices stay small");
                        let numer = ((a - 1) * c + ceil_div(p - j, d)) as i64 - i as i64;
                        let pm1 = (p - 1) as i64;
                        let target = (numer + pm1 - 1).div_euclid(pm1).max(0) as u64;
                        for &depth in &o.c_bound_depths {
                            let cv = match engine.c_coeff(&curve, r, i, depth, o.cap) {
                                Ok(v) => v,
                                Err(Error::CapExceeded { .. }) => {
                                    rep.skipped += 1;
                                    continue;
                                }
                                Err(e) => return Err(e),
                            };
                            rep.record(cv.min_valuation() >= target, || {
                                format!(
                                    "c-series-bound: p={p} d={d} f={} r={r} i={i} j={j} \
                                     m={m} a={a} N={depth}: valuation {:?} below {target}",
                                    poly_display(curve.f()),
                                    cv.valuation()
                                )
                            });
                            if j == 1 && p > 2 * d {
                                let eq_numer = (a * c) as i64 - i as i64;
                                if eq_numer >= 0 && eq_numer % (p - 1) as i64 == 0 {
                                    let t = (eq_numer / (p - 1) as i64) as u64;
                                    let expected = m == 1 && criterion != 0;
                                    let observed = cv.valuation() == Val::Finite(t);
                                    rep.record(observed == expected, || {
                                        format!(
                                            "c-series-bound: p={p} d={d} f={} r={r} i={i} \
                                             m={m} a={a} N={depth}: exact valuation {t} \
                                             expected={expected} (criterion={criterion}), \
                                             observed {:?}",
                                            poly_display(curve.f()),
                                            cv.valuation()
                                        )
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(rep)
}

/// Run all five families over the `(p, d)` grid with default sizes; `cap`
/// bounds every tuple enumeration. Pairs with `p` dividing `d` are skipped,
/// and an empty grid yields an empty passing report.
pub fn congruence_suite(p_list: &[u64], d_list: &[u64], cap: u128) -> Result<SuiteReport> {
    let options = SuiteOptions { cap, ..SuiteOptions::default() };
    congruence_suite_with(p_list, d_list, &options)
}

pub fn congruence_suite_with(
    p_list: &[u64],
    d_list: &[u64],
    options: &SuiteOptions,
) -> Result<SuiteReport> {
    let families = vec![
        family_depth_stability(p_list, d_list, options)?,
        family_valuation_law(p_list, options)?,
        family_digit_bound(p_list, d_list, options)?,
        family_power_congruence(p_list, d_list, options)?,
        family_coefficient_bound(p_list, d_list, options)?,
    ];
    let total_cases = families.iter().map(|f| f.cases).sum();
    let all_pass = families.iter().all(|f| f.failures == 0);
    Ok(SuiteReport { families, total_cases, all_pass })
}
