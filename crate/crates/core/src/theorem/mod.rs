//! Slope predictions and their numerical verification.
//!
//! Everything here keeps prediction and measurement separate: a prediction
//! is derived from hypotheses on `(p, d, genus)` and one coefficient of a
//! polynomial power, while a measurement always goes through one of the two
//! zeta-function routes. Reports say which happened, so a failed prediction
//! shows up as a failed verdict instead of being assumed away.

pub mod density;
pub mod suite;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::coeffs::{basis_index_range, CoeffEngine};
use crate::curve::CurveSpec;
use crate::error::Error;
use crate::padic::{digit_sum, is_prime, Val};
use crate::{ff, zeta, IntPoly, Rational, Result};

pub(crate) fn ceil_div(a: u64, b: u64) -> u64 {
    (a + b - 1) / b
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `ceil((p-1)/d) / (p-1)`, the refined first-slope lower bound.
pub fn slope_bound(p: u64, d: u64) -> Rational {
    rat(ceil_div(p - 1, d) as i64, (p - 1) as i64)
}

/// The residue of `[f^{ceil((p-1)/d)}]_{p-1}` mod `p`, computed by an exact
/// integer polynomial power followed by one reduction. Nonzero values are
/// what force first-slope equality for `p > 2d`.
pub fn criterion_coeff(f: &IntPoly, p: u64) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let d = match f.degree() {
        Some(d) if d >= 1 => d as u64,
        _ => return Err(Error::BadDegree { p, d: 0 }),
    };
    let n = ceil_div(p - 1, d);
    let c = f.pow(n).coeff((p - 1) as usize);
    Ok(c.mod_floor(&BigInt::from(p)).to_u64().expect("residue fits in u64"))
}

/// Human-readable rendering of an integer polynomial in `x`.
pub fn poly_display(f: &IntPoly) -> String {
    let Some(d) = f.degree() else {
        return "0".into();
    };
    let mut parts = Vec::new();
    for k in (0..=d).rev() {
        let c = f.coeff(k);
        if c.is_zero() {
            continue;
        }
        let var = match k {
            0 => String::new(),
            1 => "x".into(),
            _ => format!("x^{k}"),
        };
        parts.push(if k == 0 {
            c.to_string()
        } else if c.is_one() {
            var
        } else {
            format!("{c}{var}")
        });
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasurementRoute {
    /// Zeta function assembled from point counts over extension fields.
    PointCounts,
    /// L-function assembled from exponential sums, then the norm polygon.
    ExponentialSums,
}

/// Measure the first Newton-polygon slope by whichever route fits the
/// budget: point counts when `p^genus` enumeration is affordable, else
/// exponential sums (fields only up to `p^{d-1}`), else skipped.
pub fn measure_np1(
    curve: &CurveSpec,
    budget: u128,
) -> Result<Option<(Rational, MeasurementRoute)>> {
    match zeta::zeta_from_counts(curve, zeta::CountMode::FunctionalEquation, budget) {
        Ok(z) => {
            let np = zeta::np_of_curve(&z)?;
            return Ok(Some((np.first_slope().clone(), MeasurementRoute::PointCounts)));
        }
        Err(Error::BudgetExceeded { .. }) => {}
        Err(e) => return Err(e),
    }
    match zeta::l_function_from_sums(curve.f(), curve.p(), budget) {
        Ok(l) => {
            let polys = zeta::np_of_f(&l)?;
            Ok(Some((
                polys.newton.first_slope().clone(),
                MeasurementRoute::ExponentialSums,
            )))
        }
        Err(Error::BudgetExceeded { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prediction {
    /// Genus 1 or 2: symmetry plus the absence of slope zero force 1/2.
    SmallGenusHalf,
    /// `p > 2d` with nonzero criterion coefficient: first slope equals the bound.
    Equality,
    /// `p > d`: first slope at least the bound, nothing sharper claimed.
    LowerBoundOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Measured slope respects the prediction.
    Pass,
    /// Measured slope contradicts the prediction.
    Fail,
    /// Both measurement routes exceeded the budget; prediction unverified.
    MeasurementSkipped,
}

#[derive(Clone, Debug)]
pub struct SlopeReport {
    pub curve: CurveSpec,
    pub genus: u64,
    /// `ceil((p-1)/d)/(p-1)` when `p > d`, else absent.
    pub bound: Option<Rational>,
    pub criterion_coeff: u64,
    pub predicted: Prediction,
    pub measured_np1: Option<Rational>,
    pub route: Option<MeasurementRoute>,
    pub verdict: Verdict,
}

/// Predict the first slope from `(p, d, genus)` and the criterion
/// coefficient, then measure it within `budget` and compare. Curves with
/// genus at least 3 need `p > d` for any prediction; smaller primes are
/// rejected rather than guessed about.
pub fn check_first_slope(curve: &CurveSpec, budget: u128) -> Result<SlopeReport> {
    let (p, d, g) = (curve.p(), curve.d(), curve.genus());
    let criterion = criterion_coeff(curve.f(), p)?;
    let bound = if p > d { Some(slope_bound(p, d)) } else { None };
    let predicted = if g < 3 {
        Prediction::SmallGenusHalf
    } else if p > 2 * d && criterion != 0 {
        Prediction::Equality
    } else if p > d {
        Prediction::LowerBoundOnly
    } else {
        return Err(Error::PrimeTooSmall { p, min: d + 1 });
    };
    let measured = measure_np1(curve, budget)?;
    let verdict = match &measured {
        None => Verdict::MeasurementSkipped,
        Some((np1, _)) => {
            let ok = match predicted {
                Prediction::SmallGenusHalf => *np1 == rat(1, 2),
                Prediction::Equality => Some(np1) == bound.as_ref(),
                Prediction::LowerBoundOnly => np1 >= bound.as_ref().expect("p > d"),
            };
            if ok {
                Verdict::Pass
            } else {
                Verdict::Fail
            }
        }
    };
    Ok(SlopeReport {
        curve: curve.clone(),
        genus: g,
        bound,
        criterion_coeff: criterion,
        predicted,
        measured_np1: measured.as_ref().map(|(v, _)| v.clone()),
        route: measured.map(|(_, r)| r),
        verdict,
    })
}

/// Wording attached to every probe report: a finite grid of passing
/// valuation checks supports the slope bound but cannot certify it.
pub const FINITE_EVIDENCE_NOTE: &str = "finite probe: an all-pass grid is \
numerical evidence toward the slope bound, not a proof; the underlying \
condition quantifies over all m and n";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CellOutcome {
    Pass,
    Fail,
    Skipped(String),
}

#[derive(Clone, Debug)]
pub struct ProbeCell {
    pub i: u64,
    pub j: u64,
    pub m: u64,
    pub n: u64,
    /// `m * p^{n+g-1} - j`, the coefficient index probed.
    pub r: u64,
    /// Series depth `n + g - 2` the coefficient is taken at.
    pub depth: u64,
    /// `ceil(n * lambda)`, the valuation the cell must reach.
    pub target: u64,
    pub observed: Option<Val>,
    pub outcome: CellOutcome,
}

#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub curve: CurveSpec,
    pub lambda: Rational,
    pub cells: Vec<ProbeCell>,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    /// True only when every cell ran and passed.
    pub all_pass: bool,
    pub evidence_note: &'static str,
}

/// Probe the valuation condition `ord_p(C_{m p^{n+g-1} - j}(i, n+g-2)) >=
/// ceil(n*lambda)` on the full `(i, j)` index range and `m <= m_max`,
/// `n <= n_max`, each cell at working precision `ceil(n*lambda) + 1`.
/// Cells whose tuple family outgrows `cap` are reported as skipped rather
/// than silently dropped.
pub fn slope_bound_probe(
    curve: &CurveSpec,
    lambda: &Rational,
    m_max: u64,
    n_max: u64,
    cap: u128,
) -> Result<ProbeReport> {
    if lambda.is_negative() {
        return Err(Error::InvalidInput("lambda must be nonnegative".into()));
    }
    let (p, d, g) = (curve.p(), curve.d(), curve.genus());
    let pairs = basis_index_range(p, d);
    let mut cells = Vec::new();
    for n in 1..=n_max {
        let target_big = (lambda * Rational::from_integer(BigInt::from(n))).ceil();
        let target = target_big
            .to_integer()
            .to_u64()
            .ok_or_else(|| Error::InvalidInput("ceil(n*lambda) out of range".into()))?;
        let mut engine = CoeffEngine::new(p, target + 1)?;
        let depth = n + g - 2;
        let scale = (p as u128).checked_pow((n + g - 1) as u32);
        for &(i, j) in &pairs {
            for m in 1..=m_max {
                let r128 = scale.and_then(|s| s.checked_mul(m as u128)).map(|v| v - j as u128);
                let mut cell = ProbeCell {
                    i,
                    j,
                    m,
                    n,
                    r: 0,
                    depth,
                    target,
                    observed: None,
                    outcome: CellOutcome::Skipped("index overflow".into()),
                };
                match r128 {
                    Some(r) if r <= u64::MAX as u128 => {
                        cell.r = r as u64;
                        match engine.c_coeff(curve, cell.r, i, depth, cap) {
                            Ok(c) => {
                                cell.observed = Some(c.valuation());
                                cell.outcome = if c.min_valuation() >= target {
                                    CellOutcome::Pass
                                } else {
                                    CellOutcome::Fail
                                };
                            }
                            Err(Error::CapExceeded { estimate, cap }) => {
                                cell.outcome = CellOutcome::Skipped(format!(
                                    "tuple family has {estimate} members, cap {cap}"
                                ));
                            }
                            Err(e) => return Err(e),
                        }
                    }
                    _ => {}
                }
                cells.push(cell);
            }
        }
    }
    let passed = cells.iter().filter(|c| c.outcome == CellOutcome::Pass).count();
    let failed = cells.iter().filter(|c| c.outcome == CellOutcome::Fail).count();
    let skipped = cells.len() - passed - failed;
    Ok(ProbeReport {
        curve: curve.clone(),
        lambda: lambda.clone(),
        all_pass: failed == 0 && skipped == 0 && !cells.is_empty(),
        cells,
        passed,
        failed,
        skipped,
        evidence_note: FINITE_EVIDENCE_NOTE,
    })
}

#[derive(Clone, Debug)]
pub struct AxBound {
    /// `D = max s_p(k)` over exponents `k >= 1` whose coefficient is a unit.
    pub d_invariant: u64,
    /// `1/D`.
    pub bound: Rational,
}

#[derive(Clone, Debug)]
pub struct AxRow {
    pub n: u64,
    pub total_points: u128,
    pub trace_zero: u128,
    /// `ceil(n / D)`.
    pub required_ord: u64,
    /// `p^{required}` divides `total_points - 1`.
    pub points_divisible: bool,
    /// `p^{required - 1}` divides the trace-zero fiber count.
    pub trace_divisible: bool,
}

#[derive(Clone, Debug)]
pub struct AxReport {
    pub curve: CurveSpec,
    pub ax: AxBound,
    pub rows: Vec<AxRow>,
    /// First `n` dropped because `p^n` enumeration exceeds the budget.
    pub truncated_from: Option<u64>,
    pub all_divisible: bool,
    pub measured_np1: Option<Rational>,
    pub route: Option<MeasurementRoute>,
    pub np1_at_least_ax_bound: Option<bool>,
    /// For `p > d`: the refined bound is at least `1/d` (hence at least as
    /// strong as anything `1/D = 1/d` gives there).
    pub refined_bound_at_least_inv_d: Option<bool>,
}

fn divides_pow(mut x: u128, p: u64, e: u64) -> bool {
    for _ in 0..e {
        if x % p as u128 != 0 {
            return false;
        }
        x /= p as u128;
    }
    true
}

/// Digit-sum divisibility checks: compute `D`, then verify for each
/// `n <= n_max` (within budget) that `p^{ceil(n/D)}` divides
/// `#X(F_{p^n}) - 1`, equivalently that `p^{ceil(n/D)-1}` divides the
/// trace-zero fiber count, and compare `1/D` against the measured slope.
pub fn ax_check(curve: &CurveSpec, n_max: u64, budget: u128) -> Result<AxReport> {
    let (p, d) = (curve.p(), curve.d());
    let mut d_invariant = 0u64;
    for k in 1..=d {
        if curve.coeff_u64(k as usize) != 0 {
            d_invariant = d_invariant.max(digit_sum(k, p)?);
        }
    }
    debug_assert!(d_invariant >= 1 && d_invariant <= d, "monic forces 1 <= D <= d");
    let bound = rat(1, d_invariant as i64);

    let mut rows = Vec::new();
    let mut truncated_from = None;
    for n in 1..=n_max {
        let size = (p as u128).checked_pow(n as u32);
        match size {
            Some(s) if s <= budget => {}
            _ => {
                truncated_from = Some(n);
                break;
            }
        }
        let ctx = ff::build_extension(p, n)?;
        let count = ff::point_count(curve, &ctx, budget)?;
        assert_eq!(
            count.total,
            1 + p as u128 * count.trace_zero,
            "affine fibers plus the point at infinity"
        );
        let required = ceil_div(n, d_invariant);
        rows.push(AxRow {
            n,
            total_points: count.total,
            trace_zero: count.trace_zero,
            required_ord: required,
            points_divisible: divides_pow(count.total - 1, p, required),
            trace_divisible: divides_pow(count.trace_zero, p, required - 1),
        });
    }
    let all_divisible = rows.iter().all(|r| r.points_divisible && r.trace_divisible);

    let measured = measure_np1(curve, budget)?;
    let np1_at_least_ax_bound = measured.as_ref().map(|(np1, _)| *np1 >= bound);
    let refined_bound_at_least_inv_d =
        (p > d).then(|| slope_bound(p, d) >= rat(1, d as i64));
    Ok(AxReport {
        curve: curve.clone(),
        ax: AxBound { d_invariant, bound },
        rows,
        truncated_from,
        all_divisible,
        measured_np1: measured.as_ref().map(|(v, _)| v.clone()),
        route: measured.map(|(_, r)| r),
        np1_at_least_ax_bound,
        refined_bound_at_least_inv_d,
    })
}
