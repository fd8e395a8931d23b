//! The two L-functions of an Artin-Schreier curve and their polygons.
//!
//! Route one: point counts `N_n = #X(F_{p^n})` feed the logarithmic
//! derivative recurrence for the numerator `P(T)` of the zeta function.
//! Route two: exponential sums `S_l(f)` in `Z[zeta_p]` feed the same kind of
//! recurrence for `L(f mod p; T)` of degree `d - 1`, whose norm down to `Z`
//! must reproduce `P(T)` exactly. Newton polygons of both sit over exact
//! rationals; the curve polygon is the `1/(p-1)`-rescaling of the sum-side
//! polygon, so their first slopes agree.

use crate::curve::CurveSpec;
use crate::cyclotomic::{norm_poly, CycInt, CycPoly};
use crate::error::Error;
use crate::ff::{build_extension, point_count, trace_histogram};
use crate::hull::{build_newton_polygon, PolygonPoint};
use crate::padic::ord_int;
use crate::{IntPoly, Polygon, Rational, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

/// How the upper half of the `P(T)` coefficients was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMode {
    /// Count `N_1..N_{2g}` and verify the functional equation on the result.
    Full,
    /// Count `N_1..N_g` and complete with `b_{2g-l} = p^{g-l} b_l`.
    FunctionalEquation,
}

/// `P(T)` with its provenance and the counts that produced it.
#[derive(Debug, Clone)]
pub struct ZetaData {
    pub curve: CurveSpec,
    /// `N_1..N_k` (k = g or 2g depending on mode).
    pub counts: Vec<u128>,
    /// `b_0 = 1, b_1, ..., b_{2g}`.
    pub p_coeffs: Vec<BigInt>,
    pub mode: CountMode,
}

/// `L(f mod p; T) = 1 + b'_1 T + ... + b'_{d-1} T^{d-1}` over `Z[zeta_p]`.
#[derive(Debug, Clone)]
pub struct LFunctionData {
    pub f: IntPoly,
    pub p: u64,
    /// `S_1..S_{d-1}`.
    pub sums: Vec<CycInt>,
    /// `b'_1..b'_{d-1}`.
    pub b_prime: Vec<CycInt>,
}

impl LFunctionData {
    /// The full polynomial, constant coefficient 1 included.
    pub fn poly(&self) -> Result<CycPoly> {
        let mut coeffs = Vec::with_capacity(self.b_prime.len() + 1);
        coeffs.push(CycInt::from_int(self.p, &BigInt::from(1))?);
        coeffs.extend(self.b_prime.iter().cloned());
        CycPoly::new(self.p, coeffs)
    }
}

/// `S_l(f) = sum over x in F_{p^l} of zeta^(Tr f(x))`, assembled exactly by
/// bucketing trace values into p counters. The constant coefficient of `f`
/// is honored (no normalization), so the `zeta^{l c}` shift law is visible.
pub fn exp_sum(f: &IntPoly, p: u64, ell: u64, budget: u128) -> Result<CycInt> {
    if ell == 0 {
        return Err(Error::InvalidInput("exponential sum needs l >= 1".into()));
    }
    let ctx = build_extension(p, ell)?;
    let pb = BigInt::from(p);
    let coeffs: Vec<u64> = f
        .coeffs()
        .iter()
        .map(|c| {
            let r = c.mod_floor(&pb);
            let (_, digits) = r.to_u64_digits();
            *digits.first().unwrap_or(&0)
        })
        .collect();
    let hist = trace_histogram(&ctx, &coeffs, budget)?;
    CycInt::from_zeta_coeffs(p, hist.into_iter().map(BigInt::from).collect())
}

/// Builds `L(f mod p; T)` from `S_1..S_{d-1}` through the Newton-identity
/// recurrence `l b'_l = sum_{u=1..l} S_u b'_{l-u}`, every division exact.
pub fn l_function_from_sums(f: &IntPoly, p: u64, budget: u128) -> Result<LFunctionData> {
    let d = match f.degree() {
        Some(d) if d >= 2 => d as u64,
        _ => {
            return Err(Error::BadDegree { p, d: 0 });
        }
    };
    if d % p == 0 {
        return Err(Error::BadDegree { p, d });
    }
    let mut sums = Vec::with_capacity((d - 1) as usize);
    for ell in 1..d {
        sums.push(exp_sum(f, p, ell, budget)?);
    }
    let one = CycInt::from_int(p, &BigInt::from(1))?;
    let mut b = vec![one];
    for ell in 1..d as usize {
        let mut acc = CycInt::zero(p)?;
        for u in 1..=ell {
            acc = acc.add(&sums[u - 1].mul(&b[ell - u])?)?;
        }
        b.push(acc.div_exact_int(&BigInt::from(ell))?);
    }
    let b_prime: Vec<CycInt> = b.into_iter().skip(1).collect();
    if b_prime.last().map(CycInt::is_zero) != Some(false) {
        return Err(Error::InvalidInput(format!(
            "exponential-sum L-function dropped below degree {} for p={p}",
            d - 1
        )));
    }
    Ok(LFunctionData {
        f: f.clone(),
        p,
        sums,
        b_prime,
    })
}

/// Newton polygon of the sum-side L-function next to its Hodge bound.
#[derive(Debug, Clone)]
pub struct SumSidePolygons {
    /// Hull of `(k, pi_val(b'_k) / (p-1))`.
    pub newton: Polygon,
    /// Vertices `(k, k(k+1)/(2d))`.
    pub hodge: Polygon,
    /// Newton on or above Hodge (must always hold).
    pub above_hodge: bool,
}

/// Hull of `(k, ord_p b'_k)` for `k = 0..d-1`, heights `pi_val/(p-1)` as
/// exact rationals, compared against the Hodge polygon.
pub fn np_of_f(l: &LFunctionData) -> Result<SumSidePolygons> {
    let p = l.p;
    let d = l.b_prime.len() as u64 + 1;
    let pm1 = BigInt::from(p - 1);
    let mut points = vec![PolygonPoint::finite(0, Rational::zero())];
    for (k, b) in l.b_prime.iter().enumerate() {
        points.push(match b.pi_valuation() {
            Some(v) => PolygonPoint::finite(
                k as u64 + 1,
                Rational::new(BigInt::from(v), pm1.clone()),
            ),
            None => PolygonPoint::infinite(k as u64 + 1),
        });
    }
    let newton = build_newton_polygon(&points)?;
    let hodge = hodge_polygon(d)?;
    let above_hodge = newton.lies_on_or_above(&hodge);
    Ok(SumSidePolygons {
        newton,
        hodge,
        above_hodge,
    })
}

/// The Hodge polygon for degree `d`: vertices `(k, (1 + 2 + ... + k)/d)` for
/// `0 <= k <= d-1`, i.e. heights `k(k+1)/(2d)`, slopes `k/d`.
pub fn hodge_polygon(d: u64) -> Result<Polygon> {
    if d < 2 {
        return Err(Error::BadDegree { p: 0, d });
    }
    let points: Vec<PolygonPoint<Rational>> = (0..d)
        .map(|k| {
            PolygonPoint::finite(
                k,
                Rational::new(BigInt::from(k * (k + 1)), BigInt::from(2 * d)),
            )
        })
        .collect();
    build_newton_polygon(&points)
}

/// Counts points over `F_p, ..., F_{p^k}` and assembles `P(T)`.
///
/// `a_u = p^u + 1 - N_u` feeds `l b_l = -sum_{u=1..l} a_u b_{l-u}`; in
/// functional-equation mode the upper coefficients are completed by
/// `b_{2g-l} = p^{g-l} b_l`, in full mode they are computed from counts and
/// the functional equation is *verified*. Each `a_u` is checked against the
/// Weil bound `a_u^2 <= 4 g^2 p^u` as an enumeration sanity oracle.
pub fn zeta_from_counts(curve: &CurveSpec, mode: CountMode, budget: u128) -> Result<ZetaData> {
    let p = curve.p();
    let g = curve.genus();
    let k = match mode {
        CountMode::Full => 2 * g,
        CountMode::FunctionalEquation => g,
    };
    let needed = (p as u128)
        .checked_pow(k as u32)
        .ok_or(Error::BudgetExceeded {
            needed: u128::MAX,
            budget,
        })?;
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }

    let mut counts = Vec::with_capacity(k as usize);
    let mut a = Vec::with_capacity(k as usize);
    for n in 1..=k {
        let ctx = build_extension(p, n)?;
        let pc = point_count(curve, &ctx, budget)?;
        counts.push(pc.total);
        let au = BigInt::from(p).pow(n as u32) + 1 - BigInt::from(pc.total);
        let weil = BigInt::from(4 * g * g) * BigInt::from(p).pow(n as u32);
        if &au * &au > weil {
            return Err(Error::InvalidInput(format!(
                "count N_{n} = {} violates the Weil bound for genus {g}",
                pc.total
            )));
        }
        a.push(au);
    }

    let mut b = vec![BigInt::from(1)];
    for ell in 1..=k as usize {
        let mut acc = BigInt::zero();
        for u in 1..=ell {
            acc += &a[u - 1] * &b[ell - u];
        }
        let (q, r) = (-acc).div_rem(&BigInt::from(ell));
        if !r.is_zero() {
            return Err(Error::InexactDivision {
                what: "zeta numerator coefficient",
                divisor: ell.to_string(),
            });
        }
        b.push(q);
    }

    match mode {
        CountMode::FunctionalEquation => {
            b.resize(2 * g as usize + 1, BigInt::zero());
            for ell in 0..g as usize {
                let factor = BigInt::from(p).pow(g as u32 - ell as u32);
                b[2 * g as usize - ell] = &factor * &b[ell];
            }
        }
        CountMode::Full => {
            for ell in 0..=g as usize {
                let factor = BigInt::from(p).pow(g as u32 - ell as u32);
                if b[2 * g as usize - ell] != &factor * &b[ell] {
                    return Err(Error::InvalidInput(format!(
                        "functional equation fails at l={ell}: b_{} = {} vs p^{}*b_{ell} = {}",
                        2 * g as usize - ell,
                        b[2 * g as usize - ell],
                        g as usize - ell,
                        &factor * &b[ell]
                    )));
                }
            }
        }
    }

    Ok(ZetaData {
        curve: curve.clone(),
        counts,
        p_coeffs: b,
        mode,
    })
}

/// Normalized Newton polygon of the curve: hull of `(l, ord_p b_l)`,
/// `0 <= l <= 2g`. First slope is `slopes()[0]`.
pub fn np_of_curve(z: &ZetaData) -> Result<Polygon> {
    let p = z.curve.p();
    let points: Vec<PolygonPoint<Rational>> = z
        .p_coeffs
        .iter()
        .enumerate()
        .map(|(l, b)| match ord_int(b, p) {
            Some(v) => PolygonPoint::finite(l as u64, Rational::from(BigInt::from(v))),
            None => PolygonPoint::infinite(l as u64),
        })
        .collect();
    build_newton_polygon(&points)
}

/// Exact check of the norm relation: `P(T)` from counts must equal the norm
/// of `L(f mod p; T)` from exponential sums, coefficient by coefficient.
pub fn norm_relation_holds(z: &ZetaData, l: &LFunctionData) -> Result<bool> {
    let norm = norm_poly(&l.poly()?)?;
    Ok(norm.coeffs() == &z.p_coeffs[..])
}

/// Slope multiset helper: `(value, length)` pairs of a polygon's slopes.
pub fn slope_runs(polygon: &Polygon) -> Vec<(Rational, u64)> {
    polygon
        .slopes()
        .iter()
        .map(|s| (s.value.clone(), s.length))
        .collect()
}

/// True when the slope multiset is symmetric under `s -> 1 - s`.
pub fn slopes_symmetric(polygon: &Polygon) -> bool {
    let runs = slope_runs(polygon);
    let one = Rational::from(BigInt::from(1));
    runs.iter().all(|(s, len)| {
        let mirror = &one - s;
        runs.iter()
            .find(|(v, _)| *v == mirror)
            .map(|(_, l2)| l2 == len)
            .unwrap_or(false)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    const BUDGET: u128 = 10_000_000;

    fn poly(coeffs: &[i64]) -> IntPoly {
        IntPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    fn curve(p: u64, coeffs: &[i64]) -> CurveSpec {
        CurveSpec::new(p, &poly(coeffs)).unwrap()
    }

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn exp_sum_examples() {
        // Full character sum vanishes.
        let s = exp_sum(&poly(&[0, 1]), 5, 1, BUDGET).unwrap();
        assert!(s.is_zero());
        // Quadratic Gauss sum for p = 5: buckets 1 + 2 zeta + 2 zeta^4.
        let g = exp_sum(&poly(&[0, 0, 1]), 5, 1, BUDGET).unwrap();
        assert_eq!(
            g.coords(),
            &[
                BigInt::from(-1),
                BigInt::from(0),
                BigInt::from(-2),
                BigInt::from(-2)
            ][..]
        );
        assert_eq!(g.pi_valuation(), Some(2));
    }

    #[test]
    fn constant_shift_multiplies_by_a_root_of_unity() {
        for ell in [1u64, 2] {
            let base = exp_sum(&poly(&[0, 0, 1]), 5, ell, BUDGET).unwrap();
            for c in 0..5i64 {
                let shifted = exp_sum(&poly(&[c, 0, 1]), 5, ell, BUDGET).unwrap();
                let zeta_lc = CycInt::zeta_pow(5, ell * c as u64).unwrap();
                assert_eq!(shifted, base.mul(&zeta_lc).unwrap(), "l={ell} c={c}");
            }
        }
    }

    #[test]
    fn l_function_degree_two_is_first_sum() {
        let l = l_function_from_sums(&poly(&[0, 0, 1]), 5, BUDGET).unwrap();
        assert_eq!(l.b_prime.len(), 1);
        assert_eq!(l.b_prime[0], l.sums[0]);
        assert_eq!(l.b_prime[0].pi_valuation(), Some(2));
        let report = np_of_f(&l).unwrap();
        assert_eq!(
            report.newton.vertices(),
            &[(0, rat(0, 1)), (1, rat(1, 2))][..]
        );
        assert!(report.above_hodge);
        // p = 5, d = 2 is supersingular on the nose: NP = HP.
        assert_eq!(report.newton, report.hodge);
    }

    #[test]
    fn np_equals_hodge_when_p_is_one_mod_d() {
        // p = 7, d = 3, f = x^3 + x: 7 = 1 mod 3 forces NP = HP.
        let l = l_function_from_sums(&poly(&[0, 1, 0, 1]), 7, BUDGET).unwrap();
        let report = np_of_f(&l).unwrap();
        assert_eq!(
            report.newton.vertices(),
            &[(0, rat(0, 1)), (1, rat(1, 3)), (2, rat(1, 1))][..]
        );
        assert_eq!(report.newton, report.hodge);
        assert!(report.above_hodge);
    }

    #[test]
    fn hodge_polygon_shapes() {
        let h2 = hodge_polygon(2).unwrap();
        assert_eq!(h2.vertices(), &[(0, rat(0, 1)), (1, rat(1, 2))][..]);
        let h3 = hodge_polygon(3).unwrap();
        assert_eq!(
            h3.vertices(),
            &[(0, rat(0, 1)), (1, rat(1, 3)), (2, rat(1, 1))][..]
        );
        // Slopes k/d strictly increase.
        let slopes: Vec<Rational> = h3.slopes().iter().map(|s| s.value.clone()).collect();
        assert_eq!(slopes, vec![rat(1, 3), rat(2, 3)]);
        assert!(hodge_polygon(1).is_err());
    }

    #[test]
    fn zeta_of_x2_over_f5_both_modes() {
        let c = curve(5, &[0, 0, 1]);
        let fe = zeta_from_counts(&c, CountMode::FunctionalEquation, BUDGET).unwrap();
        let full = zeta_from_counts(&c, CountMode::Full, BUDGET).unwrap();
        assert_eq!(fe.p_coeffs, full.p_coeffs);
        // P(T) = (1 - 5T^2)^2 = 1 - 10T^2 + 25T^4.
        let expected: Vec<BigInt> = [1i64, 0, -10, 0, 25].iter().map(|&x| x.into()).collect();
        assert_eq!(full.p_coeffs, expected);
        assert_eq!(fe.counts, vec![6, 6]);
        let np = np_of_curve(&full).unwrap();
        assert_eq!(np.vertices(), &[(0, rat(0, 1)), (4, rat(2, 1))][..]);
        assert_eq!(*np.first_slope(), rat(1, 2));
        assert!(slopes_symmetric(&np));
    }

    #[test]
    fn zeta_of_x3_over_f5_has_b1_zero() {
        let c = curve(5, &[0, 0, 0, 1]);
        let z = zeta_from_counts(&c, CountMode::FunctionalEquation, BUDGET).unwrap();
        assert_eq!(z.counts[0], 6, "N_1 = 6 so a_1 = 0");
        assert!(z.p_coeffs[1].is_zero());
        assert_eq!(z.p_coeffs.len(), 9, "degree 2g = 8");
        let np = np_of_curve(&z).unwrap();
        // p = 2 mod 3: supersingular, all slopes 1/2.
        assert_eq!(*np.first_slope(), rat(1, 2));
        assert!(slopes_symmetric(&np));
        assert!(np
            .slopes()
            .iter()
            .all(|s| s.value != Rational::zero()), "no zero slope");
    }

    #[test]
    fn norm_relation_on_dual_route_instances() {
        for (p, coeffs) in [
            (5u64, vec![0i64, 0, 1]),
            (5, vec![0, 0, 0, 1]),
            (7, vec![0, 1, 0, 1]),
        ] {
            let c = curve(p, &coeffs);
            let z = zeta_from_counts(&c, CountMode::FunctionalEquation, BUDGET).unwrap();
            let l = l_function_from_sums(c.f(), p, BUDGET).unwrap();
            assert!(
                norm_relation_holds(&z, &l).unwrap(),
                "norm relation p={p} f={coeffs:?}"
            );
            // First slopes agree between the two routes.
            let np_curve = np_of_curve(&z).unwrap();
            let np_f = np_of_f(&l).unwrap().newton;
            assert_eq!(np_curve.first_slope(), np_f.first_slope());
            // Bending points of the curve polygon are integral.
            for (_, h) in np_curve.vertices() {
                assert!(h.denom().is_one(), "integral bending points");
            }
        }
    }

    #[test]
    fn budget_errors_name_the_needed_size() {
        let c = curve(7, &[0, 1, 0, 1]); // g = 6, FE needs 7^6
        match zeta_from_counts(&c, CountMode::FunctionalEquation, 1000) {
            Err(Error::BudgetExceeded { needed, budget }) => {
                assert_eq!(needed, 7u128.pow(6));
                assert_eq!(budget, 1000);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
        assert!(matches!(
            exp_sum(&poly(&[0, 1]), 5, 9, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn l_function_rejects_bad_degrees() {
        assert!(matches!(
            l_function_from_sums(&poly(&[3]), 5, BUDGET),
            Err(Error::BadDegree { .. })
        ));
        // p | d is rejected.
        assert!(matches!(
            l_function_from_sums(&poly(&[0, 1, 0, 0, 0, 1]), 5, BUDGET),
            Err(Error::BadDegree { p: 5, d: 5 })
        ));
    }
}
