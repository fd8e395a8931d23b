//! Lower convex hulls of valuation data: Newton polygons.
//!
//! Heights are exact scalars (rationals in practice); a point may sit at
//! infinity, which drops it from the hull. The hull is built by a single
//! left-to-right monotone-chain pass with exact cross-product comparisons,
//! so no division and no rounding happens during construction.

use num_traits::{FromPrimitive, Num};

use crate::error::Error;
use crate::Result;

/// Input point `(index, height)`; `height = None` means infinity.
#[derive(Clone, Debug)]
pub struct PolygonPoint<T> {
    pub index: u64,
    pub height: Option<T>,
}

impl<T> PolygonPoint<T> {
    pub fn finite(index: u64, height: T) -> Self {
        PolygonPoint { index, height: Some(height) }
    }

    pub fn infinite(index: u64) -> Self {
        PolygonPoint { index, height: None }
    }
}

/// A slope segment of the polygon: `length` is the horizontal extent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slope<T> {
    pub value: T,
    pub length: u64,
}

/// Lower convex hull of a finite point set, with bending points and the
/// nondecreasing slope sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon<T> {
    vertices: Vec<(u64, T)>,
    slopes: Vec<Slope<T>>,
}

fn t_u64<T: FromPrimitive>(x: u64) -> T {
    T::from_u64(x).expect("index fits in scalar type")
}

impl<T: Clone + Ord + Num + FromPrimitive> NewtonPolygon<T> {
    /// Bending points, strictly increasing in index.
    pub fn vertices(&self) -> &[(u64, T)] {
        &self.vertices
    }

    /// Slope runs between consecutive vertices, strictly increasing in value.
    pub fn slopes(&self) -> &[Slope<T>] {
        &self.slopes
    }

    pub fn first_slope(&self) -> &T {
        &self.slopes[0].value
    }

    /// Height of the hull boundary at integer abscissa `x`, `None` outside
    /// the supported range.
    pub fn height_at(&self, x: u64) -> Option<T> {
        let first = self.vertices.first()?;
        let last = self.vertices.last()?;
        if x < first.0 || x > last.0 {
            return None;
        }
        let pos = self.vertices.partition_point(|(i, _)| *i <= x);
        let (x1, y1) = &self.vertices[pos - 1];
        if *x1 == x {
            return Some(y1.clone());
        }
        let (x2, y2) = &self.vertices[pos];
        // y1 + (x - x1) * (y2 - y1) / (x2 - x1)
        let run = t_u64::<T>(*x2 - *x1);
        let rise = y2.clone() - y1.clone();
        Some(y1.clone() + t_u64::<T>(x - *x1) * rise / run)
    }

    /// True when this polygon is on or above `other` at every abscissa the
    /// two share. Both are piecewise linear, so comparing at the union of
    /// bending abscissas is exact.
    pub fn lies_on_or_above(&self, other: &Self) -> bool {
        let lo = self.vertices.first().unwrap().0.max(other.vertices.first().unwrap().0);
        let hi = self.vertices.last().unwrap().0.min(other.vertices.last().unwrap().0);
        let mut xs: Vec<u64> = self
            .vertices
            .iter()
            .chain(other.vertices.iter())
            .map(|(i, _)| *i)
            .filter(|i| (lo..=hi).contains(i))
            .collect();
        xs.sort_unstable();
        xs.dedup();
        xs.iter().all(|&x| match (self.height_at(x), other.height_at(x)) {
            (Some(a), Some(b)) => a >= b,
            _ => true,
        })
    }
}

/// Build the lower convex hull of the finite points.
///
/// Requires at least two finite points. Points at infinity never bound the
/// hull from below and are ignored.
pub fn build_newton_polygon<T>(points: &[PolygonPoint<T>]) -> Result<NewtonPolygon<T>>
where
    T: Clone + Ord + Num + FromPrimitive,
{
    let mut finite: Vec<(u64, T)> = points
        .iter()
        .filter_map(|p| p.height.clone().map(|h| (p.index, h)))
        .collect();
    finite.sort_by_key(|(i, _)| *i);
    for w in finite.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::InvalidInput(format!("duplicate polygon index {}", w[0].0)));
        }
    }
    if finite.len() < 2 {
        return Err(Error::DegeneratePolygon);
    }

    let mut hull: Vec<(u64, T)> = Vec::with_capacity(finite.len());
    for (x, y) in finite.iter().cloned() {
        while hull.len() >= 2 {
            let (ax, ay) = hull[hull.len() - 2].clone();
            let (bx, by) = hull[hull.len() - 1].clone();
            // (b - a) x (c - a); pop b unless it bends strictly downward-left.
            let cross = t_u64::<T>(bx - ax) * (y.clone() - ay.clone())
                - (by - ay) * t_u64::<T>(x - ax);
            let keep = cross > T::zero();
            if keep {
                break;
            }
            hull.pop();
        }
        hull.push((x, y));
    }

    let slopes: Vec<Slope<T>> = hull
        .windows(2)
        .map(|w| {
            let (x1, y1) = &w[0];
            let (x2, y2) = &w[1];
            Slope {
                value: (y2.clone() - y1.clone()) / t_u64::<T>(*x2 - *x1),
                length: *x2 - *x1,
            }
        })
        .collect();
    debug_assert!(slopes.windows(2).all(|w| w[0].value < w[1].value));

    let polygon = NewtonPolygon { vertices: hull, slopes };
    debug_assert!(finite.iter().all(|(x, y)| {
        polygon.height_at(*x).map_or(true, |h| *y >= h)
    }));
    Ok(polygon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn points(raw: &[(u64, Option<(i64, i64)>)]) -> Vec<PolygonPoint<Rational>> {
        raw.iter()
            .map(|(i, h)| PolygonPoint { index: *i, height: h.map(|(n, d)| rat(n, d)) })
            .collect()
    }

    /// Independent gift-wrapping oracle: from the leftmost point repeatedly
    /// take the smallest outgoing slope, breaking ties by longest reach.
    fn wrap_hull(pts: &[(u64, Rational)]) -> Vec<(u64, Rational)> {
        let mut pts = pts.to_vec();
        pts.sort_by_key(|(i, _)| *i);
        let mut out = vec![pts[0].clone()];
        loop {
            let (cx, cy) = out.last().unwrap().clone();
            let mut best: Option<(Rational, u64, Rational)> = None;
            for (x, y) in pts.iter().filter(|(x, _)| *x > cx) {
                let s = (y.clone() - cy.clone()) / rat((x - cx) as i64, 1);
                let replace = match &best {
                    None => true,
                    Some((bs, bx, _)) => s < *bs || (s == *bs && *x > *bx),
                };
                if replace {
                    best = Some((s, *x, y.clone()));
                }
            }
            match best {
                None => return out,
                Some((_, x, y)) => out.push((x, y)),
            }
        }
    }

    #[test]
    fn worked_example() {
        let np = build_newton_polygon(&points(&[
            (0, Some((0, 1))),
            (1, Some((2, 1))),
            (2, Some((1, 1))),
            (3, Some((3, 1))),
        ]))
        .unwrap();
        assert_eq!(np.vertices(), &[(0, rat(0, 1)), (2, rat(1, 1)), (3, rat(3, 1))]);
        assert_eq!(
            np.slopes(),
            &[Slope { value: rat(1, 2), length: 2 }, Slope { value: rat(2, 1), length: 1 }]
        );
        assert_eq!(*np.first_slope(), rat(1, 2));
    }

    #[test]
    fn infinite_heights_are_skipped() {
        let np = build_newton_polygon(&points(&[
            (0, Some((0, 1))),
            (1, None),
            (2, Some((1, 1))),
        ]))
        .unwrap();
        assert_eq!(np.vertices().len(), 2);
        assert_eq!(*np.first_slope(), rat(1, 2));
        assert_eq!(np.height_at(1), Some(rat(1, 2)));
    }

    #[test]
    fn degenerate_inputs_error() {
        assert!(matches!(
            build_newton_polygon::<Rational>(&points(&[(0, Some((0, 1))), (1, None)])),
            Err(crate::Error::DegeneratePolygon)
        ));
        assert!(build_newton_polygon::<Rational>(&[]).is_err());
    }

    #[test]
    fn collinear_points_merge() {
        let np = build_newton_polygon(&points(&[
            (0, Some((0, 1))),
            (1, Some((1, 2))),
            (2, Some((1, 1))),
        ]))
        .unwrap();
        assert_eq!(np.vertices().len(), 2);
        assert_eq!(np.slopes().len(), 1);
    }

    #[test]
    fn comparison_between_polygons() {
        let upper = build_newton_polygon(&points(&[(0, Some((0, 1))), (2, Some((2, 1)))])).unwrap();
        let lower = build_newton_polygon(&points(&[(0, Some((0, 1))), (2, Some((1, 1)))])).unwrap();
        assert!(upper.lies_on_or_above(&lower));
        assert!(!lower.lies_on_or_above(&upper));
        assert!(upper.lies_on_or_above(&upper));
    }

    proptest! {
        #[test]
        fn matches_wrapping_oracle(heights in proptest::collection::vec((0i64..50, 1i64..8), 2..12) ) {
            let pts: Vec<(u64, Rational)> = heights
                .iter()
                .enumerate()
                .map(|(i, (n, d))| (i as u64, rat(*n, *d)))
                .collect();
            let input: Vec<PolygonPoint<Rational>> =
                pts.iter().map(|(i, h)| PolygonPoint::finite(*i, h.clone())).collect();
            let np = build_newton_polygon(&input).unwrap();
            let expected = wrap_hull(&pts);
            prop_assert_eq!(np.vertices(), expected.as_slice());

            // Every input point sits on or above the hull.
            for (x, y) in &pts {
                prop_assert!(*y >= np.height_at(*x).unwrap());
            }
            // Slopes strictly increase.
            for w in np.slopes().windows(2) {
                prop_assert!(w[0].value < w[1].value);
            }
        }
    }
}
