//! Dense univariate polynomials over any commutative ring scalar that
//! implements the num-traits arithmetic interfaces. Instantiated in this
//! crate with big integers, exact rationals, and cyclotomic integers.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

/// Coefficients lowest degree first; no trailing zeros are stored, and the
/// zero polynomial is the empty vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Zero + Clone> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(T::zero)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn map<U: Zero + Clone>(&self, f: impl Fn(&T) -> U) -> Poly<U> {
        Poly::new(self.coeffs.iter().map(f).collect())
    }
}

impl<T: Zero + Clone + Add<Output = T>> Poly<T> {
    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }
}

impl<T: Zero + Clone + Neg<Output = T>> Poly<T> {
    pub fn neg(&self) -> Self {
        Poly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl<T: Zero + Clone + Sub<Output = T>> Poly<T> {
    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }
}

impl<T: Zero + Clone + Mul<Output = T> + Add<Output = T>> Poly<T> {
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut acc = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                acc[i + j] = acc[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(acc)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }
}

impl<T: Zero + One + Clone + Add<Output = T> + Mul<Output = T>> Poly<T> {
    pub fn one() -> Self {
        Poly { coeffs: vec![T::one()] }
    }

    /// Binary exponentiation; exponent 0 gives 1.
    pub fn pow(&self, e: u64) -> Self {
        let mut base = self.clone();
        let mut e = e;
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}
