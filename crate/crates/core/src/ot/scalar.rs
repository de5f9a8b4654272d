//! Number types the transportation simplex runs over.
//!
//! Flows live in a [`Scalar`]; costs and potentials live in a [`CostValue`],
//! which is either the same scalar or a lexicographic pair used to optimize
//! a secondary objective over the optimal face of a primary one.

use std::cmp::Ordering;
use std::fmt::Debug;

use num_traits::{Signed, Zero};

use crate::exact::{self, Rational};

pub(crate) trait CostValue: Clone + Debug {
    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    /// Sign with values in `[-tol, tol]` treated as zero. Exact types ignore `tol`.
    fn sign(&self, tol: f64) -> Ordering;
    /// Nearest `f64` of the (primary) value, for screening pricing candidates.
    fn approx(&self) -> f64;
}

pub(crate) trait Scalar: CostValue + PartialOrd {
    fn mul(&self, other: &Self) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn to_rational(&self) -> Rational;
    fn to_f64(&self) -> f64;
    fn from_i64(n: i64) -> Self;
    fn is_exact() -> bool;
}

impl CostValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn sign(&self, tol: f64) -> Ordering {
        if *self > tol {
            Ordering::Greater
        } else if *self < -tol {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
    fn approx(&self) -> f64 {
        *self
    }
}

impl Scalar for f64 {
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn from_rational(r: &Rational) -> Self {
        exact::to_f64(r)
    }
    fn to_rational(&self) -> Rational {
        exact::from_f64(*self).expect("finite flow")
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn is_exact() -> bool {
        false
    }
}

impl CostValue for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn sign(&self, _tol: f64) -> Ordering {
        if self.is_positive() {
            Ordering::Greater
        } else if self.is_negative() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
    fn approx(&self) -> f64 {
        exact::to_f64(self)
    }
}

impl Scalar for Rational {
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_rational(&self) -> Rational {
        self.clone()
    }
    fn to_f64(&self) -> f64 {
        exact::to_f64(self)
    }
    fn from_i64(n: i64) -> Self {
        exact::int(n)
    }
    fn is_exact() -> bool {
        true
    }
}

/// Lexicographically ordered pair: `primary` decides, `secondary` breaks ties.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Lex<S> {
    pub primary: S,
    pub secondary: S,
}

impl<S: Scalar> CostValue for Lex<S> {
    fn zero() -> Self {
        Lex { primary: S::zero(), secondary: S::zero() }
    }
    fn add(&self, other: &Self) -> Self {
        Lex { primary: self.primary.add(&other.primary), secondary: self.secondary.add(&other.secondary) }
    }
    fn sub(&self, other: &Self) -> Self {
        Lex { primary: self.primary.sub(&other.primary), secondary: self.secondary.sub(&other.secondary) }
    }
    fn sign(&self, tol: f64) -> Ordering {
        match self.primary.sign(tol) {
            Ordering::Equal => self.secondary.sign(tol),
            s => s,
        }
    }
    fn approx(&self) -> f64 {
        self.primary.approx()
    }
}
