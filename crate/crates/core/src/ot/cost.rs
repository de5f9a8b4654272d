use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::measure::Point;

/// Shape of `r -> r^p` on `[0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostClass {
    StrictlyConvex,
    Linear,
    StrictlyConcave,
}

/// The power cost `c(x, y) = |x - y|^p` with the Euclidean norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostSpec {
    exponent: f64,
}

impl CostSpec {
    pub fn new(exponent: f64) -> Result<Self> {
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(Error::InvalidExponent(exponent));
        }
        Ok(CostSpec { exponent })
    }

    pub fn quadratic() -> Self {
        CostSpec { exponent: 2.0 }
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn class(&self) -> CostClass {
        match self.exponent {
            p if p > 1.0 => CostClass::StrictlyConvex,
            p if p == 1.0 => CostClass::Linear,
            _ => CostClass::StrictlyConcave,
        }
    }

    fn integer_exponent(&self) -> Option<u32> {
        let p = self.exponent;
        (p.fract() == 0.0 && p <= 64.0).then_some(p as u32)
    }
}

fn check_dims(x: &Point, y: &Point) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: y.dim() });
    }
    Ok(())
}

/// `|x - y|^p` in floating point.
pub fn cost(spec: &CostSpec, x: &Point, y: &Point) -> Result<f64> {
    check_dims(x, y)?;
    let p = spec.exponent;
    if p == 2.0 {
        return Ok(x.coords().iter().zip(y.coords()).map(|(a, b)| (a - b) * (a - b)).sum());
    }
    Ok(x.distance(y).powf(p))
}

/// `|x - y|^p` as an exact rational.
///
/// The value is the exact cost whenever it is rational-computable from the
/// (dyadic) coordinates: even integer `p` in any dimension, or any integer
/// `p` in dimension one. Otherwise it is the exact value of the `f64` result
/// of [`cost`], so both arithmetic modes optimize the same numbers.
pub fn cost_exact(spec: &CostSpec, x: &Point, y: &Point) -> Result<Rational> {
    check_dims(x, y)?;
    if let Some(k) = spec.integer_exponent() {
        let diffs = x
            .coords()
            .iter()
            .zip(y.coords())
            .map(|(a, b)| Ok(exact::from_f64(*a)? - exact::from_f64(*b)?))
            .collect::<Result<Vec<Rational>>>()?;
        if k % 2 == 0 {
            let sq: Rational = diffs.iter().map(|d| d * d).sum();
            return Ok(num_traits::pow(sq, (k / 2) as usize));
        }
        if diffs.len() == 1 {
            return Ok(num_traits::pow(diffs[0].abs(), k as usize));
        }
    }
    exact::from_f64(cost(spec, x, y)?)
}
