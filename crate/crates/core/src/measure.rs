//! Discrete probability measures on R^d, deterministic maps between their
//! atoms, and finite weighted parameter families of marginal pairs.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};

/// A point of R^d with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::ZeroDimension);
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoordinate);
        }
        // -0.0 and 0.0 are the same point
        Ok(Point(coords.into_iter().map(|c| c + 0.0).collect()))
    }

    pub fn scalar(x: f64) -> Result<Self> {
        Point::new(vec![x])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Euclidean distance; callers guarantee equal dimension.
    pub fn distance(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn translate(&self, v: &[f64]) -> Result<Point> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: v.len() });
        }
        Point::new(self.0.iter().zip(v).map(|(a, b)| a + b).collect())
    }

    /// Bitwise identity of coordinates, used for exact-equality lookups.
    pub(crate) fn key(&self) -> Vec<u64> {
        self.0.iter().map(|c| c.to_bits()).collect()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub point: Point,
    pub weight: Rational,
}

/// A probability measure with finitely many atoms.
///
/// Weights are held as exact rationals and sum to exactly one. Atoms are
/// distinct (exact coordinate equality) and carry strictly positive weight;
/// their order is the order of first appearance at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

/// Builds a normalized measure from points and nonnegative weights.
pub fn make_discrete(points: Vec<Point>, weights: &[f64]) -> Result<DiscreteMeasure> {
    if points.len() != weights.len() {
        return Err(Error::LengthMismatch { points: points.len(), weights: weights.len() });
    }
    let exact_weights = weights
        .iter()
        .enumerate()
        .map(|(index, &w)| {
            if !w.is_finite() || w < 0.0 {
                Err(Error::InvalidWeight { index, value: w })
            } else {
                exact::from_f64(w)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    DiscreteMeasure::from_exact(points, exact_weights)
}

impl DiscreteMeasure {
    /// Same contract as [`make_discrete`] with weights given exactly.
    pub fn from_exact(points: Vec<Point>, weights: Vec<Rational>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::LengthMismatch { points: points.len(), weights: weights.len() });
        }
        if points.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        let dim = points[0].dim();
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut atoms: Vec<Atom> = Vec::new();
        let mut total = Rational::zero();
        for (i, (point, weight)) in points.into_iter().zip(weights).enumerate() {
            if point.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: point.dim() });
            }
            if weight.is_negative() {
                return Err(Error::InvalidWeight { index: i, value: exact::to_f64(&weight) });
            }
            total += &weight;
            match index.get(&point.key()) {
                Some(&k) => atoms[k].weight += weight,
                None => {
                    index.insert(point.key(), atoms.len());
                    atoms.push(Atom { point, weight });
                }
            }
        }
        if total.is_zero() {
            return Err(Error::ZeroTotalWeight);
        }
        atoms.retain(|a| !a.weight.is_zero());
        for a in &mut atoms {
            a.weight = &a.weight / &total;
        }
        Ok(DiscreteMeasure { dim, atoms })
    }

    /// Equal-weight empirical measure on the given points (duplicates merged).
    pub fn uniform(points: Vec<Point>) -> Result<Self> {
        let n = points.len();
        Self::from_exact(points, vec![Rational::one(); n])
    }

    pub fn dirac(point: Point) -> Self {
        DiscreteMeasure { dim: point.dim(), atoms: vec![Atom { point, weight: Rational::one() }] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn point(&self, i: usize) -> &Point {
        &self.atoms[i].point
    }

    pub fn weight(&self, i: usize) -> &Rational {
        &self.atoms[i].weight
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| exact::to_f64(&a.weight)).collect()
    }

    pub fn points(&self) -> impl Iterator<Item = &Point> {
        self.atoms.iter().map(|a| &a.point)
    }

    pub fn total_mass(&self) -> Rational {
        self.atoms.iter().map(|a| &a.weight).sum()
    }

    pub fn index_of(&self, p: &Point) -> Option<usize> {
        let key = p.key();
        self.atoms.iter().position(|a| a.point.key() == key)
    }

    /// True when all atoms carry the same weight.
    pub fn is_equal_weight(&self) -> bool {
        self.atoms.windows(2).all(|w| w[0].weight == w[1].weight)
    }

    /// Second moment, used for sanity checks on covariation laws.
    pub fn second_moment(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| exact::to_f64(&a.weight) * a.point.coords().iter().map(|c| c * c).sum::<f64>())
            .sum()
    }

    /// Image of the measure under `x -> scale * x + shift`.
    pub fn affine(&self, scale: f64, shift: &[f64]) -> Result<Self> {
        let points = self
            .atoms
            .iter()
            .map(|a| {
                let scaled: Vec<f64> = a.point.coords().iter().map(|c| scale * c).collect();
                Point::new(scaled)?.translate(shift)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_exact(points, self.atoms.iter().map(|a| a.weight.clone()).collect())
    }

    /// Whether the two measures share no atom.
    pub fn is_disjoint_from(&self, other: &DiscreteMeasure) -> bool {
        let keys: std::collections::HashSet<_> = self.points().map(Point::key).collect();
        other.points().all(|p| !keys.contains(&p.key()))
    }
}

/// A map defined on the atoms of a source measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicMap {
    pairs: Vec<(Point, Point)>,
}

impl DeterministicMap {
    pub fn new(pairs: Vec<(Point, Point)>) -> Self {
        DeterministicMap { pairs }
    }

    pub fn identity(mu: &DiscreteMeasure) -> Self {
        DeterministicMap { pairs: mu.points().map(|p| (p.clone(), p.clone())).collect() }
    }

    pub fn pairs(&self) -> &[(Point, Point)] {
        &self.pairs
    }

    pub fn image(&self, x: &Point) -> Option<&Point> {
        let key = x.key();
        self.pairs.iter().find(|(s, _)| s.key() == key).map(|(_, t)| t)
    }

    /// Images of the atoms of `mu`, in atom order.
    pub fn images_for(&self, mu: &DiscreteMeasure) -> Result<Vec<Point>> {
        let lookup: HashMap<Vec<u64>, &Point> = self.pairs.iter().map(|(s, t)| (s.key(), t)).collect();
        mu.points()
            .enumerate()
            .map(|(i, p)| lookup.get(&p.key()).map(|t| (*t).clone()).ok_or(Error::UncoveredAtom(i)))
            .collect()
    }
}

/// Image measure of `mu` under `map`.
pub fn pushforward(mu: &DiscreteMeasure, map: &DeterministicMap) -> Result<DiscreteMeasure> {
    let images = map.images_for(mu)?;
    if let Some(bad) = images.iter().find(|p| p.dim() != images[0].dim()) {
        return Err(Error::DimensionMismatch { expected: images[0].dim(), found: bad.dim() });
    }
    DiscreteMeasure::from_exact(images, mu.atoms().iter().map(|a| a.weight.clone()).collect())
}

/// Generators for equal-weight point clouds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistributionSpec {
    UniformBox { low: Vec<f64>, high: Vec<f64> },
    Gaussian { mean: Vec<f64>, var: f64 },
    /// Gaussian blobs of standard deviation `spread` around `a` (chosen with
    /// probability `weight`) and `b`.
    TwoPointMixture { a: Vec<f64>, b: Vec<f64>, weight: f64, spread: f64 },
}

impl DistributionSpec {
    pub fn dim(&self) -> usize {
        match self {
            DistributionSpec::UniformBox { low, .. } => low.len(),
            DistributionSpec::Gaussian { mean, .. } => mean.len(),
            DistributionSpec::TwoPointMixture { a, .. } => a.len(),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidDistribution(m.to_string()));
        if self.dim() == 0 {
            return bad("dimension must be at least 1");
        }
        match self {
            DistributionSpec::UniformBox { low, high } => {
                if low.len() != high.len() {
                    return bad("low and high differ in length");
                }
                if low.iter().zip(high).any(|(l, h)| !(l.is_finite() && h.is_finite() && l <= h)) {
                    return bad("box bounds must be finite with low <= high");
                }
            }
            DistributionSpec::Gaussian { mean, var } => {
                if !(var.is_finite() && *var >= 0.0) || mean.iter().any(|m| !m.is_finite()) {
                    return bad("gaussian needs finite mean and var >= 0");
                }
            }
            DistributionSpec::TwoPointMixture { a, b, weight, spread } => {
                if a.len() != b.len() {
                    return bad("mixture centers differ in dimension");
                }
                if !(0.0..=1.0).contains(weight) || !(spread.is_finite() && *spread >= 0.0) {
                    return bad("mixture needs weight in [0,1] and spread >= 0");
                }
            }
        }
        Ok(())
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
        match self {
            DistributionSpec::UniformBox { low, high } => low
                .iter()
                .zip(high)
                .map(|(l, h)| if l == h { *l } else { rng.random_range(*l..*h) })
                .collect(),
            DistributionSpec::Gaussian { mean, var } => {
                let sd = var.sqrt();
                mean.iter().map(|m| m + sd * std_normal.sample(rng)).collect()
            }
            DistributionSpec::TwoPointMixture { a, b, weight, spread } => {
                let center = if rng.random::<f64>() < *weight { a } else { b };
                center.iter().map(|c| c + spread * std_normal.sample(rng)).collect()
            }
        }
    }
}

/// `n` independent draws from `spec`, each with weight `1/n`.
pub fn sample_cloud(spec: &DistributionSpec, n: usize, seed: u64) -> Result<DiscreteMeasure> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::EmptyMeasure);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n).map(|_| Point::new(spec.draw(&mut rng))).collect::<Result<Vec<_>>>()?;
    DiscreteMeasure::uniform(points)
}

/// One parameter value of a family: its label, mass and marginal pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub label: String,
    pub mass: Rational,
    pub source: DiscreteMeasure,
    pub target: DiscreteMeasure,
}

/// A finite weighted parameter space with one marginal pair per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamFamily {
    params: Vec<Param>,
    cost_exponent: f64,
}

impl ParamFamily {
    /// Masses must be nonnegative with a positive total; zero-mass parameters
    /// are kept but are null for every integral over the family.
    pub fn new(params: Vec<Param>, cost_exponent: f64) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::InvalidFamily("no parameters".into()));
        }
        if !(cost_exponent.is_finite() && cost_exponent > 0.0) {
            return Err(Error::InvalidExponent(cost_exponent));
        }
        let dim = params[0].source.dim();
        let mut seen = std::collections::HashSet::new();
        for p in &params {
            if !seen.insert(p.label.as_str()) {
                return Err(Error::InvalidFamily(format!("duplicate label {:?}", p.label)));
            }
            if p.mass.is_negative() {
                return Err(Error::InvalidFamily(format!("negative mass at {:?}", p.label)));
            }
            for m in [&p.source, &p.target] {
                if m.dim() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: m.dim() });
                }
            }
        }
        let family = ParamFamily { params, cost_exponent };
        if !family.total_mass().is_positive() {
            return Err(Error::InvalidFamily("total mass must be positive".into()));
        }
        Ok(family)
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn param(&self, label: &str) -> Result<&Param> {
        self.params
            .iter()
            .find(|p| p.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn cost_exponent(&self) -> f64 {
        self.cost_exponent
    }

    pub fn dim(&self) -> usize {
        self.params[0].source.dim()
    }

    /// m(E).
    pub fn total_mass(&self) -> Rational {
        self.params.iter().map(|p| &p.mass).sum()
    }
}

/// Recipe for a random family: each parameter pairs a cloud with an
/// independent cloud under a random scaling and translation, and masses are
/// random integers rescaled to `total_mass`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    pub params: usize,
    pub atoms: usize,
    pub dist: DistributionSpec,
    pub total_mass: Rational,
    pub cost_exponent: f64,
    pub seed: u64,
}

pub fn generate_family(spec: &FamilySpec) -> Result<ParamFamily> {
    if spec.params == 0 {
        return Err(Error::InvalidFamily("no parameters".into()));
    }
    if !spec.total_mass.is_positive() {
        return Err(Error::InvalidFamily("total mass must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut drafts = Vec::with_capacity(spec.params);
    for _ in 0..spec.params {
        let source = sample_cloud(&spec.dist, spec.atoms, rng.random())?;
        let cloud = sample_cloud(&spec.dist, spec.atoms, rng.random())?;
        let scale = rng.random_range(0.5..2.0);
        let shift: Vec<f64> = (0..spec.dist.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let target = cloud.affine(scale, &shift)?;
        let weight: i64 = rng.random_range(1..=9);
        drafts.push((source, target, weight));
    }
    let sum: i64 = drafts.iter().map(|d| d.2).sum();
    let params = drafts
        .into_iter()
        .enumerate()
        .map(|(i, (source, target, w))| Param {
            label: i.to_string(),
            mass: &spec.total_mass * exact::from_ratio(w, sum),
            source,
            target,
        })
        .collect();
    ParamFamily::new(params, spec.cost_exponent)
}
