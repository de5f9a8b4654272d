//! Dyadic step approximations of a parameter-dependent transport map.
//!
//! For a level `k`, R^d is partitioned into half-open cells
//! `A(n, k) = prod_i [n_i / 2^k, (n_i + 1) / 2^k)` with centers
//! `a(n, k) = (n + 1/2) / 2^k`. The step map sends a source atom `x` of
//! parameter `λ` to the center of the cell containing its optimal image,
//! which is the unique `n` with `(λ, x)` in `B(n, k)`, the set of pairs
//! whose optimal plan charges `{x} × A(n, k)`.
//!
//! Distances are Euclidean, so bounds that hold per coordinate with
//! `2^-k` carry a factor `sqrt(d)` here.

use std::collections::BTreeMap;

use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::measure::{DiscreteMeasure, Param, ParamFamily, Point};
use crate::ot::{analyze, ArithmeticMode, CostSpec, OptimalFace};

/// Highest supported resolution level.
pub const MAX_LEVEL: u32 = 20;

/// Relative slack for comparing floating-point sums of distances against
/// bounds that can be attained with equality.
pub const BOUND_RTOL: f64 = 1e-12;

/// Cell index `n` at level `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DyadicIndex {
    pub k: u32,
    pub n: Vec<i64>,
}

fn check_level(k: u32) -> Result<()> {
    if k > MAX_LEVEL {
        return Err(Error::LevelTooLarge(k));
    }
    Ok(())
}

/// The level-`k` cell containing `x`; boundaries belong to the cell on their right.
pub fn cell_of(x: &Point, k: u32) -> Result<DyadicIndex> {
    check_level(k)?;
    let scale = (1u64 << k) as f64;
    let n = x
        .coords()
        .iter()
        .map(|&c| {
            let s = (c * scale).floor();
            if s.abs() >= 9.0e15 {
                Err(Error::CellOverflow(c))
            } else {
                Ok(s as i64)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DyadicIndex { k, n })
}

/// `a(n, k)`, coordinates `(n_i + 1/2) / 2^k` (exact in `f64`).
pub fn cell_center(idx: &DyadicIndex) -> Point {
    let scale = (1u64 << idx.k) as f64;
    Point::new(idx.n.iter().map(|&n| (n as f64 + 0.5) / scale).collect()).expect("finite center")
}

impl DyadicIndex {
    pub fn contains(&self, y: &Point) -> bool {
        cell_of(y, self.k).map(|c| c.n == self.n).unwrap_or(false)
    }

    pub fn center(&self) -> Point {
        cell_center(self)
    }
}

/// `sqrt(d) * 2^-k * m(E)`.
pub fn cauchy_bound(dim: usize, k: u32, total_mass: f64) -> f64 {
    (dim as f64).sqrt() * 0.5f64.powi(k as i32) * total_mass
}

/// `sqrt(d) * 2^-(k+1) * m(E)`: the half-diagonal of a level-`k` cell.
pub fn approx_bound(dim: usize, k: u32, total_mass: f64) -> f64 {
    (dim as f64).sqrt() * 0.5f64.powi(k as i32 + 1) * total_mass
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TransportOptions {
    pub arithmetic: ArithmeticMode,
    /// Use the solver's vertex for parameters without a unique optimal map,
    /// sending split atoms to their heaviest target.
    pub allow_nonunique: bool,
}

/// Per-parameter optimal faces of a family, computed once.
pub struct FamilyAnalysis {
    family: ParamFamily,
    spec: CostSpec,
    faces: Vec<OptimalFace>,
    options: TransportOptions,
}

/// Image indices chosen for one parameter.
#[derive(Debug, Clone, PartialEq)]
enum Assignment {
    Unique(Vec<usize>),
    Fallback(Vec<usize>),
    Skipped,
}

impl FamilyAnalysis {
    pub fn new(family: ParamFamily, options: TransportOptions) -> Result<Self> {
        let spec = CostSpec::new(family.cost_exponent())?;
        let faces = family
            .params()
            .par_iter()
            .map(|p| analyze(&p.source, &p.target, &spec, options.arithmetic))
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(FamilyAnalysis { family, spec, faces, options })
    }

    pub fn family(&self) -> &ParamFamily {
        &self.family
    }

    pub fn spec(&self) -> &CostSpec {
        &self.spec
    }

    pub fn face(&self, label: &str) -> Result<&OptimalFace> {
        Ok(&self.faces[self.position(label)?])
    }

    fn position(&self, label: &str) -> Result<usize> {
        self.family
            .params()
            .iter()
            .position(|p| p.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Labels whose optimum is not a unique map.
    pub fn nonunique_labels(&self) -> Vec<String> {
        self.family
            .params()
            .iter()
            .zip(&self.faces)
            .filter(|(_, f)| !f.is_unique())
            .map(|(p, _)| p.label.clone())
            .collect()
    }

    fn assignment(&self, idx: usize) -> Result<Assignment> {
        let face = &self.faces[idx];
        let param = &self.family.params()[idx];
        if let Some(targets) = face.map_indices() {
            return Ok(Assignment::Unique(targets));
        }
        if param.mass.is_zero() {
            return Ok(Assignment::Skipped);
        }
        if !self.options.allow_nonunique {
            return Err(Error::NonUniqueInstance(param.label.clone()));
        }
        let mut best: Vec<Option<(Rational, usize)>> = vec![None; param.source.len()];
        for e in face.plan.entries() {
            let slot = &mut best[e.source];
            if slot.as_ref().is_none_or(|(m, _)| e.mass > *m) {
                *slot = Some((e.mass.clone(), e.target));
            }
        }
        Ok(Assignment::Fallback(best.into_iter().map(|b| b.expect("every atom ships mass").1).collect()))
    }

    /// Image points `T_λ(x)` for each source atom, or `None` for skipped
    /// zero-mass parameters.
    pub fn images(&self, label: &str) -> Result<Option<Vec<Point>>> {
        let idx = self.position(label)?;
        self.images_at(idx)
    }

    fn images_at(&self, idx: usize) -> Result<Option<Vec<Point>>> {
        let target = &self.family.params()[idx].target;
        Ok(match self.assignment(idx)? {
            Assignment::Unique(t) | Assignment::Fallback(t) => Some(t.iter().map(|&j| target.point(j).clone()).collect()),
            Assignment::Skipped => None,
        })
    }
}

/// Whether `(λ, x)` lies in `B(n, k)`: some optimal plan at `λ` moves `x`
/// into cell `idx`. The unique plan is used when there is one, otherwise
/// the union of optimal supports.
pub fn b_membership(analysis: &FamilyAnalysis, label: &str, x: &Point, idx: &DyadicIndex) -> Result<bool> {
    let param = analysis.family.param(label)?;
    let face = analysis.face(label)?;
    let i = param.source.index_of(x).ok_or_else(|| Error::NotAnAtom(x.to_string()))?;
    let hit = |j: usize| idx.contains(param.target.point(j));
    Ok(match face.map_indices() {
        Some(targets) => hit(targets[i]),
        None => face.support_union.targets_of(i).any(hit),
    })
}

/// `T^k` for one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct StepParam {
    pub label: String,
    /// Cell hit by each source atom, i.e. the `n` with `(λ, x)` in `B(n, k)`.
    pub cells: Vec<DyadicIndex>,
    /// `a(n, k)` for each source atom.
    pub centers: Vec<Point>,
    /// Built from a non-unique optimum under `allow_nonunique`.
    pub fallback: bool,
}

/// The step map `T^k(λ, x)` on every parameter with positive mass (or a
/// unique map).
#[derive(Debug, Clone, PartialEq)]
pub struct StepTransport {
    pub k: u32,
    pub params: Vec<Option<StepParam>>,
}

impl StepTransport {
    pub fn get(&self, label: &str) -> Option<&StepParam> {
        self.params.iter().flatten().find(|s| s.label == label)
    }
}

pub fn build_step(analysis: &FamilyAnalysis, k: u32) -> Result<StepTransport> {
    check_level(k)?;
    let params = (0..analysis.family.params().len())
        .into_par_iter()
        .map(|idx| {
            let label = analysis.family.params()[idx].label.clone();
            let fallback = matches!(analysis.assignment(idx)?, Assignment::Fallback(_));
            let Some(images) = analysis.images_at(idx)? else { return Ok(None) };
            let cells = images.iter().map(|y| cell_of(y, k)).collect::<Result<Vec<_>>>()?;
            let centers = cells.iter().map(cell_center).collect();
            Ok(Some(StepParam { label, cells, centers, fallback }))
        })
        // collect fully first so the reported error is the lowest-index one
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(StepTransport { k, params })
}

/// `T^k(λ, ·)` computed from one parameter alone, without any family context.
pub fn standalone_step(param: &Param, exponent: f64, k: u32, arithmetic: ArithmeticMode) -> Result<Vec<Point>> {
    let face = analyze(&param.source, &param.target, &CostSpec::new(exponent)?, arithmetic)?;
    let targets = face.map_indices().ok_or_else(|| Error::NonUniqueInstance(param.label.clone()))?;
    targets.iter().map(|&j| Ok(cell_center(&cell_of(param.target.point(j), k)?))).collect()
}

/// Mass of `ν^k_λ` at one center next to `ν_λ` of the matching cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellMass {
    pub n: Vec<i64>,
    #[serde(serialize_with = "crate::io::ser_rational")]
    pub pushed: Rational,
    #[serde(serialize_with = "crate::io::ser_rational")]
    pub target: Rational,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamPushforward {
    pub label: String,
    pub fallback: bool,
    pub cells: Vec<CellMass>,
    #[serde(serialize_with = "crate::io::ser_rational")]
    pub total: Rational,
}

impl ParamPushforward {
    pub fn holds(&self) -> bool {
        self.cells.iter().all(|c| c.equal)
    }
}

fn cell_masses(measure: &DiscreteMeasure, points: &[Point], k: u32) -> Result<BTreeMap<Vec<i64>, Rational>> {
    let mut out: BTreeMap<Vec<i64>, Rational> = BTreeMap::new();
    for (atom, p) in measure.atoms().iter().zip(points) {
        *out.entry(cell_of(p, k)?.n).or_insert_with(Rational::zero) += &atom.weight;
    }
    Ok(out)
}

/// Compares `ν^k_λ({a(n,k)})` with `ν_λ(A(n,k))` on every occupied cell, exactly.
pub fn pushforward_check(analysis: &FamilyAnalysis, step: &StepTransport) -> Result<Vec<ParamPushforward>> {
    let k = step.k;
    analysis
        .family
        .params()
        .iter()
        .zip(&step.params)
        .filter_map(|(param, sp)| sp.as_ref().map(|sp| (param, sp)))
        .map(|(param, sp)| {
            let pushed = cell_masses(&param.source, &sp.centers, k)?;
            let target_points: Vec<Point> = param.target.points().cloned().collect();
            let target = cell_masses(&param.target, &target_points, k)?;
            let mut keys: Vec<&Vec<i64>> = pushed.keys().chain(target.keys()).collect();
            keys.sort();
            keys.dedup();
            let zero = Rational::zero();
            let cells = keys
                .into_iter()
                .map(|n| {
                    let a = pushed.get(n).unwrap_or(&zero).clone();
                    let b = target.get(n).unwrap_or(&zero).clone();
                    CellMass { n: n.clone(), equal: a == b, pushed: a, target: b }
                })
                .collect();
            Ok(ParamPushforward { label: param.label.clone(), fallback: sp.fallback, cells, total: pushed.values().sum() })
        })
        .collect()
}

fn weighted_l1<F>(analysis: &FamilyAnalysis, params: &[Option<StepParam>], mut dist: F) -> f64
where
    F: FnMut(usize, &StepParam, usize) -> f64,
{
    let mut total = 0.0;
    for (idx, (param, sp)) in analysis.family.params().iter().zip(params).enumerate() {
        let Some(sp) = sp else { continue };
        let m = exact::to_f64(&param.mass);
        let inner: f64 = param
            .source
            .atoms()
            .iter()
            .enumerate()
            .map(|(i, a)| exact::to_f64(&a.weight) * dist(idx, sp, i))
            .sum();
        total += m * inner;
    }
    total
}

/// `∫_E ∫ |T^k - T^k2| dμ_λ m(dλ)` as a finite double sum.
pub fn cauchy_gap(analysis: &FamilyAnalysis, coarse: &StepTransport, fine: &StepTransport) -> Result<f64> {
    let n = analysis.family.params().len();
    if coarse.params.len() != n || fine.params.len() != n {
        return Err(Error::InvalidFamily("step maps were built for a different family".into()));
    }
    Ok(weighted_l1(analysis, &coarse.params, |idx, sp, i| {
        let other = fine.params[idx].as_ref().expect("both levels skip the same parameters");
        sp.centers[i].distance(&other.centers[i])
    }))
}

/// `∫_E ∫ |T^K(λ, x) - T_λ(x)| dμ_λ m(dλ)`.
pub fn approx_error(analysis: &FamilyAnalysis, step: &StepTransport) -> Result<f64> {
    let images = (0..analysis.family.params().len())
        .map(|idx| analysis.images_at(idx))
        .collect::<Result<Vec<_>>>()?;
    Ok(weighted_l1(analysis, &step.params, |idx, sp, i| {
        let y = &images[idx].as_ref().expect("built parameters have images")[i];
        sp.centers[i].distance(y)
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub k: u32,
    pub k2: u32,
    pub gap: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRow {
    pub k: u32,
    pub error: f64,
    pub bound: f64,
    pub pass: bool,
    /// `error(k) <= error(k - 1)`; true at `k = 0`.
    pub nonincreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelPushforward {
    pub k: u32,
    pub holds: bool,
    pub params: Vec<ParamPushforward>,
}

/// Everything measured for levels `0..=max_level`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxReport {
    pub max_level: u32,
    pub dim: usize,
    pub total_mass: f64,
    pub nonunique: Vec<String>,
    pub pushforward: Vec<LevelPushforward>,
    pub gaps: Vec<GapRow>,
    pub errors: Vec<ErrorRow>,
}

impl ApproxReport {
    /// Hard checks: pushforward identity on unique parameters, Cauchy and
    /// approximation bounds. Monotonicity of the error is reported only.
    pub fn bounds_hold(&self) -> bool {
        self.pushforward.iter().all(|l| l.holds) && self.gaps.iter().all(|g| g.pass) && self.errors.iter().all(|e| e.pass)
    }
}

pub fn approx_report(analysis: &FamilyAnalysis, max_level: u32) -> Result<ApproxReport> {
    check_level(max_level)?;
    let steps = (0..=max_level).map(|k| build_step(analysis, k)).collect::<Result<Vec<_>>>()?;
    let dim = analysis.family.dim();
    let total_mass = analysis.family.total_mass().to_f64().unwrap_or(f64::NAN);

    let mut pushforward = Vec::new();
    for step in &steps {
        let params = pushforward_check(analysis, step)?;
        let holds = params.iter().filter(|p| !p.fallback).all(ParamPushforward::holds);
        pushforward.push(LevelPushforward { k: step.k, holds, params });
    }

    let mut gaps = Vec::new();
    for (a, coarse) in steps.iter().enumerate() {
        for fine in &steps[a + 1..] {
            let gap = cauchy_gap(analysis, coarse, fine)?;
            let bound = cauchy_bound(dim, coarse.k, total_mass);
            gaps.push(GapRow { k: coarse.k, k2: fine.k, gap, bound, pass: gap >= 0.0 && gap <= bound });
        }
    }

    let mut errors: Vec<ErrorRow> = Vec::new();
    for step in &steps {
        let error = approx_error(analysis, step)?;
        let bound = approx_bound(dim, step.k, total_mass);
        let nonincreasing = errors.last().is_none_or(|prev| error <= prev.error);
        errors.push(ErrorRow { k: step.k, error, bound, pass: error <= bound * (1.0 + BOUND_RTOL), nonincreasing });
    }

    Ok(ApproxReport { max_level, dim, total_mass, nonunique: analysis.nonunique_labels(), pushforward, gaps, errors })
}
