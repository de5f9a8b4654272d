use std::collections::BTreeSet;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::cost::{cost_exact, CostSpec};
use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::measure::{DeterministicMap, DiscreteMeasure};

/// Feasibility tolerance for plans computed in floating point.
pub const FLOAT_FEASIBILITY_TOL: f64 = 1e-10;

/// Which number type produced a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    Rational,
    Float,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanEntry {
    pub source: usize,
    pub target: usize,
    pub mass: Rational,
}

/// Dual potentials `(u, v)` with `u_i + v_j <= c_ij` at optimality.
#[derive(Debug, Clone, PartialEq)]
pub struct Duals {
    pub source: Vec<Rational>,
    pub target: Vec<Rational>,
}

/// A sparse coupling between two discrete measures.
///
/// In [`Arithmetic::Float`] mode masses and value are the exact values of
/// the floating-point results.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub(crate) source: DiscreteMeasure,
    pub(crate) target: DiscreteMeasure,
    pub(crate) entries: Vec<PlanEntry>,
    pub(crate) value: Rational,
    pub(crate) arithmetic: Arithmetic,
    pub(crate) duals: Option<Duals>,
}

impl TransportPlan {
    /// Assembles a plan from entries, dropping zero masses and computing its
    /// exact value under `spec`.
    pub fn from_entries(
        source: DiscreteMeasure,
        target: DiscreteMeasure,
        entries: Vec<PlanEntry>,
        spec: &CostSpec,
    ) -> Result<Self> {
        let mut entries: Vec<PlanEntry> = entries.into_iter().filter(|e| !e.mass.is_zero()).collect();
        entries.sort_by_key(|e| (e.source, e.target));
        for e in &entries {
            if e.source >= source.len() || e.target >= target.len() {
                return Err(Error::InvalidPlan(format!("entry ({}, {}) out of range", e.source, e.target)));
            }
            if e.mass < Rational::zero() {
                return Err(Error::InvalidPlan(format!("negative mass at ({}, {})", e.source, e.target)));
            }
        }
        let mut value = Rational::zero();
        for e in &entries {
            value += &e.mass * cost_exact(spec, source.point(e.source), target.point(e.target))?;
        }
        Ok(TransportPlan { source, target, entries, value, arithmetic: Arithmetic::Rational, duals: None })
    }

    pub fn source(&self) -> &DiscreteMeasure {
        &self.source
    }

    pub fn target(&self) -> &DiscreteMeasure {
        &self.target
    }

    pub fn entries(&self) -> &[PlanEntry] {
        &self.entries
    }

    pub fn value(&self) -> &Rational {
        &self.value
    }

    pub fn value_f64(&self) -> f64 {
        exact::to_f64(&self.value)
    }

    pub fn arithmetic(&self) -> Arithmetic {
        self.arithmetic
    }

    pub fn duals(&self) -> Option<&Duals> {
        self.duals.as_ref()
    }

    pub fn support(&self) -> EdgeSet {
        EdgeSet(self.entries.iter().map(|e| (e.source, e.target)).collect())
    }

    /// `I(pi)` recomputed from entries in floating point.
    pub fn recompute_value(&self, spec: &CostSpec) -> Result<f64> {
        self.entries.iter().try_fold(0.0, |acc, e| {
            let c = super::cost::cost(spec, self.source.point(e.source), self.target.point(e.target))?;
            Ok(acc + exact::to_f64(&e.mass) * c)
        })
    }

    /// Checks that row and column sums match the marginals: exactly for
    /// rational plans, within [`FLOAT_FEASIBILITY_TOL`] otherwise.
    pub fn check_marginals(&self) -> Result<()> {
        let mut rows = vec![Rational::zero(); self.source.len()];
        let mut cols = vec![Rational::zero(); self.target.len()];
        for e in &self.entries {
            rows[e.source] += &e.mass;
            cols[e.target] += &e.mass;
        }
        let sides = [("row", &rows, &self.source), ("column", &cols, &self.target)];
        for (what, sums, measure) in sides {
            for (k, s) in sums.iter().enumerate() {
                let ok = match self.arithmetic {
                    Arithmetic::Rational => s == measure.weight(k),
                    Arithmetic::Float => {
                        (exact::to_f64(s) - exact::to_f64(measure.weight(k))).abs() <= FLOAT_FEASIBILITY_TOL
                    }
                };
                if !ok {
                    return Err(Error::InvalidPlan(format!("{what} {k} sums to {}", exact::format(s))));
                }
            }
        }
        Ok(())
    }

    /// Largest violation of `u_i + v_j <= c_ij` over all edges, if duals exist.
    pub fn dual_violation(&self, spec: &CostSpec) -> Result<Option<f64>> {
        let Some(d) = &self.duals else { return Ok(None) };
        let mut worst = 0.0f64;
        for (i, x) in self.source.points().enumerate() {
            for (j, y) in self.target.points().enumerate() {
                let slack = cost_exact(spec, x, y)? - &d.source[i] - &d.target[j];
                worst = worst.max(-exact::to_f64(&slack));
            }
        }
        Ok(Some(worst))
    }

    /// The map `x_i -> y_j` when every source atom has exactly one target.
    pub fn as_map(&self) -> Option<DeterministicMap> {
        let targets = self.target_indices()?;
        Some(DeterministicMap::new(
            targets
                .iter()
                .enumerate()
                .map(|(i, &j)| (self.source.point(i).clone(), self.target.point(j).clone()))
                .collect(),
        ))
    }

    /// Target index of each source atom when the plan is map-induced.
    pub fn target_indices(&self) -> Option<Vec<usize>> {
        let mut targets = vec![None; self.source.len()];
        for e in &self.entries {
            if targets[e.source].replace(e.target).is_some() {
                return None;
            }
        }
        targets.into_iter().collect()
    }
}

/// A set of bipartite edges `(source index, target index)`, kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeSet(pub BTreeSet<(usize, usize)>);

impl EdgeSet {
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.0.contains(&(i, j))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(usize, usize)> {
        self.0.iter()
    }

    pub fn is_superset(&self, other: &EdgeSet) -> bool {
        self.0.is_superset(&other.0)
    }

    /// Targets reachable from source `i`.
    pub fn targets_of(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.0.range((i, 0)..(i + 1, 0)).map(|&(_, j)| j)
    }
}

impl FromIterator<(usize, usize)> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = (usize, usize)>>(iter: I) -> Self {
        EdgeSet(iter.into_iter().collect())
    }
}
