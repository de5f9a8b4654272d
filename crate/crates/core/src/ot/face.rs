//! The optimal face of the transportation LP and the union of supports of
//! its plans.
//!
//! An edge belongs to the union iff the maximum of its mass over the optimal
//! face is positive. The maximum is found by re-running the simplex from the
//! optimal basis with the lexicographic objective `(c, -e_ij)`: the primary
//! cost keeps every pivot on the optimal face and the secondary one pushes
//! mass onto edge `(i, j)`.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use super::scalar::{Lex, Scalar};
use super::simplex::{self, Problem, Solution};
use super::{
    check_dims, plan_from_solution, warn_on_concave_overlap, Arithmetic, ArithmeticMode, CostSpec, EdgeSet,
    Instance, TransportPlan,
};
use crate::error::Result;
use crate::exact::Rational;
use crate::measure::{DeterministicMap, DiscreteMeasure};

/// One optimal plan together with the support union of all optimal plans.
#[derive(Debug, Clone)]
pub struct OptimalFace {
    pub plan: TransportPlan,
    pub support_union: EdgeSet,
}

impl OptimalFace {
    /// True iff the optimum is a single plan induced by a map: the support
    /// union equals the computed (vertex) plan's support, so every optimal
    /// plan lives on that forest, and each source atom has one target.
    pub fn is_unique(&self) -> bool {
        self.support_union == self.plan.support() && self.plan.target_indices().is_some()
    }

    pub fn map(&self) -> Option<DeterministicMap> {
        if self.is_unique() {
            self.plan.as_map()
        } else {
            None
        }
    }

    /// Target index per source atom, when the optimum is a unique map.
    pub fn map_indices(&self) -> Option<Vec<usize>> {
        if self.is_unique() {
            self.plan.target_indices()
        } else {
            None
        }
    }
}

pub fn analyze(mu: &DiscreteMeasure, nu: &DiscreteMeasure, spec: &CostSpec, mode: ArithmeticMode) -> Result<OptimalFace> {
    check_dims(mu, nu)?;
    warn_on_concave_overlap(mu, nu, spec);
    match mode.resolve(mu.len() * nu.len()) {
        Arithmetic::Rational => analyze_generic::<Rational>(mu, nu, spec),
        Arithmetic::Float => analyze_generic::<f64>(mu, nu, spec),
    }
}

fn analyze_generic<S: Scalar>(mu: &DiscreteMeasure, nu: &DiscreteMeasure, spec: &CostSpec) -> Result<OptimalFace> {
    let inst = Instance::<S>::build(mu, nu, spec)?;
    let sol = simplex::solve(&inst.problem())?;
    let union = face_support(&inst, &sol, nu.len())?;
    let mut plan = plan_from_solution(mu, nu, &inst, &sol);
    if !S::is_exact() {
        // keep the reported support consistent with the support test threshold
        let tol = inst.support_tol();
        plan.entries.retain(|e| crate::exact::to_f64(&e.mass) > tol || union.contains(e.source, e.target));
    }
    Ok(OptimalFace { plan, support_union: union })
}

fn face_support<S: Scalar>(inst: &Instance<S>, sol: &Solution<S, S>, n: usize) -> Result<EdgeSet> {
    let support_tol = inst.support_tol();
    let positive = |f: &S| f.sign(support_tol) == Ordering::Greater;
    let mut union: BTreeSet<usize> = (0..sol.basis.flow.len()).filter(|&e| positive(&sol.basis.flow[e])).collect();

    // Edges with positive reduced cost carry no mass in any optimal plan
    // (complementary slackness with the optimal duals), so their maximum
    // over the face is zero without solving.
    let tight: Vec<usize> = (0..inst.cost.len())
        .filter(|&e| sol.reduced_cost(&inst.cost, e).sign(inst.tol) == Ordering::Equal)
        .collect();

    for &target in &tight {
        if union.contains(&target) {
            continue;
        }
        let lex_cost: Vec<Lex<S>> = inst
            .cost
            .iter()
            .enumerate()
            .map(|(e, c)| Lex {
                primary: c.clone(),
                secondary: if e == target { S::from_i64(-1) } else { S::zero() },
            })
            .collect();
        let problem = Problem { supply: &inst.supply, demand: &inst.demand, cost: &lex_cost, tol: inst.tol };
        let best = simplex::optimize(&problem, sol.basis.clone())?;
        if positive(&best.basis.flow[target]) {
            union.extend((0..best.basis.flow.len()).filter(|&e| positive(&best.basis.flow[e])));
        }
    }
    Ok(union.into_iter().map(|e| (e / n, e % n)).collect())
}

/// Edges `(i, j)` with positive mass in at least one optimal plan.
pub fn support_union(mu: &DiscreteMeasure, nu: &DiscreteMeasure, spec: &CostSpec) -> Result<EdgeSet> {
    support_union_with(mu, nu, spec, ArithmeticMode::Auto)
}

pub fn support_union_with(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    spec: &CostSpec,
    mode: ArithmeticMode,
) -> Result<EdgeSet> {
    Ok(analyze(mu, nu, spec, mode)?.support_union)
}

/// Whether the optimal plan is unique and map-induced, with the map if so.
pub fn is_unique(mu: &DiscreteMeasure, nu: &DiscreteMeasure, spec: &CostSpec) -> Result<(bool, Option<DeterministicMap>)> {
    let face = analyze(mu, nu, spec, ArithmeticMode::Auto)?;
    let map = face.map();
    Ok((map.is_some(), map))
}
