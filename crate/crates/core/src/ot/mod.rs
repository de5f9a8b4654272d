//! Exact discrete Monge–Kantorovich solvers for power costs.
//!
//! [`solve_exact`] runs a network simplex on the transportation graph, in
//! exact rational arithmetic for instances of at most
//! [`RATIONAL_EDGE_LIMIT`] edges and in `f64` beyond. [`support_union`]
//! returns the edges charged by at least one optimal plan and
//! [`is_unique`] decides whether the optimum is a single map-induced plan.
//! [`solve_bruteforce`] and [`solve_1d_monotone`] are independent routes
//! used to validate the LP.

mod brute;
mod cost;
mod face;
mod monotone;
mod plan;
pub(crate) mod scalar;
pub(crate) mod simplex;

use std::cmp::Ordering;

pub use brute::{solve_bruteforce, BruteForce, MAX_BRUTE_FORCE_ATOMS};
pub use cost::{cost, cost_exact, CostClass, CostSpec};
pub use face::{analyze, is_unique, support_union, support_union_with, OptimalFace};
pub use monotone::solve_1d_monotone;
pub use plan::{Arithmetic, Duals, EdgeSet, PlanEntry, TransportPlan, FLOAT_FEASIBILITY_TOL};

use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::measure::DiscreteMeasure;
use scalar::Scalar;
use simplex::{Problem, Solution};

/// Instances with at most this many edges are solved in rational arithmetic
/// under [`ArithmeticMode::Auto`].
pub const RATIONAL_EDGE_LIMIT: usize = 400;

/// Reduced-cost tolerance of the floating-point solver, relative to the
/// largest cost magnitude (or absolute when costs are below one).
pub const FLOAT_OPTIMALITY_TOL: f64 = 1e-9;

/// Flows at or below this are treated as zero in floating-point support tests.
pub const FLOAT_SUPPORT_TOL: f64 = 1e-9;

/// Flows at or below this are dropped from floating-point plans as rounding dust.
const FLOAT_DUST: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArithmeticMode {
    Rational,
    Float,
    #[default]
    Auto,
}

impl ArithmeticMode {
    pub fn resolve(self, edges: usize) -> Arithmetic {
        match self {
            ArithmeticMode::Rational => Arithmetic::Rational,
            ArithmeticMode::Float => Arithmetic::Float,
            ArithmeticMode::Auto if edges <= RATIONAL_EDGE_LIMIT => Arithmetic::Rational,
            ArithmeticMode::Auto => Arithmetic::Float,
        }
    }
}

pub(crate) struct Instance<S> {
    pub supply: Vec<S>,
    pub demand: Vec<S>,
    pub cost: Vec<S>,
    pub tol: f64,
}

impl<S: Scalar> Instance<S> {
    fn build(mu: &DiscreteMeasure, nu: &DiscreteMeasure, spec: &CostSpec) -> Result<Self> {
        check_dims(mu, nu)?;
        let mut cost_values = Vec::with_capacity(mu.len() * nu.len());
        for x in mu.points() {
            for y in nu.points() {
                cost_values.push(if S::is_exact() {
                    S::from_rational(&cost_exact(spec, x, y)?)
                } else {
                    S::from_rational(&crate::exact::from_f64(cost(spec, x, y)?)?)
                });
            }
        }
        let tol = if S::is_exact() {
            0.0
        } else {
            let scale = cost_values.iter().map(|c| c.to_f64().abs()).fold(1.0, f64::max);
            FLOAT_OPTIMALITY_TOL * scale
        };
        Ok(Instance {
            supply: mu.atoms().iter().map(|a| S::from_rational(&a.weight)).collect(),
            demand: nu.atoms().iter().map(|a| S::from_rational(&a.weight)).collect(),
            cost: cost_values,
            tol,
        })
    }

    pub fn problem(&self) -> Problem<'_, S, S> {
        Problem { supply: &self.supply, demand: &self.demand, cost: &self.cost, tol: self.tol }
    }

    pub fn support_tol(&self) -> f64 {
        if S::is_exact() {
            0.0
        } else {
            FLOAT_SUPPORT_TOL
        }
    }
}

fn check_dims(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), found: nu.dim() });
    }
    Ok(())
}

fn warn_on_concave_overlap(mu: &DiscreteMeasure, nu: &DiscreteMeasure, spec: &CostSpec) {
    if spec.class() == CostClass::StrictlyConcave && !mu.is_disjoint_from(nu) {
        log::warn!(
            "concave cost p={} with overlapping supports: map uniqueness is only expected for mutually singular marginals",
            spec.exponent()
        );
    }
}

fn plan_from_solution<S: Scalar>(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    inst: &Instance<S>,
    sol: &Solution<S, S>,
) -> TransportPlan {
    let n = nu.len();
    let dust = if S::is_exact() { 0.0 } else { FLOAT_DUST };
    let entries: Vec<PlanEntry> = sol
        .basis
        .flow
        .iter()
        .enumerate()
        .filter(|(_, f)| f.sign(dust) == Ordering::Greater)
        .map(|(e, f)| PlanEntry { source: e / n, target: e % n, mass: f.to_rational() })
        .collect();
    let value = if S::is_exact() {
        entries.iter().map(|e| &e.mass * inst.cost[e.source * n + e.target].to_rational()).sum::<Rational>()
    } else {
        let v: f64 = entries.iter().map(|e| sol.basis.flow[e.source * n + e.target].mul(&inst.cost[e.source * n + e.target]).to_f64()).sum();
        crate::exact::from_f64(v).expect("finite plan value")
    };
    TransportPlan {
        source: mu.clone(),
        target: nu.clone(),
        entries,
        value,
        arithmetic: if S::is_exact() { Arithmetic::Rational } else { Arithmetic::Float },
        duals: Some(Duals {
            source: sol.u.iter().map(Scalar::to_rational).collect(),
            target: sol.v.iter().map(Scalar::to_rational).collect(),
        }),
    }
}

/// An optimal plan for `|x - y|^p`, with arithmetic chosen by edge count.
pub fn solve_exact(mu: &DiscreteMeasure, nu: &DiscreteMeasure, spec: &CostSpec) -> Result<TransportPlan> {
    solve_exact_with(mu, nu, spec, ArithmeticMode::Auto)
}

pub fn solve_exact_with(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    spec: &CostSpec,
    mode: ArithmeticMode,
) -> Result<TransportPlan> {
    check_dims(mu, nu)?;
    warn_on_concave_overlap(mu, nu, spec);
    match mode.resolve(mu.len() * nu.len()) {
        Arithmetic::Rational => solve_generic::<Rational>(mu, nu, spec),
        Arithmetic::Float => solve_generic::<f64>(mu, nu, spec),
    }
}

fn solve_generic<S: Scalar>(mu: &DiscreteMeasure, nu: &DiscreteMeasure, spec: &CostSpec) -> Result<TransportPlan> {
    let inst = Instance::<S>::build(mu, nu, spec)?;
    let sol = simplex::solve(&inst.problem())?;
    log::debug!("simplex: {}x{} instance solved in {} pivots", mu.len(), nu.len(), sol.pivots);
    Ok(plan_from_solution(mu, nu, &inst, &sol))
}

/// `W_p(mu, nu)`: the `p`-th root of the optimal `|x - y|^p` cost, `p >= 1`.
pub fn wasserstein(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    let plan = solve_exact(mu, nu, &CostSpec::new(p)?)?;
    Ok(plan.value_f64().max(0.0).powf(1.0 / p))
}

/// Squared quadratic Wasserstein distance as an exact rational (rational
/// arithmetic is forced regardless of size).
pub fn w2_squared_exact(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Rational> {
    Ok(solve_exact_with(mu, nu, &CostSpec::quadratic(), ArithmeticMode::Rational)?.value)
}
