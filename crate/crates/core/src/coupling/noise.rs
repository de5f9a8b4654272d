use rand_distr::{Distribution, StandardNormal};

use super::process::{stream, CovariationProcess, PredictableField, TimeGrid};
use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::measure::{DeterministicMap, Point};
use crate::ot::{analyze, ArithmeticMode, CostSpec, TransportPlan};

fn gaussian(seed: u64, replication: u64, step: usize, atom: usize, variance: f64) -> f64 {
    if variance == 0.0 {
        return 0.0;
    }
    let z: f64 = StandardNormal.sample(&mut stream(seed, replication, step as u64, atom as u64));
    variance.sqrt() * z
}

/// Increments `ξ[i][j]` of the white noise on (grid step × atom of `q_i`).
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRealization {
    pub seed: u64,
    pub replication: u64,
    pub increments: Vec<Vec<f64>>,
}

/// Independent `ξ[i][j] ~ Normal(0, w_ij Δk_i)`, reproducible from
/// `(seed, replication)`.
pub fn simulate_noise(cov: &CovariationProcess, grid: &TimeGrid, seed: u64, replication: u64) -> Result<NoiseRealization> {
    cov.check_grid(grid)?;
    let increments = (0..grid.steps())
        .map(|i| {
            let dk = grid.increments()[i];
            cov.source(i)
                .atoms()
                .iter()
                .enumerate()
                .map(|(j, a)| gaussian(seed, replication, i, j, exact::to_f64(&a.weight) * dk))
                .collect()
        })
        .collect();
    Ok(NoiseRealization { seed, replication, increments })
}

fn path_from_steps(per_step: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut path = vec![0.0];
    let mut acc = 0.0;
    for s in per_step {
        acc += s;
        path.push(acc);
    }
    path
}

/// `X_{t_m} = Σ_{i<m} Σ_j φ(i, a_ij) ξ_ij`, with `X_0 = 0`.
pub fn integrate(field: &PredictableField, noise: &NoiseRealization, cov: &CovariationProcess) -> Vec<f64> {
    path_from_steps(noise.increments.iter().enumerate().map(|(i, xi)| {
        cov.source(i).points().zip(xi).map(|(a, x)| field.eval(i, a) * x).sum::<f64>()
    }))
}

/// Per-step optimal maps `T_i` pushing `q_i` to `q̂_i` for quadratic cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportProcess {
    /// `T_i(a_ij)` for each atom of `q_i`.
    pub images: Vec<Vec<Point>>,
    /// `W_2^2(q_i, q̂_i)`, the cost of `T_i`.
    pub w2_squared: Vec<Rational>,
    pub plans: Vec<TransportPlan>,
}

impl TransportProcess {
    pub fn map(&self, step: usize, cov: &CovariationProcess) -> DeterministicMap {
        DeterministicMap::new(cov.source(step).points().cloned().zip(self.images[step].iter().cloned()).collect())
    }
}

/// Solves every step; consecutive identical steps reuse the previous map.
pub fn transport_process(cov: &CovariationProcess, arithmetic: ArithmeticMode) -> Result<TransportProcess> {
    let spec = CostSpec::quadratic();
    let mut out = TransportProcess { images: Vec::new(), w2_squared: Vec::new(), plans: Vec::new() };
    for i in 0..cov.len() {
        if i > 0 && cov.source(i) == cov.source(i - 1) && cov.target(i) == cov.target(i - 1) {
            out.images.push(out.images[i - 1].clone());
            out.w2_squared.push(out.w2_squared[i - 1].clone());
            out.plans.push(out.plans[i - 1].clone());
            continue;
        }
        let face = analyze(cov.source(i), cov.target(i), &spec, arithmetic)?;
        let targets = face.map_indices().ok_or(Error::NonUniqueStep(i))?;
        out.images.push(targets.iter().map(|&j| cov.target(i).point(j).clone()).collect());
        out.w2_squared.push(face.plan.value().clone());
        out.plans.push(face.plan);
    }
    Ok(out)
}

/// `X̂_{t_m} = Σ_{i<m} Σ_j φ(i, T_i(a_ij)) ξ_ij`: same noise, composed integrand.
pub fn coupled_integral(
    field: &PredictableField,
    noise: &NoiseRealization,
    process: &TransportProcess,
) -> Vec<f64> {
    path_from_steps(noise.increments.iter().enumerate().map(|(i, xi)| {
        process.images[i].iter().zip(xi).map(|(b, x)| field.eval(i, b) * x).sum::<f64>()
    }))
}

/// White noise on plan entries: `ξ[i][e] ~ Normal(0, π_i(e) Δk_i)`.
///
/// Entry `e` of step `i` draws from the stream of `(seed, replication, i, e)`.
/// Plan entries are sorted by source atom, so for a map-induced plan entry
/// `e` is source atom `e` and the realization equals the one of
/// [`simulate_noise`] pathwise.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanNoise {
    pub increments: Vec<Vec<f64>>,
}

pub fn plan_coupling_noise(plans: &[TransportPlan], grid: &TimeGrid, seed: u64, replication: u64) -> Result<PlanNoise> {
    if plans.len() != grid.steps() {
        return Err(Error::InvalidGrid(format!("{} plans for a {}-step grid", plans.len(), grid.steps())));
    }
    for (i, plan) in plans.iter().enumerate() {
        plan.check_marginals().map_err(|e| Error::InvalidPlan(format!("step {i}: {e}")))?;
    }
    let increments = plans
        .iter()
        .enumerate()
        .map(|(i, plan)| {
            let dk = grid.increments()[i];
            plan.entries()
                .iter()
                .enumerate()
                .map(|(e, entry)| gaussian(seed, replication, i, e, exact::to_f64(&entry.mass) * dk))
                .collect()
        })
        .collect();
    Ok(PlanNoise { increments })
}

impl PlanNoise {
    /// Integral against the first marginal: covariance `q_i`.
    pub fn integrate_source(&self, field: &PredictableField, plans: &[TransportPlan]) -> Vec<f64> {
        self.integrate(field, plans, |plan, e| plan.source().point(plan.entries()[e].source))
    }

    /// Integral against the second marginal: covariance `q̂_i`.
    pub fn integrate_target(&self, field: &PredictableField, plans: &[TransportPlan]) -> Vec<f64> {
        self.integrate(field, plans, |plan, e| plan.target().point(plan.entries()[e].target))
    }

    fn integrate<'p>(
        &self,
        field: &PredictableField,
        plans: &'p [TransportPlan],
        pick: impl Fn(&'p TransportPlan, usize) -> &'p Point,
    ) -> Vec<f64> {
        path_from_steps(self.increments.iter().enumerate().map(|(i, xi)| {
            xi.iter().enumerate().map(|(e, x)| field.eval(i, pick(&plans[i], e)) * x).sum::<f64>()
        }))
    }
}
