use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::noise::{coupled_integral, integrate, plan_coupling_noise, simulate_noise, transport_process};
use super::process::{CovariationProcess, PredictableField, TimeGrid, GENERATOR};
use crate::error::{Error, Result};
use crate::exact;
use crate::io::MeasureSource;
use crate::measure::Point;
use crate::ot::ArithmeticMode;
use crate::reduce::mean_and_stderr;

/// Number of standard errors allowed by every statistical check.
pub const SIGMA_FACTOR: f64 = 3.0;

/// Constant of the Doob L² maximal inequality.
pub const DOOB_FACTOR: f64 = 4.0;

/// A fully validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub grid: TimeGrid,
    pub cov: CovariationProcess,
    pub field: PredictableField,
    pub replications: u64,
    pub seed: u64,
    /// Also run the plan-indexed noise construction.
    pub plan_noise: bool,
}

impl ExperimentConfig {
    pub fn new(
        grid: TimeGrid,
        cov: CovariationProcess,
        field: PredictableField,
        replications: u64,
        seed: u64,
    ) -> Result<Self> {
        if replications == 0 {
            return Err(Error::InvalidConfig("replication count R must be positive".into()));
        }
        cov.check_grid(&grid)?;
        field.validate(grid.steps(), cov.dim())?;
        let mut atoms: Vec<Point> = Vec::new();
        for i in 0..cov.len() {
            for m in [cov.source(i), cov.target(i)] {
                for p in m.points() {
                    if !atoms.contains(p) {
                        atoms.push(p.clone());
                    }
                }
            }
        }
        if atoms.len() <= 200 {
            field.check_lipschitz(grid.steps(), &atoms)?;
        }
        Ok(ExperimentConfig { grid, cov, field, replications, seed, plan_noise: true })
    }
}

/// Either the clock name `"linear"` or explicit clock increments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClockJson {
    Named(String),
    Increments(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridJson {
    #[serde(rename = "S")]
    pub horizon: f64,
    pub steps: usize,
    #[serde(default = "default_clock")]
    pub clock: ClockJson,
}

fn default_clock() -> ClockJson {
    ClockJson::Named("linear".into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovStepJson {
    pub q: MeasureSource,
    pub qhat: MeasureSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PhiJson {
    /// `φ(i, a) = s_i (offset + <coef, a>)`.
    Linear {
        coef: Vec<f64>,
        #[serde(default)]
        offset: f64,
        #[serde(default)]
        step_scale: Option<Vec<f64>>,
    },
    /// Lipschitz extension of a value table.
    LipschitzTable { points: Vec<Vec<f64>>, values: Vec<f64> },
}

/// Experiment config file.
///
/// `cov` holds one `{q, qhat}` pair per step, or a single pair used at every
/// step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentJson {
    pub grid: GridJson,
    pub cov: Vec<CovStepJson>,
    pub phi: PhiJson,
    #[serde(rename = "R")]
    pub replications: u64,
    pub seed: u64,
    #[serde(default = "default_true")]
    pub plan_noise: bool,
}

fn default_true() -> bool {
    true
}

impl ExperimentJson {
    /// Validates the config; relative measure paths resolve against `base`.
    pub fn to_config(&self, base: Option<&Path>) -> Result<ExperimentConfig> {
        let steps = self.grid.steps;
        let grid = match &self.grid.clock {
            ClockJson::Named(name) if name == "linear" => TimeGrid::linear(self.grid.horizon, steps)?,
            ClockJson::Named(name) => return Err(Error::InvalidGrid(format!("unknown clock {name:?}"))),
            ClockJson::Increments(dk) => {
                let linear = TimeGrid::linear(self.grid.horizon, steps)?;
                TimeGrid::new(linear.times().to_vec(), dk.clone())?
            }
        };
        let pairs = self
            .cov
            .iter()
            .map(|s| Ok((s.q.load(base)?, s.qhat.load(base)?)))
            .collect::<Result<Vec<_>>>()?;
        let cov = match pairs.len() {
            1 => {
                let (q, qhat) = pairs.into_iter().next().expect("one pair");
                CovariationProcess::constant(q, qhat, steps)?
            }
            n if n == steps => CovariationProcess::new(pairs)?,
            n => return Err(Error::InvalidGrid(format!("cov has {n} entries; expected 1 or {steps}"))),
        };
        let field = match &self.phi {
            PhiJson::Linear { coef, offset, step_scale } => {
                PredictableField::Linear { coef: coef.clone(), offset: *offset, step_scale: step_scale.clone() }
            }
            PhiJson::LipschitzTable { points, values } => PredictableField::table(
                points.iter().map(|p| Point::new(p.clone())).collect::<Result<Vec<_>>>()?,
                values.clone(),
            )?,
        };
        let mut config = ExperimentConfig::new(grid, cov, field, self.replications, self.seed)?;
        config.plan_noise = self.plan_noise;
        Ok(config)
    }
}

pub fn experiment_from_str(text: &str, base: Option<&Path>) -> Result<ExperimentConfig> {
    let parsed: ExperimentJson = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    parsed.to_config(base)
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    fn of(values: &[f64]) -> Self {
        let (mean, stderr) = mean_and_stderr(values);
        Estimate { mean, stderr }
    }

    /// `|mean - exact| <= 3 stderr`.
    pub fn agrees_with(&self, exact: f64) -> bool {
        (self.mean - exact).abs() <= SIGMA_FACTOR * self.stderr + 1e-12 * exact.abs().max(1.0)
    }

    /// `mean <= bound + 3 stderr`.
    pub fn below(&self, bound: f64) -> bool {
        self.mean <= bound + SIGMA_FACTOR * self.stderr + 1e-12 * bound.abs().max(1.0)
    }
}

/// A Monte Carlo second moment against its exact value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsometryCheck {
    pub estimate: Estimate,
    pub exact: f64,
    pub pass: bool,
}

impl IsometryCheck {
    fn new(values: &[f64], exact: f64) -> Self {
        let estimate = Estimate::of(values);
        IsometryCheck { estimate, exact, pass: estimate.agrees_with(exact) }
    }
}

/// Mean of one path increment, which must vanish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncrementCheck {
    pub step: usize,
    pub estimate: Estimate,
    pub pass: bool,
}

/// Results of the plan-indexed construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanCouplingReport {
    /// `Ê[(Y_S - Ŷ_S)²]` for the two marginal integrals of the plan noise.
    pub terminal: IsometryCheck,
    pub source_isometry: IsometryCheck,
    pub target_isometry: IsometryCheck,
    /// Agreement with the map construction's terminal estimate.
    pub matches_map: bool,
    /// Terminal bound `≤ rhs + 3 stderr`.
    pub bound_pass: bool,
}

/// Everything measured by [`run_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub replications: u64,
    pub seed: u64,
    pub generator: String,
    pub steps: usize,
    /// `Ê[sup_t (X_t - X̂_t)²]` over grid times.
    pub lhs_sup: Estimate,
    /// `Ê[(X_S - X̂_S)²]`.
    pub lhs_terminal: Estimate,
    /// `Σ_i L_i² W₂²(q_i, q̂_i) Δk_i` (deterministic, so its standard error is 0).
    pub rhs: Estimate,
    /// Exact `Σ_i Σ_j (φ(i,a) - φ(i,T_i a))² w Δk_i`.
    pub lhs_terminal_exact: f64,
    pub terminal_pass: bool,
    pub doob_pass: bool,
    /// The bound without the Doob constant; reported, never asserted.
    pub literal_bound_held: bool,
    pub source_isometry: IsometryCheck,
    pub target_isometry: IsometryCheck,
    pub difference_isometry: IsometryCheck,
    pub source_increments: Vec<IncrementCheck>,
    pub target_increments: Vec<IncrementCheck>,
    pub plan: Option<PlanCouplingReport>,
    /// True when `φ(i, ·)` is constant in space for every step.
    pub space_constant: bool,
    /// `max |X_t - X̂_t|` over all times and replications.
    pub max_abs_difference: f64,
}

/// One line of the tabular report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub quantity: String,
    pub estimate: f64,
    pub stderr: f64,
    pub bound: Option<f64>,
    pub pass: Option<bool>,
}

impl CouplingReport {
    /// The asserted inequalities: the terminal bound, the Doob bound and,
    /// for space-constant integrands, the pathwise-zero difference.
    pub fn bounds_hold(&self) -> bool {
        self.terminal_pass && self.doob_pass && (!self.space_constant || self.max_abs_difference == 0.0)
    }

    /// True when every asserted check passed: the terminal and Doob bounds,
    /// the isometries, the martingale increments, the plan construction and,
    /// for space-constant integrands, the pathwise-zero difference.
    pub fn hard_pass(&self) -> bool {
        self.terminal_pass
            && self.doob_pass
            && self.source_isometry.pass
            && self.target_isometry.pass
            && self.difference_isometry.pass
            && self.source_increments.iter().chain(&self.target_increments).all(|c| c.pass)
            && self.plan.as_ref().is_none_or(|p| p.terminal.pass && p.source_isometry.pass && p.target_isometry.pass && p.bound_pass)
            && (!self.space_constant || self.max_abs_difference == 0.0)
    }

    pub fn rows(&self) -> Vec<ReportRow> {
        let row = |q: &str, e: Estimate, bound: Option<f64>, pass: Option<bool>| ReportRow {
            quantity: q.to_string(),
            estimate: e.mean,
            stderr: e.stderr,
            bound,
            pass,
        };
        let iso = |q: &str, c: &IsometryCheck| row(q, c.estimate, Some(c.exact), Some(c.pass));
        let rhs = self.rhs.mean;
        let mut rows = vec![
            row("rhs", self.rhs, None, None),
            row("lhs_terminal", self.lhs_terminal, Some(rhs), Some(self.terminal_pass)),
            row("lhs_sup", self.lhs_sup, Some(DOOB_FACTOR * rhs), Some(self.doob_pass)),
            row("lhs_sup_literal_reported", self.lhs_sup, Some(rhs), Some(self.literal_bound_held)),
            iso("isometry_source", &self.source_isometry),
            iso("isometry_target", &self.target_isometry),
            iso("isometry_difference", &self.difference_isometry),
        ];
        for (name, checks) in [("increment_source", &self.source_increments), ("increment_target", &self.target_increments)] {
            for c in checks {
                rows.push(row(&format!("{name}_{}", c.step), c.estimate, Some(0.0), Some(c.pass)));
            }
        }
        if let Some(p) = &self.plan {
            rows.push(iso("plan_terminal", &p.terminal));
            rows.push(row("plan_terminal_vs_rhs", p.terminal.estimate, Some(rhs), Some(p.bound_pass)));
            rows.push(row("plan_terminal_vs_map", p.terminal.estimate, Some(self.lhs_terminal.mean), Some(p.matches_map)));
            rows.push(iso("plan_isometry_source", &p.source_isometry));
            rows.push(iso("plan_isometry_target", &p.target_isometry));
        }
        let zero = Estimate { mean: self.max_abs_difference, stderr: 0.0 };
        let pass = self.space_constant.then_some(self.max_abs_difference == 0.0);
        rows.push(row("max_abs_difference", zero, self.space_constant.then_some(0.0), pass));
        rows
    }
}

/// Per-replication observables.
struct Sample {
    x_sq: f64,
    xhat_sq: f64,
    diff_sq: f64,
    sup_diff_sq: f64,
    max_abs_diff: f64,
    x_steps: Vec<f64>,
    xhat_steps: Vec<f64>,
    plan: Option<(f64, f64, f64)>,
}

fn column(samples: &[Sample], f: impl Fn(&Sample) -> f64) -> Vec<f64> {
    samples.iter().map(f).collect()
}

/// Simulates `R` replications and evaluates every check.
pub fn run_experiment(config: &ExperimentConfig, arithmetic: ArithmeticMode) -> Result<CouplingReport> {
    let ExperimentConfig { grid, cov, field, replications, seed, plan_noise } = config;
    let process = transport_process(cov, arithmetic)?;
    let steps = grid.steps();
    let dk = grid.increments();

    let mut rhs = 0.0;
    let mut exact_source = 0.0;
    let mut exact_target = 0.0;
    let mut exact_diff = 0.0;
    for i in 0..steps {
        let l = field.lipschitz(i);
        rhs += l * l * exact::to_f64(&process.w2_squared[i]) * dk[i];
        for (j, atom) in cov.source(i).atoms().iter().enumerate() {
            let w = exact::to_f64(&atom.weight) * dk[i];
            let (fa, fb) = (field.eval(i, &atom.point), field.eval(i, &process.images[i][j]));
            exact_source += fa * fa * w;
            exact_target += fb * fb * w;
            exact_diff += (fa - fb) * (fa - fb) * w;
        }
    }
    let mut exact_plan = (0.0, 0.0, 0.0);
    for (i, plan) in process.plans.iter().enumerate() {
        for e in plan.entries() {
            let w = exact::to_f64(&e.mass) * dk[i];
            let fa = field.eval(i, plan.source().point(e.source));
            let fb = field.eval(i, plan.target().point(e.target));
            exact_plan.0 += (fa - fb) * (fa - fb) * w;
            exact_plan.1 += fa * fa * w;
            exact_plan.2 += fb * fb * w;
        }
    }

    let samples = (0..*replications)
        .into_par_iter()
        .map(|r| -> Result<Sample> {
            let noise = simulate_noise(cov, grid, *seed, r)?;
            let x = integrate(field, &noise, cov);
            let xhat = coupled_integral(field, &noise, &process);
            let diffs: Vec<f64> = x.iter().zip(&xhat).map(|(a, b)| a - b).collect();
            let plan = if *plan_noise {
                let pn = plan_coupling_noise(&process.plans, grid, *seed, r)?;
                let y = pn.integrate_source(field, &process.plans);
                let yhat = pn.integrate_target(field, &process.plans);
                let (ys, yhs) = (y[steps], yhat[steps]);
                Some(((ys - yhs) * (ys - yhs), ys * ys, yhs * yhs))
            } else {
                None
            };
            Ok(Sample {
                x_sq: x[steps] * x[steps],
                xhat_sq: xhat[steps] * xhat[steps],
                diff_sq: diffs[steps] * diffs[steps],
                sup_diff_sq: diffs.iter().map(|d| d * d).fold(0.0, f64::max),
                max_abs_diff: diffs.iter().map(|d| d.abs()).fold(0.0, f64::max),
                x_steps: x.windows(2).map(|w| w[1] - w[0]).collect(),
                xhat_steps: xhat.windows(2).map(|w| w[1] - w[0]).collect(),
                plan,
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<Sample>>>()?;

    let lhs_terminal = Estimate::of(&column(&samples, |s| s.diff_sq));
    let lhs_sup = Estimate::of(&column(&samples, |s| s.sup_diff_sq));
    let rhs = Estimate { mean: rhs, stderr: 0.0 };
    let increments = |pick: fn(&Sample) -> &Vec<f64>| -> Vec<IncrementCheck> {
        (0..steps)
            .map(|i| {
                let estimate = Estimate::of(&column(&samples, |s| pick(s)[i]));
                IncrementCheck { step: i, estimate, pass: estimate.agrees_with(0.0) }
            })
            .collect()
    };
    let plan = if *plan_noise {
        let terminal = IsometryCheck::new(&column(&samples, |s| s.plan.expect("plan sample").0), exact_plan.0);
        Some(PlanCouplingReport {
            terminal,
            source_isometry: IsometryCheck::new(&column(&samples, |s| s.plan.expect("plan sample").1), exact_plan.1),
            target_isometry: IsometryCheck::new(&column(&samples, |s| s.plan.expect("plan sample").2), exact_plan.2),
            matches_map: (terminal.estimate.mean - lhs_terminal.mean).abs()
                <= SIGMA_FACTOR * (terminal.estimate.stderr + lhs_terminal.stderr) + 1e-12,
            bound_pass: terminal.estimate.below(rhs.mean),
        })
    } else {
        None
    };

    Ok(CouplingReport {
        replications: *replications,
        seed: *seed,
        generator: GENERATOR.to_string(),
        steps,
        terminal_pass: lhs_terminal.below(rhs.mean),
        doob_pass: lhs_sup.below(DOOB_FACTOR * rhs.mean),
        literal_bound_held: lhs_sup.mean <= rhs.mean,
        lhs_sup,
        lhs_terminal,
        rhs,
        lhs_terminal_exact: exact_diff,
        source_isometry: IsometryCheck::new(&column(&samples, |s| s.x_sq), exact_source),
        target_isometry: IsometryCheck::new(&column(&samples, |s| s.xhat_sq), exact_target),
        difference_isometry: IsometryCheck::new(&column(&samples, |s| s.diff_sq), exact_diff),
        source_increments: increments(|s| &s.x_steps),
        target_increments: increments(|s| &s.xhat_steps),
        plan,
        space_constant: field.is_space_constant(),
        max_abs_difference: samples.iter().map(|s| s.max_abs_diff).fold(0.0, f64::max),
    })
}
