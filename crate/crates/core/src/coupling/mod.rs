//! Monte Carlo coupling of orthogonal martingale measures.
//!
//! The driving noise is Gaussian white noise with covariance `q_i(da) Δk_i`,
//! discretized on (grid step × atom of `q_i`). The coupled noise reuses the
//! same increments with every integrand composed with the per-step optimal
//! quadratic-cost map `T_i: q_i → q̂_i`, so that
//!
//! ```text
//! E[(X_S - X̂_S)²] = Σ_i Σ_j (φ(i,a_ij) - φ(i,T_i a_ij))² w_ij Δk_i
//!                 ≤ Σ_i L_i² W₂²(q_i, q̂_i) Δk_i.
//! ```
//!
//! The supremum over time is taken on grid times; by the Doob L² inequality
//! it is bounded by four times the right side.
//!
//! Every increment draws from its own ChaCha8 stream keyed by
//! `(seed, replication, step, atom)`, so replications are reproducible,
//! independent of scheduling, and summed by a fixed-tree reduction.

mod experiment;
mod noise;
mod process;

pub use experiment::{
    experiment_from_str, run_experiment, ClockJson, CouplingReport, CovStepJson, Estimate, ExperimentConfig,
    ExperimentJson, GridJson, IncrementCheck, IsometryCheck, PhiJson, PlanCouplingReport, ReportRow,
    DOOB_FACTOR, SIGMA_FACTOR,
};
pub use noise::{
    coupled_integral, integrate, plan_coupling_noise, simulate_noise, transport_process, NoiseRealization, PlanNoise,
    TransportProcess,
};
pub use process::{CovariationProcess, PredictableField, TimeGrid, GENERATOR};
