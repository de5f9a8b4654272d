//! Exact discrete optimal transport for power costs, dyadic approximation
//! of parameter-dependent transport maps, and a Monte Carlo harness for
//! couplings of orthogonal martingale measures driven by transport maps.
//!
//! The modules mirror the layers of the construction:
//!
//! - [`measure`]: discrete measures, maps between atoms, parameter families.
//! - [`ot`]: exact optimal plans, Wasserstein distances, the union of
//!   optimal supports and map uniqueness.
//! - [`dyadic`]: dyadic cells, the step maps `T^k(λ, x)` and their
//!   convergence bounds.
//! - [`coupling`]: simulated white noise, stochastic integrals and the
//!   transport-coupled integral.
//! - [`io`]: JSON and CSV formats.

pub mod coupling;
pub mod dyadic;
pub mod error;
pub mod exact;
pub mod io;
pub mod measure;
pub mod ot;
pub mod reduce;

pub use error::{Error, Result};
pub use exact::Rational;
pub use measure::{
    generate_family, make_discrete, pushforward, sample_cloud, DeterministicMap, DiscreteMeasure, DistributionSpec,
    FamilySpec, Param, ParamFamily, Point,
};
pub use ot::{
    is_unique, solve_1d_monotone, solve_bruteforce, solve_exact, solve_exact_with, support_union, wasserstein, Arithmetic,
    ArithmeticMode, CostSpec, EdgeSet, TransportPlan,
};
