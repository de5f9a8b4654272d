use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, Point};

/// Grid `0 = t_0 < ... < t_N = S` with clock increments `k_{t_{i+1}} - k_{t_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
    increments: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>, increments: Vec<f64>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidGrid(m));
        if times.len() < 2 {
            return bad("at least one step is required".into());
        }
        if times[0] != 0.0 {
            return bad("grid must start at 0".into());
        }
        if times.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return bad("times must be finite and strictly increasing".into());
        }
        if increments.len() != times.len() - 1 {
            return bad(format!("{} clock increments for {} steps", increments.len(), times.len() - 1));
        }
        if increments.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return bad("clock increments must be finite and nonnegative".into());
        }
        Ok(TimeGrid { times, increments })
    }

    /// Uniform grid on `[0, horizon]` with clock `k_t = t`.
    pub fn linear(horizon: f64, steps: usize) -> Result<Self> {
        if steps == 0 || !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidGrid("need steps >= 1 and a positive horizon".into()));
        }
        let times: Vec<f64> = (0..=steps).map(|i| horizon * i as f64 / steps as f64).collect();
        let increments = times.windows(2).map(|w| w[1] - w[0]).collect();
        TimeGrid::new(times, increments)
    }

    pub fn steps(&self) -> usize {
        self.increments.len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }
}

/// Deterministic covariation laws: `q_i` drives the given noise and `q̂_i`
/// is the covariance law of the coupled one, one pair per grid step.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariationProcess {
    steps: Vec<(DiscreteMeasure, DiscreteMeasure)>,
}

impl CovariationProcess {
    pub fn new(steps: Vec<(DiscreteMeasure, DiscreteMeasure)>) -> Result<Self> {
        let Some(first) = steps.first() else {
            return Err(Error::InvalidConfig("covariation process has no steps".into()));
        };
        let dim = first.0.dim();
        for (q, qhat) in &steps {
            for m in [q, qhat] {
                if m.dim() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: m.dim() });
                }
            }
        }
        Ok(CovariationProcess { steps })
    }

    /// The same pair at every one of `steps` steps.
    pub fn constant(q: DiscreteMeasure, qhat: DiscreteMeasure, steps: usize) -> Result<Self> {
        CovariationProcess::new(vec![(q, qhat); steps])
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.steps[0].0.dim()
    }

    pub fn source(&self, i: usize) -> &DiscreteMeasure {
        &self.steps[i].0
    }

    pub fn target(&self, i: usize) -> &DiscreteMeasure {
        &self.steps[i].1
    }

    pub(crate) fn check_grid(&self, grid: &TimeGrid) -> Result<()> {
        if self.len() != grid.steps() {
            return Err(Error::InvalidGrid(format!("{} covariation steps for a {}-step grid", self.len(), grid.steps())));
        }
        Ok(())
    }
}

type FieldFn = Arc<dyn Fn(usize, &Point) -> f64 + Send + Sync>;

/// A predictable integrand `φ(i, a)` with per-step Lipschitz constants `L_i`.
#[derive(Clone)]
pub enum PredictableField {
    /// `φ(i, a) = s_i (offset + <coef, a>)`, `L_i = |s_i| |coef|`.
    Linear { coef: Vec<f64>, offset: f64, step_scale: Option<Vec<f64>> },
    /// McShane extension `φ(a) = min_k (v_k + L |a - p_k|)` of a table, `L`
    /// being the largest slope between table entries.
    LipschitzTable { points: Vec<Point>, values: Vec<f64>, lipschitz: f64 },
    /// Arbitrary evaluator with caller-supplied constants.
    Custom { eval: FieldFn, lipschitz: Vec<f64> },
}

impl fmt::Debug for PredictableField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredictableField::Linear { coef, offset, step_scale } => f
                .debug_struct("Linear")
                .field("coef", coef)
                .field("offset", offset)
                .field("step_scale", step_scale)
                .finish(),
            PredictableField::LipschitzTable { points, values, lipschitz } => f
                .debug_struct("LipschitzTable")
                .field("points", points)
                .field("values", values)
                .field("lipschitz", lipschitz)
                .finish(),
            PredictableField::Custom { lipschitz, .. } => f.debug_struct("Custom").field("lipschitz", lipschitz).finish(),
        }
    }
}

impl PredictableField {
    pub fn linear(coef: Vec<f64>, offset: f64) -> Self {
        PredictableField::Linear { coef, offset, step_scale: None }
    }

    pub fn table(points: Vec<Point>, values: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != values.len() {
            return Err(Error::InvalidField("table needs matching, nonempty points and values".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidField("table values must be finite".into()));
        }
        let mut lipschitz = 0.0f64;
        for a in 0..points.len() {
            for b in a + 1..points.len() {
                if points[a].dim() != points[b].dim() {
                    return Err(Error::DimensionMismatch { expected: points[a].dim(), found: points[b].dim() });
                }
                let d = points[a].distance(&points[b]);
                if d == 0.0 {
                    if values[a] != values[b] {
                        return Err(Error::InvalidField("table assigns two values to one point".into()));
                    }
                    continue;
                }
                lipschitz = lipschitz.max((values[a] - values[b]).abs() / d);
            }
        }
        Ok(PredictableField::LipschitzTable { points, values, lipschitz })
    }

    pub fn custom<F>(eval: F, lipschitz: Vec<f64>) -> Self
    where
        F: Fn(usize, &Point) -> f64 + Send + Sync + 'static,
    {
        PredictableField::Custom { eval: Arc::new(eval), lipschitz }
    }

    pub fn eval(&self, step: usize, a: &Point) -> f64 {
        match self {
            PredictableField::Linear { coef, offset, step_scale } => {
                let s = step_scale.as_ref().map_or(1.0, |v| v[step]);
                s * (offset + coef.iter().zip(a.coords()).map(|(c, x)| c * x).sum::<f64>())
            }
            PredictableField::LipschitzTable { points, values, lipschitz } => points
                .iter()
                .zip(values)
                .map(|(p, v)| v + lipschitz * p.distance(a))
                .fold(f64::INFINITY, f64::min),
            PredictableField::Custom { eval, .. } => eval(step, a),
        }
    }

    pub fn lipschitz(&self, step: usize) -> f64 {
        match self {
            PredictableField::Linear { coef, step_scale, .. } => {
                let s = step_scale.as_ref().map_or(1.0, |v| v[step]);
                s.abs() * coef.iter().map(|c| c * c).sum::<f64>().sqrt()
            }
            PredictableField::LipschitzTable { lipschitz, .. } => *lipschitz,
            PredictableField::Custom { lipschitz, .. } => lipschitz[step],
        }
    }

    /// True when `φ(i, ·)` is constant in space for every step.
    pub fn is_space_constant(&self) -> bool {
        match self {
            PredictableField::Linear { coef, .. } => coef.iter().all(|c| *c == 0.0),
            PredictableField::LipschitzTable { lipschitz, .. } => *lipschitz == 0.0,
            PredictableField::Custom { lipschitz, .. } => lipschitz.iter().all(|l| *l == 0.0),
        }
    }

    pub(crate) fn validate(&self, steps: usize, dim: usize) -> Result<()> {
        match self {
            PredictableField::Linear { coef, offset, step_scale } => {
                if coef.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: coef.len() });
                }
                if coef.iter().chain(std::iter::once(offset)).any(|c| !c.is_finite()) {
                    return Err(Error::InvalidField("coefficients must be finite".into()));
                }
                if let Some(s) = step_scale {
                    if s.len() != steps || s.iter().any(|v| !v.is_finite()) {
                        return Err(Error::InvalidField(format!("step_scale needs {steps} finite entries")));
                    }
                }
            }
            PredictableField::LipschitzTable { points, .. } => {
                if points[0].dim() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: points[0].dim() });
                }
            }
            PredictableField::Custom { lipschitz, .. } => {
                if lipschitz.len() != steps || lipschitz.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
                    return Err(Error::InvalidField(format!("need {steps} nonnegative Lipschitz constants")));
                }
            }
        }
        Ok(())
    }

    /// Spot-checks `|φ(i,a) - φ(i,b)| <= L_i |a - b|` (to 1e-9) on all pairs
    /// of the given points at every step.
    pub fn check_lipschitz(&self, steps: usize, points: &[Point]) -> Result<()> {
        for i in 0..steps {
            let l = self.lipschitz(i);
            for (ia, a) in points.iter().enumerate() {
                for b in &points[ia + 1..] {
                    let lhs = (self.eval(i, a) - self.eval(i, b)).abs();
                    let rhs = l * a.distance(b);
                    if lhs > rhs + 1e-9 * (1.0 + rhs) {
                        return Err(Error::InvalidField(format!(
                            "Lipschitz constant {l} violated at step {i} between {a} and {b}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Counter-based stream for one increment: a ChaCha8 generator keyed by a
/// SplitMix64 hash of `(seed, replication, step, atom)`.
pub const GENERATOR: &str = "ChaCha8Rng keyed by SplitMix64(seed, replication, step, atom)";

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn stream(seed: u64, replication: u64, step: u64, atom: u64) -> ChaCha8Rng {
    let key = [replication, step, atom].iter().fold(splitmix(seed), |h, &v| splitmix(h ^ v));
    ChaCha8Rng::seed_from_u64(key)
}
