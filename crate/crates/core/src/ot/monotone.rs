use num_traits::Zero;

use super::cost::CostSpec;
use super::plan::{PlanEntry, TransportPlan};
use super::check_dims;
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;

/// Quantile coupling on the line: both measures are swept in increasing
/// order and mass is matched greedily. Optimal for strictly convex costs.
pub fn solve_1d_monotone(mu: &DiscreteMeasure, nu: &DiscreteMeasure, spec: &CostSpec) -> Result<TransportPlan> {
    check_dims(mu, nu)?;
    if mu.dim() != 1 {
        return Err(Error::MonotonePrecondition(format!("dimension is {}", mu.dim())));
    }
    if spec.exponent() <= 1.0 {
        return Err(Error::MonotonePrecondition(format!("exponent is {}", spec.exponent())));
    }
    let sorted = |m: &DiscreteMeasure| {
        let mut idx: Vec<usize> = (0..m.len()).collect();
        idx.sort_by(|&a, &b| m.point(a).coords()[0].total_cmp(&m.point(b).coords()[0]));
        idx
    };
    let (xs, ys) = (sorted(mu), sorted(nu));
    let mut rem_x = mu.weight(xs[0]).clone();
    let mut rem_y = nu.weight(ys[0]).clone();
    let (mut a, mut b) = (0, 0);
    let mut entries = Vec::with_capacity(xs.len() + ys.len());
    while a < xs.len() && b < ys.len() {
        let mass = if rem_x <= rem_y { rem_x.clone() } else { rem_y.clone() };
        rem_x -= &mass;
        rem_y -= &mass;
        entries.push(PlanEntry { source: xs[a], target: ys[b], mass });
        if rem_x.is_zero() {
            a += 1;
            if a < xs.len() {
                rem_x = mu.weight(xs[a]).clone();
            }
        }
        if rem_y.is_zero() {
            b += 1;
            if b < ys.len() {
                rem_y = nu.weight(ys[b]).clone();
            }
        }
    }
    TransportPlan::from_entries(mu.clone(), nu.clone(), entries, spec)
}
