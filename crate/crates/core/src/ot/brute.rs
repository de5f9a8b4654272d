use num_traits::Zero;

use super::cost::{cost_exact, CostSpec};
use super::check_dims;
use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::measure::DiscreteMeasure;

pub const MAX_BRUTE_FORCE_ATOMS: usize = 8;

/// Exhaustive optimum over permutation couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForce {
    pub value: Rational,
    /// Every optimal permutation, `perm[i]` being the target of source `i`,
    /// in lexicographic order.
    pub permutations: Vec<Vec<usize>>,
}

impl BruteForce {
    pub fn value_f64(&self) -> f64 {
        exact::to_f64(&self.value)
    }
}

/// Enumerates all `n!` couplings of two equal-weight measures with `n <= 8`
/// atoms each, with exact arithmetic on [`cost_exact`] values.
pub fn solve_bruteforce(mu: &DiscreteMeasure, nu: &DiscreteMeasure, spec: &CostSpec) -> Result<BruteForce> {
    check_dims(mu, nu)?;
    let n = mu.len();
    if nu.len() != n {
        return Err(Error::BruteForce(format!("atom counts differ ({n} vs {})", nu.len())));
    }
    if !mu.is_equal_weight() || !nu.is_equal_weight() {
        return Err(Error::BruteForce("weights are not all equal".into()));
    }
    if n > MAX_BRUTE_FORCE_ATOMS {
        return Err(Error::BruteForce(format!("{n} atoms exceeds the limit of {MAX_BRUTE_FORCE_ATOMS}")));
    }
    let mut cost = Vec::with_capacity(n * n);
    for x in mu.points() {
        for y in nu.points() {
            cost.push(cost_exact(spec, x, y)?);
        }
    }
    let mut search = Search { n, cost: &cost, used: vec![false; n], perm: Vec::with_capacity(n), best: None, optimal: Vec::new() };
    search.descend(Rational::zero());
    let total = search.best.expect("at least one permutation");
    Ok(BruteForce { value: total / exact::int(n as i64), permutations: search.optimal })
}

struct Search<'a> {
    n: usize,
    cost: &'a [Rational],
    used: Vec<bool>,
    perm: Vec<usize>,
    best: Option<Rational>,
    optimal: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn descend(&mut self, partial: Rational) {
        let i = self.perm.len();
        if i == self.n {
            match &self.best {
                Some(b) if partial > *b => {}
                Some(b) if partial == *b => self.optimal.push(self.perm.clone()),
                _ => {
                    self.best = Some(partial);
                    self.optimal = vec![self.perm.clone()];
                }
            }
            return;
        }
        for j in 0..self.n {
            if self.used[j] {
                continue;
            }
            self.used[j] = true;
            self.perm.push(j);
            self.descend(&partial + &self.cost[i * self.n + j]);
            self.perm.pop();
            self.used[j] = false;
        }
    }
}
