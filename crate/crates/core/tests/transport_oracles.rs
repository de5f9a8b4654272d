use std::collections::{BTreeSet, VecDeque};

use mtransport_core::exact;
use mtransport_core::ot::{
    analyze, solve_1d_monotone, solve_bruteforce, solve_exact_with, support_union_with, ArithmeticMode, CostSpec,
    EdgeSet, TransportPlan,
};
use mtransport_core::ot::cost_exact;
use mtransport_core::{DiscreteMeasure, Point, Rational};
use num_traits::Zero;
use proptest::prelude::*;

const EXPONENTS: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 3.0];

/// Distinct points on a small integer lattice, so that ties are frequent.
fn lattice_cloud(dim: usize, n: usize) -> impl Strategy<Value = Vec<Point>> {
    let side: i32 = match dim {
        1 => n as i32 + 2,
        2 => 4,
        _ => 3,
    };
    let mut all = vec![vec![]];
    for _ in 0..dim {
        all = all.into_iter().flat_map(|c: Vec<i32>| (0..side).map(move |v| [c.clone(), vec![v]].concat())).collect();
    }
    prop::sample::subsequence(all, n)
        .prop_shuffle()
        .prop_map(|cs| cs.into_iter().map(|c| Point::new(c.into_iter().map(f64::from).collect()).unwrap()).collect())
}

/// Distinct points with two decimal places.
fn fine_cloud(dim: usize, n: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::btree_set(prop::collection::vec(-300..300i32, dim), n)
        .prop_map(|set| set.into_iter().collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|set| {
            set.into_iter().map(|c| Point::new(c.into_iter().map(|v| f64::from(v) / 100.0).collect()).unwrap()).collect()
        })
}

fn instance(max_n: usize) -> impl Strategy<Value = (DiscreteMeasure, DiscreteMeasure, f64)> {
    (1..=3usize, 1..=max_n, 0..EXPONENTS.len(), any::<bool>())
        .prop_flat_map(|(dim, n, p, lattice)| {
            let cloud = move || -> BoxedStrategy<Vec<Point>> {
                if lattice {
                    lattice_cloud(dim, n).boxed()
                } else {
                    fine_cloud(dim, n).boxed()
                }
            };
            (cloud(), cloud(), Just(EXPONENTS[p]))
        })
        .prop_map(|(a, b, p)| (DiscreteMeasure::uniform(a).unwrap(), DiscreteMeasure::uniform(b).unwrap(), p))
}

fn lattice_instance(max_n: usize) -> impl Strategy<Value = (DiscreteMeasure, DiscreteMeasure)> {
    (1..=3usize, 1..=max_n)
        .prop_flat_map(|(dim, n)| (lattice_cloud(dim, n), lattice_cloud(dim, n)))
        .prop_map(|(a, b)| (DiscreteMeasure::uniform(a).unwrap(), DiscreteMeasure::uniform(b).unwrap()))
}

fn brute_union(mu: &DiscreteMeasure, nu: &DiscreteMeasure, spec: &CostSpec) -> EdgeSet {
    let bf = solve_bruteforce(mu, nu, spec).unwrap();
    bf.permutations.iter().flat_map(|perm| perm.iter().enumerate().map(|(i, &j)| (i, j))).collect()
}

/// Independent characterization of the support union from one optimal plan
/// and its exact duals: a zero-flow tight edge `(i, j)` can carry mass iff the
/// target `j` reaches the source `i` in the graph whose arcs are
/// `j -> i'` for `π(i', j) > 0` (mass that may be removed) and `i' -> j'` for
/// tight `(i', j')` (mass that may be added).
fn residual_union(plan: &TransportPlan, spec: &CostSpec) -> EdgeSet {
    let (mu, nu) = (plan.source(), plan.target());
    let duals = plan.duals().expect("simplex plans carry duals");
    let (m, n) = (mu.len(), nu.len());
    let mut tight = vec![vec![false; n]; m];
    for i in 0..m {
        for j in 0..n {
            let rc: Rational = cost_exact(spec, mu.point(i), nu.point(j)).unwrap() - &duals.source[i] - &duals.target[j];
            assert!(rc >= Rational::zero(), "dual infeasible at ({i}, {j})");
            tight[i][j] = rc.is_zero();
        }
    }
    let mut flow = vec![vec![false; n]; m];
    for e in plan.entries() {
        flow[e.source][e.target] = true;
    }
    let mut union: BTreeSet<(usize, usize)> = plan.support().0;
    for j in 0..n {
        // sources reachable from target j
        let mut seen_src = vec![false; m];
        let mut seen_tgt = vec![false; n];
        seen_tgt[j] = true;
        let mut queue = VecDeque::from([j]);
        while let Some(t) = queue.pop_front() {
            for i in 0..m {
                if flow[i][t] && !seen_src[i] {
                    seen_src[i] = true;
                    for t2 in 0..n {
                        if tight[i][t2] && !seen_tgt[t2] {
                            seen_tgt[t2] = true;
                            queue.push_back(t2);
                        }
                    }
                }
            }
        }
        for i in 0..m {
            if tight[i][j] && seen_src[i] {
                union.insert((i, j));
            }
        }
    }
    EdgeSet(union)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn simplex_matches_brute_force((mu, nu, p) in instance(7)) {
        let spec = CostSpec::new(p).unwrap();
        let bf = solve_bruteforce(&mu, &nu, &spec).unwrap();
        let exact_plan = solve_exact_with(&mu, &nu, &spec, ArithmeticMode::Rational).unwrap();
        exact_plan.check_marginals().unwrap();
        prop_assert_eq!(exact_plan.value(), &bf.value);
        let float_plan = solve_exact_with(&mu, &nu, &spec, ArithmeticMode::Float).unwrap();
        prop_assert!((float_plan.value_f64() - bf.value_f64()).abs() <= 1e-9 * bf.value_f64().abs().max(1.0));
    }

    #[test]
    fn support_union_matches_brute_force((mu, nu, p) in instance(6)) {
        let spec = CostSpec::new(p).unwrap();
        let union = support_union_with(&mu, &nu, &spec, ArithmeticMode::Rational).unwrap();
        prop_assert_eq!(&union, &brute_union(&mu, &nu, &spec));
    }

    #[test]
    fn support_union_matches_residual_graph((mu, nu, p) in instance(7)) {
        let spec = CostSpec::new(p).unwrap();
        let face = analyze(&mu, &nu, &spec, ArithmeticMode::Rational).unwrap();
        prop_assert!(face.support_union.is_superset(&face.plan.support()));
        prop_assert_eq!(&face.support_union, &residual_union(&face.plan, &spec));
    }

    #[test]
    fn float_support_union_agrees_when_costs_are_exact((mu, nu) in lattice_instance(6)) {
        // quadratic costs of lattice points are exact in both arithmetics
        let spec = CostSpec::quadratic();
        let exact_union = support_union_with(&mu, &nu, &spec, ArithmeticMode::Rational).unwrap();
        let float_union = support_union_with(&mu, &nu, &spec, ArithmeticMode::Float).unwrap();
        prop_assert_eq!(float_union, exact_union);
    }

    #[test]
    fn monotone_coupling_is_optimal_in_one_dimension(
        xs in prop::collection::vec((-1000..1000i32, 1..20u32), 1..=50),
        ys in prop::collection::vec((-1000..1000i32, 1..20u32), 1..=50),
        p in prop::sample::select(vec![1.5, 2.0, 3.0]),
    ) {
        let build = |v: &[(i32, u32)]| {
            let points = v.iter().map(|&(x, _)| Point::scalar(f64::from(x) / 10.0).unwrap()).collect();
            let weights = v.iter().map(|&(_, w)| exact::int(i64::from(w))).collect();
            DiscreteMeasure::from_exact(points, weights).unwrap()
        };
        let (mu, nu) = (build(&xs), build(&ys));
        let spec = CostSpec::new(p).unwrap();
        let mono = solve_1d_monotone(&mu, &nu, &spec).unwrap();
        mono.check_marginals().unwrap();
        let lp = solve_exact_with(&mu, &nu, &spec, ArithmeticMode::Rational).unwrap();
        prop_assert_eq!(mono.value(), lp.value());
    }
}

#[test]
fn square_instance_has_every_edge() {
    let p = |x: f64, y: f64| Point::new(vec![x, y]).unwrap();
    let mu = DiscreteMeasure::uniform(vec![p(0.0, 0.0), p(1.0, 1.0)]).unwrap();
    let nu = DiscreteMeasure::uniform(vec![p(1.0, 0.0), p(0.0, 1.0)]).unwrap();
    let spec = CostSpec::quadratic();
    let face = analyze(&mu, &nu, &spec, ArithmeticMode::Rational).unwrap();
    assert_eq!(face.support_union.len(), 4);
    assert_eq!(face.support_union, brute_union(&mu, &nu, &spec));
    assert_eq!(face.support_union, residual_union(&face.plan, &spec));
    assert!(!face.is_unique());
    assert_eq!(face.plan.value(), &exact::int(1));
}

#[test]
fn regular_polygon_pairs_are_degenerate() {
    // Two interleaved squares: every rotation by a quarter turn ties.
    let p = |x: f64, y: f64| Point::new(vec![x, y]).unwrap();
    let mu = DiscreteMeasure::uniform(vec![p(1.0, 0.0), p(0.0, 1.0), p(-1.0, 0.0), p(0.0, -1.0)]).unwrap();
    let nu = DiscreteMeasure::uniform(vec![p(1.0, 1.0), p(-1.0, 1.0), p(-1.0, -1.0), p(1.0, -1.0)]).unwrap();
    for exponent in EXPONENTS {
        let spec = CostSpec::new(exponent).unwrap();
        let union = support_union_with(&mu, &nu, &spec, ArithmeticMode::Rational).unwrap();
        assert_eq!(union, brute_union(&mu, &nu, &spec), "p = {exponent}");
    }
}
