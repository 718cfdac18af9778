//! Property suites over random tiny scenarios and plans.

use lom::evaluate::{coverage_report, objective_value, simulate_gaps, PlanViolation};
use lom::generator::{tiny_instance, TinyShape};
use lom::geometry::{coverage_sets, CoverageSets};
use lom::heuristic::greedy_plan;
use lom::model::{
    build_model, check_feasible, decode_solution, encode_plan, warm_start, BuildOptions,
};
use lom::oracle::{solve_exact, solve_exact_with, SearchLimits};
use lom::scenario::{eval_curve, precompute_pen, PenaltyCurve};
use lom::{Execution, Look, LookPlan, Scenario};
use proptest::prelude::*;

fn shape() -> impl Strategy<Value = TinyShape> {
    (1usize..=6, 1usize..=4, 1u8..=2, 0.2f64..0.9).prop_map(|(cells, swaths, r, p)| TinyShape {
        cells,
        swaths,
        resolutions: r,
        coverage: p,
        never: 1000.0,
    })
}

fn scenario() -> impl Strategy<Value = Scenario> {
    (any::<u64>(), shape()).prop_map(|(seed, shape)| tiny_instance(seed, shape))
}

/// Feasible plan driven by `picks`: cells are offered in id order and take
/// the next pick as "skip" (0) or a resolution.
fn plan_from(scn: &Scenario, cov: &CoverageSets, picks: &[u8]) -> LookPlan {
    let mut it = picks.iter().cycle();
    let mut looks = Vec::new();
    let mut low = vec![0u32; scn.num_cells()];
    for s in 1..=scn.num_swaths() {
        let mut used = 0.0;
        for &c in cov.for_swath(s) {
            let r = *it.next().unwrap() % (scn.num_resolutions() + 1);
            if r == 0 {
                continue;
            }
            let k = scn.cost(s, r).unwrap();
            let is_low = r < scn.cell(c).rmin;
            if used + k > 1.0 + 1e-9 || (is_low && low[c - 1] >= scn.params.maxlow) {
                continue;
            }
            used += k;
            low[c - 1] += u32::from(is_low);
            looks.push(Look::new(c, s, r));
        }
    }
    LookPlan::new(looks)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gaps_reset_on_look_and_increment_otherwise(
        scn in scenario(),
        picks in prop::collection::vec(0u8..3, 1..32),
    ) {
        let cov = coverage_sets(&scn).unwrap();
        let plan = plan_from(&scn, &cov, &picks);
        let looked = plan.look_matrix(scn.num_cells(), scn.num_swaths());
        for (c, g) in simulate_gaps(&scn, &plan).iter().enumerate() {
            prop_assert_eq!(g[0], 0);
            for s in 1..=scn.num_swaths() {
                prop_assert_eq!(g[s], if looked[c][s] { 0 } else { g[s - 1] + 1 });
                prop_assert!(g[s] <= s);
            }
        }
    }

    #[test]
    fn simulated_objective_equals_decoded_objective(
        scn in scenario(),
        picks in prop::collection::vec(0u8..3, 1..32),
    ) {
        let pen = precompute_pen(&scn).unwrap();
        let cov = coverage_sets(&scn).unwrap();
        let plan = plan_from(&scn, &cov, &picks);
        for opts in [BuildOptions::default(), BuildOptions::dense()] {
            let m = build_model(&scn, &pen, &cov, &opts).unwrap();
            let a = encode_plan(&m, &plan).unwrap();
            prop_assert!(check_feasible(&m, &a).is_ok());
            let d = decode_solution(&m, &a).unwrap();
            prop_assert_eq!(&d.plan, &plan);
            prop_assert_eq!(d.objective, objective_value(&scn, &pen, &plan));
        }
    }

    #[test]
    fn oracle_beats_every_feasible_plan(
        scn in scenario(),
        picks in prop::collection::vec(0u8..3, 1..32),
    ) {
        let pen = precompute_pen(&scn).unwrap();
        let cov = coverage_sets(&scn).unwrap();
        let exact = solve_exact(&scn, &pen, &cov, &SearchLimits::default()).unwrap();
        let other = plan_from(&scn, &cov, &picks);
        prop_assert!(exact.objective <= objective_value(&scn, &pen, &other) + 1e-9);
        let ws = objective_value(&scn, &pen, &LookPlan::default());
        prop_assert!(exact.objective <= ws);
    }

    #[test]
    fn oracle_plan_is_feasible_and_covers_at_least_greedy(scn in scenario()) {
        let pen = precompute_pen(&scn).unwrap();
        let cov = coverage_sets(&scn).unwrap();
        let exact = solve_exact(&scn, &pen, &cov, &SearchLimits::default()).unwrap();
        let rep = coverage_report(&scn, &pen, &cov, &exact.plan);
        let only_shortfall = rep
            .violations
            .iter()
            .all(|v| matches!(v, PlanViolation::Shortfall { .. }));
        prop_assert!(only_shortfall, "{:?}", rep.violations);
        let greedy = greedy_plan(&scn, &cov, scn.num_resolutions()).unwrap();
        let rg = coverage_report(&scn, &pen, &cov, &greedy);
        prop_assert!(rep.coverage_pct >= rg.coverage_pct);
    }

    #[test]
    fn sequential_and_parallel_oracle_agree(scn in scenario()) {
        let pen = precompute_pen(&scn).unwrap();
        let cov = coverage_sets(&scn).unwrap();
        let limits = SearchLimits::default();
        let a = solve_exact_with(&scn, &pen, &cov, &limits, Execution::Sequential).unwrap();
        let b = solve_exact_with(&scn, &pen, &cov, &limits, Execution::Parallel).unwrap();
        prop_assert_eq!(a.plan, b.plan);
        prop_assert_eq!(a.objective, b.objective);
    }

    #[test]
    fn warm_start_is_feasible_with_closed_form_value(scn in scenario()) {
        let pen = precompute_pen(&scn).unwrap();
        let cov = coverage_sets(&scn).unwrap();
        let m = build_model(&scn, &pen, &cov, &BuildOptions::default()).unwrap();
        let ws = warm_start(&m);
        prop_assert!(check_feasible(&m, &ws).is_ok());
        let closed = pen.never_looked_total() + scn.params.never * scn.num_cells() as f64;
        prop_assert!((m.objective_at(&ws) - closed).abs() <= 1e-9);
    }

    #[test]
    fn penalties_grow_with_gap(scn in scenario()) {
        let pen = precompute_pen(&scn).unwrap();
        for c in 1..=scn.num_cells() {
            for s in 1..=scn.num_swaths() {
                prop_assert_eq!(pen.get(c, s, 0), 0.0);
                for g in 1..=s {
                    prop_assert!(pen.get(c, s, g) >= pen.get(c, s, g - 1));
                }
            }
        }
    }

    #[test]
    fn curves_are_nondecreasing_and_hit_breakpoints(
        steps in prop::collection::vec((0.5f64..20.0, 0.0f64..3.0), 1..6),
        probes in prop::collection::vec(0.0f64..200.0, 1..20),
    ) {
        let mut t = 0.0;
        let mut p = 0.0;
        let mut bp = vec![(0.0, 0.0)];
        for (dt, dp) in steps {
            t += dt;
            p += dp;
            bp.push((t, p));
        }
        let curve = PenaltyCurve::new(bp.clone());
        for &(t, p) in &bp {
            prop_assert_eq!(eval_curve(&curve, t).unwrap(), p);
        }
        let mut xs = probes;
        xs.sort_by(f64::total_cmp);
        let vals: Vec<f64> = xs.iter().map(|&x| eval_curve(&curve, x).unwrap()).collect();
        for w in vals.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12);
        }
    }
}
