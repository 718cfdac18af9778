//! End-to-end library flows through files on disk.

use lom::evaluate::{compare, coverage_report, EvalReport};
use lom::generator::{generate, GenSpec};
use lom::geometry::coverage_sets;
use lom::heuristic::greedy_plan;
use lom::model::{
    build_model, decode_solution, export, export_warm_start, import_solution, parse_lp, parse_mps,
    warm_start, BuildOptions, ExportFormat,
};
use lom::oracle::{solve_exact, SearchLimits};
use lom::scenario::{precompute_pen, validate};
use lom::{Error, LookPlan, Scenario};

#[test]
fn scenario_and_plan_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let scn = generate(&GenSpec::desk(2)).unwrap();
    let path = dir.path().join("s.json");
    scn.save(&path).unwrap();
    let back = Scenario::load_valid(&path).unwrap();
    assert_eq!(back, scn);
    assert_eq!(back.fingerprint(), scn.fingerprint());

    let cov = coverage_sets(&scn).unwrap();
    let plan = greedy_plan(&scn, &cov, 1).unwrap();
    let ppath = dir.path().join("p.json");
    plan.save(&ppath).unwrap();
    assert_eq!(LookPlan::load(&ppath).unwrap(), plan);
}

#[test]
fn invalid_scenario_lists_every_problem() {
    let mut scn = generate(&GenSpec::desk(2)).unwrap();
    scn.cells[0].rmin = 9;
    scn.swaths[1].sensor_id = "nope".into();
    scn.params.never = -1.0;
    let errs = validate(&scn).unwrap_err();
    assert_eq!(errs.len(), 3, "{errs:?}");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    scn.save(&path).unwrap();
    assert!(matches!(Scenario::load_valid(&path), Err(Error::InvalidScenario(v)) if v.len() == 3));
}

#[test]
fn greedy_at_or_above_rmin_has_no_violations_beyond_coverage() {
    for seed in 0..10 {
        let mut spec = GenSpec::desk(seed);
        spec.rmin = 1;
        let scn = generate(&spec).unwrap();
        let pen = precompute_pen(&scn).unwrap();
        let cov = coverage_sets(&scn).unwrap();
        for r in 1..=2 {
            let rep = coverage_report(&scn, &pen, &cov, &greedy_plan(&scn, &cov, r).unwrap());
            assert!(
                rep.violations
                    .iter()
                    .all(|v| matches!(v, lom::evaluate::PlanViolation::Shortfall { .. })),
                "{:?}",
                rep.violations
            );
        }
    }
}

#[test]
fn exported_models_reparse_and_accept_the_warm_start() {
    let dir = tempfile::tempdir().unwrap();
    let scn = generate(&GenSpec::desk(5)).unwrap();
    let pen = precompute_pen(&scn).unwrap();
    let cov = coverage_sets(&scn).unwrap();
    let m = build_model(&scn, &pen, &cov, &BuildOptions::default()).unwrap();
    let mps = dir.path().join("m.mps");
    let lp = dir.path().join("m.lp");
    export(&m, ExportFormat::Mps, &mps).unwrap();
    export(&m, ExportFormat::Lp, &lp).unwrap();
    let pm = parse_mps(&std::fs::read_to_string(&mps).unwrap()).unwrap();
    let pl = parse_lp(&std::fs::read_to_string(&lp).unwrap()).unwrap();
    assert_eq!(pm.columns.len(), pl.columns.len());
    assert_eq!(pm.rows.len(), pl.rows.len());

    let ws = dir.path().join("ws.txt");
    export_warm_start(&m, &warm_start(&m), &ws).unwrap();
    let a = import_solution(&m, &ws).unwrap();
    let values = a.values.iter().map(|(v, &x)| (v.to_string(), x)).collect();
    assert!(pm.violations(&values, 1e-6).is_empty());
    assert!(pl.violations(&values, 1e-6).is_empty());
    let d = decode_solution(&m, &a).unwrap();
    assert!(d.plan.is_empty());
    assert!((pm.objective_value(&values) - d.objective).abs() < 1e-9);
}

#[test]
fn exact_versus_greedy_reports_compare() {
    let dir = tempfile::tempdir().unwrap();
    let scn = generate(&GenSpec::desk(4)).unwrap();
    let pen = precompute_pen(&scn).unwrap();
    let cov = coverage_sets(&scn).unwrap();
    let exact = solve_exact(&scn, &pen, &cov, &SearchLimits::default()).unwrap();
    let greedy = greedy_plan(&scn, &cov, 1).unwrap();
    let a = coverage_report(&scn, &pen, &cov, &exact.plan);
    let b = coverage_report(&scn, &pen, &cov, &greedy);
    let path = dir.path().join("a.json");
    std::fs::write(&path, a.to_json()).unwrap();
    assert_eq!(EvalReport::load(&path).unwrap(), a);
    let cmp = compare(&a, &b).unwrap();
    assert!(cmp.coverage_delta >= 0.0);
    assert!(a.objective <= b.objective);
}

#[test]
fn base_case_builds_sparse() {
    let scn = generate(&GenSpec::base_case(0)).unwrap();
    let pen = precompute_pen(&scn).unwrap();
    let cov = coverage_sets(&scn).unwrap();
    let m = build_model(&scn, &pen, &cov, &BuildOptions::default()).unwrap();
    let (_, y, g, z) = m.variable_counts();
    let (c, s) = (1415, 34);
    assert_eq!(z, c);
    assert_eq!(g, c * (s + 1));
    assert_eq!(y, c * (s * (s + 3) / 2));
}
