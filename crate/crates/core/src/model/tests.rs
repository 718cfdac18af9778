use super::*;
use crate::evaluate::objective_value;
use crate::fixtures;
use crate::generator::{tiny_instance, TinyShape};
use crate::geometry::{coverage_sets, CoverageSets};
use crate::oracle::{solve_exact, SearchLimits};
use crate::scenario::{precompute_pen, Footprint};

fn parts(scn: &Scenario) -> (PenaltyTable, CoverageSets) {
    (precompute_pen(scn).unwrap(), coverage_sets(scn).unwrap())
}

/// One cell, one swath, one usable resolution.
fn single() -> Scenario {
    let mut scn = fixtures::three_cell_scenario();
    scn.cells.truncate(1);
    scn.swaths.truncate(1);
    scn.swaths[0].footprint = Footprint::Cells(vec![1]);
    scn.params.resolutions = 1;
    scn
}

fn sparse(scn: &Scenario) -> ModelInstance {
    let (pen, cov) = parts(scn);
    build_model(scn, &pen, &cov, &BuildOptions::default()).unwrap()
}

#[test]
fn single_cell_single_swath_sparse() {
    let m = sparse(&single());
    let names: Vec<String> = m.variables.iter().map(|v| v.var.to_string()).collect();
    assert_eq!(
        names,
        ["X_1_1_1", "Y_1_1_0", "Y_1_1_1", "G_1_0", "G_1_1", "Z_1"]
    );
    let tags: Vec<&str> = m.rows.iter().map(|r| r.tag.as_str()).collect();
    // rmin = 1: no row caps low-resolution looks
    assert_eq!(tags, ["eq2", "eq3", "eq4", "eq5", "eq6", "fix11"]);
    let eq4 = &m.rows[2];
    assert_eq!(eq4.sense, Sense::Le);
    assert_eq!(eq4.rhs, -1.0);
    assert_eq!(m.big_m, 1.0);
    let eq6 = m.rows_tagged(RowTag::Eq6).next().unwrap();
    assert_eq!(eq6.terms, vec![(0, 0.01)]);
}

#[test]
fn single_cell_optimum_is_the_look() {
    let scn = single();
    let m = sparse(&scn);
    let (pen, _) = parts(&scn);
    let plan = LookPlan::new(vec![Look::new(1, 1, 1)]);
    let d = decode_solution(&m, &encode_plan(&m, &plan).unwrap()).unwrap();
    assert_eq!(d.objective, 0.0);
    let ws = decode_solution(&m, &warm_start(&m)).unwrap();
    assert_eq!(ws.objective, pen.get(1, 1, 1) + scn.params.never);
}

#[test]
fn big_m_forces_gap_increment_without_look() {
    let scn = single();
    let m = sparse(&scn);
    let mut a = warm_start(&m);
    // claim a reset without a look
    a.set(Var::G { c: 1, s: 1 }, 0.0);
    a.set(Var::Y { c: 1, s: 1, g: 0 }, 1.0);
    a.set(Var::Y { c: 1, s: 1, g: 1 }, 0.0);
    let v = check_feasible(&m, &a).unwrap_err();
    assert!(v.iter().any(|x| x.tag == "eq4"), "{v:?}");
}

#[test]
fn uncoverable_cell_has_no_look_variables() {
    let mut scn = fixtures::three_cell_scenario();
    for s in &mut scn.swaths {
        s.footprint = Footprint::Cells(vec![1, 2]);
    }
    let m = sparse(&scn);
    assert!(!m
        .variables
        .iter()
        .any(|v| matches!(v.var, Var::X { c: 3, .. })));
    // eq5 for cell 3 reduces to Z >= 1
    let eq5 = m.rows.iter().find(|r| r.name == "eq5_3").unwrap();
    assert_eq!(eq5.terms.len(), 1);
    let d = decode_solution(&m, &warm_start(&m)).unwrap();
    assert_eq!(d.never_penalty, 3.0 * scn.params.never);
}

#[test]
fn sparse_x_only_for_usable_resolutions() {
    // electro-optical: resolutions 2, 3 and 5 are unlisted
    let m = sparse(&fixtures::three_cell_scenario());
    let rs: std::collections::BTreeSet<u8> = m
        .variables
        .iter()
        .filter_map(|v| match v.var {
            Var::X { r, .. } => Some(r),
            _ => None,
        })
        .collect();
    assert_eq!(rs.into_iter().collect::<Vec<_>>(), [1, 4]);
}

#[test]
fn dense_counts_for_fixture() {
    let scn = fixtures::three_cell_scenario();
    let (pen, cov) = parts(&scn);
    let m = build_model(&scn, &pen, &cov, &BuildOptions::dense()).unwrap();
    let (c, s, r) = (3, 2, 5);
    assert_eq!(
        m.variable_counts(),
        (c * (s + 1) * r, c * (s + 1) * (s + 1), c * (s + 1), c)
    );
    let counts = m.row_counts();
    assert_eq!(counts[&RowTag::Fix8], c * r);
    assert_eq!(counts[&RowTag::Fix9], c * s * (s + 1) / 2);
    // three of five resolutions unusable on every swath
    assert_eq!(counts[&RowTag::FixUnavailable], c * s * 3);
}

#[test]
fn unsupported_gap_range_is_an_error() {
    let scn = fixtures::three_cell_scenario();
    let (pen, cov) = parts(&scn);
    let opts = BuildOptions {
        gap_levels: Some(1),
        ..BuildOptions::default()
    };
    assert!(matches!(
        build_model(&scn, &pen, &cov, &opts),
        Err(Error::UnsupportedGapRange {
            requested: 1,
            swaths: 2
        })
    ));
    let mut empty = scn.clone();
    empty.swaths.clear();
    let (pen, cov) = parts(&empty);
    assert!(matches!(
        build_model(&empty, &pen, &cov, &BuildOptions::default()),
        Err(Error::NoSwaths)
    ));
}

/// One cell, two swaths at 1 h and 2 h, penalty dt / 5 and never = 10:
/// warm start costs 0.2 + 0.4 + 10.
#[test]
fn warm_start_worked_example() {
    let mut scn = fixtures::three_cell_scenario();
    scn.cells.truncate(1);
    scn.curves.insert(
        "cell1".into(),
        crate::scenario::PenaltyCurve::new(vec![(0.0, 0.0), (5.0, 1.0)]),
    );
    scn.swaths[0].time = 1.0;
    scn.swaths[1].time = 2.0;
    for s in &mut scn.swaths {
        s.footprint = Footprint::Cells(vec![1]);
    }
    scn.params.never = 10.0;
    let m = sparse(&scn);
    let ws = warm_start(&m);
    assert!(check_feasible(&m, &ws).is_ok());
    let d = decode_solution(&m, &ws).unwrap();
    assert!((d.objective - 10.6).abs() < 1e-12);
    assert_eq!(d.gaps, vec![vec![0, 1, 2]]);
    assert!(d.plan.is_empty());
}

#[test]
fn warm_start_matches_closed_form() {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
    for seed in 0..20 {
        let scn = tiny_instance(seed, TinyShape::random(&mut rng));
        let (pen, cov) = parts(&scn);
        for opts in [BuildOptions::default(), BuildOptions::dense()] {
            let m = build_model(&scn, &pen, &cov, &opts).unwrap();
            let ws = warm_start(&m);
            check_feasible(&m, &ws).unwrap();
            let closed = pen.never_looked_total() + scn.params.never * scn.num_cells() as f64;
            assert!((m.objective_at(&ws) - closed).abs() < 1e-9);
        }
    }
}

#[test]
fn check_feasible_flags_perturbations() {
    let scn = fixtures::three_cell_scenario();
    let m = sparse(&scn);
    let mut a = warm_start(&m);
    a.set(Var::X { c: 1, s: 1, r: 1 }, 0.5);
    let v = check_feasible(&m, &a).unwrap_err();
    assert!(v
        .iter()
        .any(|x| x.tag == "integrality" && x.name == "X_1_1_1"));

    let mut a = warm_start(&m);
    a.set(Var::Y { c: 2, s: 2, g: 1 }, 1.0);
    let v = check_feasible(&m, &a).unwrap_err();
    assert!(v.iter().any(|x| x.name == "eq3_2_2"));

    let mut a = warm_start(&m);
    a.set(Var::Z { c: 1 }, 1.5);
    let v = check_feasible(&m, &a).unwrap_err();
    assert!(v.iter().any(|x| x.tag == "bound"));
    assert!(matches!(decode_solution(&m, &a), Err(Error::Infeasible(_))));
}

#[test]
fn budget_row_rejects_overfull_swath() {
    let mut scn = fixtures::three_cell_scenario();
    scn.sensors
        .get_mut("eo")
        .unwrap()
        .budget_rows
        .get_mut(&4)
        .unwrap()
        .look_budget = 2.0;
    let m = sparse(&scn);
    let plan = LookPlan::new((1..=3).map(|c| Look::new(c, 1, 4)).collect());
    let v = check_feasible(&m, &encode_plan(&m, &plan).unwrap()).unwrap_err();
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].name, "eq6_1");
    assert!((v[0].lhs - 1.5).abs() < 1e-12);
}

#[test]
fn maxlow_row_caps_low_resolution_looks() {
    let mut scn = fixtures::three_cell_scenario();
    scn.cells[0].rmin = 4;
    scn.params.maxlow = 1;
    let m = sparse(&scn);
    let eq7 = m.rows.iter().find(|r| r.name == "eq7_1").unwrap();
    assert_eq!(eq7.rhs, 1.0);
    let twice = LookPlan::new(vec![Look::new(1, 1, 1), Look::new(1, 2, 1)]);
    let v = check_feasible(&m, &encode_plan(&m, &twice).unwrap()).unwrap_err();
    assert_eq!(v[0].name, "eq7_1");
    let once = LookPlan::new(vec![Look::new(1, 1, 1), Look::new(1, 2, 4)]);
    assert!(check_feasible(&m, &encode_plan(&m, &once).unwrap()).is_ok());
}

#[test]
fn encode_rejects_missing_look_variable() {
    let m = sparse(&fixtures::three_cell_scenario());
    let plan = LookPlan::new(vec![Look::new(1, 1, 2)]);
    assert!(matches!(encode_plan(&m, &plan), Err(Error::UnknownVariable(n)) if n == "X_1_1_2"));
}

#[test]
fn decode_round_trips_plans() {
    let scn = fixtures::three_cell_scenario();
    let (pen, _) = parts(&scn);
    let m = sparse(&scn);
    let plan = LookPlan::new(vec![
        Look::new(2, 1, 1),
        Look::new(3, 2, 4),
        Look::new(1, 2, 1),
    ]);
    let d = decode_solution(&m, &encode_plan(&m, &plan).unwrap()).unwrap();
    assert_eq!(d.plan, plan);
    assert_eq!(d.objective, objective_value(&scn, &pen, &plan));
    assert_eq!(d.gaps[1], vec![0, 0, 1]);
}

#[test]
fn oracle_plan_is_milp_feasible_with_equal_objective() {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(2);
    for seed in 0..30 {
        let shape = TinyShape {
            cells: 2,
            swaths: 2,
            ..TinyShape::random(&mut rng)
        };
        let scn = tiny_instance(seed, shape);
        let (pen, cov) = parts(&scn);
        let exact = solve_exact(&scn, &pen, &cov, &SearchLimits::default()).unwrap();
        for opts in [BuildOptions::default(), BuildOptions::dense()] {
            let m = build_model(&scn, &pen, &cov, &opts).unwrap();
            let d = decode_solution(&m, &encode_plan(&m, &exact.plan).unwrap()).unwrap();
            assert_eq!(d.objective, exact.objective, "seed {seed}");
        }
    }
}

#[test]
fn round_penalties_half_to_even() {
    let pen = PenaltyTable::from_fn(1, 2, |_, s, g| match (s, g) {
        (1, 1) => 0.5,
        (2, 1) => 1.5,
        (2, 2) => 2.5,
        _ => 0.0,
    });
    let r = round_penalties(&pen, 0);
    assert_eq!(
        (r.get(1, 1, 1), r.get(1, 2, 1), r.get(1, 2, 2)),
        (0.0, 2.0, 2.0)
    );
    let pen = PenaltyTable::from_fn(1, 1, |_, _, g| if g == 1 { 0.123_456_789 } else { 0.0 });
    assert_eq!(round_penalties(&pen, 6).get(1, 1, 1), 0.123457);
}

#[test]
fn exports_are_deterministic_and_reparse() {
    let scn = fixtures::three_cell_scenario();
    for opts in [BuildOptions::default(), BuildOptions::dense()] {
        let (pen, cov) = parts(&scn);
        let m = build_model(&scn, &pen, &cov, &opts).unwrap();
        let m2 = build_model_with(&scn, &pen, &cov, &opts, Execution::Sequential).unwrap();
        assert_eq!(write_mps(&m), write_mps(&m2));
        assert_eq!(write_lp(&m), write_lp(&m2));
        for parsed in [
            parse_mps(&write_mps(&m)).unwrap(),
            parse_lp(&write_lp(&m)).unwrap(),
        ] {
            assert_eq!(parsed.columns.len(), m.num_variables());
            assert_eq!(parsed.rows.len(), m.num_rows());
            let ints = parsed.columns.iter().filter(|c| c.integer).count();
            let bins = m
                .variables
                .iter()
                .filter(|v| v.kind == VarKind::Binary)
                .count();
            assert_eq!(ints, bins);
        }
    }
}

#[test]
fn reparsed_model_agrees_on_objective_and_feasibility() {
    let scn = fixtures::three_cell_scenario();
    let m = sparse(&scn);
    let plan = LookPlan::new(vec![Look::new(2, 1, 1), Look::new(3, 2, 4)]);
    let a = encode_plan(&m, &plan).unwrap();
    let values: HashMap<String, f64> = a.values.iter().map(|(v, &x)| (v.to_string(), x)).collect();
    for parsed in [
        parse_mps(&write_mps(&m)).unwrap(),
        parse_lp(&write_lp(&m)).unwrap(),
    ] {
        assert!(parsed.violations(&values, FEAS_TOL).is_empty());
        assert!((parsed.objective_value(&values) - m.objective_at(&a)).abs() < 1e-9);
    }
}

#[test]
fn warm_start_file_round_trip() {
    let scn = fixtures::three_cell_scenario();
    let m = sparse(&scn);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ws.txt");
    let ws = warm_start(&m);
    export_warm_start(&m, &ws, &path).unwrap();
    let back = import_solution(&m, &path).unwrap();
    assert_eq!(back, ws);

    let mut partial = ws.clone();
    partial.values.remove(&Var::Z { c: 1 });
    assert!(matches!(
        export_warm_start(&m, &partial, &path),
        Err(Error::MissingVariable(n)) if n == "Z_1"
    ));
    std::fs::write(&path, "X_9_9_9 1\n").unwrap();
    assert!(matches!(
        import_solution(&m, &path),
        Err(Error::UnknownVariable(_))
    ));
    std::fs::write(&path, "Z_1 one\n").unwrap();
    assert!(matches!(
        import_solution(&m, &path),
        Err(Error::Parse { line: 1, .. })
    ));
}

#[test]
fn var_names_parse_back() {
    for v in [
        Var::X { c: 12, s: 3, r: 4 },
        Var::Y { c: 1, s: 0, g: 0 },
        Var::G { c: 7, s: 16 },
        Var::Z { c: 100 },
    ] {
        assert_eq!(v.to_string().parse::<Var>().unwrap(), v);
    }
    assert!("X_1_2".parse::<Var>().is_err());
    assert!("W_1".parse::<Var>().is_err());
    assert_eq!(
        RowTag::from_name("fixna_1_2_3"),
        Some(RowTag::FixUnavailable)
    );
}

#[test]
fn decode_keeps_highest_resolution_per_swath() {
    let mut scn = fixtures::three_cell_scenario();
    for sensor in scn.sensors.values_mut() {
        *sensor =
            crate::scenario::Sensor::with_default_budgets("eo", crate::scenario::SensorKind::Sar);
    }
    scn.params.resolutions = 2;
    let m = sparse(&scn);
    let plan = LookPlan::new(vec![
        Look::new(1, 1, 1),
        Look::new(1, 1, 2),
        Look::new(2, 2, 1),
    ]);
    let a = encode_plan(&m, &plan).unwrap();
    let d = decode_solution(&m, &a).unwrap();
    assert_eq!(d.collapsed, 1);
    assert_eq!(d.plan.looks, vec![Look::new(1, 1, 2), Look::new(2, 2, 1)]);
    assert_eq!(d.objective, m.objective_at(&a));
}
