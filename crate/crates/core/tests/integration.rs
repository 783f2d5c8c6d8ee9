use fcbio::data::{load_dataset, parse_csv, parse_libsvm, synthetic_logistic, DataFormat};
use fcbio::driver::{certify, fc_bio, write_trace_csv, BudgetPolicy, SolverOptions, TRACE_HEADER};
use fcbio::problems::{make_logistic_problem, make_lower_bound_instance, make_min_norm_problem, Level};
use fcbio::verify::{min_norm_ground_truth, monitor_zero_respecting, run_suite, Suite};
use fcbio::{Error, Setting, Tolerances, Vector};

#[test]
fn libsvm_line_fills_dense_row() {
    let d = parse_libsvm("+1 3:0.5\n", Some(4)).unwrap();
    assert_eq!(d.a.row(0).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0, 0.5, 0.0]);
    assert_eq!(d.b[0], 1.0);
}

#[test]
fn csv_without_label_column() {
    let d = parse_csv("2,2\n1,0\n0,1").unwrap();
    assert_eq!(d.a, nalgebra::DMatrix::identity(2, 2));
}

#[test]
fn duplicated_libsvm_index_reports_line() {
    match parse_libsvm("+1 1:1\n-1 2:0.5 2:0.25\n", None) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn logistic_rejects_non_binary_labels() {
    let d = parse_libsvm("+1 1:1\n2 1:0.5\n", None).unwrap();
    assert!(matches!(make_logistic_problem(&d, &d, 1.0), Err(Error::InvalidData(_))));
}

#[test]
fn loads_from_disk_in_both_formats() {
    let dir = std::env::temp_dir().join(format!("fcbio-it-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (train, _) = synthetic_logistic(12, 5, 3).unwrap();
    let csv = dir.join("d.csv");
    let svm = dir.join("d.libsvm");
    std::fs::write(&csv, train.to_csv()).unwrap();
    std::fs::write(&svm, train.to_libsvm()).unwrap();
    let a = load_dataset(&csv, DataFormat::Csv).unwrap();
    let b = load_dataset(&svm, DataFormat::Libsvm).unwrap();
    assert_eq!(a.a, train.a);
    assert_eq!(b.a, train.a);
    assert_eq!(a.b, b.b);
    assert!(matches!(load_dataset(dir.join("missing.csv"), DataFormat::Csv), Err(Error::Io(_))));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn every_verify_suite_passes() {
    let results = run_suite(Suite::All);
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).map(|r| format!("{}: {}", r.name, r.detail)).collect();
    assert!(failed.is_empty(), "{failed:?}");
    for s in Suite::NAMES {
        assert!(s.parse::<Suite>().is_ok());
    }
}

#[test]
fn solver_is_zero_respecting_on_chains() {
    for setting in [Setting::Smooth, Setting::Lipschitz] {
        for level in [Level::Upper, Level::Lower] {
            let inst = make_lower_bound_instance(setting, level, 12, 1.0, 1.0).unwrap();
            let (problem, ledger) = monitor_zero_respecting(&inst.problem);
            fc_bio(&problem, Tolerances::uniform(0.05).unwrap(), &SolverOptions::default()).unwrap();
            assert!(!ledger.is_empty());
            assert!(ledger.violations().is_empty(), "{setting:?} {level:?}");
        }
    }
}

#[test]
fn min_norm_small_instance_is_certified_under_every_budget_mode() {
    let data = fcbio::data::synthetic_min_norm(8, 16, 3).unwrap();
    let (_, f_star) = min_norm_ground_truth(&data).unwrap();
    let tol = Tolerances::uniform(1e-4).unwrap();
    let certified = {
        let p = make_min_norm_problem(&data, 2.0).unwrap();
        fc_bio(&p, tol, &SolverOptions::default()).unwrap()
    };
    assert!(certify(&certified, Some((f_star, 0.0))).certified);
    let total = certified.per_round * certified.planned_rounds;
    for budget in [BudgetPolicy::FixedTotal(total), BudgetPolicy::PerRound(certified.per_round)] {
        let p = make_min_norm_problem(&data, 2.0).unwrap();
        let r = fc_bio(&p, tol, &SolverOptions::with_budget(budget)).unwrap();
        assert_eq!(r.per_round, certified.per_round);
        assert!(certify(&r, Some((f_star, 0.0))).certified);
    }
}

#[test]
fn trace_is_deterministic_apart_from_wall_time() {
    let run = || {
        let data = fcbio::data::synthetic_min_norm(5, 9, 21).unwrap();
        let p = make_min_norm_problem(&data, 1.0).unwrap();
        let options = SolverOptions { trace_every: 25, ..Default::default() };
        let r = fc_bio(&p, Tolerances::uniform(1e-3).unwrap(), &options).unwrap();
        let mut out = Vec::new();
        write_trace_csv(&r.trace, &mut out).unwrap();
        String::from_utf8(out).unwrap()
    };
    let strip = |s: String| s.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect::<Vec<_>>();
    let (a, b) = (run(), run());
    assert_eq!(a.lines().next().unwrap(), TRACE_HEADER);
    assert_eq!(strip(a), strip(b));
}

#[test]
fn logistic_trace_starts_at_log_two() {
    let (train, val) = synthetic_logistic(30, 6, 1).unwrap();
    let p = make_logistic_problem(&train, &val, 5.0).unwrap();
    let r = fc_bio(&p, Tolerances::uniform(1e-2).unwrap(), &SolverOptions::default()).unwrap();
    let first = &r.trace[0];
    assert_eq!(first.outer_iter, -1);
    assert!((first.f - std::f64::consts::LN_2).abs() < 1e-12);
    assert!((first.g - std::f64::consts::LN_2).abs() < 1e-12);
    assert!(r.solution.norm() <= 5.0 + 1e-10);
    assert_eq!(p.start, Vector::zeros(6));
}
