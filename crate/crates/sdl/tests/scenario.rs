use sdl::scenario::{convergence_study, run, Outcome, Scenario};

fn scenario(kind: &str, params: &str, seed: u64, trials: usize) -> Scenario {
    Scenario::from_json(&format!(
        r#"{{"schema_version": 1, "kind": "{kind}", "params": {params}, "seed": {seed}, "trials": {trials}}}"#
    ))
    .unwrap()
}

#[test]
fn identical_scenarios_give_identical_reports() {
    let cases = [
        scenario("von_neumann", r#"{"max_dim": 4, "polynomials": 20}"#, 5, 8),
        scenario("realness", r#"{"m": 64, "fit_radius": 0.3}"#, 5, 6),
        scenario("riesz_decomposition", r#"{"max_dim": 5, "normal_trials": 2, "similarity_demo": false}"#, 5, 4),
        scenario("measure_decomposition", r#"{"m": 64, "tests": 4}"#, 5, 3),
        scenario("np_reconstruct", r#"{"ladder": [128, 256], "dim": 3}"#, 5, 3),
    ];
    for s in &cases {
        let a = run(s).unwrap().to_json().unwrap();
        let b = run(s).unwrap().to_json().unwrap();
        assert_eq!(a, b, "{:?}", s.kind);
        let c = run(&Scenario { seed: 6, ..s.clone() }).unwrap().to_json().unwrap();
        assert_ne!(a, c, "{:?}", s.kind);
    }
}

#[test]
fn trial_results_do_not_depend_on_the_batch() {
    let small = run(&scenario("hull_identity", r#"{"m": 90}"#, 17, 3)).unwrap();
    let large = run(&scenario("hull_identity", r#"{"m": 90}"#, 17, 9)).unwrap();
    assert_eq!(small.trials[..], large.trials[..3]);
}

#[test]
fn failing_trials_do_not_abort_the_batch() {
    // at M = 64 the margin rule rejects operators whose numerical range is wide
    let s = scenario(
        "np_reconstruct",
        r#"{"curve": {"kind": "disc", "params": {"center": [0, 0], "radius": 1}}, "dim": 3,
            "fit": {"norm": 0.97}, "ladder": [64], "jordan": true, "negative_control": false}"#,
        2,
        12,
    );
    let r = run(&s).unwrap();
    assert_eq!(r.trials.len(), 12);
    let errors: Vec<_> = r.trials.iter().filter(|t| t.is_error()).collect();
    assert!(!errors.is_empty() && errors.len() < 12, "{} errors", errors.len());
    for t in &errors {
        let Outcome::Error { error, message } = &t.outcome else { unreachable!() };
        assert_eq!(error, "RegionViolation");
        assert!(!message.is_empty());
    }
    assert_eq!(r.aggregates["errored_trials"], errors.len() as f64);
    assert!(!r.passed);
}

#[test]
fn every_check_cites_a_criterion() {
    let r = run(&scenario("riesz_decomposition", r#"{"max_dim": 4, "normal_trials": 1}"#, 1, 2)).unwrap();
    assert!(r.checks.iter().all(|c| c.id.starts_with("AC-")));
    assert!(r.checks.iter().any(|c| c.id == "AC-10"));
    assert_eq!(r.passed, r.checks.iter().all(|c| c.passed));
}

#[test]
fn riesz_quadrature_gains_a_decade_per_doubling() {
    let s = scenario("riesz_decomposition", r#"{"max_dim": 6, "gap": 0.2, "normal_trials": 0, "similarity_demo": false}"#, 3, 5);
    let r = convergence_study(&s, "nodes", &[64.0, 128.0, 256.0, 512.0]).unwrap();
    let t = &r.convergence[0];
    for (i, ratio) in t.decay_ratios.iter().enumerate() {
        let next = t.rows[i + 1].residual;
        assert!(*ratio >= 10.0 || next <= 1e-13, "{:?}", t.rows);
    }
    assert!(t.rows[0].residual > 1e-12, "no visible quadrature error: {:?}", t.rows);
}

#[test]
fn reconstruction_error_decays_along_the_m_ladder() {
    let s = scenario(
        "np_reconstruct",
        r#"{"curve": {"kind": "disc", "params": {"center": [0, 0], "radius": 1}}, "dim": 3,
            "fit": {"norm": 0.8}, "ladder": [32, 64, 128, 256], "jordan": false, "negative_control": false}"#,
        4,
        4,
    );
    let r = run(&s).unwrap();
    let rows = &r.convergence[0].rows;
    assert!(rows[0].residual > 1e-10, "{rows:?}");
    for w in rows.windows(2) {
        assert!(w[1].residual <= w[0].residual / 2.0 || w[1].residual < 1e-11, "{rows:?}");
    }
}

#[test]
fn gleason_ladder_is_non_decreasing() {
    let s = scenario(
        "gleason_distance",
        r#"{"cases": [{"domain": "two_discs", "x1": [0, 0], "x2": [5, 0]}], "restarts": 2, "phases": 4, "iterations": 120}"#,
        0,
        1,
    );
    let r = convergence_study(&s, "degree", &[2.0, 4.0, 8.0]).unwrap();
    let rows = &r.convergence[0].rows;
    assert_eq!(rows.len(), 3);
    for w in rows.windows(2) {
        assert!(w[1].residual >= w[0].residual);
    }
}
