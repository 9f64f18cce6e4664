use std::f64::consts::PI;

use limitscout::analyzer::{analyze, path_limit, refute, AnalyzerConfig, PowerCurveParams, RefuteOutcome, VerdictKind};
use limitscout::corpus::{cases, run_corpus};
use limitscout::expr::Expression;
use limitscout::geometry::{distance, Center};
use limitscout::paths::{Branch, PathSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(src: &str, at: &[f64]) -> (Expression, Center) {
    (Expression::parse(src, at.len()).unwrap(), Center::new(at.to_vec()).unwrap())
}

#[test]
fn corpus_classifies_every_case() {
    let report = run_corpus(42).unwrap();
    for row in &report.rows {
        assert!(row.matched, "{} gave {:?} {:?}", row.name, row.verdict, row.limit);
    }
    assert_eq!(report.rows.len(), cases().len());
}

#[test]
fn same_seed_same_verdict() {
    let (f, c) = setup("sin(1/(x^2+y^2))", &[0.0, 0.0]);
    let cfg = AnalyzerConfig { seed: 7, ..AnalyzerConfig::default() };
    let a = serde_json::to_string(&analyze(&f, &c, &cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&analyze(&f, &c, &cfg).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn adding_probes_never_loses_a_no_limit() {
    // parabola case: the rays-only run has no evidence; adding the curve y = x^2 must find it
    let (f, c) = setup("x^2*y/(x^4+y^2)", &[0.0, 0.0]);
    let mut cfg = AnalyzerConfig::rays_only();
    cfg.budget = 2_000;
    let small = analyze(&f, &c, &cfg).unwrap();
    assert_ne!(small.verdict, VerdictKind::NoLimit);
    cfg.power_curve_grid.push(PowerCurveParams { c: 1.0, m: 2, n: 1, branch: Branch::Positive });
    let big = analyze(&f, &c, &cfg).unwrap();
    assert_eq!(big.verdict, VerdictKind::NoLimit);

    // and once NO_LIMIT, more probes keep it
    let (g, _) = setup("x*y/(x^2+y^2)", &[0.0, 0.0]);
    let mut cfg = AnalyzerConfig::rays_only();
    for extra in [0usize, 10, 60] {
        cfg.power_curve_grid = limitscout::analyzer::default_power_grid().into_iter().take(extra).collect();
        assert_eq!(analyze(&g, &c, &cfg).unwrap().verdict, VerdictKind::NoLimit);
    }
}

#[test]
fn limit_exists_agrees_with_every_converged_probe() {
    for (src, at) in [("x^2*y/(x^2+y^2)", vec![0.0, 0.0]), ("sin(x^2+y^2)/(x^2+y^2)", vec![0.0, 0.0]), ("x+y", vec![1.0, 2.0])] {
        let (f, c) = setup(src, &at);
        let v = analyze(&f, &c, &AnalyzerConfig::default()).unwrap();
        assert_eq!(v.verdict, VerdictKind::LimitExists, "{src}");
        let l = v.limit.unwrap();
        for p in v.probes.iter().filter_map(|p| p.limit()) {
            assert!((p - l).abs() <= 10.0 * v.config.tol, "{src}: probe {p} vs {l}");
        }
        assert!(v.note.starts_with("heuristic"));
    }
}

#[test]
fn no_limit_always_carries_a_witness() {
    for case in cases() {
        let v = case.run(42).unwrap();
        if v.verdict == VerdictKind::NoLimit {
            assert!(!v.witnesses.is_empty() || v.refutation.is_some(), "{}", case.name);
        }
    }
}

#[test]
fn refutation_samples_are_genuine_violations() {
    // the parabola's violating set is an angular band of width ~r, so random
    // search only reaches a dozen shells there
    for (src, at, target, count) in [
        ("(x^2-y^2)/(x^2+y^2)", vec![0.0, 0.0], 0.0, 24),
        ("x*y/(x^2+y^2)", vec![0.5, -1.0], 0.3, 24),
        ("x*y*z/(x^2+y^2+z^2)^(3/2)", vec![0.0, 0.0, 0.0], 0.0, 24),
        ("x^2*y/(x^4+y^2)", vec![0.0, 0.0], 0.0, 12),
    ] {
        let (f, c) = setup(src, &at);
        let cfg = AnalyzerConfig { epsilon_refute: Some(0.05), refute_count: count, ..AnalyzerConfig::default() };
        let RefuteOutcome::Refuted(r) = refute(&f, &c, target, &cfg).unwrap() else {
            panic!("{src} should be refuted");
        };
        let mut prev = f64::INFINITY;
        for (k, s) in r.samples.iter().enumerate() {
            let v = f.evaluate(&s.point).unwrap().value().unwrap();
            assert_eq!(v, s.value);
            assert!((v - target).abs() >= r.epsilon, "{src}: sample {k}");
            let d = distance(c.coords(), &s.point).unwrap();
            assert!(d <= cfg.r1 * 0.5f64.powi(k as i32) * (1.0 + 1e-12));
            assert!(d < prev / 2.0 || k == 0);
            prev = d;
        }
        if at.len() >= 3 {
            assert!(r.angle_subsequence.is_some());
        }
    }
}

#[test]
fn limit_exists_survives_fresh_paths() {
    // limits found by the heuristic should also hold on curves it never probed
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (src, at, expected) in [("x^2*y/(x^2+y^2)", [0.0, 0.0], 0.0), ("sin(x^2+y^2)/(x^2+y^2)", [0.0, 0.0], 1.0)] {
        let (f, c) = setup(src, &at);
        let cfg = AnalyzerConfig::default();
        let v = analyze(&f, &c, &cfg).unwrap();
        assert_eq!(v.limit, Some(expected));
        for _ in 0..20 {
            let path = PathSpec::Spiral {
                phi0: vec![rng.random_range(0.0..2.0 * PI)],
                amplitude: rng.random_range(-3.0..3.0),
                q: rng.random_range(0.2..3.0),
            };
            let p = path_limit(&f, &c, &path, &cfg).unwrap();
            assert!((p.limit().unwrap() - expected).abs() <= 1e-5, "{src} along {path:?}");
        }
    }
}

#[test]
fn verdict_json_round_trips() {
    let (f, c) = setup("x*y/(x^2+y^2)", &[0.0, 0.0]);
    let v = analyze(&f, &c, &AnalyzerConfig::rays_only()).unwrap();
    let s = serde_json::to_string(&v).unwrap();
    let back: limitscout::analyzer::Verdict = serde_json::from_str(&s).unwrap();
    assert_eq!(back, v);
    let raw: serde_json::Value = serde_json::from_str(&s).unwrap();
    assert_eq!(raw["verdict"], "NO_LIMIT");
}
