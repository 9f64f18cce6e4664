use std::f64::consts::{FRAC_PI_4, PI, TAU};

use proptest::prelude::*;

use limitscout::construction::{bisect_angles, bw_subsequence, PolarSample, ViolationOutcome, ViolationSearch};
use limitscout::expr::{BinaryOp, EvalResult, Expression, Func, Node};
use limitscout::geometry::{angle_distance, sin_cos, distance, from_polar, to_polar, Center, PolarOffset};
use limitscout::paths::{check_descent, point_at, polyline_from_witness, Branch, PathSpec, Triangle};

fn node_strategy(arity: usize) -> impl Strategy<Value = Node> {
    let leaf = prop_oneof![
        (-1e3f64..1e3).prop_map(Node::Const),
        (0..arity).prop_map(Node::Var),
    ];
    leaf.prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Node::Neg(Box::new(a))),
            (
                prop::sample::select(vec![BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div, BinaryOp::Pow]),
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, a, b)| Node::Binary(op, Box::new(a), Box::new(b))),
            (prop::sample::select(Func::ALL.to_vec()), inner).prop_map(|(f, a)| Node::Call(f, Box::new(a))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printed_expression_evaluates_identically(
        root in node_strategy(3),
        points in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 3), 100),
    ) {
        let e = Expression::from_node(root, 3).unwrap();
        let back = Expression::parse(&e.to_string(), 3).unwrap();
        for p in &points {
            let (a, b) = (e.evaluate(p).unwrap(), back.evaluate(p).unwrap());
            match (a, b) {
                (EvalResult::Defined(x), EvalResult::Defined(y)) => prop_assert_eq!(x.to_bits(), y.to_bits()),
                _ => prop_assert_eq!(a, b),
            }
        }
    }

    #[test]
    fn evaluation_is_never_non_finite(
        root in node_strategy(2),
        p in prop::collection::vec(prop_oneof![-1e6f64..1e6, Just(0.0), Just(-0.0), Just(1e300)], 2),
    ) {
        let e = Expression::from_node(root, 2).unwrap();
        if let EvalResult::Defined(v) = e.evaluate(&p).unwrap() {
            prop_assert!(v.is_finite());
        }
        prop_assert_eq!(e.evaluate(&p).unwrap(), e.evaluate(&p).unwrap());
    }

    #[test]
    fn polar_round_trip(
        dim in 2usize..=4,
        log_r in -8.0f64..8.0,
        raw in prop::collection::vec(0.0f64..1.0, 3),
        c in prop::collection::vec(-5.0f64..5.0, 4),
    ) {
        let r = 10f64.powf(log_r);
        // keep polar-type angles off the poles, where later angles are undetermined
        let mut angles: Vec<f64> = raw[..dim - 1].iter().map(|u| 0.01 + u * (PI - 0.02)).collect();
        let last = dim - 2;
        angles[last] = raw[last] * TAU;
        let origin = Center::origin(dim).unwrap();
        let offset = PolarOffset::new(r, angles.clone());
        let p = from_polar(&origin, &offset).unwrap();
        let back = to_polar(&origin, &p).unwrap();
        prop_assert!((back.r - r).abs() <= 1e-12 * r);
        for k in 0..dim - 2 {
            prop_assert!((back.angles[k] - angles[k]).abs() <= 1e-12);
        }
        prop_assert!(angle_distance(back.angles[last], angles[last]) <= 1e-12);

        let center = Center::new(c[..dim].to_vec()).unwrap();
        let q = from_polar(&center, &offset).unwrap();
        let d = distance(center.coords(), &q).unwrap();
        if r > 1e-3 {
            prop_assert!((d - r).abs() <= 1e-12 * r.max(1.0) * 10.0);
        }
    }

    #[test]
    fn two_d_polar_matches_cos_sin(r in 0.0f64..1e3, phi in 0.0f64..TAU, x0 in -5.0f64..5.0, y0 in -5.0f64..5.0) {
        let c = Center::new(vec![x0, y0]).unwrap();
        let p = from_polar(&c, &PolarOffset::new(r, vec![phi])).unwrap();
        let (s, co) = sin_cos(phi);
        prop_assert_eq!(p, vec![x0 + r * co, y0 + r * s]);
    }

    #[test]
    fn law_of_cosines_certificate_is_sound(
        b in 1e-6f64..1e3,
        ratio in 2.0f64..100.0,
        angle in 0.0f64..=FRAC_PI_4,
    ) {
        prop_assume!(ratio > 2.0);
        let t = Triangle::from_sides_and_angle(b, b * ratio, angle);
        prop_assert!(t.cos_c < 0.0);
        prop_assert!(t.passes());
    }

    #[test]
    fn bisection_invariants(
        angles in prop::collection::vec(0.0f64..TAU, 1..80),
        depth in 1usize..=40,
    ) {
        let c = Center::origin(2).unwrap();
        let samples: Vec<PolarSample> = angles
            .iter()
            .enumerate()
            .map(|(i, &phi)| {
                let offset = PolarOffset::new(0.5f64.powi(i as i32), vec![phi]);
                PolarSample { index: i + 1, point: from_polar(&c, &offset).unwrap(), offset, value: 0.0 }
            })
            .collect();
        let w = bisect_angles(&samples, depth).unwrap();
        prop_assert!(w.depth() >= 1 && w.depth() <= depth);
        for (k, iv) in w.intervals.iter().enumerate() {
            prop_assert_eq!(iv.depth as usize, k + 1);
            prop_assert_eq!(iv.width_exponent as usize, k);
            if k > 0 {
                prop_assert!(iv.is_half_of(&w.intervals[k - 1]));
            }
            prop_assert!(iv.contains(w.picked[k].offset.phi()));
            prop_assert!(iv.contains(w.phi0));
            prop_assert!(angle_distance(w.picked[k].offset.phi(), w.phi0) <= PI / 2f64.powi(k as i32));
        }
        prop_assert!(w.picked.windows(2).all(|p| p[0].index < p[1].index));
    }

    #[test]
    fn bw_output_is_increasing_and_tight(
        xs in prop::collection::vec(-100.0f64..100.0, 16..400),
        target in 1usize..16,
    ) {
        let values: Vec<Vec<f64>> = xs.iter().map(|x| vec![*x]).collect();
        let sel = bw_subsequence(&values, &[0], target).unwrap();
        prop_assert_eq!(sel.indices.len(), target);
        prop_assert!(sel.indices.windows(2).all(|w| w[0] < w[1]));
        let picked: Vec<f64> = sel.indices.iter().map(|&i| xs[i - 1]).collect();
        let tail = &picked[picked.len().saturating_sub(5)..];
        let spread = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - tail.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(spread <= sel.initial_ranges[0] / 2f64.powi(sel.passes[0] as i32));
    }

    #[test]
    fn power_curve_traces_its_equation(
        c in prop_oneof![-3.0f64..-0.1, 0.1f64..3.0],
        mn in prop::sample::select(vec![(1u32, 1u32), (2, 1), (3, 1), (1, 2), (3, 2), (1, 3), (2, 3), (5, 3)]),
        neg in any::<bool>(),
        log_r in -12.0f64..0.0,
    ) {
        let (m, n) = mn;
        let branch = if neg && n % 2 == 1 { Branch::Negative } else { Branch::Positive };
        let path = PathSpec::power(c, m, n, branch).unwrap();
        let r = 10f64.powf(log_r);
        let p = point_at(&path, &Center::origin(2).unwrap(), r).unwrap();
        let x = p[0];
        let xp = if x < 0.0 && m % 2 == 1 { -x.abs().powf(m as f64 / n as f64) } else { x.abs().powf(m as f64 / n as f64) };
        prop_assert!((p[1] - c * xp).abs() <= 1e-12);
        prop_assert!((p[0].hypot(p[1]) - r).abs() <= 1e-13 * r);
    }

    #[test]
    fn violation_witness_polylines_are_certified(seed in 0u64..1000) {
        let f = Expression::parse("(x^2-y^2)/(x^2+y^2)", 2).unwrap();
        let c = Center::new(vec![0.25, -0.5]).unwrap();
        let search = ViolationSearch { target: 0.0, epsilon: 0.5, r1: 0.5, count: 16, budget: 2000, seed };
        let ViolationOutcome::Found(samples) = search.run(&f, &c).unwrap() else {
            return Err(TestCaseError::fail("saddle must refute"));
        };
        for (k, s) in samples.iter().enumerate() {
            prop_assert!(s.offset.r <= 0.5 * 0.5f64.powi(k as i32));
        }
        let w = bisect_angles(&samples, 16).unwrap();
        for (k, p) in w.picked.iter().enumerate() {
            prop_assert!(p.offset.r <= 0.5 * 0.5f64.powi(k as i32));
        }
        if w.picked.len() >= 4 {
            let path = polyline_from_witness(&w).unwrap();
            prop_assert!(check_descent(&path, &c).unwrap().ok);
        }
    }
}

#[test]
fn certified_polyline_is_parameterised_by_distance() {
    let f = Expression::parse("sin(1/(x^2+y^2))", 2).unwrap();
    let c = Center::origin(2).unwrap();
    let search = ViolationSearch { target: 0.0, epsilon: 0.8, r1: 1.0, count: 30, budget: 50_000, seed: 9 };
    let ViolationOutcome::Found(samples) = search.run(&f, &c).unwrap() else { panic!() };
    let w = bisect_angles(&samples, 30).unwrap();
    let path = polyline_from_witness(&w).unwrap();
    assert!(check_descent(&path, &c).unwrap().ok);
    let PathSpec::Polyline { vertices } = &path else { unreachable!() };
    let hi = distance(c.coords(), &vertices[0]).unwrap();
    let lo = distance(c.coords(), vertices.last().unwrap()).unwrap();
    for j in 0..1000 {
        let r = lo * (hi / lo).powf(j as f64 / 999.0);
        let r = r.clamp(lo, hi);
        let p = point_at(&path, &c, r).unwrap();
        let d = distance(c.coords(), &p).unwrap();
        assert!((d - r).abs() <= 1e-10 * r, "r={r} d={d}");
    }
}
