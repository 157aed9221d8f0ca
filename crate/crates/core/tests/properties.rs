use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use timeavg::analysis::{check_invariants, dual_at, drift_certificate};
use timeavg::config::ProblemConfig;
use timeavg::oracle::solve_reference;
use timeavg::scalar::{distance, norm};
use timeavg::{
    run, AffineConstraint, DecisionSet, Error, Exact, Piece, ProblemSpec, Scalar, SeparableConvexObjective, SolverConfig, Spec,
};

fn half(k: i32) -> f64 {
    k as f64 / 2.0
}

fn piece() -> impl Strategy<Value = Piece<f64>> {
    prop_oneof![
        (-6i32..=6).prop_map(|s| Piece::Linear { slope: half(s) }),
        (0i32..=4, -6i32..=6).prop_map(|(c, s)| Piece::Quadratic {
            curvature: half(c),
            slope: half(s),
        }),
        (-6i32..=6, prop::collection::btree_set(-4i32..=8, 1..3), prop::collection::vec(0i32..=4, 3)).prop_map(
            |(intercept, breaks, steps)| {
                let breakpoints: Vec<f64> = breaks.into_iter().map(half).collect();
                let mut slope = -3.0;
                let slopes = (0..=breakpoints.len())
                    .map(|k| {
                        slope += half(steps[k]);
                        slope
                    })
                    .collect();
                Piece::PiecewiseLinear {
                    intercept: half(intercept),
                    breakpoints,
                    slopes,
                }
            }
        ),
    ]
}

prop_compose! {
    fn problem()(dim in 1usize..=3)(
        levels in prop::collection::vec(prop::collection::btree_set(-2i32..=6, 1..4), dim),
        pieces in prop::collection::vec(piece(), dim),
        cons in prop::collection::vec((prop::collection::vec(-4i32..=4, dim), -6i32..=6), 0..3),
    ) -> Spec {
        let levels = levels.into_iter().map(|l| l.into_iter().map(half).collect()).collect();
        let constraints = cons
            .into_iter()
            .map(|(mut a, b)| {
                if a.iter().all(|c| *c == 0) {
                    a[0] = 2;
                }
                AffineConstraint::new(a.into_iter().map(half).collect(), half(b)).unwrap()
            })
            .collect();
        ProblemSpec::new(
            DecisionSet::grid(levels).unwrap(),
            None,
            SeparableConvexObjective::new(pieces).unwrap(),
            constraints,
        )
        .unwrap()
    }
}

fn random_in_box(spec: &Spec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let b = spec.extended_box();
    b.lower.iter().zip(&b.upper).map(|(l, u)| if l < u { rng.gen_range(*l..=*u) } else { *l }).collect()
}

fn functions(spec: &Spec) -> Vec<Box<dyn Fn(&[f64]) -> f64 + '_>> {
    let mut fs: Vec<Box<dyn Fn(&[f64]) -> f64 + '_>> = vec![Box::new(|x| spec.objective_value(x))];
    for j in 0..spec.num_constraints() {
        fs.push(Box::new(move |x| spec.constraint_values(x)[j]));
    }
    fs
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 256,
        failure_persistence: None,
        rng_seed: RngSeed::Fixed(0x7ea5),
        ..ProptestConfig::default()
    })]

    #[test]
    fn trace_invariants_hold(spec in problem(), v in 1u32..40, horizon in 1usize..300) {
        let trace = run(&spec, &SolverConfig::new(v as f64, horizon)).unwrap();
        let c = spec.squared_norm_bound();
        let step = (2.0 * c).sqrt() / v as f64;
        let nc = spec.num_constraints();
        for t in 0..horizon {
            let (a, b) = (trace.lambda(t), trace.lambda(t + 1));
            prop_assert!(b[..nc].iter().all(|w| *w >= 0.0));
            prop_assert!(distance(&a, &b) <= step * (1.0 + 1e-12));
        }
        let xbar = trace.plain_average();
        let ybar = trace.plain_average_y();
        let last = trace.final_state();
        for i in 0..spec.dimension() {
            let rhs = v as f64 / horizon as f64 * last.z[i];
            prop_assert!((xbar[i] - ybar[i] - rhs).abs() <= 1e-9 * (1.0 + norm(&trace.lambda(horizon))));
        }
        let gy = spec.constraint_values(&ybar);
        for j in 0..nc {
            prop_assert!(gy[j] <= v as f64 / horizon as f64 * last.w[j] + 1e-9);
        }
    }

    #[test]
    fn runs_are_deterministic(spec in problem(), v in 1u32..40) {
        let config = SolverConfig::new(v as f64, 100);
        let a = run(&spec, &config).unwrap();
        let b = run(&spec, &config).unwrap();
        for t in 0..100 {
            let (ra, rb) = (a.record(t), b.record(t));
            prop_assert_eq!(ra.x, rb.x);
            prop_assert_eq!(ra.y, rb.y);
            prop_assert_eq!(ra.w, rb.w);
            prop_assert_eq!(ra.z, rb.z);
            prop_assert_eq!(ra.dual_value.to_bits(), rb.dual_value.to_bits());
        }
    }

    #[test]
    fn exact_runs_are_deterministic(spec in problem(), v in 1u32..10) {
        let exact = spec.convert::<Exact>();
        let config = SolverConfig::new(Exact::from_f64(v as f64), 40);
        let a = run(&exact, &config).unwrap();
        let b = run(&exact, &config).unwrap();
        prop_assert_eq!(a.final_state(), b.final_state());
        prop_assert_eq!(a.plain_average(), b.plain_average());
    }

    #[test]
    fn convexity_lipschitz_and_c_probes(spec in problem(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = spec.lipschitz_bound();
        let c = spec.squared_norm_bound();
        let points = spec.decision_set().enumerate(10_000).unwrap();
        for _ in 0..200 {
            let x = random_in_box(&spec, &mut rng);
            let y = random_in_box(&spec, &mut rng);
            let t: f64 = rng.gen();
            let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| t * a + (1.0 - t) * b).collect();
            let gap = distance(&x, &y);
            for h in functions(&spec) {
                let (hx, hy) = (h(&x), h(&y));
                prop_assert!(h(&mid) <= t * hx + (1.0 - t) * hy + 1e-9);
                prop_assert!((hx - hy).abs() <= m * gap + 1e-9);
            }
            let g = spec.constraint_values(&y);
            prop_assert!(norm(&g).powi(2) <= c + 1e-9);
            let p = &points[rng.gen_range(0..points.len())];
            prop_assert!(distance(p, &y).powi(2) <= c + 1e-9);
        }
    }

    #[test]
    fn config_round_trip(spec in problem()) {
        let text = ProblemConfig::from_spec(&spec).to_toml().unwrap();
        let parsed = ProblemConfig::parse(&text).unwrap();
        prop_assert_eq!(parsed.to_spec::<f64>().unwrap(), spec.clone());
        prop_assert_eq!(parsed.to_spec::<Exact>().unwrap(), spec.convert::<Exact>());
    }

    #[test]
    fn drift_certificate_holds_on_random_problems(spec in problem(), v in 1u32..40, seed in any::<u64>()) {
        let trace = run(&spec, &SolverConfig::new(v as f64, 200)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nc = spec.num_constraints();
        let probe: Vec<f64> = (0..nc + spec.dimension())
            .map(|k| if k < nc { rng.gen_range(0.0..5.0) } else { rng.gen_range(-5.0..5.0) })
            .collect();
        let report = drift_certificate(&spec, &trace, &probe, spec.squared_norm_bound()).unwrap();
        prop_assert!(report.passed(), "min slack {}", report.min_slack);
    }

    #[test]
    fn weak_duality_and_invariant_suite(spec in problem(), v in 1u32..40, seed in any::<u64>()) {
        let oracle = match solve_reference(&spec, 0.05) {
            Ok(o) => o,
            Err(Error::Infeasible(_)) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nc = spec.num_constraints();
        for _ in 0..100 {
            let lambda: Vec<f64> = (0..nc + spec.dimension())
                .map(|k| if k < nc { rng.gen_range(0.0..10.0) } else { rng.gen_range(-10.0..10.0) })
                .collect();
            prop_assert!(dual_at(&spec, &lambda).unwrap() <= oracle.f_opt + 1e-9);
        }
        let trace = run(&spec, &SolverConfig::new(v as f64, 256)).unwrap();
        let reference = vec![0.0; nc + spec.dimension()];
        let report = check_invariants(&spec, &trace, oracle.f_opt, &reference).unwrap();
        // 256 steps is too short for the multipliers to settle.
        let failures: Vec<_> = report.failures().into_iter().filter(|f| !f.contains("plateau")).collect();
        prop_assert!(failures.is_empty(), "{:?}", failures);
    }
}
