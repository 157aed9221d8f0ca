use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use timeavg::instances::{sample_problem, Objective};
use timeavg::engine::frame_containing;
use timeavg::{run, staggered_average, Error, Exact, Scalar, SolverConfig};

#[test]
fn polyhedral_average_reaches_the_optimum_in_exact_arithmetic() {
    let spec = sample_problem::<Exact>(Objective::Polyhedral, false);
    let trace = run(&spec, &SolverConfig::new(Exact::from_f64(100.0), 100_000)).unwrap();
    let xbar: Vec<f64> = trace.plain_average().iter().map(Scalar::to_f64).collect();
    let fspec = spec.to_f64();
    assert!((fspec.objective_value(&xbar) - 1.25).abs() <= 0.05, "{xbar:?}");
    assert!(fspec.constraint_values(&xbar).iter().all(|g| *g <= 0.05));
}

#[test]
fn smooth_average_reaches_the_optimum() {
    let spec = sample_problem::<f64>(Objective::Smooth, false);
    let trace = run(&spec, &SolverConfig::new(100.0, 100_000)).unwrap();
    let xbar = trace.plain_average();
    assert!((spec.objective_value(&xbar) - 0.5).abs() <= 0.05, "{xbar:?}");
    assert!(spec.constraint_values(&xbar).iter().all(|g| *g <= 0.05));
}

#[test]
fn windows_match_recomputation_from_raw_records() {
    let spec = sample_problem::<f64>(Objective::Smooth, false);
    let trace = run(&spec, &SolverConfig::new(20.0, 3000)).unwrap();
    let naive = |start: usize, len: usize| -> Vec<f64> {
        let mut sum = vec![0.0; 2];
        for t in start..start + len {
            for (s, x) in sum.iter_mut().zip(trace.record(t).x) {
                *s += x;
            }
        }
        sum.into_iter().map(|s| s / len as f64).collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let start = rng.gen_range(0..3000);
        let len = rng.gen_range(1..=3000 - start);
        let fast = staggered_average(&trace, start, len).unwrap();
        for (a, b) in fast.iter().zip(naive(start, len)) {
            assert!((a - b).abs() <= 1e-12, "window {start}+{len}");
        }
    }
    for t in [0, 1, 17, 1023, 2999] {
        let r = trace.record(t);
        for (a, b) in r.xbar.iter().zip(naive(0, t + 1)) {
            assert!((a - b).abs() <= 1e-12);
        }
        let frame = frame_containing(&trace, t).unwrap();
        for (a, b) in r.frame_xbar.iter().zip(naive(frame.start, t + 1 - frame.start)) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn restarts_fall_on_powers_of_the_base() {
    let spec = sample_problem::<f64>(Objective::Polyhedral, false);
    let trace = run(&spec, &SolverConfig::new(10.0, 100)).unwrap();
    assert_eq!(trace.restart_times(), vec![1, 2, 4, 8, 16, 32, 64]);
    let lens: usize = trace.frames().iter().map(|f| f.len).sum();
    assert_eq!(lens, 100);

    let trace = run(&spec, &SolverConfig::new(10.0, 100).with_restart_base(Some(3))).unwrap();
    assert_eq!(trace.restart_times(), vec![1, 3, 9, 27, 81]);

    let trace = run(&spec, &SolverConfig::new(10.0, 100).with_restart_base(None)).unwrap();
    assert!(trace.restart_times().is_empty());
}

#[test]
fn frame_sums_are_exact() {
    let spec = sample_problem::<Exact>(Objective::Polyhedral, false);
    let trace = run(&spec, &SolverConfig::new(Exact::from_f64(10.0), 300)).unwrap();
    let total = trace.frames().iter().fold(vec![Exact::from_f64(0.0); 2], |acc, f| {
        acc.iter().zip(&f.x_sum).map(|(a, b)| a.clone() + b.clone()).collect()
    });
    let n = Exact::from_usize(300);
    let from_frames: Vec<Exact> = total.into_iter().map(|s| s / n.clone()).collect();
    assert_eq!(from_frames, trace.plain_average());
}

#[test]
fn sparse_recording_keeps_the_same_run() {
    let spec = sample_problem::<f64>(Objective::Smooth, true);
    let dense = run(&spec, &SolverConfig::new(50.0, 1000)).unwrap();
    let sparse = run(&spec, &SolverConfig::new(50.0, 1000).with_record_every(100)).unwrap();
    assert_eq!(dense.final_state(), sparse.final_state());
    assert_eq!(dense.plain_average(), sparse.plain_average());
    assert_eq!(sparse.len(), 11);
    assert_eq!(sparse.record(10).t, 999);
    assert!(matches!(staggered_average(&sparse, 0, 10), Err(Error::Precondition(_))));
}

#[test]
fn initial_state_is_respected() {
    let spec = sample_problem::<f64>(Objective::Polyhedral, false);
    let config = SolverConfig::new(10.0, 1).with_initial(vec![1.0, 2.0], vec![0.5, -0.5]);
    let trace = run(&spec, &config).unwrap();
    assert_eq!(trace.record(0).w, &[1.0, 2.0]);
    assert_eq!(trace.record(0).z, &[0.5, -0.5]);
}

#[test]
fn invalid_configurations_are_rejected() {
    let spec = sample_problem::<f64>(Objective::Polyhedral, false);
    let bad = [
        SolverConfig::new(0.5, 10),
        SolverConfig::new(10.0, 0),
        SolverConfig::new(10.0, 10).with_restart_base(Some(1)),
        SolverConfig::new(10.0, 10).with_record_every(0),
        SolverConfig::new(10.0, 10).with_initial(vec![-1.0, 0.0], vec![0.0, 0.0]),
        SolverConfig::new(10.0, 10).with_initial(vec![0.0], vec![0.0, 0.0]),
        SolverConfig::new(10.0, 10).with_initial(vec![0.0, 0.0], vec![f64::NAN, 0.0]),
    ];
    for config in bad {
        assert!(matches!(run(&spec, &config), Err(Error::Precondition(_))), "{config:?}");
    }
}
