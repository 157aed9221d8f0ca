//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::path::Path;
use std::time::Instant;

use timeavg::analysis::rates::staggered_vs_plain;
use timeavg::analysis::{check_invariants, phase_detect, Geometry, InvariantReport, PhaseReport};
use timeavg::experiments::{self, RunOptions};
use timeavg::instances::{Figure, Objective};
use timeavg::oracle::{solve_reference, solve_reference_lp};
use timeavg::{Exact, ProblemSpec, Scalar};

struct Outcome {
    figure: Figure,
    invariants: InvariantReport,
    final_f: f64,
    oracle_f: f64,
    /// `(restart, staggered error, plain error)` for the window after 2048.
    speedup: Option<(usize, f64, f64)>,
    phase: Option<PhaseReport>,
    far_phase: Option<PhaseReport>,
}

fn instance<S: Scalar>(figure: Figure) -> Outcome {
    let spec: ProblemSpec<S> = figure.problem();
    let fspec = spec.to_f64();
    let options = RunOptions::default();
    let trace = options.run(&spec).expect("run");
    let oracle = experiments::reference_optimum(&fspec).expect("oracle");
    let estimate = experiments::estimate_for(&fspec, 0).expect("estimate");
    let invariants = check_invariants(&spec, &trace, oracle.f_opt, &estimate.lambda_star).expect("invariants");
    let xbar: Vec<f64> = trace.plain_average().iter().map(Scalar::to_f64).collect();

    let mut speedup = None;
    let mut phase = None;
    let mut far_phase = None;
    if figure.objective == Objective::Polyhedral && figure.unique_multiplier() {
        speedup = staggered_vs_plain(&fspec, &trace, figure.objective.optimal_value(), 2048, 4096).expect("window");
        let bounds = experiments::bounds_for(&fspec, options.v, &estimate, Geometry::Polyhedral);
        phase = Some(phase_detect(&trace, &estimate, &bounds, Geometry::Polyhedral).expect("phase"));
        let far = RunOptions {
            initial_w: Some(vec![10.0, 10.0]),
            initial_z: Some(vec![5.0, -5.0]),
            ..options.clone()
        };
        let far_trace = far.run(&spec).expect("far run");
        far_phase = Some(phase_detect(&far_trace, &estimate, &bounds, Geometry::Polyhedral).expect("phase"));
    }
    Outcome {
        figure,
        invariants,
        final_f: fspec.objective_value(&xbar),
        oracle_f: oracle.f_opt,
        speedup,
        phase,
        far_phase,
    }
}

fn report(n: usize, name: &str, passed: bool, detail: String) -> bool {
    println!("criterion {n} ({name}): {}  {detail}", if passed { "PASS" } else { "FAIL" });
    passed
}

fn read_final(dir: &Path, figure: u8) -> Option<(f64, f64)> {
    let text = std::fs::read_to_string(dir.join(format!("figure{figure}.toml"))).ok()?;
    let doc: toml::Table = toml::from_str(&text).ok()?;
    let last = doc.get("final")?.as_table()?;
    let f = last.get("f")?.as_float()?;
    let g = last
        .get("g")?
        .as_array()?
        .iter()
        .filter_map(|v| v.as_float())
        .fold(f64::NEG_INFINITY, f64::max);
    Some((f, g))
}

fn reproduce_criterion(n: usize, name: &str, figure: u8, optimum: f64) -> bool {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().to_str().expect("utf-8 path").to_string();
    let start = Instant::now();
    let code = timeavg_cli::run_cli(["timeavg", "reproduce", "--figure", &figure.to_string(), "--out", &out]);
    let secs = start.elapsed().as_secs_f64();
    match read_final(dir.path(), figure) {
        Some((f, g)) => report(
            n,
            name,
            code == 0 && (f - optimum).abs() <= 0.02 && g <= 0.02 && secs <= 10.0,
            format!("exit {code}, f = {f:.6} (target {optimum}), max g = {g:.2e}, {secs:.2}s"),
        ),
        None => report(n, name, false, format!("exit {code}, no summary written")),
    }
}

fn main() {
    let mut ok = Vec::new();
    ok.push(reproduce_criterion(1, "polyhedral optimum", 2, 1.25));
    ok.push(reproduce_criterion(2, "smooth optimum", 3, 0.5));

    let outcomes: Vec<Outcome> = std::thread::scope(|s| {
        let handles: Vec<_> = Figure::ALL
            .into_iter()
            .map(|fig| {
                s.spawn(move || match experiments::ScalarKind::auto(&fig.problem::<f64>()) {
                    experiments::ScalarKind::Exact => instance::<Exact>(fig),
                    experiments::ScalarKind::F64 => instance::<f64>(fig),
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("instance worker")).collect()
    });
    let poly = &outcomes[0];

    ok.push(match (poly.speedup, &poly.phase) {
        (Some((r, stag, plain)), Some(p)) => report(
            3,
            "staggered speedup",
            stag <= 0.5 * plain && p.hit.is_some_and(|h| h <= 2048),
            format!(
                "restart {r}, staggered error {stag:.3e} vs plain {plain:.3e} (ratio {:.3}), detected hit {:?}",
                stag / plain,
                p.hit
            ),
        ),
        _ => report(3, "staggered speedup", false, "no restart window after 2048".into()),
    });

    let sweep_start = Instant::now();
    let vs = [25.0, 50.0, 100.0, 200.0];
    let options = RunOptions::default();
    let sweep = |obj: Objective| {
        let spec = timeavg::instances::sample_problem::<f64>(obj, false);
        experiments::sweep(&spec, obj.optimal_value(), &vs, &options, None)
    };
    ok.push(match (sweep(Objective::Polyhedral), sweep(Objective::Smooth)) {
        (Ok(p), Ok(s)) => {
            let (pp, ps, ss) = (p.plain_slope(), p.staggered_slope(), s.staggered_slope());
            let passed = ps.is_some_and(|v| v <= 1.3) && ss.is_some_and(|v| v <= 1.8) && pp.is_some_and(|v| v >= 1.6);
            let show = |v: Option<f64>| v.map_or("n/a".into(), |v| format!("{v:.3}"));
            report(
                4,
                "rate ordering",
                passed,
                format!(
                    "staggered polyhedral {}, staggered smooth {}, plain polyhedral {}, {:.1}s",
                    show(ps),
                    show(ss),
                    show(pp),
                    sweep_start.elapsed().as_secs_f64()
                ),
            )
        }
        (p, s) => report(4, "rate ordering", false, format!("sweep failed: {:?} {:?}", p.err(), s.err())),
    });

    let failures: Vec<String> = outcomes
        .iter()
        .flat_map(|o| o.invariants.failures().into_iter().map(move |f| format!("figure {}: {f}", o.figure.number)))
        .collect();
    ok.push(report(
        5,
        "invariant suite",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} checks on each of 4 instances", outcomes[0].invariants.checks.len())
        } else {
            failures.join("; ")
        },
    ));

    let mut lp_gap: f64 = 0.0;
    let mut lp_ok = true;
    for fig in Figure::ALL.iter().filter(|f| f.objective == Objective::Polyhedral) {
        let spec = fig.problem::<f64>();
        match (solve_reference(&spec, experiments::ORACLE_RESOLUTION), solve_reference_lp(&fig.problem::<Exact>())) {
            (Ok(grid), Ok(lp)) => lp_gap = lp_gap.max((grid.f_opt - lp.f_opt).abs()),
            _ => lp_ok = false,
        }
    }
    let engine_gap = outcomes.iter().map(|o| (o.final_f - o.oracle_f).abs()).fold(0.0, f64::max);
    ok.push(report(
        6,
        "oracle cross-checks",
        lp_ok && lp_gap <= 1e-3 && engine_gap <= 0.02,
        format!("grid vs LP {lp_gap:.2e}, engine vs oracle {engine_gap:.2e}"),
    ));

    ok.push(match (&poly.phase, &poly.far_phase) {
        (Some(p), Some(q)) => report(
            7,
            "absorption",
            p.absorbed && q.absorbed,
            format!(
                "radius {:.4} + slack {:.2e}; zero start: hit {:?}, exits {}; far start: hit {:?}, exits {}",
                p.radius,
                p.slack,
                p.hit,
                p.exits.len(),
                q.hit,
                q.exits.len()
            ),
        ),
        _ => report(7, "absorption", false, "no polyhedral radius".into()),
    });

    let passed = ok.iter().filter(|p| **p).count();
    println!("{passed}/{} criteria passed", ok.len());
    if passed != ok.len() {
        std::process::exit(1);
    }
}
