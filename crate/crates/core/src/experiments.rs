//! End-to-end experiments built on the engine and the analysis tools:
//! figure reproduction, V-sweeps of iterations-to-ε and trace diagnostics.

use std::fmt;
use std::str::FromStr;

use crate::analysis::{
    check_invariants, drift_certificate, estimate_multiplier_with, phase_detect, theorem_bounds, BoundSet, DriftReport,
    Geometry, GridSearch, InvariantReport, MultiplierEstimate, MultiplierMethod, PhaseReport, ProbeOptions, TheoremKind,
    WindowBounds,
};
use crate::analysis::rates::{average_error, log_log_slope, plain_iterations_to_eps, staggered_iterations_to_eps};
use crate::engine::{run, staggered_average, RunTrace, SolverConfig};
use crate::error::{Error, Result};
use crate::instances::Figure;
use crate::oracle::{solve_reference, solve_reference_lp, OracleResult};
use crate::problem::ProblemSpec;
use crate::scalar::{Exact, Scalar};

/// Largest final error of the plain average accepted by [`FigureReport::passed`].
pub const REPRODUCE_TOL: f64 = 0.02;

/// Grid spacing of the reference oracle when the LP oracle does not apply.
pub const ORACLE_RESOLUTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarKind {
    F64,
    Exact,
}

impl ScalarKind {
    /// Exact arithmetic when every iterate stays rational with bounded
    /// denominators, i.e. the objective has no quadratic pieces.
    pub fn auto<S: Scalar>(spec: &ProblemSpec<S>) -> Self {
        if spec.objective().is_polyhedral() {
            ScalarKind::Exact
        } else {
            ScalarKind::F64
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScalarKind::F64 => "f64",
            ScalarKind::Exact => "exact",
        }
    }
}

impl fmt::Display for ScalarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScalarKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f64" => Ok(ScalarKind::F64),
            "exact" => Ok(ScalarKind::Exact),
            _ => Err(Error::invalid("scalar", format!("unknown scalar type {s:?}"))),
        }
    }
}

pub fn geometry_of<S: Scalar>(spec: &ProblemSpec<S>) -> Geometry {
    if spec.objective().is_polyhedral() {
        Geometry::Polyhedral
    } else {
        Geometry::Smooth
    }
}

/// Exact LP vertex enumeration when it applies, the refined grid otherwise.
pub fn reference_optimum(spec: &ProblemSpec<f64>) -> Result<OracleResult> {
    match solve_reference_lp(spec) {
        Ok(r) => Ok(r),
        Err(Error::Refused(_) | Error::Precondition(_)) => solve_reference(spec, ORACLE_RESOLUTION),
        Err(e) => Err(e),
    }
}

/// Run settings shared by the experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub v: f64,
    pub horizon: usize,
    /// `None` picks [`ScalarKind::auto`].
    pub scalar: Option<ScalarKind>,
    pub restart_base: Option<usize>,
    pub initial_w: Option<Vec<f64>>,
    pub initial_z: Option<Vec<f64>>,
    /// Seed of the multiplier probes.
    pub seed: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            v: 100.0,
            horizon: 200_000,
            scalar: None,
            restart_base: Some(2),
            initial_w: None,
            initial_z: None,
            seed: 0,
        }
    }
}

impl RunOptions {
    pub fn scalar_for<S: Scalar>(&self, spec: &ProblemSpec<S>) -> ScalarKind {
        self.scalar.unwrap_or_else(|| ScalarKind::auto(spec))
    }

    pub fn solver_config<S: Scalar>(&self, spec: &ProblemSpec<S>) -> SolverConfig<S> {
        let mut config = SolverConfig::new(S::from_f64(self.v), self.horizon).with_restart_base(self.restart_base);
        if self.initial_w.is_some() || self.initial_z.is_some() {
            let conv = |v: &Option<Vec<f64>>, n: usize| match v {
                Some(v) => v.iter().map(|x| S::from_f64(*x)).collect(),
                None => vec![S::zero(); n],
            };
            config = config.with_initial(
                conv(&self.initial_w, spec.num_constraints()),
                conv(&self.initial_z, spec.dimension()),
            );
        }
        config
    }

    /// Runs `spec` in scalar type `S`.
    pub fn run<S: Scalar>(&self, spec: &ProblemSpec<S>) -> Result<RunTrace<S>> {
        run(spec, &self.solver_config(spec))
    }
}

/// A time average together with its objective and constraint values.
#[derive(Debug, Clone, PartialEq)]
pub struct AverageValue {
    pub x: Vec<f64>,
    pub f: f64,
    pub g: Vec<f64>,
}

impl AverageValue {
    pub fn of(spec: &ProblemSpec<f64>, x: Vec<f64>) -> Self {
        AverageValue {
            f: spec.objective_value(&x),
            g: spec.constraint_values(&x),
            x,
        }
    }

    pub fn max_violation(&self) -> f64 {
        self.g.iter().copied().fold(0.0, f64::max)
    }

    pub fn error(&self, f_opt: f64) -> f64 {
        (self.f - f_opt).abs().max(self.max_violation())
    }
}

/// Averages after `t` iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureRow {
    pub t: usize,
    pub plain: AverageValue,
    /// Staggered average from the figure's fixed start.
    pub fixed_start: Option<AverageValue>,
    /// Staggered average from the first restart at or after the detected hit.
    pub detected_start: Option<AverageValue>,
    /// Average over the current frame.
    pub frame: AverageValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureReport {
    pub figure: Figure,
    pub scalar: ScalarKind,
    pub v: f64,
    pub horizon: usize,
    /// Known optimal value of the instance.
    pub f_opt: f64,
    pub oracle: OracleResult,
    pub estimate: MultiplierEstimate,
    pub bounds: BoundSet,
    pub geometry: Geometry,
    /// `None` when the multiplier is not unique, so no radius applies.
    pub phase: Option<PhaseReport>,
    pub fixed_start: usize,
    pub detected_start: Option<usize>,
    pub rows: Vec<FigureRow>,
}

impl FigureReport {
    pub fn final_row(&self) -> &FigureRow {
        self.rows.last().expect("at least one row")
    }

    /// Whether the final plain average is within [`REPRODUCE_TOL`] of the
    /// optimum and of feasibility.
    pub fn passed(&self) -> bool {
        let last = &self.final_row().plain;
        (last.f - self.f_opt).abs() <= REPRODUCE_TOL && last.max_violation() <= REPRODUCE_TOL
    }
}

/// `T = 1, 2, 4, …` up to the horizon, plus the horizon itself.
pub fn report_times(horizon: usize) -> Vec<usize> {
    let mut ts: Vec<usize> = std::iter::successors(Some(1usize), |t| t.checked_mul(2))
        .take_while(|t| *t <= horizon)
        .collect();
    if ts.last() != Some(&horizon) {
        ts.push(horizon);
    }
    ts
}

pub fn reproduce_figure(figure: Figure, options: &RunOptions) -> Result<FigureReport> {
    let spec = figure.problem::<f64>();
    match options.scalar_for(&spec) {
        ScalarKind::F64 => reproduce_with(figure, &spec, options, ScalarKind::F64),
        ScalarKind::Exact => reproduce_with(figure, &figure.problem::<Exact>(), options, ScalarKind::Exact),
    }
}

/// Multiplier estimate by grid dual maximization, with probe seed `seed`.
pub fn estimate_for(spec: &ProblemSpec<f64>, seed: u64) -> Result<MultiplierEstimate> {
    let probe = ProbeOptions {
        seed,
        ..ProbeOptions::default()
    };
    estimate_multiplier_with(spec, &MultiplierMethod::GridDualMax(GridSearch::default()), &probe)
}

/// Bounds for `spec` at `v`, with the curvature constant of `geometry` taken
/// from `estimate` when the multiplier looks unique.
pub fn bounds_for(spec: &ProblemSpec<f64>, v: f64, estimate: &MultiplierEstimate, geometry: Geometry) -> BoundSet {
    let bounds = BoundSet::for_problem(spec, v);
    match geometry {
        Geometry::Polyhedral => bounds.with_l_p(estimate.l_p()),
        Geometry::Smooth => bounds.with_l_s(estimate.l_s()),
    }
}

fn first_restart_at_or_after<S: Scalar>(trace: &RunTrace<S>, t: usize) -> Option<usize> {
    trace.restart_times().into_iter().find(|r| *r >= t)
}

fn reproduce_with<S: Scalar>(
    figure: Figure,
    spec: &ProblemSpec<S>,
    options: &RunOptions,
    scalar: ScalarKind,
) -> Result<FigureReport> {
    let fspec = spec.to_f64();
    let geometry = geometry_of(&fspec);
    let oracle = reference_optimum(&fspec)?;
    let estimate = estimate_for(&fspec, options.seed)?;
    let bounds = bounds_for(&fspec, options.v, &estimate, geometry);
    let trace = options.run(spec)?;

    let phase = match bounds.radius(geometry) {
        Some(_) => Some(phase_detect(&trace, &estimate, &bounds, geometry)?),
        None => None,
    };
    let detected_start = phase
        .as_ref()
        .and_then(|p| p.hit)
        .and_then(|hit| first_restart_at_or_after(&trace, hit));
    let fixed_start = figure.reference_start();

    let window = |start: usize, t: usize| -> Result<Option<AverageValue>> {
        if t <= start {
            return Ok(None);
        }
        Ok(Some(AverageValue::of(&fspec, staggered_average(&trace, start, t - start)?)))
    };
    let mut rows = Vec::new();
    for t in report_times(trace.horizon()) {
        let r = trace.record(t - 1);
        rows.push(FigureRow {
            t,
            plain: AverageValue::of(&fspec, r.xbar.to_vec()),
            fixed_start: window(fixed_start, t)?,
            detected_start: match detected_start {
                Some(s) => window(s, t)?,
                None => None,
            },
            frame: AverageValue::of(&fspec, r.frame_xbar.to_vec()),
        });
    }

    Ok(FigureReport {
        figure,
        scalar,
        v: options.v,
        horizon: trace.horizon(),
        f_opt: figure.objective.optimal_value(),
        oracle,
        estimate,
        bounds,
        geometry,
        phase,
        fixed_start,
        detected_start,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub v: f64,
    pub eps: f64,
    /// Iterations until the plain average stays within `eps`.
    pub plain: Option<usize>,
    /// Best iterations-to-ε over staggered averages started at restarts.
    pub staggered: Option<usize>,
    /// First entry into the convergence set, when an estimate was supplied.
    pub hit: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub scalar: ScalarKind,
    pub f_opt: f64,
    pub points: Vec<SweepPoint>,
}

impl SweepReport {
    fn slope(&self, pick: impl Fn(&SweepPoint) -> Option<usize>) -> Option<f64> {
        let ys: Option<Vec<f64>> = self.points.iter().map(|p| pick(p).map(|n| n as f64)).collect();
        let xs: Vec<f64> = self.points.iter().map(|p| 1.0 / p.eps).collect();
        (self.points.len() >= 2).then_some(())?;
        Some(log_log_slope(&xs, &ys?))
    }

    /// Slope of `ln(plain iterations)` against `ln(1/ε)`.
    pub fn plain_slope(&self) -> Option<f64> {
        self.slope(|p| p.plain)
    }

    pub fn staggered_slope(&self) -> Option<f64> {
        self.slope(|p| p.staggered)
    }

    pub fn hit_slope(&self) -> Option<f64> {
        self.slope(|p| p.hit)
    }
}

/// Runs every `v` in `vs` (concurrently) with `ε = 1/V` and measures
/// iterations-to-ε against `f_opt`. `options.v` is ignored.
pub fn sweep(
    spec: &ProblemSpec<f64>,
    f_opt: f64,
    vs: &[f64],
    options: &RunOptions,
    estimate: Option<&MultiplierEstimate>,
) -> Result<SweepReport> {
    if vs.is_empty() {
        return Err(Error::invalid("v", "sweep needs at least one value"));
    }
    let scalar = options.scalar_for(spec);
    let exact = match scalar {
        ScalarKind::Exact => Some(spec.convert::<Exact>()),
        ScalarKind::F64 => None,
    };
    let points = std::thread::scope(|scope| {
        let handles: Vec<_> = vs
            .iter()
            .map(|&v| {
                let exact = exact.as_ref();
                scope.spawn(move || {
                    let opts = RunOptions { v, ..options.clone() };
                    match exact {
                        Some(e) => sweep_point(e, spec, f_opt, &opts, estimate),
                        None => sweep_point(spec, spec, f_opt, &opts, estimate),
                    }
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Precondition("sweep worker panicked".into()))))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(SweepReport { scalar, f_opt, points })
}

fn sweep_point<S: Scalar>(
    spec: &ProblemSpec<S>,
    fspec: &ProblemSpec<f64>,
    f_opt: f64,
    options: &RunOptions,
    estimate: Option<&MultiplierEstimate>,
) -> Result<SweepPoint> {
    let eps = 1.0 / options.v;
    let trace = options.run(spec)?;
    let hit = match estimate {
        Some(est) => {
            let geometry = geometry_of(fspec);
            let bounds = bounds_for(fspec, options.v, est, geometry);
            match bounds.radius(geometry) {
                Some(_) => phase_detect(&trace, est, &bounds, geometry)?.hit,
                None => None,
            }
        }
        None => None,
    };
    Ok(SweepPoint {
        v: options.v,
        eps,
        plain: plain_iterations_to_eps(fspec, &trace, f_opt, eps)?,
        staggered: staggered_iterations_to_eps(fspec, &trace, f_opt, eps)?,
        hit,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnoseReport {
    pub scalar: ScalarKind,
    pub v: f64,
    pub horizon: usize,
    pub oracle: OracleResult,
    pub estimate: MultiplierEstimate,
    pub geometry: Geometry,
    pub bounds: BoundSet,
    pub phase: Option<PhaseReport>,
    pub drift: DriftReport,
    pub invariants: InvariantReport,
    pub final_average: AverageValue,
    /// Error of the final plain average against the oracle.
    pub final_error: f64,
    /// General bound for the whole run.
    pub general: WindowBounds,
    /// Steady-state bound for the window from the first restart after the
    /// detected hit to the horizon.
    pub steady: Option<(usize, WindowBounds)>,
}

pub fn diagnose(spec: &ProblemSpec<f64>, options: &RunOptions) -> Result<DiagnoseReport> {
    match options.scalar_for(spec) {
        ScalarKind::F64 => diagnose_with(spec, options, ScalarKind::F64),
        ScalarKind::Exact => diagnose_with(&spec.convert::<Exact>(), options, ScalarKind::Exact),
    }
}

fn diagnose_with<S: Scalar>(spec: &ProblemSpec<S>, options: &RunOptions, scalar: ScalarKind) -> Result<DiagnoseReport> {
    let fspec = spec.to_f64();
    let geometry = geometry_of(&fspec);
    let oracle = reference_optimum(&fspec)?;
    let estimate = estimate_for(&fspec, options.seed)?;
    let bounds = bounds_for(&fspec, options.v, &estimate, geometry);
    let trace = options.run(spec)?;

    let phase = match bounds.radius(geometry) {
        Some(_) => Some(phase_detect(&trace, &estimate, &bounds, geometry)?),
        None => None,
    };
    let drift = drift_certificate(&fspec, &trace, &estimate.lambda_star, bounds.c)?;
    let invariants = check_invariants(spec, &trace, oracle.f_opt, &estimate.lambda_star)?;
    let xbar: Vec<f64> = trace.plain_average().iter().map(Scalar::to_f64).collect();
    let final_error = average_error(&fspec, &xbar, oracle.f_opt);
    let general = theorem_bounds(&trace, &bounds, 0, trace.horizon(), TheoremKind::General, None)?;
    let kind = match geometry {
        Geometry::Polyhedral => TheoremKind::Polyhedral,
        Geometry::Smooth => TheoremKind::Smooth,
    };
    let steady = match phase.as_ref().and_then(|p| p.hit) {
        Some(hit) => match first_restart_at_or_after(&trace, hit) {
            Some(r) if r < trace.horizon() => Some((
                r,
                theorem_bounds(&trace, &bounds, r, trace.horizon() - r, kind, Some(&estimate.lambda_star))?,
            )),
            _ => None,
        },
        None => None,
    };

    Ok(DiagnoseReport {
        scalar,
        v: options.v,
        horizon: trace.horizon(),
        oracle,
        estimate,
        geometry,
        bounds,
        phase,
        drift,
        invariants,
        final_average: AverageValue::of(&fspec, xbar),
        final_error,
        general,
        steady,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{sample_problem, Objective};

    #[test]
    fn report_times_include_horizon() {
        assert_eq!(report_times(1), vec![1]);
        assert_eq!(report_times(8), vec![1, 2, 4, 8]);
        assert_eq!(report_times(10), vec![1, 2, 4, 8, 10]);
    }

    #[test]
    fn auto_scalar_follows_objective() {
        assert_eq!(ScalarKind::auto(&sample_problem::<f64>(Objective::Polyhedral, false)), ScalarKind::Exact);
        assert_eq!(ScalarKind::auto(&sample_problem::<f64>(Objective::Smooth, false)), ScalarKind::F64);
        assert_eq!("exact".parse::<ScalarKind>().unwrap(), ScalarKind::Exact);
        assert!("f32".parse::<ScalarKind>().is_err());
    }

    #[test]
    fn reference_optimum_picks_lp_for_linear() {
        let lp = reference_optimum(&sample_problem(Objective::Polyhedral, false)).unwrap();
        assert_eq!(lp.grid_resolution, 0.0);
        assert!((lp.f_opt - 1.25).abs() < 1e-12);
        let grid = reference_optimum(&sample_problem(Objective::Smooth, false)).unwrap();
        assert!(grid.grid_resolution > 0.0);
        assert!((grid.f_opt - 0.5).abs() < 1e-6);
    }

    #[test]
    fn short_reproduction() {
        let options = RunOptions {
            horizon: 5000,
            ..RunOptions::default()
        };
        let report = reproduce_figure(Figure::ALL[0], &options).unwrap();
        assert_eq!(report.scalar, ScalarKind::Exact);
        assert_eq!(report.rows.last().unwrap().t, 5000);
        assert!(report.rows.iter().all(|r| r.fixed_start.is_some() == (r.t > 2048)));
        assert!(report.phase.as_ref().unwrap().hit.is_some());
        let non_unique = reproduce_figure(Figure::ALL[2], &options).unwrap();
        assert!(non_unique.phase.is_none());
        assert!(non_unique.detected_start.is_none());
    }

    #[test]
    fn sweep_orders_points_and_fits_slopes() {
        let spec = sample_problem::<f64>(Objective::Smooth, false);
        let options = RunOptions {
            horizon: 20_000,
            ..RunOptions::default()
        };
        let report = sweep(&spec, 0.5, &[10.0, 20.0], &options, None).unwrap();
        assert_eq!(report.points.iter().map(|p| p.v).collect::<Vec<_>>(), vec![10.0, 20.0]);
        assert!(report.plain_slope().is_some());
        assert!(report.hit_slope().is_none());
        assert!(sweep(&spec, 0.5, &[], &options, None).is_err());
    }

    #[test]
    fn diagnose_small_run() {
        let spec = sample_problem::<f64>(Objective::Polyhedral, false);
        let options = RunOptions {
            horizon: 4096,
            ..RunOptions::default()
        };
        let report = diagnose(&spec, &options).unwrap();
        assert!(report.invariants.passed(), "{:?}", report.invariants.failures());
        assert!(report.drift.passed());
        assert!(report.steady.is_some());
    }
}
