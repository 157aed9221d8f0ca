use serde::Serialize;
use timeavg::analysis::{BoundSet, MultiplierEstimate, PhaseReport, WindowBounds};
use timeavg::experiments::{AverageValue, DiagnoseReport, FigureReport, RunOptions, ScalarKind, SweepReport};
use timeavg::{RunTrace, Scalar, Spec};

/// A header plus string cells; floats use the shortest round-trip form.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: Vec<String>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn to_csv(&self) -> csv::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn nums(vs: &[f64]) -> impl Iterator<Item = String> + '_ {
    vs.iter().map(|v| num(*v))
}

fn names<'a>(prefix: &'a str, n: usize, suffix: &'a str) -> impl Iterator<Item = String> + 'a {
    (1..=n).map(move |k| format!("{prefix}{k}{suffix}"))
}

/// One row per recorded iteration.
pub fn trace_table<S: Scalar>(spec: &Spec, trace: &RunTrace<S>) -> Table {
    let (i, j) = (trace.dimension(), trace.num_constraints());
    let mut header = vec!["t".to_string()];
    header.extend(names("x_", i, ""));
    header.extend(names("y_", i, ""));
    header.extend(names("w_", j, ""));
    header.extend(names("z_", i, ""));
    header.push("d_lambda".into());
    header.extend(names("xbar_", i, ""));
    header.push("f_xbar".into());
    header.extend(names("g_", j, "_xbar"));
    header.push("frame_id".into());
    header.extend(names("xbar_frame_", i, ""));
    let mut table = Table::new(header);
    for r in trace.records() {
        let mut row = vec![r.t.to_string()];
        row.extend(nums(r.x));
        row.extend(nums(r.y));
        row.extend(nums(r.w));
        row.extend(nums(r.z));
        row.push(num(r.dual_value));
        row.extend(nums(r.xbar));
        row.push(num(spec.objective_value(r.xbar)));
        row.extend(spec.constraint_values(r.xbar).into_iter().map(num));
        row.push(r.frame_id.to_string());
        row.extend(nums(r.frame_xbar));
        table.rows.push(row);
    }
    table
}

fn push_average(row: &mut Vec<String>, avg: Option<&AverageValue>, j: usize) {
    match avg {
        Some(a) => {
            row.push(num(a.f));
            row.extend(nums(&a.g));
        }
        None => row.extend(std::iter::repeat_n(String::new(), j + 1)),
    }
}

/// Averages at `T = 2^k`: plain, fixed-start staggered, detected-start
/// staggered and current frame. Empty cells where an average has not started.
pub fn figure_table(report: &FigureReport) -> Table {
    let j = report.final_row().plain.g.len();
    let i = report.final_row().plain.x.len();
    let mut header = vec!["t".to_string()];
    header.extend(names("xbar_", i, ""));
    for kind in ["plain", "fixed", "detected", "frame"] {
        header.push(format!("f_{kind}"));
        header.extend((1..=j).map(|k| format!("g_{k}_{kind}")));
    }
    let mut table = Table::new(header);
    for r in &report.rows {
        let mut row = vec![r.t.to_string()];
        row.extend(nums(&r.plain.x));
        push_average(&mut row, Some(&r.plain), j);
        push_average(&mut row, r.fixed_start.as_ref(), j);
        push_average(&mut row, r.detected_start.as_ref(), j);
        push_average(&mut row, Some(&r.frame), j);
        table.rows.push(row);
    }
    table
}

pub fn sweep_table(report: &SweepReport) -> Table {
    let header = ["v", "eps", "plain_iterations", "staggered_iterations", "t_hit"];
    let mut table = Table::new(header.iter().map(|s| s.to_string()).collect());
    let opt = |v: Option<usize>| v.map_or(String::new(), |v| v.to_string());
    for p in &report.points {
        table
            .rows
            .push(vec![num(p.v), num(p.eps), opt(p.plain), opt(p.staggered), opt(p.hit)]);
    }
    table
}

/// Per-step drift certificate against the estimated multiplier.
pub fn certificate_table(report: &DiagnoseReport) -> Table {
    let header = ["t", "lhs", "rhs", "slack"];
    let mut table = Table::new(header.iter().map(|s| s.to_string()).collect());
    for s in &report.drift.steps {
        table
            .rows
            .push(vec![s.t.to_string(), num(s.lhs), num(s.rhs), num(s.slack())]);
    }
    table
}

#[derive(Debug, Serialize)]
pub struct SolveSummary {
    pub scalar: String,
    pub v: f64,
    pub horizon: usize,
    pub restart_base: Option<usize>,
    pub xbar: Vec<f64>,
    pub f_xbar: f64,
    pub g_xbar: Vec<f64>,
    pub final_w: Vec<f64>,
    pub final_z: Vec<f64>,
}

impl SolveSummary {
    pub fn new<S: Scalar>(spec: &Spec, trace: &RunTrace<S>, scalar: ScalarKind, options: &RunOptions) -> Self {
        let xbar: Vec<f64> = trace.plain_average().iter().map(Scalar::to_f64).collect();
        let last = trace.final_state();
        SolveSummary {
            scalar: scalar.to_string(),
            v: options.v,
            horizon: trace.horizon(),
            restart_base: options.restart_base,
            f_xbar: spec.objective_value(&xbar),
            g_xbar: spec.constraint_values(&xbar),
            xbar,
            final_w: last.w.iter().map(Scalar::to_f64).collect(),
            final_z: last.z.iter().map(Scalar::to_f64).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub scalar: String,
    pub horizon: usize,
    pub restart_base: Option<usize>,
    pub f_opt: f64,
    pub eps_rule: &'static str,
    pub v: Vec<f64>,
    pub plain_slope: Option<f64>,
    pub staggered_slope: Option<f64>,
    pub hit_slope: Option<f64>,
}

impl SweepSummary {
    pub fn new(report: &SweepReport, options: &RunOptions) -> Self {
        SweepSummary {
            scalar: report.scalar.to_string(),
            horizon: options.horizon,
            restart_base: options.restart_base,
            f_opt: report.f_opt,
            eps_rule: "eps = 1/V",
            v: report.points.iter().map(|p| p.v).collect(),
            plain_slope: report.plain_slope(),
            staggered_slope: report.staggered_slope(),
            hit_slope: report.hit_slope(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct MultiplierSummary {
    pub lambda_star: Vec<f64>,
    pub method: String,
    pub residual: f64,
    pub dual_value: f64,
    pub l_p: f64,
    pub l_s: f64,
    pub possibly_non_unique: bool,
}

impl From<&MultiplierEstimate> for MultiplierSummary {
    fn from(e: &MultiplierEstimate) -> Self {
        MultiplierSummary {
            lambda_star: e.lambda_star.clone(),
            method: format!("{:?}", e.method),
            residual: e.residual,
            dual_value: e.dual_value,
            l_p: e.l_p,
            l_s: e.l_s,
            possibly_non_unique: e.possibly_non_unique,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct BoundSummary {
    pub m: f64,
    pub c: f64,
    pub step: f64,
    pub b_p: Option<f64>,
    pub b_s: Option<f64>,
    pub radius_p: Option<f64>,
    pub radius_s: Option<f64>,
}

impl From<&BoundSet> for BoundSummary {
    fn from(b: &BoundSet) -> Self {
        BoundSummary {
            m: b.m,
            c: b.c,
            step: b.step(),
            b_p: b.b_p,
            b_s: b.b_s,
            radius_p: b.radius_p,
            radius_s: b.radius_s,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PhaseSummary {
    pub geometry: String,
    pub hit: Option<usize>,
    pub absorbed: bool,
    pub radius: f64,
    pub slack: f64,
    pub exits: usize,
    pub first_exit: Option<usize>,
    pub max_distance: f64,
}

impl From<&PhaseReport> for PhaseSummary {
    fn from(p: &PhaseReport) -> Self {
        PhaseSummary {
            geometry: format!("{:?}", p.geometry).to_lowercase(),
            hit: p.hit,
            absorbed: p.absorbed,
            radius: p.radius,
            slack: p.slack,
            exits: p.exits.len(),
            first_exit: p.exits.first().copied(),
            max_distance: p.max_distance,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct BoundValues {
    pub start: usize,
    pub objective_gap: f64,
    pub violation: Vec<f64>,
}

impl BoundValues {
    fn new(start: usize, b: &WindowBounds) -> Self {
        BoundValues {
            start,
            objective_gap: b.objective_gap,
            violation: b.violation.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CheckSummary {
    pub name: String,
    pub passed: bool,
    pub margin: f64,
}

#[derive(Debug, Serialize)]
pub struct DiagnoseSummary {
    pub scalar: String,
    pub v: f64,
    pub horizon: usize,
    pub oracle_f_opt: f64,
    pub oracle_argmin: Vec<f64>,
    pub final_xbar: Vec<f64>,
    pub final_error: f64,
    pub drift_passed: bool,
    pub drift_min_slack: f64,
    pub drift_violations: usize,
    pub multiplier: MultiplierSummary,
    pub bounds: BoundSummary,
    pub phase: Option<PhaseSummary>,
    pub general_bound: BoundValues,
    pub steady_bound: Option<BoundValues>,
    pub invariants: Vec<CheckSummary>,
}

impl DiagnoseSummary {
    pub fn new(r: &DiagnoseReport) -> Self {
        DiagnoseSummary {
            scalar: r.scalar.to_string(),
            v: r.v,
            horizon: r.horizon,
            oracle_f_opt: r.oracle.f_opt,
            oracle_argmin: r.oracle.argmin.clone(),
            final_xbar: r.final_average.x.clone(),
            final_error: r.final_error,
            drift_passed: r.drift.passed(),
            drift_min_slack: r.drift.min_slack,
            drift_violations: r.drift.violations.len(),
            multiplier: (&r.estimate).into(),
            bounds: (&r.bounds).into(),
            phase: r.phase.as_ref().map(Into::into),
            general_bound: BoundValues::new(0, &r.general),
            steady_bound: r.steady.as_ref().map(|(s, b)| BoundValues::new(*s, b)),
            invariants: r
                .invariants
                .checks
                .iter()
                .map(|c| CheckSummary {
                    name: c.name.to_string(),
                    passed: c.passed,
                    margin: c.margin,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunHeader {
    pub figure: u8,
    pub v: f64,
    pub horizon: usize,
    pub logging: &'static str,
    pub scalar: String,
    pub restart_base: Option<usize>,
    pub optimum: f64,
    pub oracle_f_opt: f64,
    pub fixed_start: usize,
    pub detected_start: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct FinalAverage {
    pub xbar: Vec<f64>,
    pub f: f64,
    pub g: Vec<f64>,
    pub error: f64,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct FigureSummary {
    pub run: RunHeader,
    #[serde(rename = "final")]
    pub last: FinalAverage,
    pub multiplier: MultiplierSummary,
    pub bounds: BoundSummary,
    pub phase: Option<PhaseSummary>,
}

impl FigureSummary {
    pub fn new(r: &FigureReport, restart_base: Option<usize>) -> Self {
        let last = &r.final_row().plain;
        FigureSummary {
            run: RunHeader {
                figure: r.figure.number,
                v: r.v,
                horizon: r.horizon,
                logging: "T = 2^k and the horizon",
                scalar: r.scalar.to_string(),
                restart_base,
                optimum: r.f_opt,
                oracle_f_opt: r.oracle.f_opt,
                fixed_start: r.fixed_start,
                detected_start: r.detected_start,
            },
            last: FinalAverage {
                xbar: last.x.clone(),
                f: last.f,
                g: last.g.clone(),
                error: last.error(r.f_opt),
                passed: r.passed(),
            },
            multiplier: (&r.estimate).into(),
            bounds: (&r.bounds).into(),
            phase: r.phase.as_ref().map(Into::into),
        }
    }
}
