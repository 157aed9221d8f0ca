use super::bounds::{theorem_bounds, BoundSet, Geometry, TheoremKind};
use super::dual_at;
use super::multiplier::MultiplierEstimate;
use crate::engine::RunTrace;
use crate::error::{Error, Result};
use crate::problem::ProblemSpec;
use crate::scalar::{distance, norm, Scalar};

/// One step of the drift certificate
/// `‖λ(t+1) − λ'‖² ≤ ‖λ(t) − λ'‖² + (2/V)(d(λ(t)) − d(λ')) + 2C/V²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftStep {
    pub t: usize,
    pub lhs: f64,
    pub rhs: f64,
}

impl DriftStep {
    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    pub steps: Vec<DriftStep>,
    /// Steps whose slack falls below the tolerance.
    pub violations: Vec<usize>,
    pub min_slack: f64,
}

impl DriftReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the drift inequality against a reference point `λ'` at every step
/// of a dense trace. Only concavity of `d` is used, so any `λ' ∈ Π` works.
pub fn drift_certificate<S: Scalar>(
    spec: &ProblemSpec<f64>,
    trace: &RunTrace<S>,
    lambda_ref: &[f64],
    c: f64,
) -> Result<DriftReport> {
    trace.require_dense()?;
    let v = trace.v().to_f64();
    let d_ref = dual_at(spec, lambda_ref)?;
    let mut steps = Vec::with_capacity(trace.horizon());
    let mut violations = Vec::new();
    let mut min_slack = f64::INFINITY;
    let mut here = trace.lambda(0);
    for t in 0..trace.horizon() {
        let next = trace.lambda(t + 1);
        let a = distance(&here, lambda_ref);
        let b = distance(&next, lambda_ref);
        let step = DriftStep {
            t,
            lhs: b * b,
            rhs: a * a + 2.0 / v * (trace.record(t).dual_value - d_ref) + 2.0 * c / (v * v),
        };
        let slack = step.slack();
        min_slack = min_slack.min(slack);
        if slack < -1e-9 * (1.0 + a * a) {
            violations.push(t);
        }
        steps.push(step);
        here = next;
    }
    Ok(DriftReport {
        steps,
        violations,
        min_slack,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReport {
    pub geometry: Geometry,
    /// First `t` with `‖λ(t) − λ̂*‖ ≤ radius + slack`.
    pub hit: Option<usize>,
    /// Membership persisted from `hit` to the end of the trace.
    pub absorbed: bool,
    pub radius: f64,
    pub slack: f64,
    /// Iterations after `hit` that were outside the region.
    pub exits: Vec<usize>,
    pub max_distance: f64,
}

/// Detects the first entry into the convergence set around `λ̂*` and
/// whether the iterates stay there.
pub fn phase_detect<S: Scalar>(
    trace: &RunTrace<S>,
    estimate: &MultiplierEstimate,
    bounds: &BoundSet,
    geometry: Geometry,
) -> Result<PhaseReport> {
    trace.require_dense()?;
    let radius = bounds
        .radius(geometry)
        .ok_or_else(|| Error::Config(format!("no {geometry:?} radius available")))?;
    let slack = 2.0 * estimate.residual;
    let mut hit = None;
    let mut exits = Vec::new();
    let mut max_distance: f64 = 0.0;
    for t in 0..=trace.horizon() {
        let r = distance(&trace.lambda(t), &estimate.lambda_star);
        max_distance = max_distance.max(r);
        let inside = r <= radius + slack;
        match (hit, inside) {
            (None, true) => hit = Some(t),
            (Some(_), false) => exits.push(t),
            _ => {}
        }
    }
    Ok(PhaseReport {
        geometry,
        hit,
        absorbed: hit.is_some() && exits.is_empty(),
        radius,
        slack,
        exits,
        max_distance,
    })
}

/// Steps where the distance to `λ̂*` exceeded `B + slack` and did not fall
/// by at least `rate − slack`, where `rate` is `L_p/(2V)` or `V^-1.5`.
/// Returns `(steps checked, violating steps)`.
pub fn descent_check<S: Scalar>(
    trace: &RunTrace<S>,
    lambda_star: &[f64],
    bounds: &BoundSet,
    geometry: Geometry,
    slack: f64,
) -> Result<(usize, Vec<usize>)> {
    trace.require_dense()?;
    let b = bounds
        .b(geometry)
        .ok_or_else(|| Error::Config(format!("no {geometry:?} curvature constant available")))?;
    let rate = match geometry {
        Geometry::Polyhedral => bounds.l_p.unwrap_or(0.0) / (2.0 * bounds.v),
        Geometry::Smooth => bounds.v.powf(-1.5),
    };
    let mut checked = 0;
    let mut bad = Vec::new();
    let mut here = distance(&trace.lambda(0), lambda_star);
    for t in 0..trace.horizon() {
        let next = distance(&trace.lambda(t + 1), lambda_star);
        let in_range = here >= b + slack && bounds.s.is_none_or(|s| here <= s);
        if in_range {
            checked += 1;
            if next - here > -rate + slack {
                bad.push(t);
            }
        }
        here = next;
    }
    Ok((checked, bad))
}

/// `max_{t ≥ T/2} ‖λ(t)‖ ≤ max_{t < T/2} ‖λ(t)‖ + √(2C)/V`.
pub fn plateau_check<S: Scalar>(trace: &RunTrace<S>, c: f64) -> Result<(f64, f64, bool)> {
    trace.require_dense()?;
    let half = trace.horizon() / 2;
    let step = (2.0 * c).sqrt() / trace.v().to_f64();
    let first = (0..half).map(|t| norm(&trace.lambda(t))).fold(0.0, f64::max);
    let second = (half..=trace.horizon()).map(|t| norm(&trace.lambda(t))).fold(0.0, f64::max);
    Ok((first, second, second <= first + step))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed margin (positive means room to spare).
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    pub checks: Vec<Check>,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }
}

fn check(name: &'static str, margin: f64, tol: f64) -> Check {
    Check {
        name,
        passed: margin >= -tol,
        margin,
    }
}

/// Runs the trace-level invariants against a reference optimum `f_opt` and a
/// reference multiplier (any point of `Π` is valid for the drift check).
pub fn check_invariants<S: Scalar>(
    spec: &ProblemSpec<S>,
    trace: &RunTrace<S>,
    f_opt: f64,
    lambda_ref: &[f64],
) -> Result<InvariantReport> {
    trace.require_dense()?;
    let fspec = spec.to_f64();
    let (i, nc) = (trace.dimension(), trace.num_constraints());
    let horizon = trace.horizon();
    let v = trace.v().to_f64();
    let c = fspec.squared_norm_bound();
    let bounds = BoundSet::for_problem(&fspec, v);
    let mut checks = Vec::new();

    let lambdas: Vec<Vec<f64>> = (0..=horizon).map(|t| trace.lambda(t)).collect();

    let w_min = lambdas
        .iter()
        .flat_map(|l| l[..nc].iter().copied())
        .fold(0.0, f64::min);
    checks.push(check("multipliers stay nonnegative", w_min, 0.0));

    let step = bounds.step();
    let worst_step = lambdas.windows(2).map(|p| distance(&p[0], &p[1])).fold(0.0, f64::max);
    checks.push(check("one-step move bound", step - worst_step, 1e-12));

    // Running sums of x and y to form the plain averages at every T.
    let mut xs = vec![0.0; i];
    let mut ys = vec![0.0; i];
    let z0 = &lambdas[0][nc..];
    let w0 = &lambdas[0][..nc];
    let mut identity: f64 = 0.0;
    let mut telescope = f64::INFINITY;
    let mut theorem = f64::INFINITY;
    let mut dual_max = f64::NEG_INFINITY;
    for t in 0..horizon {
        let r = trace.record(t);
        dual_max = dual_max.max(r.dual_value);
        for c in 0..i {
            xs[c] += r.x[c];
            ys[c] += r.y[c];
        }
        let n = (t + 1) as f64;
        let lam = &lambdas[t + 1];
        let xbar: Vec<f64> = xs.iter().map(|s| s / n).collect();
        let ybar: Vec<f64> = ys.iter().map(|s| s / n).collect();
        for c in 0..i {
            let rhs = v / n * (lam[nc + c] - z0[c]);
            identity = identity.max((xbar[c] - ybar[c] - rhs).abs());
        }
        let gy = fspec.constraint_values(&ybar);
        for j in 0..nc {
            telescope = telescope.min(v / n * (lam[j] - w0[j]) - gy[j]);
        }
        let logged = (t + 1).is_power_of_two() || t + 1 == horizon;
        if logged {
            let wb = theorem_bounds(trace, &bounds, 0, t + 1, TheoremKind::General, None)?;
            let gap = fspec.objective_value(&xbar) - f_opt;
            theorem = theorem.min(wb.objective_gap - gap);
            let gx = fspec.constraint_values(&xbar);
            for j in 0..nc {
                theorem = theorem.min(wb.violation[j] - gx[j]);
            }
        }
    }
    let identity_tol = 1e-9 * (1.0 + norm(&lambdas[horizon]));
    checks.push(check("average gap identity", identity_tol - identity, 0.0));
    checks.push(check("constraint telescope", telescope, 1e-9));

    let drift = drift_certificate(&fspec, trace, lambda_ref, c)?;
    checks.push(Check {
        name: "per-step drift certificate",
        passed: drift.passed(),
        margin: drift.min_slack,
    });

    checks.push(check("weak duality", f_opt - dual_max, 1e-6));
    checks.push(check("general bound dominance", theorem, 1e-9));

    let (_, _, plateau) = plateau_check(trace, c)?;
    checks.push(Check {
        name: "multiplier plateau",
        passed: plateau,
        margin: if plateau { 0.0 } else { -1.0 },
    });

    Ok(InvariantReport { checks })
}
