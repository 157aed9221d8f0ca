//! Brute-force reference solvers for the one-shot convex problem
//! `min f(x)` subject to `g(x) ≤ 0`, `x ∈ conv(𝒳)`.

use crate::error::{Error, Result};
use crate::problem::{DecisionSet, Piece, ProblemSpec};
use crate::scalar::Scalar;

/// Reference points count as feasible when `max_j g_j ≤ FEASIBILITY_TOL`.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Largest number of points a single grid stage may evaluate.
pub const GRID_BUDGET: usize = 20_000_000;

pub const MAX_LP_DIMENSION: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub f_opt: f64,
    pub argmin: Vec<f64>,
    /// Spacing of the finest grid that produced `argmin` (0 for the LP oracle).
    pub grid_resolution: f64,
    /// `max(0, max_j g_j(argmin))`.
    pub certificate: f64,
}

fn certificate(spec: &ProblemSpec<f64>, x: &[f64]) -> f64 {
    spec.constraint_values(x).into_iter().fold(0.0, f64::max)
}

struct Incumbent {
    value: f64,
    point: Vec<f64>,
}

impl Incumbent {
    fn offer(&mut self, value: f64, point: &[f64]) {
        if value < self.value || value == self.value && point < self.point.as_slice() {
            self.value = value;
            self.point = point.to_vec();
        }
    }
}

/// Visits every point of the product of the per-axis level lists.
fn for_each_point(axes: &[Vec<f64>], mut visit: impl FnMut(&[f64])) {
    let mut idx = vec![0usize; axes.len()];
    let mut point: Vec<f64> = axes.iter().map(|a| a[0]).collect();
    loop {
        visit(&point);
        let mut c = axes.len();
        loop {
            if c == 0 {
                return;
            }
            c -= 1;
            idx[c] += 1;
            if idx[c] < axes[c].len() {
                point[c] = axes[c][idx[c]];
                break;
            }
            idx[c] = 0;
            point[c] = axes[c][0];
        }
    }
}

fn levels(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    let mut out: Vec<f64> = (0..=n).map(|k| lo + k as f64 * step).collect();
    if hi - out[n] > 1e-12 * (1.0 + hi.abs()) {
        out.push(hi);
    }
    out
}

fn check_budget(axes: &[Vec<f64>]) -> Result<()> {
    let mut count: usize = 1;
    for a in axes {
        count = count.saturating_mul(a.len());
    }
    if count > GRID_BUDGET {
        return Err(Error::Refused(format!(
            "reference grid would need {count} points (limit {GRID_BUDGET})"
        )));
    }
    Ok(())
}

/// Grid search over `conv(𝒳)` at `resolution`, refined twice around the
/// incumbent at `resolution/10` and `resolution/100`.
pub fn solve_reference<S: Scalar>(spec: &ProblemSpec<S>, resolution: f64) -> Result<OracleResult> {
    if !(resolution > 0.0) {
        return Err(Error::Precondition("resolution must be positive".into()));
    }
    let spec = spec.to_f64();
    match spec.decision_set() {
        DecisionSet::GridProduct(_) => solve_box(&spec, resolution),
        DecisionSet::ExplicitPoints(points) => solve_points(&spec, points, resolution),
    }
}

fn solve_box(spec: &ProblemSpec<f64>, resolution: f64) -> Result<OracleResult> {
    let (lo, hi) = spec.decision_set().hull_bounds();
    let mut best = Incumbent {
        value: f64::INFINITY,
        point: Vec::new(),
    };
    let search = |axes: &[Vec<f64>], best: &mut Incumbent| -> Result<()> {
        check_budget(axes)?;
        for_each_point(axes, |x| {
            if spec.constraint_values(x).into_iter().all(|g| g <= FEASIBILITY_TOL) {
                best.offer(spec.objective_value(x), x);
            }
        });
        Ok(())
    };
    let coarse: Vec<Vec<f64>> = lo.iter().zip(&hi).map(|(l, h)| levels(*l, *h, resolution)).collect();
    search(&coarse, &mut best)?;
    if best.point.is_empty() {
        return Err(Error::Infeasible(format!(
            "no grid point at resolution {resolution} satisfies the constraints"
        )));
    }
    let mut r = resolution;
    for _ in 0..2 {
        let center = best.point.clone();
        let local: Vec<Vec<f64>> = (0..lo.len())
            .map(|c| levels((center[c] - r).max(lo[c]), (center[c] + r).min(hi[c]), r / 10.0))
            .collect();
        search(&local, &mut best)?;
        r /= 10.0;
    }
    Ok(OracleResult {
        f_opt: best.value,
        certificate: certificate(spec, &best.point),
        argmin: best.point,
        grid_resolution: r,
    })
}

/// Weight vectors on the simplex with entries in multiples of `1/units`.
fn compositions(parts: usize, units: usize, visit: &mut impl FnMut(&[usize])) {
    fn rec(prefix: &mut Vec<usize>, parts: usize, left: usize, visit: &mut impl FnMut(&[usize])) {
        if prefix.len() + 1 == parts {
            prefix.push(left);
            visit(prefix);
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            rec(prefix, parts, left - k, visit);
            prefix.pop();
        }
    }
    rec(&mut Vec::with_capacity(parts), parts, units, visit);
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn solve_points(spec: &ProblemSpec<f64>, points: &[Vec<f64>], resolution: f64) -> Result<OracleResult> {
    let m = points.len();
    if m > 8 {
        return Err(Error::Refused(format!("{m} points; the simplex oracle handles at most 8")));
    }
    let dim = spec.dimension();
    let mut best = Incumbent {
        value: f64::INFINITY,
        point: Vec::new(),
    };
    let mut weights_best: Vec<f64> = Vec::new();
    let mut final_step = resolution;
    // Each stage uses a simplex grid of step `r` restricted to weights within
    // `window` of the incumbent weights.
    let stage = |step: f64, window: Option<(&[f64], f64)>, best: &mut Incumbent, wb: &mut Vec<f64>| -> Result<()> {
        let units = (1.0 / step).round().max(1.0) as usize;
        if binomial(units + m - 1, m - 1) > GRID_BUDGET {
            return Err(Error::Refused(format!("simplex grid with step {step} is too large")));
        }
        let mut x = vec![0.0; dim];
        let mut weights = vec![0.0; m];
        compositions(m, units, &mut |k| {
            for (w, ki) in weights.iter_mut().zip(k) {
                *w = *ki as f64 / units as f64;
            }
            if let Some((center, r)) = window {
                if weights.iter().zip(center).any(|(w, c)| (w - c).abs() > r + 1e-12) {
                    return;
                }
            }
            x.iter_mut().for_each(|v| *v = 0.0);
            for (w, p) in weights.iter().zip(points) {
                for c in 0..dim {
                    x[c] += w * p[c];
                }
            }
            if spec.constraint_values(&x).into_iter().all(|g| g <= FEASIBILITY_TOL) {
                let before = best.value;
                best.offer(spec.objective_value(&x), &x);
                if best.value < before || wb.is_empty() {
                    *wb = weights.clone();
                }
            }
        });
        Ok(())
    };
    stage(resolution, None, &mut best, &mut weights_best)?;
    if best.point.is_empty() {
        return Err(Error::Infeasible(format!(
            "no convex combination at resolution {resolution} satisfies the constraints"
        )));
    }
    for _ in 0..2 {
        let center = weights_best.clone();
        match stage(final_step / 10.0, Some((&center, final_step)), &mut best, &mut weights_best) {
            Ok(()) => final_step /= 10.0,
            Err(Error::Refused(_)) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(OracleResult {
        f_opt: best.value,
        certificate: certificate(spec, &best.point),
        argmin: best.point,
        grid_resolution: final_step,
    })
}

/// Exact LP over the box `conv(𝒳)` by vertex enumeration: every choice of
/// `I` hyperplanes among the box facets and `g_j = 0` is intersected, and the
/// best feasible vertex wins. Runs in the scalar type of `spec`, so an exact
/// spec gives an exact optimum.
pub fn solve_reference_lp<S: Scalar>(spec: &ProblemSpec<S>) -> Result<OracleResult> {
    let dim = spec.dimension();
    if dim > MAX_LP_DIMENSION {
        return Err(Error::Refused(format!(
            "dimension {dim} exceeds the vertex-enumeration limit {MAX_LP_DIMENSION}"
        )));
    }
    let slopes: Vec<S> = spec
        .objective()
        .pieces
        .iter()
        .map(|p| match p {
            Piece::Linear { slope } => Ok(slope.clone()),
            _ => Err(Error::Precondition("the LP oracle needs a linear objective".into())),
        })
        .collect::<Result<_>>()?;
    if !matches!(spec.decision_set(), DecisionSet::GridProduct(_)) {
        return Err(Error::Precondition("the LP oracle needs a grid decision set".into()));
    }
    let (lo, hi) = spec.decision_set().hull_bounds();

    // Hyperplanes a·x = b.
    let mut planes: Vec<(Vec<S>, S)> = Vec::new();
    for c in 0..dim {
        let mut e = vec![S::zero(); dim];
        e[c] = S::one();
        planes.push((e.clone(), lo[c].clone()));
        planes.push((e, hi[c].clone()));
    }
    for g in spec.constraints() {
        planes.push((g.coeffs.clone(), -g.offset.clone()));
    }

    let tol = S::from_f64(FEASIBILITY_TOL);
    let mut best: Option<(S, Vec<S>)> = None;
    let mut choice: Vec<usize> = (0..dim).collect();
    let n = planes.len();
    loop {
        if let Some(x) = intersect(&planes, &choice) {
            let inside = x
                .iter()
                .enumerate()
                .all(|(c, v)| v.clone() >= lo[c].clone() - tol.clone() && v.clone() <= hi[c].clone() + tol.clone());
            let feasible = inside && spec.constraint_values(&x).iter().all(|g| g <= &tol);
            if feasible {
                let value = x.iter().zip(&slopes).fold(S::zero(), |a, (v, s)| a + v.clone() * s.clone());
                let better = match &best {
                    None => true,
                    Some((bv, bx)) => value < *bv || value == *bv && lex_less(&x, bx),
                };
                if better {
                    best = Some((value, x));
                }
            }
        }
        // Next combination of `dim` indices out of `n`.
        let mut k = dim;
        loop {
            if k == 0 {
                let (value, x) = best.ok_or_else(|| Error::Infeasible("no feasible vertex".into()))?;
                let xf: Vec<f64> = x.iter().map(Scalar::to_f64).collect();
                let cert = spec
                    .constraint_values(&x)
                    .iter()
                    .map(Scalar::to_f64)
                    .fold(0.0, f64::max);
                return Ok(OracleResult {
                    f_opt: value.to_f64(),
                    argmin: xf,
                    grid_resolution: 0.0,
                    certificate: cert,
                });
            }
            k -= 1;
            if choice[k] < n - dim + k {
                choice[k] += 1;
                for r in k + 1..dim {
                    choice[r] = choice[r - 1] + 1;
                }
                break;
            }
        }
    }
}

fn lex_less<S: Scalar>(a: &[S], b: &[S]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

/// Solves the square system of the chosen hyperplanes by Gaussian
/// elimination with partial pivoting; `None` if it is singular.
fn intersect<S: Scalar>(planes: &[(Vec<S>, S)], choice: &[usize]) -> Option<Vec<S>> {
    let n = choice.len();
    let mut a: Vec<Vec<S>> = choice
        .iter()
        .map(|&k| {
            let mut row = planes[k].0.clone();
            row.push(planes[k].1.clone());
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| {
            a[r][col]
                .abs()
                .partial_cmp(&a[s][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].is_zero() || a[pivot][col].abs().to_f64() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let factor = a[r][col].clone() / a[col][col].clone();
                for c in col..=n {
                    let delta = factor.clone() * a[col][c].clone();
                    a[r][c] = a[r][c].clone() - delta;
                }
            }
        }
    }
    Some((0..n).map(|r| a[r][n].clone() / a[r][r].clone()).collect())
}
