//! Error of averaged iterates and iterations-to-ε measurements.

use crate::engine::RunTrace;
use crate::error::Result;
use crate::problem::ProblemSpec;
use crate::scalar::Scalar;

/// `max(|f(x) − f_opt|, max_j g_j(x)⁺)`.
pub fn average_error(spec: &ProblemSpec<f64>, x: &[f64], f_opt: f64) -> f64 {
    let gap = (spec.objective_value(x) - f_opt).abs();
    spec.constraint_values(x).into_iter().fold(gap, |e, g| e.max(g))
}

/// Error of the average of `x(start .. start+len-1)` for every `len` in
/// `1 ..= horizon − start`.
pub fn window_errors<S: Scalar>(
    spec: &ProblemSpec<f64>,
    trace: &RunTrace<S>,
    start: usize,
    f_opt: f64,
) -> Result<Vec<f64>> {
    trace.require_dense()?;
    let i = trace.dimension();
    let mut sum = vec![0.0; i];
    let mut avg = vec![0.0; i];
    let mut out = Vec::with_capacity(trace.horizon().saturating_sub(start));
    for t in start..trace.horizon() {
        let r = trace.record(t);
        let n = (t - start + 1) as f64;
        for c in 0..i {
            sum[c] += r.x[c];
            avg[c] = sum[c] / n;
        }
        out.push(average_error(spec, &avg, f_opt));
    }
    Ok(out)
}

/// Smallest `n` such that `errors[k] ≤ eps` for every `k ≥ n − 1`, i.e. the
/// window length after which the error stays within `eps`. `None` when the
/// last error is above `eps`.
pub fn settle_length(errors: &[f64], eps: f64) -> Option<usize> {
    if errors.last().is_none_or(|e| *e > eps) {
        return None;
    }
    let last_bad = errors.iter().rposition(|e| *e > eps);
    Some(last_bad.map_or(1, |k| k + 2))
}

/// Iterations until the plain average settles within `eps`.
pub fn plain_iterations_to_eps<S: Scalar>(
    spec: &ProblemSpec<f64>,
    trace: &RunTrace<S>,
    f_opt: f64,
    eps: f64,
) -> Result<Option<usize>> {
    Ok(settle_length(&window_errors(spec, trace, 0, f_opt)?, eps))
}

/// Iterations until some staggered average settles within `eps`: the best
/// `R + L` over the restart times `R`, where `L` is the settle length of the
/// average started at `R`.
pub fn staggered_iterations_to_eps<S: Scalar>(
    spec: &ProblemSpec<f64>,
    trace: &RunTrace<S>,
    f_opt: f64,
    eps: f64,
) -> Result<Option<usize>> {
    let mut best: Option<usize> = None;
    for start in trace.restart_times() {
        if best.is_some_and(|b| start >= b) {
            break;
        }
        if let Some(len) = settle_length(&window_errors(spec, trace, start, f_opt)?, eps) {
            best = Some(best.map_or(start + len, |b| b.min(start + len)));
        }
    }
    Ok(best)
}

/// Errors of the staggered average over `x(r .. r+window-1)` and of the plain
/// average over `x(0 .. r+window-1)`, where `r` is the first restart at or
/// after `t_hit`. `None` if no such restart leaves room for the window.
pub fn staggered_vs_plain<S: Scalar>(
    spec: &ProblemSpec<f64>,
    trace: &RunTrace<S>,
    f_opt: f64,
    t_hit: usize,
    window: usize,
) -> Result<Option<(usize, f64, f64)>> {
    let Some(r) = trace.restart_times().into_iter().find(|&r| r >= t_hit) else {
        return Ok(None);
    };
    if r + window > trace.horizon() {
        return Ok(None);
    }
    let stag = crate::engine::staggered_average(trace, r, window)?;
    let plain = crate::engine::staggered_average(trace, 0, r + window)?;
    Ok(Some((r, average_error(spec, &stag, f_opt), average_error(spec, &plain, f_opt))))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settle_length_examples() {
        assert_eq!(settle_length(&[0.5, 0.1, 0.2, 0.05, 0.04], 0.1), Some(4));
        assert_eq!(settle_length(&[0.01, 0.01], 0.1), Some(1));
        assert_eq!(settle_length(&[0.01, 0.2], 0.1), None);
        assert_eq!(settle_length(&[], 0.1), None);
    }

    #[test]
    fn slope_of_a_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
        assert!((log_log_slope(&x, &y) - 1.5).abs() < 1e-12);
    }
}
