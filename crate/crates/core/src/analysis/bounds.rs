use crate::engine::RunTrace;
use crate::error::{Error, Result};
use crate::problem::ProblemSpec;
use crate::scalar::{norm, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Geometry {
    /// `d(λ*) ≥ d(λ) + L_p‖λ − λ*‖`
    Polyhedral,
    /// `d(λ*) ≥ d(λ) + L_s‖λ − λ*‖²` near `λ*`
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TheoremKind {
    /// Window bound from the multipliers at both ends of the window.
    General,
    /// Steady-state bound with `B_p`, for windows starting inside `R_p`.
    Polyhedral,
    /// Steady-state bound with `B_s`, for windows starting inside `R_s`.
    Smooth,
}

/// Problem constants and the convergence-set radii derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSet {
    pub m: f64,
    pub c: f64,
    pub v: f64,
    pub l_p: Option<f64>,
    pub l_s: Option<f64>,
    /// Radius of the locally smooth neighborhood; `None` is read as unbounded.
    pub s: Option<f64>,
    pub b_p: Option<f64>,
    pub b_s: Option<f64>,
    pub radius_p: Option<f64>,
    pub radius_s: Option<f64>,
}

impl BoundSet {
    pub fn new(m: f64, c: f64, v: f64) -> Self {
        let mut b = BoundSet {
            m,
            c,
            v,
            l_p: None,
            l_s: None,
            s: None,
            b_p: None,
            b_s: None,
            radius_p: None,
            radius_s: None,
        };
        b.refresh();
        b
    }

    pub fn for_problem<S: Scalar>(spec: &ProblemSpec<S>, v: f64) -> Self {
        Self::new(spec.lipschitz_bound(), spec.squared_norm_bound(), v)
    }

    pub fn with_l_p(mut self, l_p: Option<f64>) -> Self {
        self.l_p = l_p;
        self.refresh();
        self
    }

    pub fn with_l_s(mut self, l_s: Option<f64>) -> Self {
        self.l_s = l_s;
        self.refresh();
        self
    }

    pub fn with_s(mut self, s: Option<f64>) -> Self {
        self.s = s;
        self
    }

    /// `√(2C)/V`, the largest possible move of `λ` in one step.
    pub fn step(&self) -> f64 {
        (2.0 * self.c).sqrt() / self.v
    }

    pub fn radius(&self, geometry: Geometry) -> Option<f64> {
        match geometry {
            Geometry::Polyhedral => self.radius_p,
            Geometry::Smooth => self.radius_s,
        }
    }

    pub fn b(&self, geometry: Geometry) -> Option<f64> {
        match geometry {
            Geometry::Polyhedral => self.b_p,
            Geometry::Smooth => self.b_s,
        }
    }

    /// Whether the smooth-case region fits inside the neighborhood `S`.
    /// Always true when `S` is not supplied.
    pub fn smooth_region_valid(&self) -> Option<bool> {
        let r = self.radius_s?;
        Some(self.s.is_none_or(|s| r < s))
    }

    fn refresh(&mut self) {
        let (c, v) = (self.c, self.v);
        self.b_p = self
            .l_p
            .filter(|l| *l > 0.0)
            .map(|l| (l / (2.0 * v)).max(2.0 * c / (v * l)));
        self.b_s = self.l_s.filter(|l| *l > 0.0).map(|l| {
            let a = v.powf(-1.5);
            let b = (v.sqrt() + (v + 4.0 * l * c * v).sqrt()) / (2.0 * l * v);
            a.max(b)
        });
        let step = self.step();
        self.radius_p = self.b_p.map(|b| b + step);
        self.radius_s = self.b_s.map(|b| b + step);
    }
}

/// Right-hand sides of a theorem bound for one averaging window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowBounds {
    pub objective_gap: f64,
    /// One entry per constraint.
    pub violation: Vec<f64>,
}

impl WindowBounds {
    pub fn max_violation(&self) -> f64 {
        self.violation.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub(crate) fn lambda_at<S: Scalar>(trace: &RunTrace<S>, t: usize) -> Result<Vec<f64>> {
    if t == 0 {
        Ok(trace.initial_state().lambda())
    } else if t == trace.horizon() {
        Ok(trace.final_state().lambda())
    } else if t < trace.horizon() {
        trace.require_dense()?;
        Ok(trace.lambda(t))
    } else {
        Err(Error::Range {
            start: t,
            end: t + 1,
            len: trace.horizon(),
        })
    }
}

/// Bounds on `f(x̄) − f^opt` and `g_j(x̄)` for the average of `x(t0 .. t0+len-1)`.
pub fn theorem_bounds<S: Scalar>(
    trace: &RunTrace<S>,
    bounds: &BoundSet,
    t0: usize,
    len: usize,
    which: TheoremKind,
    lambda_star: Option<&[f64]>,
) -> Result<WindowBounds> {
    if len == 0 || t0 + len > trace.horizon() {
        return Err(Error::Range {
            start: t0,
            end: t0 + len,
            len: trace.horizon(),
        });
    }
    let (v, m, c) = (bounds.v, bounds.m, bounds.c);
    let t = len as f64;
    let nc = trace.num_constraints();

    if which == TheoremKind::General {
        let a = lambda_at(trace, t0)?;
        let b = lambda_at(trace, t0 + len)?;
        let dz: Vec<f64> = b[nc..].iter().zip(&a[nc..]).map(|(x, y)| x - y).collect();
        let dz = norm(&dz);
        let na = norm(&a);
        let nb = norm(&b);
        let objective_gap = v / (2.0 * t) * (na * na - nb * nb) + c / v + v * m / t * dz;
        let violation = (0..nc).map(|j| v / t * (b[j] - a[j]).abs() + v * m / t * dz).collect();
        return Ok(WindowBounds { objective_gap, violation });
    }

    let geometry = if which == TheoremKind::Polyhedral {
        Geometry::Polyhedral
    } else {
        Geometry::Smooth
    };
    let lambda_star = lambda_star.ok_or_else(|| Error::Config("steady-state bounds need a multiplier estimate".into()))?;
    let r = bounds
        .radius(geometry)
        .ok_or_else(|| Error::Config(format!("no {geometry:?} curvature constant available")))?;
    let ls = norm(lambda_star);
    let objective_gap = c / v + 2.0 * v * m * r / t + v / (2.0 * t) * (r * r + 4.0 * ls * r);
    let violation = vec![2.0 * v * (1.0 + m) * r / t; nc];
    Ok(WindowBounds { objective_gap, violation })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radii_follow_their_definitions() {
        let b = BoundSet::new(5f64.sqrt(), 112.5, 100.0).with_l_p(Some(0.5));
        assert_eq!(b.b_p, Some((0.5f64 / 200.0).max(225.0 / 50.0)));
        assert!((b.radius_p.unwrap() - (4.5 + 15.0 / 100.0)).abs() < 1e-12);
        assert!(b.b_s.is_none());

        let b = b.with_l_s(Some(2.0));
        let expect = (10.0 + (100.0f64 + 8.0 * 112.5 * 100.0).sqrt()) / 400.0;
        assert!((b.b_s.unwrap() - expect).abs() < 1e-12);
        assert_eq!(b.smooth_region_valid(), Some(true));
        assert_eq!(b.clone().with_s(Some(0.1)).smooth_region_valid(), Some(false));
    }

    #[test]
    fn small_curvature_uses_the_first_branch() {
        let b = BoundSet::new(1.0, 1e-12, 4.0).with_l_p(Some(2.0)).with_l_s(Some(1e6));
        assert_eq!(b.b_p, Some(0.25));
        assert_eq!(b.b_s, Some(4f64.powf(-1.5).max((2.0 + (4.0f64 + 16.0e-6).sqrt()) / 8e6)));
    }

    #[test]
    fn nonpositive_curvature_gives_no_radius() {
        let b = BoundSet::new(1.0, 1.0, 10.0).with_l_p(Some(0.0));
        assert_eq!(b.radius_p, None);
    }
}
