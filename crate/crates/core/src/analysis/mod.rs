//! Dual function, multiplier estimation, bound constants, phase detection
//! and the trace-level diagnostics built on them.

mod bounds;
mod diagnostics;
mod multiplier;
pub mod rates;

pub use bounds::{theorem_bounds, BoundSet, Geometry, TheoremKind, WindowBounds};
pub use diagnostics::{
    check_invariants, drift_certificate, descent_check, phase_detect, plateau_check, DriftReport, DriftStep,
    InvariantReport, PhaseReport,
};
pub use multiplier::{estimate_multiplier, estimate_multiplier_with, GridSearch, ProbeOptions, MethodTag, MultiplierEstimate, MultiplierMethod, TailAverage};

use crate::engine::{x_update, y_update};
use crate::error::Result;
use crate::problem::ProblemSpec;
use crate::scalar::{dot, Scalar};

/// Value of the dual function together with the minimizers that attain it.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPoint<S> {
    pub value: S,
    pub x: Vec<S>,
    pub y: Vec<S>,
}

/// `d(w, z) = f(y*) + wᵀg(y*) + zᵀ(x* − y*)`.
pub fn dual_function<S: Scalar>(spec: &ProblemSpec<S>, w: &[S], z: &[S]) -> Result<DualPoint<S>> {
    let y = y_update(spec, w, z, 0.0)?;
    let x = x_update(spec, z);
    let g = spec.constraint_values(&y);
    let gap: Vec<S> = x.iter().zip(&y).map(|(a, b)| a.clone() - b.clone()).collect();
    let value = spec.objective_value(&y) + dot(w, &g) + dot(z, &gap);
    Ok(DualPoint { value, x, y })
}

/// `(g(y*), x* − y*)`, a supergradient of `d` at `(w, z)`.
pub fn dual_subgradient<S: Scalar>(spec: &ProblemSpec<S>, w: &[S], z: &[S]) -> Result<Vec<S>> {
    let p = dual_function(spec, w, z)?;
    let mut out = spec.constraint_values(&p.y);
    out.extend(p.x.iter().zip(&p.y).map(|(a, b)| a.clone() - b.clone()));
    Ok(out)
}

/// `d` at a concatenated `λ = (w, z)` in `f64`.
pub fn dual_at(spec: &ProblemSpec<f64>, lambda: &[f64]) -> Result<f64> {
    let j = spec.num_constraints();
    Ok(dual_function(spec, &lambda[..j], &lambda[j..])?.value)
}

/// Projection onto `Π`: clamps the `w` part at zero.
pub(crate) fn project(lambda: &mut [f64], num_constraints: usize) {
    for w in &mut lambda[..num_constraints] {
        if *w < 0.0 {
            *w = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{sample_problem, Objective};
    use crate::problem::{DecisionSet, SeparableConvexObjective};
    use crate::Error;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_lambda(rng: &mut ChaCha8Rng, j: usize, i: usize, scale: f64) -> Vec<f64> {
        let mut out: Vec<f64> = (0..j).map(|_| rng.gen_range(0.0..scale)).collect();
        out.extend((0..i).map(|_| rng.gen_range(-scale..scale)));
        out
    }

    #[test]
    fn zero_multiplier_gives_unconstrained_minimum() {
        let spec = sample_problem::<f64>(Objective::Smooth, false);
        let d = dual_function(&spec, &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn weak_duality_on_random_multipliers() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (objective, f_opt) in [(Objective::Polyhedral, 1.25), (Objective::Smooth, 0.5)] {
            let spec = sample_problem::<f64>(objective, false);
            for _ in 0..100 {
                let lambda = random_lambda(&mut rng, 2, 2, 5.0);
                assert!(dual_at(&spec, &lambda).unwrap() <= f_opt + 1e-9);
            }
        }
    }

    #[test]
    fn known_multiplier_attains_optimum() {
        let spec = sample_problem::<f64>(Objective::Polyhedral, false);
        let d = dual_at(&spec, &[2.0 / 3.0, 1.0 / 6.0, 0.0, 0.0]).unwrap();
        assert!((d - 1.25).abs() < 1e-12);
        let spec = sample_problem::<f64>(Objective::Smooth, false);
        let d = dual_at(&spec, &[1.0 / 3.0, 1.0 / 3.0, 0.0, 0.0]).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn subgradient_inequality_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for objective in [Objective::Polyhedral, Objective::Smooth] {
            let spec = sample_problem::<f64>(objective, true);
            for _ in 0..1000 {
                let a = random_lambda(&mut rng, 3, 2, 4.0);
                let b = random_lambda(&mut rng, 3, 2, 4.0);
                let da = dual_at(&spec, &a).unwrap();
                let db = dual_at(&spec, &b).unwrap();
                let sg = dual_subgradient(&spec, &b[..3], &b[3..]).unwrap();
                let step: f64 = sg.iter().zip(a.iter().zip(&b)).map(|(s, (x, y))| s * (x - y)).sum();
                assert!(da <= db + step + 1e-9, "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn zero_problem_has_zero_subgradient() {
        let spec = ProblemSpec::new(
            DecisionSet::points(vec![vec![0.0, 0.0]]).unwrap(),
            None,
            SeparableConvexObjective::linear(vec![0.0, 0.0]),
            vec![],
        )
        .unwrap();
        assert_eq!(dual_subgradient(&spec, &[], &[0.3, -2.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn negative_multiplier_is_rejected() {
        let spec = sample_problem::<f64>(Objective::Smooth, false);
        assert!(matches!(
            dual_function(&spec, &[-1.0, 0.0], &[0.0, 0.0]),
            Err(Error::Precondition(_))
        ));
    }
}
