//! The two-dimensional sample problem and its variants:
//!
//! ```text
//! minimize f(x̄)  subject to  2x̄₁ + x̄₂ ≥ 1.5,  x̄₁ + 2x̄₂ ≥ 1.5,
//!                            x(t) ∈ {0,1,2,3}²
//! ```
//!
//! with `f = 1.5x₁ + x₂` (polyhedral dual) or `f = x₁² + x₂²` (smooth dual),
//! optionally with the extra constraint `x̄₁ + x̄₂ ≥ 1`, which makes the
//! Lagrange multiplier non-unique.

use crate::problem::{AffineConstraint, DecisionSet, ProblemSpec, SeparableConvexObjective};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    /// `1.5x₁ + x₂`
    Polyhedral,
    /// `x₁² + x₂²`
    Smooth,
}

impl Objective {
    /// Known optimal value of the sample problem (with or without the extra
    /// constraint; both are attained at `(0.5, 0.5)`).
    pub fn optimal_value(self) -> f64 {
        match self {
            Objective::Polyhedral => 1.25,
            Objective::Smooth => 0.5,
        }
    }
}

pub fn sample_problem<S: Scalar>(objective: Objective, extra_constraint: bool) -> ProblemSpec<S> {
    let s = S::from_f64;
    let levels = vec![(0..4).map(|v| s(v as f64)).collect::<Vec<_>>(); 2];
    let objective = match objective {
        Objective::Polyhedral => SeparableConvexObjective::linear(vec![s(1.5), s(1.0)]),
        Objective::Smooth => SeparableConvexObjective::sum_of_squares(2, S::one()),
    };
    let mut constraints = vec![
        AffineConstraint::at_least(vec![s(2.0), s(1.0)], s(1.5)).expect("valid constraint"),
        AffineConstraint::at_least(vec![s(1.0), s(2.0)], s(1.5)).expect("valid constraint"),
    ];
    if extra_constraint {
        constraints
            .push(AffineConstraint::at_least(vec![s(1.0), s(1.0)], s(1.0)).expect("valid constraint"));
    }
    ProblemSpec::new(
        DecisionSet::grid(levels).expect("nonempty grid"),
        None,
        objective,
        constraints,
    )
    .expect("sample problem is well formed")
}

/// The four figure experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Figure {
    pub number: u8,
    pub objective: Objective,
    pub extra_constraint: bool,
}

impl Figure {
    pub const ALL: [Figure; 4] = [
        Figure { number: 2, objective: Objective::Polyhedral, extra_constraint: false },
        Figure { number: 3, objective: Objective::Smooth, extra_constraint: false },
        Figure { number: 4, objective: Objective::Polyhedral, extra_constraint: true },
        Figure { number: 5, objective: Objective::Smooth, extra_constraint: true },
    ];

    pub fn from_number(number: u8) -> Option<Figure> {
        Self::ALL.into_iter().find(|f| f.number == number)
    }

    pub fn problem<S: Scalar>(&self) -> ProblemSpec<S> {
        sample_problem(self.objective, self.extra_constraint)
    }

    /// Fixed start of the staggered average used in the figures.
    pub fn reference_start(&self) -> usize {
        match self.objective {
            Objective::Polyhedral => 2048,
            Objective::Smooth => 8192,
        }
    }

    /// Whether the multiplier of this instance is unique.
    pub fn unique_multiplier(&self) -> bool {
        !self.extra_constraint
    }
}
