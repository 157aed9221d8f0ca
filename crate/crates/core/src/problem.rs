//! Problem instances: a finite decision set, the box it is embedded in, a
//! separable convex objective and affine constraints `a_jᵀx + b_j ≤ 0`.

use crate::error::{Error, Result};
use crate::scalar::{self, dot, max_of, min_of, two, Scalar};

/// Floor applied to the squared-norm bound so that `√(2C)/V` stays positive
/// on single-point problems.
pub const C_FLOOR: f64 = 1e-12;

/// Vertex enumeration of the box is exact up to this dimension.
const MAX_VERTEX_DIM: usize = 20;

/// The finite decision set every iterate `x(t)` is drawn from.
#[derive(Debug, Clone, PartialEq)]
pub enum DecisionSet<S> {
    /// Cartesian product of per-coordinate value lists, each strictly increasing.
    GridProduct(Vec<Vec<S>>),
    /// An explicit list of points, all of the same dimension.
    ExplicitPoints(Vec<Vec<S>>),
}

impl<S: Scalar> DecisionSet<S> {
    /// Builds a grid product, sorting and de-duplicating each coordinate list.
    pub fn grid(mut levels: Vec<Vec<S>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::invalid("decision_set", "no coordinates"));
        }
        for (i, values) in levels.iter_mut().enumerate() {
            if values.is_empty() {
                return Err(Error::invalid(
                    "decision_set",
                    format!("coordinate {} has no values", i + 1),
                ));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("decision_set", "non-finite value"));
            }
            values.sort_by(|a, b| a.partial_cmp(b).expect("finite values are ordered"));
            values.dedup();
        }
        Ok(DecisionSet::GridProduct(levels))
    }

    pub fn points(points: Vec<Vec<S>>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::invalid("decision_set", "no points"));
        };
        let dim = first.len();
        if dim == 0 {
            return Err(Error::invalid("decision_set", "points have dimension 0"));
        }
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::invalid("decision_set", "points differ in dimension"));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("decision_set", "non-finite value"));
        }
        Ok(DecisionSet::ExplicitPoints(points))
    }

    pub fn dimension(&self) -> usize {
        match self {
            DecisionSet::GridProduct(levels) => levels.len(),
            DecisionSet::ExplicitPoints(points) => points[0].len(),
        }
    }

    /// Number of points in the set (saturating for very large grids).
    pub fn cardinality(&self) -> usize {
        match self {
            DecisionSet::GridProduct(levels) => levels
                .iter()
                .fold(1usize, |acc, l| acc.saturating_mul(l.len())),
            DecisionSet::ExplicitPoints(points) => points.len(),
        }
    }

    /// Per-coordinate minima and maxima, i.e. the bounding box of the hull.
    pub fn hull_bounds(&self) -> (Vec<S>, Vec<S>) {
        match self {
            DecisionSet::GridProduct(levels) => (
                levels.iter().map(|l| l[0].clone()).collect(),
                levels.iter().map(|l| l[l.len() - 1].clone()).collect(),
            ),
            DecisionSet::ExplicitPoints(points) => {
                let mut lo = points[0].clone();
                let mut hi = points[0].clone();
                for p in &points[1..] {
                    for i in 0..p.len() {
                        lo[i] = min_of(lo[i].clone(), p[i].clone());
                        hi[i] = max_of(hi[i].clone(), p[i].clone());
                    }
                }
                (lo, hi)
            }
        }
    }

    /// A point minimizing `zᵀx` over the set (equivalently over its hull).
    ///
    /// Ties go to the smallest coordinate value on grids and to the
    /// lexicographically smallest point for explicit lists.
    pub fn argmin_linear(&self, z: &[S]) -> Vec<S> {
        match self {
            DecisionSet::GridProduct(levels) => levels
                .iter()
                .zip(z)
                .map(|(values, zi)| {
                    if *zi < S::zero() {
                        values[values.len() - 1].clone()
                    } else {
                        values[0].clone()
                    }
                })
                .collect(),
            DecisionSet::ExplicitPoints(points) => {
                let mut best = &points[0];
                let mut best_value = dot(z, best);
                for p in &points[1..] {
                    let value = dot(z, p);
                    if value < best_value || (value == best_value && lex_less(p, best)) {
                        best = p;
                        best_value = value;
                    }
                }
                best.clone()
            }
        }
    }

    /// All points, in lexicographic order for grids. Refuses sets larger
    /// than `limit`.
    pub fn enumerate(&self, limit: usize) -> Result<Vec<Vec<S>>> {
        let count = self.cardinality();
        if count > limit {
            return Err(Error::Refused(format!(
                "decision set has {count} points (limit {limit})"
            )));
        }
        match self {
            DecisionSet::ExplicitPoints(points) => Ok(points.clone()),
            DecisionSet::GridProduct(levels) => {
                let mut out = vec![Vec::new()];
                for values in levels {
                    out = out
                        .into_iter()
                        .flat_map(|prefix| {
                            values.iter().map(move |v| {
                                let mut p = prefix.clone();
                                p.push(v.clone());
                                p
                            })
                        })
                        .collect();
                }
                Ok(out)
            }
        }
    }

    fn map<T: Scalar>(&self, f: &impl Fn(&S) -> T) -> DecisionSet<T> {
        let conv = |rows: &Vec<Vec<S>>| rows.iter().map(|r| r.iter().map(f).collect()).collect();
        match self {
            DecisionSet::GridProduct(levels) => DecisionSet::GridProduct(conv(levels)),
            DecisionSet::ExplicitPoints(points) => DecisionSet::ExplicitPoints(conv(points)),
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

/// The closed hyper-rectangle `𝒴` containing the hull of the decision set.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedBox<S> {
    pub lower: Vec<S>,
    pub upper: Vec<S>,
}

impl<S: Scalar> ExtendedBox<S> {
    pub fn new(lower: Vec<S>, upper: Vec<S>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::invalid("box", "lower and upper differ in dimension"));
        }
        if lower.iter().chain(&upper).any(|v| !v.is_finite()) {
            return Err(Error::invalid("box", "non-finite bound"));
        }
        if let Some(i) = (0..lower.len()).find(|&i| lower[i] > upper[i]) {
            return Err(Error::invalid(
                "box",
                format!("lower bound exceeds upper bound in coordinate {}", i + 1),
            ));
        }
        Ok(ExtendedBox { lower, upper })
    }

    /// Smallest box containing the decision set.
    pub fn tight(set: &DecisionSet<S>) -> Self {
        let (lower, upper) = set.hull_bounds();
        ExtendedBox { lower, upper }
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[S]) -> bool {
        x.len() == self.lower.len()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    fn contains_set(&self, set: &DecisionSet<S>) -> bool {
        let (lo, hi) = set.hull_bounds();
        self.contains(&lo) && self.contains(&hi)
    }
}

/// One coordinate's share of a separable convex objective.
#[derive(Debug, Clone, PartialEq)]
pub enum Piece<S> {
    Linear {
        slope: S,
    },
    /// `curvature·v² + slope·v` with `curvature ≥ 0`.
    Quadratic {
        curvature: S,
        slope: S,
    },
    /// Continuous convex piecewise-linear function. `slopes[0]` applies left
    /// of `breakpoints[0]`, `slopes[k]` right of `breakpoints[k-1]`:
    /// `h(v) = intercept + slopes[0]·v + Σ_k (slopes[k+1] − slopes[k])·(v − breakpoints[k])⁺`.
    PiecewiseLinear {
        intercept: S,
        breakpoints: Vec<S>,
        slopes: Vec<S>,
    },
}

impl<S: Scalar> Piece<S> {
    /// Checks convexity and shape; `coord` is 1-based for messages.
    pub fn validate(&self, coord: usize) -> Result<()> {
        let field = format!("objective[{coord}]");
        match self {
            Piece::Linear { slope } => finite(&field, [slope]),
            Piece::Quadratic { curvature, slope } => {
                finite(&field, [curvature, slope])?;
                if *curvature < S::zero() {
                    return Err(Error::invalid(field, "non-convex piece: negative curvature"));
                }
                Ok(())
            }
            Piece::PiecewiseLinear {
                intercept,
                breakpoints,
                slopes,
            } => {
                finite(&field, std::iter::once(intercept).chain(breakpoints).chain(slopes))?;
                if slopes.len() != breakpoints.len() + 1 {
                    return Err(Error::invalid(
                        field,
                        "piecewise-linear piece needs one more slope than breakpoints",
                    ));
                }
                if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::invalid(field, "breakpoints must be strictly increasing"));
                }
                if slopes.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::invalid(field, "non-convex piece: slopes decrease"));
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, v: &S) -> S {
        match self {
            Piece::Linear { slope } => slope.clone() * v.clone(),
            Piece::Quadratic { curvature, slope } => {
                curvature.clone() * v.clone() * v.clone() + slope.clone() * v.clone()
            }
            Piece::PiecewiseLinear {
                intercept,
                breakpoints,
                slopes,
            } => {
                let mut total = intercept.clone() + slopes[0].clone() * v.clone();
                for (k, b) in breakpoints.iter().enumerate() {
                    if v > b {
                        total = total
                            + (slopes[k + 1].clone() - slopes[k].clone()) * (v.clone() - b.clone());
                    }
                }
                total
            }
        }
    }

    /// Minimizer of `piece(v) + shift·v` over `[lo, hi]`; ties go to the
    /// smallest minimizer.
    pub fn argmin_shifted(&self, shift: &S, lo: &S, hi: &S) -> S {
        match self {
            Piece::Linear { slope } => endpoint_by_sign(slope.clone() + shift.clone(), lo, hi),
            Piece::Quadratic { curvature, slope } => {
                let total = slope.clone() + shift.clone();
                if *curvature <= S::zero() {
                    return endpoint_by_sign(total, lo, hi);
                }
                let vertex = -total / (two::<S>() * curvature.clone());
                clamp(vertex, lo, hi)
            }
            Piece::PiecewiseLinear {
                breakpoints,
                slopes,
                ..
            } => {
                // Walk right from `lo` until the right derivative turns nonnegative.
                let mut point = lo.clone();
                let mut segment = breakpoints.iter().take_while(|b| *b <= lo).count();
                loop {
                    if slopes[segment].clone() + shift.clone() >= S::zero() {
                        return point;
                    }
                    match breakpoints.get(segment) {
                        Some(b) if b < hi => {
                            point = b.clone();
                            segment += 1;
                        }
                        _ => return hi.clone(),
                    }
                }
            }
        }
    }

    /// Supremum of `|piece'|` over `[lo, hi]`.
    pub fn max_abs_derivative(&self, lo: f64, hi: f64) -> f64 {
        match self {
            Piece::Linear { slope } => slope.to_f64().abs(),
            Piece::Quadratic { curvature, slope } => {
                let (c, s) = (curvature.to_f64(), slope.to_f64());
                (2.0 * c * lo + s).abs().max((2.0 * c * hi + s).abs())
            }
            Piece::PiecewiseLinear {
                breakpoints,
                slopes,
                ..
            } => {
                let bps: Vec<f64> = breakpoints.iter().map(Scalar::to_f64).collect();
                slopes
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| {
                        let left = if *k == 0 { f64::NEG_INFINITY } else { bps[k - 1] };
                        let right = bps.get(*k).copied().unwrap_or(f64::INFINITY);
                        left <= hi && right >= lo
                    })
                    .map(|(_, s)| s.to_f64().abs())
                    .fold(0.0, f64::max)
            }
        }
    }

    pub fn is_linear(&self) -> bool {
        match self {
            Piece::Linear { .. } => true,
            Piece::Quadratic { curvature, .. } => curvature.is_zero(),
            Piece::PiecewiseLinear { .. } => false,
        }
    }

    fn map<T: Scalar>(&self, f: &impl Fn(&S) -> T) -> Piece<T> {
        match self {
            Piece::Linear { slope } => Piece::Linear { slope: f(slope) },
            Piece::Quadratic { curvature, slope } => Piece::Quadratic {
                curvature: f(curvature),
                slope: f(slope),
            },
            Piece::PiecewiseLinear {
                intercept,
                breakpoints,
                slopes,
            } => Piece::PiecewiseLinear {
                intercept: f(intercept),
                breakpoints: breakpoints.iter().map(f).collect(),
                slopes: slopes.iter().map(f).collect(),
            },
        }
    }
}

fn finite<'a, S: Scalar>(field: &str, values: impl IntoIterator<Item = &'a S>) -> Result<()> {
    if values.into_iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid(field, "non-finite parameter"))
    }
}

fn endpoint_by_sign<S: Scalar>(slope: S, lo: &S, hi: &S) -> S {
    if slope < S::zero() {
        hi.clone()
    } else {
        lo.clone()
    }
}

fn clamp<S: Scalar>(v: S, lo: &S, hi: &S) -> S {
    if &v < lo {
        lo.clone()
    } else if &v > hi {
        hi.clone()
    } else {
        v
    }
}

/// `f(x) = Σ_i piece_i(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableConvexObjective<S> {
    pub pieces: Vec<Piece<S>>,
}

impl<S: Scalar> SeparableConvexObjective<S> {
    pub fn new(pieces: Vec<Piece<S>>) -> Result<Self> {
        for (i, p) in pieces.iter().enumerate() {
            p.validate(i + 1)?;
        }
        Ok(SeparableConvexObjective { pieces })
    }

    pub fn linear(slopes: Vec<S>) -> Self {
        SeparableConvexObjective {
            pieces: slopes.into_iter().map(|slope| Piece::Linear { slope }).collect(),
        }
    }

    /// `Σ_i curvature·x_i²`.
    pub fn sum_of_squares(dimension: usize, curvature: S) -> Self {
        SeparableConvexObjective {
            pieces: (0..dimension)
                .map(|_| Piece::Quadratic {
                    curvature: curvature.clone(),
                    slope: S::zero(),
                })
                .collect(),
        }
    }

    pub fn value(&self, x: &[S]) -> S {
        self.pieces
            .iter()
            .zip(x)
            .fold(S::zero(), |acc, (p, v)| acc + p.value(v))
    }

    pub fn is_linear(&self) -> bool {
        self.pieces.iter().all(Piece::is_linear)
    }

    /// True when no piece is quadratic with positive curvature, i.e. the
    /// dual function is polyhedral.
    pub fn is_polyhedral(&self) -> bool {
        self.pieces.iter().all(|p| match p {
            Piece::Quadratic { curvature, .. } => curvature.is_zero(),
            _ => true,
        })
    }
}

/// `g(x) = coeffsᵀx + offset ≤ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineConstraint<S> {
    pub coeffs: Vec<S>,
    pub offset: S,
}

impl<S: Scalar> AffineConstraint<S> {
    pub fn new(coeffs: Vec<S>, offset: S) -> Result<Self> {
        if coeffs.iter().chain(std::iter::once(&offset)).any(|v| !v.is_finite()) {
            return Err(Error::invalid("constraints", "non-finite coefficient"));
        }
        if coeffs.iter().all(|c| c.is_zero()) {
            return Err(Error::invalid("constraints", "all coefficients are zero"));
        }
        Ok(AffineConstraint { coeffs, offset })
    }

    /// `coeffsᵀx ≤ rhs`.
    pub fn at_most(coeffs: Vec<S>, rhs: S) -> Result<Self> {
        Self::new(coeffs, -rhs)
    }

    /// `coeffsᵀx ≥ rhs`, stored as `−coeffsᵀx + rhs ≤ 0`.
    pub fn at_least(coeffs: Vec<S>, rhs: S) -> Result<Self> {
        Self::new(coeffs.into_iter().map(|c| -c).collect(), rhs)
    }

    pub fn value(&self, x: &[S]) -> S {
        dot(&self.coeffs, x) + self.offset.clone()
    }

    fn map<T: Scalar>(&self, f: &impl Fn(&S) -> T) -> AffineConstraint<T> {
        AffineConstraint {
            coeffs: self.coeffs.iter().map(f).collect(),
            offset: f(&self.offset),
        }
    }
}

/// A complete, validated problem instance. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec<S> {
    decision_set: DecisionSet<S>,
    extended_box: ExtendedBox<S>,
    objective: SeparableConvexObjective<S>,
    constraints: Vec<AffineConstraint<S>>,
}

impl<S: Scalar> ProblemSpec<S> {
    /// Validates dimensions and containment. `extended_box = None` selects the
    /// tightest box around the decision set.
    pub fn new(
        decision_set: DecisionSet<S>,
        extended_box: Option<ExtendedBox<S>>,
        objective: SeparableConvexObjective<S>,
        constraints: Vec<AffineConstraint<S>>,
    ) -> Result<Self> {
        let dim = decision_set.dimension();
        let extended_box = extended_box.unwrap_or_else(|| ExtendedBox::tight(&decision_set));
        if extended_box.dimension() != dim {
            return Err(Error::invalid("box", format!("expected dimension {dim}")));
        }
        if objective.pieces.len() != dim {
            return Err(Error::invalid(
                "objective",
                format!("expected {dim} pieces, got {}", objective.pieces.len()),
            ));
        }
        for (i, p) in objective.pieces.iter().enumerate() {
            p.validate(i + 1)?;
        }
        for (j, c) in constraints.iter().enumerate() {
            if c.coeffs.len() != dim {
                return Err(Error::invalid(
                    format!("constraints[{}]", j + 1),
                    format!("expected {dim} coefficients"),
                ));
            }
        }
        if !extended_box.contains_set(&decision_set) {
            return Err(Error::invalid("box", "decision set point outside box"));
        }
        Ok(ProblemSpec {
            decision_set,
            extended_box,
            objective,
            constraints,
        })
    }

    pub fn dimension(&self) -> usize {
        self.decision_set.dimension()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn decision_set(&self) -> &DecisionSet<S> {
        &self.decision_set
    }

    pub fn extended_box(&self) -> &ExtendedBox<S> {
        &self.extended_box
    }

    pub fn objective(&self) -> &SeparableConvexObjective<S> {
        &self.objective
    }

    pub fn constraints(&self) -> &[AffineConstraint<S>] {
        &self.constraints
    }

    pub fn evaluate_objective(&self, x: &[S]) -> Result<S> {
        self.check_domain(x)?;
        Ok(self.objective.value(x))
    }

    pub fn evaluate_constraints(&self, x: &[S]) -> Result<Vec<S>> {
        self.check_domain(x)?;
        Ok(self.constraint_values(x))
    }

    /// Objective without the domain check.
    pub fn objective_value(&self, x: &[S]) -> S {
        self.objective.value(x)
    }

    /// Constraint values without the domain check.
    pub fn constraint_values(&self, x: &[S]) -> Vec<S> {
        self.constraints.iter().map(|c| c.value(x)).collect()
    }

    fn check_domain(&self, x: &[S]) -> Result<()> {
        if x.len() != self.dimension() {
            return Err(Error::Precondition(format!(
                "expected a {}-dimensional point, got {}",
                self.dimension(),
                x.len()
            )));
        }
        if !self.extended_box.contains(x) {
            return Err(Error::Domain {
                point: scalar::to_f64_vec(x),
            });
        }
        Ok(())
    }

    /// Common Lipschitz constant `M` of `f` and every `g_j` on the box.
    pub fn lipschitz_bound(&self) -> f64 {
        let (lo, hi) = self.box_f64();
        let objective = self
            .objective
            .pieces
            .iter()
            .enumerate()
            .map(|(i, p)| p.max_abs_derivative(lo[i], hi[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        self.constraints
            .iter()
            .map(|c| scalar::norm(&scalar::to_f64_vec(&c.coeffs)))
            .fold(objective, f64::max)
    }

    /// Constant `C` with `‖g(y)‖² ≤ C` and `‖x − y‖² ≤ C` for `x` in the hull
    /// and `y` in the box, floored at [`C_FLOOR`].
    pub fn squared_norm_bound(&self) -> f64 {
        let (lo, hi) = self.box_f64();
        self.constraint_norm_sup(&lo, &hi)
            .max(self.displacement_sup(&lo, &hi))
            .max(C_FLOOR)
    }

    fn box_f64(&self) -> (Vec<f64>, Vec<f64>) {
        (
            scalar::to_f64_vec(&self.extended_box.lower),
            scalar::to_f64_vec(&self.extended_box.upper),
        )
    }

    // ‖g‖² is convex, so its maximum over the box sits at a vertex.
    fn constraint_norm_sup(&self, lo: &[f64], hi: &[f64]) -> f64 {
        if self.constraints.is_empty() {
            return 0.0;
        }
        let rows: Vec<(Vec<f64>, f64)> = self
            .constraints
            .iter()
            .map(|c| (scalar::to_f64_vec(&c.coeffs), c.offset.to_f64()))
            .collect();
        let dim = lo.len();
        if dim <= MAX_VERTEX_DIM {
            let mut best: f64 = 0.0;
            let mut vertex = lo.to_vec();
            for mask in 0u64..(1u64 << dim) {
                for i in 0..dim {
                    vertex[i] = if mask >> i & 1 == 1 { hi[i] } else { lo[i] };
                }
                let sq: f64 = rows
                    .iter()
                    .map(|(a, b)| {
                        let g = a.iter().zip(&vertex).map(|(a, v)| a * v).sum::<f64>() + b;
                        g * g
                    })
                    .sum();
                best = best.max(sq);
            }
            best
        } else {
            // Sum of per-constraint maxima; an upper bound on the joint supremum.
            rows.iter()
                .map(|(a, b)| {
                    let (mut gmin, mut gmax) = (*b, *b);
                    for i in 0..dim {
                        let (p, q) = (a[i] * lo[i], a[i] * hi[i]);
                        gmin += p.min(q);
                        gmax += p.max(q);
                    }
                    (gmin * gmin).max(gmax * gmax)
                })
                .sum()
        }
    }

    // Separable in the coordinates once the hull point is fixed.
    fn displacement_sup(&self, lo: &[f64], hi: &[f64]) -> f64 {
        let per_point = |p: &[f64]| -> f64 {
            p.iter()
                .enumerate()
                .map(|(i, v)| (v - lo[i]).powi(2).max((v - hi[i]).powi(2)))
                .sum()
        };
        match &self.decision_set {
            DecisionSet::GridProduct(levels) => levels
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    let (a, b) = (l[0].to_f64(), l[l.len() - 1].to_f64());
                    [a, b]
                        .iter()
                        .flat_map(|x| [(x - lo[i]).powi(2), (x - hi[i]).powi(2)])
                        .fold(0.0, f64::max)
                })
                .sum(),
            DecisionSet::ExplicitPoints(points) => points
                .iter()
                .map(|p| per_point(&scalar::to_f64_vec(p)))
                .fold(0.0, f64::max),
        }
    }

    /// Re-expresses the instance over another scalar type through `f64`.
    pub fn convert<T: Scalar>(&self) -> ProblemSpec<T> {
        let f = |v: &S| T::from_f64(v.to_f64());
        ProblemSpec {
            decision_set: self.decision_set.map(&f),
            extended_box: ExtendedBox {
                lower: self.extended_box.lower.iter().map(f).collect(),
                upper: self.extended_box.upper.iter().map(f).collect(),
            },
            objective: SeparableConvexObjective {
                pieces: self.objective.pieces.iter().map(|p| p.map(&f)).collect(),
            },
            constraints: self.constraints.iter().map(|c| c.map(&f)).collect(),
        }
    }

    pub fn to_f64(&self) -> ProblemSpec<f64> {
        self.convert()
    }
}
