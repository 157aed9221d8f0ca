//! The dual subgradient iteration with restriction to the decision set,
//!
//! ```text
//! x(t)   = argmin_{x ∈ 𝒳} z(t)ᵀx
//! y(t)   = argmin_{y ∈ 𝒴} f(y) + w(t)ᵀg(y) − z(t)ᵀy
//! w(t+1) = [w(t) + g(y(t))/V]⁺
//! z(t+1) = z(t) + (x(t) − y(t))/V
//! ```
//!
//! together with the running averages of `x(t)`: the plain average from
//! `t = 0` and staggered averages restarted at `t = base^k`.

use crate::error::{Error, Result};
use crate::problem::ProblemSpec;
use crate::scalar::{max_of, Scalar};

/// `λ(t) = (w(t), z(t))` at iteration `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState<S> {
    pub w: Vec<S>,
    pub z: Vec<S>,
    pub t: usize,
}

impl<S: Scalar> DualState<S> {
    pub fn zeros(dimension: usize, num_constraints: usize) -> Self {
        DualState {
            w: vec![S::zero(); num_constraints],
            z: vec![S::zero(); dimension],
            t: 0,
        }
    }

    /// Concatenation `(w, z)` as `f64`.
    pub fn lambda(&self) -> Vec<f64> {
        self.w.iter().chain(&self.z).map(Scalar::to_f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<S> {
    /// Inverse stepsize; must be at least 1.
    pub v: S,
    pub horizon: usize,
    /// Defaults to the zero vector.
    pub initial_w: Option<Vec<S>>,
    /// Defaults to the zero vector.
    pub initial_z: Option<Vec<S>>,
    /// Restart staggered averages at `restart_base^k`.
    pub restart_base: Option<usize>,
    /// Reserved for y-updates that need a numerical search; the closed-form
    /// updates used for the supported pieces are exact.
    pub y_update_tolerance: f64,
    /// Keep every k-th iterate (plus the last). Averages stay exact.
    pub record_every: usize,
}

impl<S: Scalar> SolverConfig<S> {
    pub fn new(v: S, horizon: usize) -> Self {
        SolverConfig {
            v,
            horizon,
            initial_w: None,
            initial_z: None,
            restart_base: Some(2),
            y_update_tolerance: 1e-12,
            record_every: 1,
        }
    }

    pub fn with_restart_base(mut self, base: Option<usize>) -> Self {
        self.restart_base = base;
        self
    }

    pub fn with_initial(mut self, w: Vec<S>, z: Vec<S>) -> Self {
        self.initial_w = Some(w);
        self.initial_z = Some(z);
        self
    }

    pub fn with_record_every(mut self, k: usize) -> Self {
        self.record_every = k;
        self
    }

    fn initial_state(&self, spec: &ProblemSpec<S>) -> Result<DualState<S>> {
        if self.v < S::one() {
            return Err(Error::Precondition(format!("V = {} must be at least 1", self.v)));
        }
        if self.horizon == 0 {
            return Err(Error::Precondition("horizon must be at least 1".into()));
        }
        if matches!(self.restart_base, Some(b) if b < 2) {
            return Err(Error::Precondition("restart base must be at least 2".into()));
        }
        if self.record_every == 0 {
            return Err(Error::Precondition("record_every must be at least 1".into()));
        }
        let mut state = DualState::zeros(spec.dimension(), spec.num_constraints());
        if let Some(w) = &self.initial_w {
            if w.len() != spec.num_constraints() {
                return Err(Error::Precondition("initial w has wrong length".into()));
            }
            check_nonnegative(w)?;
            state.w = w.clone();
        }
        if let Some(z) = &self.initial_z {
            if z.len() != spec.dimension() {
                return Err(Error::Precondition("initial z has wrong length".into()));
            }
            state.z = z.clone();
        }
        if !state.w.iter().chain(&state.z).all(Scalar::is_finite) {
            return Err(Error::Precondition("initial multipliers must be finite".into()));
        }
        Ok(state)
    }
}

fn check_nonnegative<S: Scalar>(w: &[S]) -> Result<()> {
    match w.iter().position(|x| *x < S::zero()) {
        Some(j) => Err(Error::Precondition(format!(
            "multiplier w_{} = {} is negative",
            j + 1,
            w[j]
        ))),
        None => Ok(()),
    }
}

/// Point of the decision set minimizing `zᵀx`.
pub fn x_update<S: Scalar>(spec: &ProblemSpec<S>, z: &[S]) -> Vec<S> {
    spec.decision_set().argmin_linear(z)
}

/// Minimizer over the box of `f(y) + wᵀg(y) − zᵀy`, solved coordinate-wise.
pub fn y_update<S: Scalar>(spec: &ProblemSpec<S>, w: &[S], z: &[S], _tol: f64) -> Result<Vec<S>> {
    check_nonnegative(w)?;
    Ok(y_update_unchecked(spec, w, z))
}

fn y_update_unchecked<S: Scalar>(spec: &ProblemSpec<S>, w: &[S], z: &[S]) -> Vec<S> {
    let bx = spec.extended_box();
    let constraints = spec.constraints();
    spec.objective()
        .pieces
        .iter()
        .enumerate()
        .map(|(i, piece)| {
            let shift = constraints
                .iter()
                .zip(w)
                .fold(-z[i].clone(), |acc, (c, wj)| acc + wj.clone() * c.coeffs[i].clone());
            piece.argmin_shifted(&shift, &bx.lower[i], &bx.upper[i])
        })
        .collect()
}

/// One multiplier step with stepsize `1/V`.
pub fn dual_update<S: Scalar>(
    state: &DualState<S>,
    x: &[S],
    y: &[S],
    g_of_y: &[S],
    v: &S,
) -> Result<DualState<S>> {
    if v < &S::one() {
        return Err(Error::Precondition(format!("V = {v} must be at least 1")));
    }
    Ok(dual_step(state, x, y, g_of_y, &(S::one() / v.clone())))
}

fn dual_step<S: Scalar>(state: &DualState<S>, x: &[S], y: &[S], g: &[S], inv_v: &S) -> DualState<S> {
    DualState {
        w: state
            .w
            .iter()
            .zip(g)
            .map(|(wj, gj)| max_of(S::zero(), wj.clone() + gj.clone() * inv_v.clone()))
            .collect(),
        z: state
            .z
            .iter()
            .zip(x.iter().zip(y))
            .map(|(zi, (xi, yi))| zi.clone() + (xi.clone() - yi.clone()) * inv_v.clone())
            .collect(),
        t: state.t + 1,
    }
}

/// One restart frame of the staggered average: `x(start) .. x(start+len-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame<S> {
    pub start: usize,
    pub len: usize,
    pub x_sum: Vec<S>,
}

impl<S: Scalar> Frame<S> {
    pub fn average(&self) -> Vec<S> {
        let n = S::from_usize(self.len);
        self.x_sum.iter().map(|s| s.clone() / n.clone()).collect()
    }
}

/// Borrowed view of one recorded iteration.
#[derive(Debug, Clone, Copy)]
pub struct Record<'a> {
    pub t: usize,
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub w: &'a [f64],
    pub z: &'a [f64],
    /// `d(λ(t))`
    pub dual_value: f64,
    /// Plain average of `x(0..=t)`.
    pub xbar: &'a [f64],
    pub frame_id: usize,
    /// Average of `x` from the current frame's start through `t`.
    pub frame_xbar: &'a [f64],
}

/// The output of [`run`]: recorded iterates (as `f64`) plus exact sums and
/// the final dual state in the run's own scalar type.
#[derive(Debug, Clone)]
pub struct RunTrace<S> {
    dim: usize,
    num_constraints: usize,
    v: S,
    horizon: usize,
    record_every: usize,
    ts: Vec<usize>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    ws: Vec<f64>,
    zs: Vec<f64>,
    duals: Vec<f64>,
    xbars: Vec<f64>,
    frame_ids: Vec<usize>,
    frame_xbars: Vec<f64>,
    initial: DualState<S>,
    last: DualState<S>,
    x_sum: Vec<S>,
    y_sum: Vec<S>,
    frames: Vec<Frame<S>>,
}

impl<S: Scalar> RunTrace<S> {
    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn num_constraints(&self) -> usize {
        self.num_constraints
    }

    pub fn v(&self) -> &S {
        &self.v
    }

    /// Number of iterations `T`.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Number of stored records.
    pub fn len(&self) -> usize {
        self.ts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ts.is_empty()
    }

    /// Every iteration is recorded.
    pub fn is_dense(&self) -> bool {
        self.record_every == 1
    }

    pub fn record(&self, k: usize) -> Record<'_> {
        let (i, j) = (self.dim, self.num_constraints);
        Record {
            t: self.ts[k],
            x: &self.xs[k * i..(k + 1) * i],
            y: &self.ys[k * i..(k + 1) * i],
            w: &self.ws[k * j..(k + 1) * j],
            z: &self.zs[k * i..(k + 1) * i],
            dual_value: self.duals[k],
            xbar: &self.xbars[k * i..(k + 1) * i],
            frame_id: self.frame_ids[k],
            frame_xbar: &self.frame_xbars[k * i..(k + 1) * i],
        }
    }

    pub fn records(&self) -> impl Iterator<Item = Record<'_>> + '_ {
        (0..self.len()).map(move |k| self.record(k))
    }

    pub fn initial_state(&self) -> &DualState<S> {
        &self.initial
    }

    /// `λ(T)`, the state after the last update.
    pub fn final_state(&self) -> &DualState<S> {
        &self.last
    }

    /// `λ(t)` for `0 ≤ t ≤ T` on a dense trace.
    pub fn lambda(&self, t: usize) -> Vec<f64> {
        assert!(self.is_dense(), "lambda(t) needs a dense trace");
        if t == self.horizon {
            return self.last.lambda();
        }
        let r = self.record(t);
        r.w.iter().chain(r.z).copied().collect()
    }

    /// Exact `x̄(T)`.
    pub fn plain_average(&self) -> Vec<S> {
        let n = S::from_usize(self.horizon);
        self.x_sum.iter().map(|s| s.clone() / n.clone()).collect()
    }

    /// Exact `ȳ(T)`.
    pub fn plain_average_y(&self) -> Vec<S> {
        let n = S::from_usize(self.horizon);
        self.y_sum.iter().map(|s| s.clone() / n.clone()).collect()
    }

    /// Restart frames in order; empty without a restart base.
    pub fn frames(&self) -> &[Frame<S>] {
        &self.frames
    }

    /// Start times of the staggered frames after `t = 0`.
    pub fn restart_times(&self) -> Vec<usize> {
        self.frames.iter().skip(1).map(|f| f.start).collect()
    }

    /// Prefix sums of `x` in `f64`: entry `t` is `Σ_{s<t} x(s)`, flattened by
    /// `dimension`.
    pub fn prefix_sums(&self) -> Result<Vec<f64>> {
        self.require_dense()?;
        let i = self.dim;
        let mut out = vec![0.0; (self.horizon + 1) * i];
        for t in 0..self.horizon {
            for c in 0..i {
                out[(t + 1) * i + c] = out[t * i + c] + self.xs[t * i + c];
            }
        }
        Ok(out)
    }

    pub(crate) fn require_dense(&self) -> Result<()> {
        if self.is_dense() {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "trace keeps every {}-th iterate; this needs every iterate",
                self.record_every
            )))
        }
    }
}

/// Runs `config.horizon` iterations from the configured initial state.
pub fn run<S: Scalar>(spec: &ProblemSpec<S>, config: &SolverConfig<S>) -> Result<RunTrace<S>> {
    let initial = config.initial_state(spec)?;
    let fspec = spec.to_f64();
    let (dim, nc) = (spec.dimension(), spec.num_constraints());
    let horizon = config.horizon;
    let inv_v = S::one() / config.v.clone();
    let records = horizon.div_ceil(config.record_every) + 1;

    let mut trace = RunTrace {
        dim,
        num_constraints: nc,
        v: config.v.clone(),
        horizon,
        record_every: config.record_every,
        ts: Vec::with_capacity(records),
        xs: Vec::with_capacity(records * dim),
        ys: Vec::with_capacity(records * dim),
        ws: Vec::with_capacity(records * nc),
        zs: Vec::with_capacity(records * dim),
        duals: Vec::with_capacity(records),
        xbars: Vec::with_capacity(records * dim),
        frame_ids: Vec::with_capacity(records),
        frame_xbars: Vec::with_capacity(records * dim),
        initial: initial.clone(),
        last: initial.clone(),
        x_sum: vec![S::zero(); dim],
        y_sum: vec![S::zero(); dim],
        frames: Vec::new(),
    };

    let mut state = initial;
    let mut frame = Frame {
        start: 0,
        len: 0,
        x_sum: vec![S::zero(); dim],
    };
    let mut next_restart = config.restart_base.map(|_| 1usize);

    for t in 0..horizon {
        if next_restart == Some(t) {
            let base = config.restart_base.expect("restart base set");
            let finished = std::mem::replace(
                &mut frame,
                Frame {
                    start: t,
                    len: 0,
                    x_sum: vec![S::zero(); dim],
                },
            );
            trace.frames.push(finished);
            next_restart = t.checked_mul(base);
        }

        let x = x_update(spec, &state.z);
        let y = y_update_unchecked(spec, &state.w, &state.z);
        let g = spec.constraint_values(&y);

        for c in 0..dim {
            trace.x_sum[c] = trace.x_sum[c].clone() + x[c].clone();
            trace.y_sum[c] = trace.y_sum[c].clone() + y[c].clone();
            frame.x_sum[c] = frame.x_sum[c].clone() + x[c].clone();
        }
        frame.len += 1;

        let recorded = t % config.record_every == 0 || t + 1 == horizon;
        if recorded {
            let k = trace.ts.len();
            trace.ts.push(t);
            trace.xs.extend(x.iter().map(Scalar::to_f64));
            trace.ys.extend(y.iter().map(Scalar::to_f64));
            trace.ws.extend(state.w.iter().map(Scalar::to_f64));
            trace.zs.extend(state.z.iter().map(Scalar::to_f64));
            // d(λ(t)) = f(y) + wᵀg(y) + zᵀ(x − y), evaluated in f64.
            let r = |v: &[f64]| v[k * dim..(k + 1) * dim].to_vec();
            let (xf, yf, zf) = (r(&trace.xs), r(&trace.ys), r(&trace.zs));
            let wf = &trace.ws[k * nc..(k + 1) * nc];
            let dual_value = fspec.objective_value(&yf)
                + g.iter().zip(wf).map(|(gj, wj)| gj.to_f64() * wj).sum::<f64>()
                + zf.iter().zip(xf.iter().zip(&yf)).map(|(zi, (xi, yi))| zi * (xi - yi)).sum::<f64>();
            trace.duals.push(dual_value);
            let n = (t + 1) as f64;
            trace.xbars.extend(trace.x_sum.iter().map(|s| s.to_f64() / n));
            trace.frame_ids.push(trace.frames.len());
            let m = frame.len as f64;
            trace.frame_xbars.extend(frame.x_sum.iter().map(|s| s.to_f64() / m));
        }

        state = dual_step(&state, &x, &y, &g, &inv_v);
        let dual_ok = !recorded || trace.duals.last().is_some_and(|d| d.is_finite());
        if !state.w.iter().chain(&state.z).all(Scalar::is_finite) || !dual_ok {
            return Err(Error::Numeric { iteration: t });
        }
    }
    trace.frames.push(frame);
    trace.last = state;
    Ok(trace)
}

/// `(1/len) Σ_{t=start}^{start+len-1} x(t)` from the recorded iterates.
pub fn staggered_average<S: Scalar>(trace: &RunTrace<S>, start: usize, len: usize) -> Result<Vec<f64>> {
    trace.require_dense()?;
    let end = start.checked_add(len).unwrap_or(usize::MAX);
    if len == 0 || end > trace.horizon() {
        return Err(Error::Range {
            start,
            end,
            len: trace.horizon(),
        });
    }
    let i = trace.dim;
    let mut sum = vec![0.0; i];
    for t in start..end {
        for c in 0..i {
            sum[c] += trace.xs[t * i + c];
        }
    }
    Ok(sum.into_iter().map(|s| s / len as f64).collect())
}

/// Exact average of the frame containing `t` up to the end of that frame.
pub fn frame_containing<S: Scalar>(trace: &RunTrace<S>, t: usize) -> Option<&Frame<S>> {
    trace
        .frames()
        .iter()
        .find(|f| f.start <= t && t < f.start + f.len)
}
