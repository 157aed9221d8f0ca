use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{dual_at, project};
use crate::engine::{dual_update, x_update, y_update, DualState};
use crate::error::{Error, Result};
use crate::problem::ProblemSpec;
use crate::scalar::{distance, norm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodTag {
    Analytic,
    TailAverage,
    GridDualMax,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailAverage {
    /// The iteration runs at `10 × v`.
    pub v: f64,
    pub horizon: usize,
    /// Fraction of the horizon, at the end, that is averaged.
    pub fraction: f64,
}

impl TailAverage {
    pub fn new(v: f64) -> Self {
        TailAverage {
            v,
            horizon: 1_000_000,
            fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearch {
    /// Half-width of the search box in the max-norm. Defaults to
    /// `10·(C + max |f| on the box)`.
    pub half_width: Option<f64>,
    pub points_per_axis: usize,
    /// Stop once the grid spacing drops below this.
    pub spacing_tolerance: f64,
}

impl Default for GridSearch {
    fn default() -> Self {
        GridSearch {
            half_width: None,
            points_per_axis: 7,
            spacing_tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MultiplierMethod {
    /// A known multiplier, `(w, z)` concatenated.
    Analytic(Vec<f64>),
    TailAverage(TailAverage),
    GridDualMax(GridSearch),
}

/// How the estimate is probed after it is produced.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOptions {
    pub seed: u64,
    /// Random probes used for the residual.
    pub probes: usize,
    /// Estimates with a larger residual are rejected.
    pub threshold: f64,
    /// Distance of the rays used for `L_p` and `L_s`.
    pub ray_distance: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            seed: 0,
            probes: 4000,
            threshold: 1e-3,
            ray_distance: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierEstimate {
    /// `(w, z)` concatenated.
    pub lambda_star: Vec<f64>,
    pub method: MethodTag,
    /// `max(0, max_probe d(probe) − d(λ̂*))`.
    pub residual: f64,
    pub dual_value: f64,
    /// Smallest `(d(λ̂*) − d(λ))/‖λ − λ̂*‖` over probe rays.
    pub l_p: f64,
    /// Smallest `(d(λ̂*) − d(λ))/‖λ − λ̂*‖²` over the same rays.
    pub l_s: f64,
    /// A direction was found along which `d` stays flat, so the
    /// multiplier is probably not unique.
    pub possibly_non_unique: bool,
}

impl MultiplierEstimate {
    pub fn w(&self, num_constraints: usize) -> &[f64] {
        &self.lambda_star[..num_constraints]
    }

    pub fn norm(&self) -> f64 {
        norm(&self.lambda_star)
    }

    pub fn l_p(&self) -> Option<f64> {
        (!self.possibly_non_unique && self.l_p > 0.0).then_some(self.l_p)
    }

    pub fn l_s(&self) -> Option<f64> {
        (!self.possibly_non_unique && self.l_s > 0.0).then_some(self.l_s)
    }
}

pub fn estimate_multiplier(spec: &ProblemSpec<f64>, method: &MultiplierMethod) -> Result<MultiplierEstimate> {
    estimate_multiplier_with(spec, method, &ProbeOptions::default())
}

pub fn estimate_multiplier_with(
    spec: &ProblemSpec<f64>,
    method: &MultiplierMethod,
    options: &ProbeOptions,
) -> Result<MultiplierEstimate> {
    let n = spec.num_constraints() + spec.dimension();
    let (lambda, tag) = match method {
        MultiplierMethod::Analytic(l) => {
            if l.len() != n {
                return Err(Error::Precondition(format!("multiplier needs {n} entries, got {}", l.len())));
            }
            if l[..spec.num_constraints()].iter().any(|w| *w < 0.0) {
                return Err(Error::Precondition("multiplier has a negative w entry".into()));
            }
            (l.clone(), MethodTag::Analytic)
        }
        MultiplierMethod::TailAverage(opts) => (tail_average(spec, opts)?, MethodTag::TailAverage),
        MultiplierMethod::GridDualMax(opts) => (grid_dual_max(spec, opts)?, MethodTag::GridDualMax),
    };
    let est = probe(spec, lambda, tag, options)?;
    if est.residual > options.threshold {
        return Err(Error::Estimation {
            residual: est.residual,
            threshold: options.threshold,
        });
    }
    Ok(est)
}

fn tail_average(spec: &ProblemSpec<f64>, opts: &TailAverage) -> Result<Vec<f64>> {
    let v = 10.0 * opts.v;
    if v < 1.0 || opts.horizon == 0 || !(opts.fraction > 0.0 && opts.fraction <= 1.0) {
        return Err(Error::Precondition("tail average needs V ≥ 0.1, a horizon and a fraction in (0, 1]".into()));
    }
    let tail = ((opts.horizon as f64 * opts.fraction).ceil() as usize).max(1);
    let start = opts.horizon - tail;
    let mut state = DualState::<f64>::zeros(spec.dimension(), spec.num_constraints());
    let mut sum = vec![0.0; state.w.len() + state.z.len()];
    for t in 0..opts.horizon {
        let x = x_update(spec, &state.z);
        let y = y_update(spec, &state.w, &state.z, 0.0)?;
        let g = spec.constraint_values(&y);
        state = dual_update(&state, &x, &y, &g, &v)?;
        if t + 1 > start {
            for (s, l) in sum.iter_mut().zip(state.w.iter().chain(&state.z)) {
                *s += l;
            }
        }
        if !state.w.iter().chain(&state.z).all(|v| v.is_finite()) {
            return Err(Error::Numeric { iteration: t });
        }
    }
    Ok(sum.into_iter().map(|s| s / tail as f64).collect())
}

fn default_half_width(spec: &ProblemSpec<f64>) -> f64 {
    let bx = spec.extended_box();
    // Each convex piece takes its largest |value| at an endpoint or at its minimizer.
    let mut fmax = 0.0;
    for (i, piece) in spec.objective().pieces.iter().enumerate() {
        let lo = piece.value(&bx.lower[i]).abs();
        let hi = piece.value(&bx.upper[i]).abs();
        let mid = piece.value(&piece.argmin_shifted(&0.0, &bx.lower[i], &bx.upper[i])).abs();
        fmax += lo.max(hi).max(mid);
    }
    10.0 * (spec.squared_norm_bound() + fmax)
}

fn grid_dual_max(spec: &ProblemSpec<f64>, opts: &GridSearch) -> Result<Vec<f64>> {
    let nc = spec.num_constraints();
    let n = nc + spec.dimension();
    let h = opts.half_width.unwrap_or_else(|| default_half_width(spec));
    if !(h > 0.0) {
        return Err(Error::Precondition("grid half-width must be positive".into()));
    }
    // Round one covers w ∈ [0, h] and z ∈ [−h, h].
    let center: Vec<f64> = (0..n).map(|c| if c < nc { h / 2.0 } else { 0.0 }).collect();
    let width: Vec<f64> = (0..n).map(|c| if c < nc { h / 2.0 } else { h }).collect();
    grid_maximize(nc, center, &width, opts, |l| dual_at(spec, l))
}

/// Coarse-to-fine grid ascent of `objective` over `Π`: each round evaluates
/// `k^n` points around the incumbent and divides the spacing by three once
/// the incumbent stops moving.
fn grid_maximize(
    nc: usize,
    mut center: Vec<f64>,
    half_width: &[f64],
    opts: &GridSearch,
    objective: impl Fn(&[f64]) -> Result<f64>,
) -> Result<Vec<f64>> {
    let n = center.len();
    let k = opts.points_per_axis;
    if k < 3 || k % 2 == 0 {
        return Err(Error::Precondition("grid search needs an odd number (≥ 3) of points per axis".into()));
    }
    let half = (k / 2) as i64;
    let mut spacing: Vec<f64> = half_width.iter().map(|w| w / half as f64).collect();
    project(&mut center, nc);
    let mut best = center.clone();
    let mut best_value = objective(&best)?;
    let mut probe = vec![0.0; n];
    let total = k.pow(n as u32);
    let mut moves = 0;
    loop {
        for idx in 0..total {
            let mut rem = idx;
            for c in 0..n {
                let step = (rem % k) as i64 - half;
                rem /= k;
                probe[c] = center[c] + step as f64 * spacing[c];
            }
            project(&mut probe, nc);
            let d = objective(&probe)?;
            if d > best_value {
                best_value = d;
                best.copy_from_slice(&probe);
            }
        }
        // Follow the incumbent at the same spacing while it keeps moving.
        if best != center && moves < 50 {
            moves += 1;
            center.copy_from_slice(&best);
            continue;
        }
        if spacing.iter().all(|s| *s < opts.spacing_tolerance) {
            return Ok(best);
        }
        moves = 0;
        center.copy_from_slice(&best);
        for s in &mut spacing {
            *s /= 3.0;
        }
    }
}

/// Largest distance from `center` to a point with `d ≥ d(center) − tau`,
/// found by pushing each coordinate both ways under a steep penalty.
fn near_optimal_extent(spec: &ProblemSpec<f64>, center: &[f64], d0: f64, reach: f64, tau: f64) -> Result<f64> {
    let nc = spec.num_constraints();
    let n = center.len();
    let opts = GridSearch {
        half_width: None,
        points_per_axis: 7,
        spacing_tolerance: 1e-4 * reach,
    };
    let width = vec![reach; n];
    let mut extent: f64 = 0.0;
    for axis in 0..n {
        for sign in [1.0, -1.0] {
            let far = grid_maximize(nc, center.to_vec(), &width, &opts, |l| {
                let shortfall = (dual_at(spec, l)? - d0 + tau).min(0.0);
                Ok(sign * (l[axis] - center[axis]) + 1e3 * shortfall)
            })?;
            if dual_at(spec, &far)? >= d0 - tau {
                extent = extent.max(distance(&far, center));
            }
        }
    }
    Ok(extent)
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = norm(&u);
        if r > 1e-3 && r <= 1.0 {
            return u.into_iter().map(|x| x / r).collect();
        }
    }
}

struct Ray {
    ratio_p: f64,
    ratio_s: f64,
}

fn ray(spec: &ProblemSpec<f64>, center: &[f64], d0: f64, u: &[f64], rho: f64) -> Result<Option<Ray>> {
    let nc = spec.num_constraints();
    let mut p: Vec<f64> = center.iter().zip(u).map(|(c, x)| c + rho * x).collect();
    project(&mut p, nc);
    let delta = distance(&p, center);
    if delta < rho / 2.0 {
        return Ok(None);
    }
    let drop = d0 - dual_at(spec, &p)?;
    Ok(Some(Ray {
        ratio_p: drop / delta,
        ratio_s: drop / (delta * delta),
    }))
}

fn probe(
    spec: &ProblemSpec<f64>,
    lambda: Vec<f64>,
    method: MethodTag,
    options: &ProbeOptions,
) -> Result<MultiplierEstimate> {
    let n = lambda.len();
    let nc = spec.num_constraints();
    let d0 = dual_at(spec, &lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);

    let mut residual: f64 = 0.0;
    for _ in 0..options.probes {
        let u = random_direction(&mut rng, n);
        let r = 10f64.powf(rng.gen_range(-6.0..0.0));
        let mut p: Vec<f64> = lambda.iter().zip(&u).map(|(c, x)| c + r * x).collect();
        project(&mut p, nc);
        residual = residual.max(dual_at(spec, &p)? - d0);
    }

    // Curvature along rays: random directions, then a shrinking random
    // search for the flattest one.
    let rho = options.ray_distance;
    let mut flattest: Option<(Vec<f64>, Ray)> = None;
    let mut l_s = f64::INFINITY;
    for _ in 0..options.probes / 4 {
        let u = random_direction(&mut rng, n);
        if let Some(r) = ray(spec, &lambda, d0, &u, rho)? {
            l_s = l_s.min(r.ratio_s);
            if flattest.as_ref().is_none_or(|(_, f)| r.ratio_p < f.ratio_p) {
                flattest = Some((u, r));
            }
        }
    }
    let (mut u, mut best) = flattest.ok_or_else(|| Error::Precondition("no admissible probe direction".into()))?;
    let mut step = 0.5;
    while step > 1e-9 {
        let mut improved = false;
        for k in 0..4 * n {
            // Axis moves first, then random ones.
            let e = if k < 2 * n {
                let mut e = vec![0.0; n];
                e[k / 2] = if k % 2 == 0 { 1.0 } else { -1.0 };
                e
            } else {
                random_direction(&mut rng, n)
            };
            let cand: Vec<f64> = u.iter().zip(&e).map(|(a, b)| a + step * b).collect();
            let r = norm(&cand);
            let cand: Vec<f64> = cand.into_iter().map(|x| x / r).collect();
            if let Some(ray) = ray(spec, &lambda, d0, &cand, rho)? {
                l_s = l_s.min(ray.ratio_s);
                if ray.ratio_p < best.ratio_p {
                    u = cand;
                    best = ray;
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    let l_p = best.ratio_p;
    let extent = near_optimal_extent(spec, &lambda, d0, 5.0 * rho, 1e-6)?;
    let possibly_non_unique = extent >= rho / 2.0;
    Ok(MultiplierEstimate {
        lambda_star: lambda,
        method,
        residual,
        dual_value: d0,
        l_p,
        l_s: l_s.min(best.ratio_s),
        possibly_non_unique,
    })
}
