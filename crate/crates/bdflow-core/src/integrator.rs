//! BDF time discretizations of the gradient flow `U' = -grad F(U)` for
//! semiconvex `F`, orders 1 through 3.
//!
//! Each step solves `alpha_k U + dt grad F(U) = b` where `b` collects the
//! history terms of the backward-difference stencil. When `c_f dt < alpha_k`
//! that equation is strongly monotone and has exactly one solution, computed
//! as `prox_{tau F}(b / alpha_k)` with `tau = dt / alpha_k`. Past that
//! threshold the step can have several solutions; [`solve_step_multivalued`]
//! enumerates them and [`BranchSelection`] decides which one a trajectory
//! follows.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg;
use crate::math;
use crate::objective::{Energy, ObjectiveError};
use crate::quadform::exact;

/// Errors from configuration, stepping, and trajectory assembly.
#[derive(Debug)]
pub enum IntegratorError {
    UnsupportedOrder { k: u8 },
    InvalidConfig { what: &'static str },
    DimensionMismatch { expected: usize, got: usize },
    /// The energy's proximal or root solve failed at the given step.
    Objective { step: usize, source: ObjectiveError },
    /// The multivalued solver found no solution at the given step.
    NoSolutions { step: usize },
    /// A fixed-index branch selection pointed past the candidate list.
    BranchIndex { index: usize, count: usize },
    /// A state or residual stopped being finite at the given step.
    NonFinite { step: usize },
}

impl fmt::Display for IntegratorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntegratorError::UnsupportedOrder { k } => {
                write!(f, "unsupported BDF order k = {k} (supported: 1, 2, 3)")
            }
            IntegratorError::InvalidConfig { what } => write!(f, "invalid config: {what}"),
            IntegratorError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            IntegratorError::Objective { step, source } => {
                write!(f, "objective solve failed at step {step}: {source}")
            }
            IntegratorError::NoSolutions { step } => {
                write!(f, "no step solutions found at step {step}")
            }
            IntegratorError::BranchIndex { index, count } => {
                write!(f, "branch index {index} out of range ({count} candidates)")
            }
            IntegratorError::NonFinite { step } => {
                write!(f, "non-finite state produced at step {step}")
            }
        }
    }
}

impl core::error::Error for IntegratorError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            IntegratorError::Objective { source, .. } => Some(source),
            _ => None,
        }
    }
}

/// Where `c_f dt` sits relative to the order's stability thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Regime {
    /// `c_f dt < alpha_k`: the step equation has exactly one solution.
    Unique,
    /// `alpha_k <= c_f dt < 2 beta_k`: steps may branch, but every branch
    /// dissipates the order's Lyapunov function.
    MultivaluedStable,
    /// `c_f dt >= 2 beta_k`: no quadratic correction certifies descent.
    Barrier,
}

/// Step size, order, and solver tolerances for a BDF run.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SchemeConfig {
    pub k: u8,
    pub dt: f64,
    pub max_steps: usize,
    /// Residual tolerance on `|alpha_k U - b + dt grad F(U)|`.
    pub solver_tol: f64,
    /// Stop early once `|U^{n+1} - U^n|` stays at or below this for five
    /// consecutive steps. Zero disables early stopping.
    pub stop_tol: f64,
}

impl SchemeConfig {
    pub fn new(k: u8, dt: f64, max_steps: usize) -> Result<Self, IntegratorError> {
        let cfg = SchemeConfig {
            k,
            dt,
            max_steps,
            solver_tol: 1e-12,
            stop_tol: 1e-10,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), IntegratorError> {
        if !(1..=3).contains(&self.k) {
            return Err(IntegratorError::UnsupportedOrder { k: self.k });
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(IntegratorError::InvalidConfig {
                what: "dt must be positive and finite",
            });
        }
        if !(self.solver_tol > 0.0) {
            return Err(IntegratorError::InvalidConfig {
                what: "solver_tol must be positive",
            });
        }
        if !(self.stop_tol >= 0.0) {
            return Err(IntegratorError::InvalidConfig {
                what: "stop_tol must be nonnegative",
            });
        }
        Ok(())
    }

    /// Leading stencil coefficient `alpha_k = sum_{j<=k} 1/j`.
    pub fn alpha(&self) -> f64 {
        let a = exact::alpha(self.k).expect("validated order");
        (*a.numer() as f64) / (*a.denom() as f64)
    }

    /// Classifies `c_f dt` against the order's thresholds; boundary values
    /// fall into the higher regime.
    pub fn regime(&self, c_f: f64) -> Regime {
        let x = c_f * self.dt;
        if x < self.alpha() {
            Regime::Unique
        } else {
            let tb = exact::two_beta(self.k).expect("validated order");
            if x < (*tb.numer() as f64) / (*tb.denom() as f64) {
                Regime::MultivaluedStable
            } else {
                Regime::Barrier
            }
        }
    }
}

/// History right-hand side `b` of the step equation
/// `alpha_k U + dt grad F(U) = b`, from the `k` most recent states
/// (`history[history.len() - 1]` is the newest).
pub fn bdf_rhs(k: u8, history: &[Vec<f64>]) -> Result<Vec<f64>, IntegratorError> {
    let coeffs = exact::bdf_coeffs(k).map_err(|_| IntegratorError::UnsupportedOrder { k })?;
    let k = k as usize;
    if history.len() < k {
        return Err(IntegratorError::InvalidConfig {
            what: "history shorter than the BDF order",
        });
    }
    let dim = history[history.len() - 1].len();
    let mut b = vec![0.0; dim];
    // coeffs[0] belongs to the unknown U^{n+k}; the rest move to the right
    // with flipped sign, pairing coeffs[j] with the state j steps back
    for (j, c) in coeffs.iter().enumerate().skip(1) {
        let state = &history[history.len() - j];
        if state.len() != dim {
            return Err(IntegratorError::DimensionMismatch {
                expected: dim,
                got: state.len(),
            });
        }
        let w = -(*c.numer() as f64) / (*c.denom() as f64);
        linalg::axpy(&mut b, w, state);
    }
    Ok(b)
}

/// Solves one step in the unique regime via the proximal map:
/// `U = prox_{tau F}(b / alpha_k)`, `tau = dt / alpha_k`.
pub fn solve_step_unique(
    energy: &dyn Energy,
    cfg: &SchemeConfig,
    b: &[f64],
) -> Result<Vec<f64>, ObjectiveError> {
    let alpha = cfg.alpha();
    let tau = cfg.dt / alpha;
    let x: Vec<f64> = b.iter().map(|bi| bi / alpha).collect();
    // step residual = dt * |grad of the prox objective|
    energy.prox(tau, &x, cfg.solver_tol / cfg.dt)
}

/// All solutions of one step equation found by the multivalued solver.
#[derive(Clone, Debug)]
pub struct StepSolutions {
    /// Isolated solutions, plus representatives of any degenerate interval
    /// (its endpoints and midpoint). Sorted ascending in 1D, lexicographic
    /// otherwise.
    pub states: Vec<Vec<f64>>,
    /// In 1D, an interval of non-isolated solutions if one was detected.
    pub degenerate_interval: Option<(f64, f64)>,
}

/// Enumerates solutions of `alpha_k U - b + dt grad F(U) = 0`.
///
/// In 1D this scans a bracket grid of 4096 cells around `b / alpha_k` for
/// sign changes of the residual and bisects each one; runs of nodes where
/// the residual vanishes to rounding are reported as a degenerate interval.
/// Tangential roots that touch zero without crossing can be missed between
/// grid nodes. In higher dimensions it runs damped Newton from a fixed set
/// of deterministic starts and deduplicates the converged points, which
/// finds well-separated solutions but carries no exhaustiveness guarantee.
pub fn solve_step_multivalued(
    energy: &dyn Energy,
    cfg: &SchemeConfig,
    b: &[f64],
    step: usize,
) -> Result<StepSolutions, IntegratorError> {
    let dim = energy.dim();
    if b.len() != dim {
        return Err(IntegratorError::DimensionMismatch {
            expected: dim,
            got: b.len(),
        });
    }
    if dim == 1 {
        solve_multivalued_1d(energy, cfg, b[0], step)
    } else {
        solve_multivalued_newton(energy, cfg, b, step)
    }
}

fn solve_multivalued_1d(
    energy: &dyn Energy,
    cfg: &SchemeConfig,
    b: f64,
    step: usize,
) -> Result<StepSolutions, IntegratorError> {
    let alpha = cfg.alpha();
    let dt = cfg.dt;
    let psi = |u: f64| alpha * u - b + dt * energy.gradient(&[u])[0];

    let center = b / alpha;
    let radius = (2.0 * b.abs() / alpha).max(10.0);
    let cells = 4096usize;
    let lo = center - radius;
    let width = 2.0 * radius / cells as f64;
    // node considered an exact zero when the residual is at rounding level
    // for the magnitudes involved
    let ztol = 1e-12 * (1.0 + b.abs() + alpha * (center.abs() + radius));

    let values: Vec<f64> = (0..=cells).map(|i| psi(lo + width * i as f64)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(IntegratorError::NonFinite { step });
    }

    let mut roots: Vec<f64> = Vec::new();
    let mut degenerate_interval = None;

    // runs of >= 3 consecutive zero nodes mean the residual collapsed on a
    // whole interval (isolated roots cannot pin three nodes at once)
    let mut i = 0;
    let mut zero_runs: Vec<(usize, usize)> = Vec::new();
    while i <= cells {
        if values[i].abs() <= ztol {
            let start = i;
            while i <= cells && values[i].abs() <= ztol {
                i += 1;
            }
            zero_runs.push((start, i - 1));
        } else {
            i += 1;
        }
    }
    for &(start, end) in &zero_runs {
        if end - start >= 2 {
            let is_zero = |u: f64| psi(u).abs() <= ztol;
            let left = refine_edge(lo + width * start as f64, width, &is_zero, true);
            let right = refine_edge(lo + width * end as f64, width, &is_zero, false);
            degenerate_interval = Some((left, right));
            roots.push(left);
            roots.push(0.5 * (left + right));
            roots.push(right);
        } else {
            for node in start..=end {
                roots.push(lo + width * node as f64);
            }
        }
    }

    for i in 0..cells {
        let (a, c) = (values[i], values[i + 1]);
        if a.abs() <= ztol || c.abs() <= ztol {
            continue;
        }
        if a.signum() != c.signum() {
            let mut ra = lo + width * i as f64;
            let mut rc = ra + width;
            for _ in 0..100 {
                let m = 0.5 * (ra + rc);
                if psi(m).signum() == a.signum() {
                    ra = m;
                } else {
                    rc = m;
                }
            }
            let mut r = 0.5 * (ra + rc);
            // Newton polish: bisection stalls an ulp or two from the root
            // once the bracket width reaches rounding level
            for _ in 0..3 {
                let dpsi = alpha + dt * energy.hessian(&[r]).get(0, 0);
                if dpsi.abs() <= 1e-8 * (alpha + dt) {
                    break;
                }
                let next = r - psi(r) / dpsi;
                if !next.is_finite() || (next - r).abs() > width {
                    break;
                }
                r = next;
            }
            roots.push(r);
        }
    }

    roots.sort_by(|x, y| x.partial_cmp(y).expect("finite roots"));
    let sep = 10.0 * cfg.solver_tol;
    let mut states: Vec<Vec<f64>> = Vec::new();
    for r in roots {
        if states.last().map_or(true, |last| (r - last[0]).abs() > sep) {
            states.push(vec![r]);
        }
    }
    if states.is_empty() {
        return Err(IntegratorError::NoSolutions { step });
    }
    Ok(StepSolutions {
        states,
        degenerate_interval,
    })
}

/// Moves from a node known to satisfy `is_zero` outward by up to one cell,
/// bisecting to the boundary of the zero set.
fn refine_edge(node: f64, width: f64, is_zero: &dyn Fn(f64) -> bool, leftward: bool) -> f64 {
    let dir = if leftward { -1.0 } else { 1.0 };
    let mut inside = node;
    let mut outside = node + dir * width;
    if is_zero(outside) {
        return outside;
    }
    for _ in 0..60 {
        let mid = 0.5 * (inside + outside);
        if is_zero(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

fn solve_multivalued_newton(
    energy: &dyn Energy,
    cfg: &SchemeConfig,
    b: &[f64],
    step: usize,
) -> Result<StepSolutions, IntegratorError> {
    let dim = energy.dim();
    let alpha = cfg.alpha();
    let dt = cfg.dt;
    let center: Vec<f64> = b.iter().map(|bi| bi / alpha).collect();
    let spread = 1.0 + linalg::norm(&center);

    let g = |u: &[f64]| -> Vec<f64> {
        let mut r = energy.gradient(u);
        for i in 0..dim {
            r[i] = alpha * u[i] - b[i] + dt * r[i];
        }
        r
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0x0BDF_5EED ^ step as u64);
    let mut found: Vec<Vec<f64>> = Vec::new();
    for start_idx in 0..8 {
        let mut u = center.clone();
        if start_idx > 0 {
            for ui in u.iter_mut() {
                *ui += spread * (2.0 * rng.random::<f64>() - 1.0);
            }
        }
        let mut converged = false;
        for _ in 0..200 {
            let r = g(&u);
            let rn = linalg::norm(&r);
            if !rn.is_finite() {
                break;
            }
            if dt * rn <= cfg.solver_tol {
                converged = true;
                break;
            }
            let mut h = energy.hessian(&u);
            h.shift_diagonal(alpha / dt);
            // Jacobian of g is dt * (H + alpha/dt I); solve with dense LU
            // since the shifted matrix may be indefinite here
            let mut jac = vec![0.0; dim * dim];
            for i in 0..dim {
                for j in 0..dim {
                    jac[i * dim + j] = dt * h.get(i, j);
                }
            }
            let dir = match linalg::lu_solve(jac, r.iter().map(|v| -v).collect()) {
                Some(d) => d,
                None => break,
            };
            // backtrack on |g|^2
            let r2 = rn * rn;
            let mut t = 1.0;
            let mut moved = false;
            for _ in 0..40 {
                let cand: Vec<f64> = u.iter().zip(&dir).map(|(ui, di)| ui + t * di).collect();
                let rc = g(&cand);
                let rc2 = linalg::dot(&rc, &rc);
                if rc2 <= r2 * (1.0 - 1e-4 * t) {
                    u = cand;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if converged && u.iter().all(|v| v.is_finite()) {
            found.push(u);
        }
    }

    let sep = 10.0 * cfg.solver_tol;
    found.sort_by(|x, y| {
        for (a, c) in x.iter().zip(y) {
            match a.partial_cmp(c).expect("finite states") {
                core::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        core::cmp::Ordering::Equal
    });
    let mut states: Vec<Vec<f64>> = Vec::new();
    for u in found {
        let dup = states
            .iter()
            .any(|s| linalg::norm(&linalg::sub(s, &u)) <= sep);
        if !dup {
            states.push(u);
        }
    }
    if states.is_empty() {
        return Err(IntegratorError::NoSolutions { step });
    }
    Ok(StepSolutions {
        states,
        degenerate_interval: None,
    })
}

/// How a trajectory picks its next state when a step has several solutions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchSelection {
    /// Score each candidate by the order's Lyapunov function and take the
    /// smallest (ties break toward the earlier candidate).
    LowestLyapunov,
    /// Take the candidate closest to the previous state.
    NearestPrevious,
    /// Always take the candidate at this position in the sorted list.
    Index(usize),
}

/// Record of one resolved multivalued step.
#[derive(Clone, Debug)]
pub struct BranchChoice {
    /// Index of the produced state in `states`.
    pub step: usize,
    /// All candidate states the solver found, in sorted order.
    pub candidates: Vec<Vec<f64>>,
    /// Position of the chosen candidate.
    pub chosen: usize,
    /// Interval of non-isolated solutions, when the 1D solver detected one.
    pub degenerate: Option<(f64, f64)>,
}

/// Per-step diagnostics kept alongside each integrator-produced state.
#[derive(Clone, Debug)]
pub struct StepRecord {
    /// Achieved residual `|alpha_k U - b + dt grad F(U)|`.
    pub residual: f64,
    /// `W = (b - alpha_k U) / dt`, the subgradient element of `F` the
    /// scheme selected at the new state (equal to `grad F(U)` up to the
    /// residual for smooth `F`).
    pub w: Vec<f64>,
    /// Present when the step went through the multivalued solver.
    pub branch: Option<BranchChoice>,
}

/// Why a run stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// Increment stayed at or below `stop_tol` for five consecutive steps.
    Converged { at_step: usize },
    MaxSteps,
}

/// A computed BDF trajectory with per-step diagnostics.
///
/// `states[0..k]` are the initialization; `records[i]` is `None` exactly
/// for those, and `Some` for every integrator-produced state.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub k: u8,
    pub dt: f64,
    pub states: Vec<Vec<f64>>,
    pub records: Vec<Option<StepRecord>>,
    pub stop: StopReason,
}

impl Trajectory {
    /// Backward difference `states[i] - states[i-1]`.
    pub fn increment(&self, i: usize) -> Vec<f64> {
        linalg::sub(&self.states[i], &self.states[i - 1])
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// How to produce the `k` starting states.
#[derive(Clone, Debug)]
pub enum Bootstrap {
    /// Use exactly the `k` provided states.
    ExactList,
    /// From a single state, generate the rest by ramping the order up:
    /// one BDF1 step, then a BDF2 step when `k = 3`.
    RampUp,
}

/// Produces the `k` initial states for a run.
pub fn bootstrap(
    energy: &dyn Energy,
    cfg: &SchemeConfig,
    init: &[Vec<f64>],
    mode: Bootstrap,
) -> Result<Vec<Vec<f64>>, IntegratorError> {
    cfg.validate()?;
    let k = cfg.k as usize;
    let dim = energy.dim();
    for s in init {
        if s.len() != dim {
            return Err(IntegratorError::DimensionMismatch {
                expected: dim,
                got: s.len(),
            });
        }
    }
    match mode {
        Bootstrap::ExactList => {
            if init.len() != k {
                return Err(IntegratorError::InvalidConfig {
                    what: "exact-list bootstrap needs exactly k states",
                });
            }
            Ok(init.to_vec())
        }
        Bootstrap::RampUp => {
            if init.len() != 1 {
                return Err(IntegratorError::InvalidConfig {
                    what: "ramp-up bootstrap starts from exactly one state",
                });
            }
            let mut states = vec![init[0].clone()];
            for order in 1..k as u8 {
                let sub = SchemeConfig {
                    k: order,
                    ..cfg.clone()
                };
                let b = bdf_rhs(order, &states)?;
                let next = step_with_selection(
                    energy,
                    &sub,
                    &b,
                    &states,
                    states.len(),
                    BranchSelection::NearestPrevious,
                )?
                .0;
                states.push(next);
            }
            Ok(states)
        }
    }
}

/// Resolves one step under the given branch policy. Returns the new state,
/// its residual, and the branch record if the multivalued solver ran.
/// `history` holds at least the `k` most recent states, newest last.
fn step_with_selection(
    energy: &dyn Energy,
    cfg: &SchemeConfig,
    b: &[f64],
    history: &[Vec<f64>],
    step: usize,
    selection: BranchSelection,
) -> Result<(Vec<f64>, f64, Option<BranchChoice>), IntegratorError> {
    let residual_of = |u: &[f64]| -> f64 {
        let mut r = energy.gradient(u);
        for i in 0..u.len() {
            r[i] = cfg.alpha() * u[i] - b[i] + cfg.dt * r[i];
        }
        linalg::norm(&r)
    };

    if cfg.regime(energy.c_f()) == Regime::Unique {
        let u = solve_step_unique(energy, cfg, b)
            .map_err(|source| IntegratorError::Objective { step, source })?;
        let res = residual_of(&u);
        return Ok((u, res, None));
    }

    let last = history.last().expect("nonempty history");
    let sols = solve_step_multivalued(energy, cfg, b, step)?;
    let chosen = match selection {
        BranchSelection::Index(i) => {
            if i >= sols.states.len() {
                return Err(IntegratorError::BranchIndex {
                    index: i,
                    count: sols.states.len(),
                });
            }
            i
        }
        BranchSelection::NearestPrevious => pick_min_by_score(&sols.states, |u| {
            linalg::norm(&linalg::sub(u, last))
        }),
        BranchSelection::LowestLyapunov => {
            let score = lyapunov_branch_score(energy, cfg, history);
            pick_min_by_score(&sols.states, |u| score(u))
        }
    };
    let u = sols.states[chosen].clone();
    let res = residual_of(&u);
    let record = BranchChoice {
        step,
        candidates: sols.states,
        chosen,
        degenerate: sols.degenerate_interval,
    };
    Ok((u, res, Some(record)))
}

fn pick_min_by_score<S: Fn(&[f64]) -> f64>(states: &[Vec<f64>], score: S) -> usize {
    let mut best = 0;
    let mut best_score = f64::INFINITY;
    for (i, u) in states.iter().enumerate() {
        let s = score(u);
        if s < best_score {
            best = i;
            best_score = s;
        }
    }
    best
}

/// Branch score approximating the order's Lyapunov function at the
/// candidate state. For BDF1 this is `F` itself; for BDF2 and BDF3 it adds
/// the quadratic history correction of the order's stability decomposition,
/// falling back to [`BranchSelection::NearestPrevious`]-style distance when
/// no correction is available (barrier regime).
fn lyapunov_branch_score<'a>(
    energy: &'a dyn Energy,
    cfg: &SchemeConfig,
    history: &'a [Vec<f64>],
) -> alloc::boxed::Box<dyn Fn(&[f64]) -> f64 + 'a> {
    let dt = cfg.dt;
    let last = history.last().expect("nonempty history");
    match cfg.k {
        2 => {
            // gamma_2 = a x1^2 - a x2^2 + remainder + beta x1^2 holds with
            // a = (3/2 - beta)/2; the correction per unit step is a |dU|^2
            match crate::lyapunov::default_beta(2, energy.c_f(), dt) {
                Some(beta) => {
                    let a = (1.5 - beta) / 2.0;
                    alloc::boxed::Box::new(move |u: &[f64]| {
                        let du = linalg::sub(u, last);
                        energy.value(u) + a / dt * linalg::dot(&du, &du)
                    })
                }
                None => nearest_fallback(energy, last),
            }
        }
        3 => {
            let q = crate::lyapunov::default_beta(3, energy.c_f(), dt)
                .and_then(|beta| crate::quadform::decompose(beta).ok())
                .map(|dec| dec.q);
            match (q, history.len() >= 2) {
                (Some(q), true) => {
                    let prev = &history[history.len() - 2];
                    alloc::boxed::Box::new(move |u: &[f64]| {
                        let du = linalg::sub(u, last);
                        let du_prev = linalg::sub(last, prev);
                        let corr = q.lift(&du, &du_prev).expect("equal dimensions");
                        energy.value(u) + corr / dt
                    })
                }
                _ => nearest_fallback(energy, last),
            }
        }
        _ => alloc::boxed::Box::new(move |u: &[f64]| energy.value(u)),
    }
}

fn nearest_fallback<'a>(
    energy: &'a dyn Energy,
    last: &'a [f64],
) -> alloc::boxed::Box<dyn Fn(&[f64]) -> f64 + 'a> {
    alloc::boxed::Box::new(move |u: &[f64]| {
        energy.value(u) + linalg::norm(&linalg::sub(u, last))
    })
}

/// Runs the BDFk scheme from `k` initial states.
pub fn run(
    energy: &dyn Energy,
    cfg: &SchemeConfig,
    init: &[Vec<f64>],
    selection: BranchSelection,
) -> Result<Trajectory, IntegratorError> {
    cfg.validate()?;
    let k = cfg.k as usize;
    let dim = energy.dim();
    if init.len() != k {
        return Err(IntegratorError::InvalidConfig {
            what: "run needs exactly k initial states",
        });
    }
    for s in init {
        if s.len() != dim {
            return Err(IntegratorError::DimensionMismatch {
                expected: dim,
                got: s.len(),
            });
        }
    }

    let mut states: Vec<Vec<f64>> = init.to_vec();
    let mut records: Vec<Option<StepRecord>> = vec![None; k];
    let alpha = cfg.alpha();
    let mut quiet_steps = 0usize;
    let mut stop = StopReason::MaxSteps;

    for step in 0..cfg.max_steps {
        let idx = states.len();
        let b = bdf_rhs(cfg.k, &states)?;
        let (u, residual, branch) =
            step_with_selection(energy, cfg, &b, &states, idx, selection)?;
        if u.iter().any(|v| !v.is_finite()) || !residual.is_finite() {
            return Err(IntegratorError::NonFinite { step: idx });
        }
        let w: Vec<f64> = b
            .iter()
            .zip(&u)
            .map(|(bi, ui)| (bi - alpha * ui) / cfg.dt)
            .collect();
        let inc = linalg::norm(&linalg::sub(&u, states.last().expect("nonempty")));
        states.push(u);
        records.push(Some(StepRecord {
            residual,
            w,
            branch,
        }));
        if cfg.stop_tol > 0.0 && inc <= cfg.stop_tol {
            quiet_steps += 1;
            if quiet_steps >= 5 {
                stop = StopReason::Converged { at_step: step + 1 };
                break;
            }
        } else {
            quiet_steps = 0;
        }
    }

    Ok(Trajectory {
        k: cfg.k,
        dt: cfg.dt,
        states,
        records,
        stop,
    })
}

/// Residuals `|sum_j c_j states[i-j] + dt grad F(states[i])|` for each
/// index `i >= k`: how well an externally produced sequence satisfies the
/// BDFk update.
pub fn verify_sequence(
    energy: &dyn Energy,
    k: u8,
    dt: f64,
    states: &[Vec<f64>],
) -> Result<Vec<f64>, IntegratorError> {
    let coeffs = exact::bdf_coeffs(k).map_err(|_| IntegratorError::UnsupportedOrder { k })?;
    let kk = k as usize;
    if states.len() <= kk {
        return Err(IntegratorError::InvalidConfig {
            what: "need more states than the BDF order to verify",
        });
    }
    let dim = energy.dim();
    let mut out = Vec::with_capacity(states.len() - kk);
    for i in kk..states.len() {
        if states[i].len() != dim {
            return Err(IntegratorError::DimensionMismatch {
                expected: dim,
                got: states[i].len(),
            });
        }
        let mut r = energy.gradient(&states[i]);
        for v in r.iter_mut() {
            *v *= dt;
        }
        for (j, c) in coeffs.iter().enumerate() {
            let w = (*c.numer() as f64) / (*c.denom() as f64);
            linalg::axpy(&mut r, w, &states[i - j]);
        }
        out.push(linalg::norm(&r));
    }
    Ok(out)
}

/// Reference solution for an order study.
pub enum Reference<'a> {
    /// Exact flow state at a given time.
    ClosedForm(&'a dyn Fn(f64) -> Vec<f64>),
    /// A BDF3 run at `dt / refine` serves as the reference.
    FineBdf3 { refine: usize },
}

/// One row of an order study: step size and final-time error.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OrderRow {
    pub dt: f64,
    pub error: f64,
}

/// Result of an order study: per-dt errors and the fitted slope.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OrderStudy {
    pub k: u8,
    pub rows: Vec<OrderRow>,
    /// Least-squares slope of `ln error` against `ln dt`; `None` when fewer
    /// than two usable points remain.
    pub slope: Option<f64>,
    pub warnings: Vec<alloc::string::String>,
}

/// Measures the convergence order of BDFk on one flow: runs to `t_final`
/// at each step size, bootstrapping the `k` starting states from the
/// reference, and fits the error-versus-dt slope in log space.
pub fn order_study(
    energy: &dyn Energy,
    k: u8,
    u0: &[f64],
    t_final: f64,
    dts: &[f64],
    reference: Reference<'_>,
    solver_tol: f64,
) -> Result<OrderStudy, IntegratorError> {
    if !(1..=3).contains(&k) {
        return Err(IntegratorError::UnsupportedOrder { k });
    }
    if dts.is_empty() {
        return Err(IntegratorError::InvalidConfig {
            what: "order study needs at least one step size",
        });
    }
    if !(t_final > 0.0) {
        return Err(IntegratorError::InvalidConfig {
            what: "order study needs t_final > 0",
        });
    }
    for &dt in dts {
        let steps = t_final / dt;
        if (steps - math::round(steps)).abs() > 1e-9 * steps.max(1.0) {
            return Err(IntegratorError::InvalidConfig {
                what: "every dt must divide t_final",
            });
        }
    }

    let ref_at = |t: f64| -> Result<Vec<f64>, IntegratorError> {
        match &reference {
            Reference::ClosedForm(f) => Ok(f(t)),
            Reference::FineBdf3 { refine } => {
                let dt_min = dts.iter().cloned().fold(f64::INFINITY, f64::min);
                let dt_ref = dt_min / (*refine).max(2) as f64;
                let steps = math::round(t / dt_ref) as usize;
                if steps < 3 {
                    return Ok(u0.to_vec());
                }
                let cfg = SchemeConfig {
                    k: 3,
                    dt: dt_ref,
                    max_steps: steps - 2,
                    solver_tol,
                    stop_tol: 0.0,
                };
                let init = bootstrap(energy, &cfg, &[u0.to_vec()], Bootstrap::RampUp)?;
                let traj = run(energy, &cfg, &init, BranchSelection::NearestPrevious)?;
                Ok(traj.states.last().expect("nonempty").clone())
            }
        }
    };

    let mut rows = Vec::with_capacity(dts.len());
    let mut warnings = Vec::new();
    let target = ref_at(t_final)?;
    for &dt in dts {
        let total_steps = math::round(t_final / dt) as usize;
        if total_steps < k as usize {
            warnings.push(alloc::format!(
                "dt = {dt}: horizon shorter than the startup window, skipped"
            ));
            continue;
        }
        // exact bootstrap: the first k states come from the reference, so
        // measured error reflects the marching scheme alone
        let mut init = Vec::with_capacity(k as usize);
        for j in 0..k as usize {
            init.push(ref_at(j as f64 * dt)?);
        }
        let cfg = SchemeConfig {
            k,
            dt,
            max_steps: total_steps - (k as usize - 1),
            solver_tol,
            stop_tol: 0.0,
        };
        let traj = run(energy, &cfg, &init, BranchSelection::NearestPrevious)?;
        let last = traj.states.last().expect("nonempty");
        let error = linalg::norm(&linalg::sub(last, &target));
        rows.push(OrderRow { dt, error });
    }

    let usable: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.error > 1e-300)
        .map(|r| (math::ln(r.dt), math::ln(r.error)))
        .collect();
    if usable.len() < rows.len() {
        warnings.push(alloc::string::String::from(
            "errors at rounding level were excluded from the fit",
        ));
    }
    let slope = if usable.len() < 2 {
        warnings.push(alloc::string::String::from(
            "fewer than two usable points; no slope fitted",
        ));
        None
    } else {
        let n = usable.len() as f64;
        let (sx, sy): (f64, f64) = usable.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
            (a + x, b + y)
        });
        let (mx, my) = (sx / n, sy / n);
        let mut num = 0.0;
        let mut den = 0.0;
        for (x, y) in &usable {
            num += (x - mx) * (y - my);
            den += (x - mx) * (x - mx);
        }
        Some(num / den)
    };

    let mut sorted = rows.clone();
    sorted.sort_by(|a, b| a.dt.partial_cmp(&b.dt).expect("finite dt"));
    for w in sorted.windows(2) {
        if w[0].error > w[1].error * (1.0 + 1e-9) {
            warnings.push(alloc::string::String::from(
                "errors are not monotone in dt",
            ));
            break;
        }
    }

    Ok(OrderStudy {
        k,
        rows,
        slope,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMatrix;
    use crate::objective::{AllenCahn1d, Barrier, Polynomial, Quadratic};

    fn scalar_quadratic(lambda: f64) -> Quadratic {
        Quadratic::scalar(lambda).unwrap()
    }

    #[test]
    fn alpha_values_match_harmonic_sums() {
        for (k, want) in [(1u8, 1.0), (2, 1.5), (3, 11.0 / 6.0)] {
            let cfg = SchemeConfig::new(k, 1.0, 1).unwrap();
            assert_eq!(cfg.alpha(), want);
        }
    }

    #[test]
    fn regime_thresholds_straddle_exactly() {
        let eps = 1e-9;
        for (k, alpha, two_beta) in [
            (1u8, 1.0, 2.0),
            (2, 1.5, 2.0),
            (3, 11.0 / 6.0, 95.0 / 48.0),
        ] {
            let cfg = SchemeConfig::new(k, 1.0, 1).unwrap();
            assert_eq!(cfg.regime(alpha - eps), Regime::Unique);
            assert_eq!(cfg.regime(alpha), Regime::MultivaluedStable);
            assert_eq!(cfg.regime(two_beta - eps), Regime::MultivaluedStable);
            assert_eq!(cfg.regime(two_beta), Regime::Barrier);
            assert_eq!(cfg.regime(0.0), Regime::Unique);
        }
    }

    #[test]
    fn rhs_matches_stencil_coefficients() {
        let hist = vec![vec![2.0], vec![-1.0], vec![3.0]];
        // k = 1: b = newest
        assert_eq!(bdf_rhs(1, &hist).unwrap(), vec![3.0]);
        // k = 2: b = 2 U^{n+1} - 1/2 U^n
        assert!((bdf_rhs(2, &hist).unwrap()[0] - (2.0 * 3.0 - 0.5 * (-1.0))).abs() < 1e-15);
        // k = 3: b = 3 U^{n+2} - 3/2 U^{n+1} + 1/3 U^n
        let b3 = bdf_rhs(3, &hist).unwrap()[0];
        assert!((b3 - (3.0 * 3.0 - 1.5 * (-1.0) + 2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn unique_step_matches_closed_form_on_scalar_quadratic() {
        // alpha u + dt lambda u = b  =>  u = b / (alpha + dt lambda)
        let e = scalar_quadratic(2.0);
        for k in 1..=3u8 {
            let cfg = SchemeConfig::new(k, 0.3, 1).unwrap();
            let b = vec![1.7];
            let u = solve_step_unique(&e, &cfg, &b).unwrap();
            let want = 1.7 / (cfg.alpha() + 0.3 * 2.0);
            assert!((u[0] - want).abs() < 1e-12, "k={k}: {} vs {want}", u[0]);
        }
    }

    #[test]
    fn run_matches_recurrence_on_scalar_quadratic() {
        let lambda = 1.5;
        let e = scalar_quadratic(lambda);
        let cfg = SchemeConfig {
            k: 2,
            dt: 0.1,
            max_steps: 50,
            solver_tol: 1e-13,
            stop_tol: 0.0,
        };
        let init = vec![vec![1.0], vec![0.9]];
        let traj = run(&e, &cfg, &init, BranchSelection::NearestPrevious).unwrap();
        let mut u_prev = 1.0_f64;
        let mut u = 0.9_f64;
        for state in &traj.states[2..] {
            let next = (2.0 * u - 0.5 * u_prev) / (1.5 + 0.1 * lambda);
            assert!((state[0] - next).abs() < 1e-10);
            u_prev = u;
            u = next;
        }
        assert!(traj.records[0].is_none());
        assert!(traj.records[2].is_some());
        let rec = traj.records[2].as_ref().unwrap();
        assert!(rec.residual <= cfg.solver_tol);
        // W = (b - alpha u)/dt is the gradient the scheme selected
        let g = e.gradient(&traj.states[2]);
        assert!((rec.w[0] - g[0]).abs() <= 10.0 * cfg.solver_tol / cfg.dt);
    }

    #[test]
    fn ramp_up_bootstrap_matches_closed_forms() {
        let lambda = 2.0;
        let e = scalar_quadratic(lambda);
        let cfg = SchemeConfig::new(3, 0.2, 10).unwrap();
        let states = bootstrap(&e, &cfg, &[vec![1.0]], Bootstrap::RampUp).unwrap();
        assert_eq!(states.len(), 3);
        let u1 = 1.0 / (1.0 + lambda * 0.2);
        let u2 = (2.0 * u1 - 0.5) / (1.5 + lambda * 0.2);
        assert!((states[1][0] - u1).abs() < 1e-12);
        assert!((states[2][0] - u2).abs() < 1e-12);
    }

    #[test]
    fn bootstrap_validates_shapes() {
        let e = scalar_quadratic(1.0);
        let cfg = SchemeConfig::new(2, 0.1, 1).unwrap();
        assert!(matches!(
            bootstrap(&e, &cfg, &[vec![1.0]], Bootstrap::ExactList),
            Err(IntegratorError::InvalidConfig { .. })
        ));
        assert!(matches!(
            bootstrap(&e, &cfg, &[vec![1.0], vec![2.0]], Bootstrap::RampUp),
            Err(IntegratorError::InvalidConfig { .. })
        ));
    }

    #[test]
    fn alternating_barrier_run_follows_middle_root() {
        for k in 1..=3u8 {
            let dt = 1.0;
            let e = Barrier::new(k, dt).unwrap();
            let cfg = SchemeConfig {
                k,
                dt,
                max_steps: 60,
                solver_tol: 1e-11,
                stop_tol: 0.0,
            };
            let init: Vec<Vec<f64>> = (0..k)
                .map(|j| vec![if (k - 1 - j) % 2 == 0 { 1.0 } else { -1.0 }])
                .collect();
            // newest initial state is +1 at index k-1, so state n is (-1)^(n+k-1)
            let traj = run(&e, &cfg, &init, BranchSelection::Index(1)).unwrap();
            assert_eq!(traj.states.len(), 60 + k as usize);
            for (n, s) in traj.states.iter().enumerate() {
                let want = if (n + k as usize - 1) % 2 == 0 { 1.0 } else { -1.0 };
                assert!((s[0] - want).abs() <= 1e-13, "k={k}, n={n}: {}", s[0]);
            }
            for rec in traj.records.iter().flatten() {
                assert!(rec.residual <= 1e-11);
                let branch = rec.branch.as_ref().expect("barrier regime is multivalued");
                assert_eq!(branch.chosen, 1);
                assert!(branch.candidates.len() >= 3);
            }
        }
    }

    #[test]
    fn degenerate_interval_is_detected_at_threshold() {
        let dt = 1.0;
        for k in 1..=3u8 {
            let e = Barrier::at_uniqueness_threshold(k, dt).unwrap();
            let cfg = SchemeConfig {
                k,
                dt,
                max_steps: 1,
                solver_tol: 1e-12,
                stop_tol: 0.0,
            };
            // with b = 0 the core equation reads (alpha - alpha) u = 0
            let sols = solve_step_multivalued(&e, &cfg, &[0.0], 0).unwrap();
            let (lo, hi) = sols.degenerate_interval.expect("interval expected");
            // the cubic outer tail leaves the residual inside the zero
            // tolerance for ~(ztol)^(1/3) beyond the endpoints, which caps
            // how sharply any residual test can localize them
            assert!((lo + 1.0).abs() < 1e-3, "k={k}: lo = {lo}");
            assert!((hi - 1.0).abs() < 1e-3, "k={k}: hi = {hi}");
            assert!(sols.states.len() >= 3);
        }
    }

    #[test]
    fn multivalued_roots_match_dense_scan_on_double_well() {
        let e = Polynomial::double_well(1.0).unwrap();
        let dt = 1.9;
        let cfg = SchemeConfig {
            k: 3,
            dt,
            max_steps: 1,
            solver_tol: 1e-12,
            stop_tol: 0.0,
        };
        assert_eq!(cfg.regime(e.c_f()), Regime::MultivaluedStable);
        let b = 0.0;
        let sols = solve_step_multivalued(&e, &cfg, &[b], 0).unwrap();
        // psi(u) = alpha u + dt (u^3 - u) = 0: roots 0, +-sqrt(1 - alpha/dt)
        let alpha = cfg.alpha();
        let r = math::sqrt(1.0 - alpha / dt);
        let want = [-r, 0.0, r];
        assert_eq!(sols.states.len(), 3);
        for (s, w) in sols.states.iter().zip(&want) {
            assert!((s[0] - w).abs() < 1e-9, "{} vs {w}", s[0]);
        }

        // dense oracle: million-point scan for sign changes
        let n = 1_000_000;
        let psi = |u: f64| alpha * u - b + dt * e.gradient(&[u])[0];
        let mut crossings = 0;
        let mut prev = psi(-5.0);
        for i in 1..=n {
            let u = -5.0 + 10.0 * (i as f64) / (n as f64);
            let v = psi(u);
            if prev.signum() != v.signum() {
                crossings += 1;
            }
            prev = v;
        }
        assert_eq!(crossings, sols.states.len());
    }

    #[test]
    fn branch_index_out_of_range_errors() {
        let e = Polynomial::double_well(1.0).unwrap();
        let cfg = SchemeConfig {
            k: 3,
            dt: 1.9,
            max_steps: 3,
            solver_tol: 1e-12,
            stop_tol: 0.0,
        };
        let init = vec![vec![0.0], vec![0.0], vec![0.0]];
        match run(&e, &cfg, &init, BranchSelection::Index(7)) {
            Err(IntegratorError::BranchIndex { index: 7, count }) => assert!(count <= 3),
            other => panic!("expected branch index error, got {:?}", other.is_ok()),
        }
    }

    #[test]
    fn lowest_lyapunov_leaves_the_hilltop() {
        // from rest at the double-well hilltop, LowestLyapunov picks a
        // descending branch while the hilltop itself stays a candidate
        let e = Polynomial::double_well(1.0).unwrap();
        let cfg = SchemeConfig {
            k: 3,
            dt: 1.9,
            max_steps: 40,
            solver_tol: 1e-12,
            stop_tol: 0.0,
        };
        let init = vec![vec![0.0], vec![0.0], vec![0.0]];
        let traj = run(&e, &cfg, &init, BranchSelection::LowestLyapunov).unwrap();
        let last = traj.states.last().unwrap()[0];
        assert!(last.abs() > 0.1, "stayed at the hilltop: {last}");
        assert!(e.value(&[last]) < e.value(&[0.0]));
    }

    #[test]
    fn nearest_previous_keeps_the_equilibrium_branch() {
        let e = Polynomial::double_well(1.0).unwrap();
        let cfg = SchemeConfig {
            k: 3,
            dt: 1.9,
            max_steps: 10,
            solver_tol: 1e-12,
            stop_tol: 0.0,
        };
        let init = vec![vec![0.0], vec![0.0], vec![0.0]];
        let traj = run(&e, &cfg, &init, BranchSelection::NearestPrevious).unwrap();
        for s in &traj.states {
            assert_eq!(s[0], 0.0);
        }
    }

    #[test]
    fn newton_multivalued_solver_works_in_higher_dimensions() {
        // small Allen-Cahn forced into the multivalued regime
        let e = AllenCahn1d::new(4, 1.0, 1.0).unwrap();
        let dt = 1.9;
        let cfg = SchemeConfig {
            k: 3,
            dt,
            max_steps: 1,
            solver_tol: 1e-10,
            stop_tol: 0.0,
        };
        assert_eq!(cfg.regime(e.c_f()), Regime::MultivaluedStable);
        let b = vec![0.0; 4];
        let sols = solve_step_multivalued(&e, &cfg, &b, 0).unwrap();
        assert!(!sols.states.is_empty());
        let alpha = cfg.alpha();
        for s in &sols.states {
            let mut r = e.gradient(s);
            for i in 0..4 {
                r[i] = alpha * s[i] - b[i] + dt * r[i];
            }
            assert!(dt * linalg::norm(&r) <= cfg.solver_tol * 1.001);
        }
        // the zero state solves this step exactly and must be among them
        assert!(sols
            .states
            .iter()
            .any(|s| linalg::norm(s) <= 1e-9));
    }

    #[test]
    fn stop_tol_triggers_early_convergence() {
        let e = scalar_quadratic(5.0);
        let cfg = SchemeConfig {
            k: 1,
            dt: 0.5,
            max_steps: 4000,
            solver_tol: 1e-13,
            stop_tol: 1e-10,
        };
        let traj = run(&e, &cfg, &[vec![1.0]], BranchSelection::NearestPrevious).unwrap();
        match traj.stop {
            StopReason::Converged { at_step } => assert!(at_step < 4000),
            StopReason::MaxSteps => panic!("expected early convergence"),
        }
        assert!(traj.states.last().unwrap()[0].abs() < 1e-8);
    }

    #[test]
    fn verify_sequence_flags_wrong_states() {
        let e = scalar_quadratic(1.0);
        let cfg = SchemeConfig {
            k: 2,
            dt: 0.2,
            max_steps: 10,
            solver_tol: 1e-13,
            stop_tol: 0.0,
        };
        let traj = run(&e, &cfg, &[vec![1.0], vec![0.8]], BranchSelection::NearestPrevious)
            .unwrap();
        let res = verify_sequence(&e, 2, 0.2, &traj.states).unwrap();
        assert!(res.iter().all(|r| *r <= 1e-12));
        let mut corrupted = traj.states.clone();
        corrupted[5][0] += 0.1;
        let res = verify_sequence(&e, 2, 0.2, &corrupted).unwrap();
        assert!(res.iter().any(|r| *r > 0.01));
    }

    #[test]
    fn order_study_recovers_scheme_orders() {
        let a = SymMatrix::from_fn(1, |_, _| 1.0);
        let e = Quadratic::new(a, vec![0.0]).unwrap();
        let u0 = vec![1.0];
        let flow = |t: f64| vec![math::exp(-t)];
        let dts = [0.1, 0.05, 0.025, 0.0125];
        for k in 1..=3u8 {
            let study = order_study(
                &e,
                k,
                &u0,
                1.0,
                &dts,
                Reference::ClosedForm(&flow),
                1e-13,
            )
            .unwrap();
            let slope = study.slope.expect("slope");
            assert!(
                (slope - k as f64).abs() < 0.3,
                "k={k}: slope {slope}, rows {:?}",
                study.rows
            );
        }
    }

    #[test]
    fn order_study_rejects_nondividing_dt() {
        let e = scalar_quadratic(1.0);
        let flow = |t: f64| vec![math::exp(-t)];
        assert!(matches!(
            order_study(&e, 1, &[1.0], 1.0, &[0.3], Reference::ClosedForm(&flow), 1e-12),
            Err(IntegratorError::InvalidConfig { .. })
        ));
    }

    #[test]
    fn fine_reference_tracks_closed_form() {
        let e = scalar_quadratic(1.0);
        let dts = [0.1, 0.05];
        let fine = order_study(
            &e,
            2,
            &[1.0],
            1.0,
            &dts,
            Reference::FineBdf3 { refine: 16 },
            1e-13,
        )
        .unwrap();
        let flow = |t: f64| vec![math::exp(-t)];
        let exact = order_study(&e, 2, &[1.0], 1.0, &dts, Reference::ClosedForm(&flow), 1e-13)
            .unwrap();
        for (a, b) in fine.rows.iter().zip(&exact.rows) {
            assert!((a.error - b.error).abs() < 0.05 * b.error + 1e-9);
        }
    }

    #[test]
    fn runs_are_deterministic_bitwise() {
        let e = Polynomial::double_well(1.0).unwrap();
        let cfg = SchemeConfig {
            k: 3,
            dt: 1.9,
            max_steps: 30,
            solver_tol: 1e-12,
            stop_tol: 0.0,
        };
        let init = vec![vec![0.3], vec![0.31], vec![0.33]];
        let a = run(&e, &cfg, &init, BranchSelection::LowestLyapunov).unwrap();
        let b = run(&e, &cfg, &init, BranchSelection::LowestLyapunov).unwrap();
        assert_eq!(a.states.len(), b.states.len());
        for (x, y) in a.states.iter().zip(&b.states) {
            assert_eq!(x[0].to_bits(), y[0].to_bits());
        }
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        assert!(matches!(
            SchemeConfig::new(4, 0.1, 1),
            Err(IntegratorError::UnsupportedOrder { k: 4 })
        ));
        assert!(matches!(
            SchemeConfig::new(1, 0.0, 1),
            Err(IntegratorError::InvalidConfig { .. })
        ));
        assert!(matches!(
            SchemeConfig::new(1, f64::NAN, 1),
            Err(IntegratorError::InvalidConfig { .. })
        ));
    }
}
