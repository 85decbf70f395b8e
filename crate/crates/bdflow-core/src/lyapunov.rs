//! Discrete Lyapunov structure of BDF trajectories.
//!
//! For BDF3 with `c_f dt / 2 < beta < 95/96` the shifted energy
//!
//! `hat F(U^n) = F(U^n) + (1/dt) Q(U^n - U^{n-1}, U^{n-1} - U^{n-2})`
//!
//! decreases along every trajectory, where `Q` is the history correction of
//! a stability decomposition at `beta`. This module audits that descent
//! step by step, checks the dissipation budget it implies, and reports
//! convergence diagnostics for the trajectory tail.

use alloc::vec::Vec;
use core::fmt;

use crate::integrator::{bdf_rhs, Trajectory};
use crate::linalg;
use crate::objective::Energy;
use crate::quadform::{self, Decomposition, QuadformError};

/// Errors from Lyapunov audits.
#[derive(Clone, Debug, PartialEq)]
pub enum LyapunovError {
    /// The audit needs a BDF3 trajectory.
    WrongOrder { k: u8 },
    /// `beta` lies outside the admissible interval `[lo, hi)`.
    BetaOutOfRange { beta: f64, lo: f64, hi: f64 },
    /// The admissible interval is empty: `c_f dt / 2` is at or above the
    /// order's threshold, so no quadratic correction certifies descent.
    EmptyRange { lo: f64, hi: f64 },
    /// The provided decomposition was built for a different `beta`.
    DecompositionMismatch { expected: f64, got: f64 },
    /// The trajectory is too short for the requested audit.
    InsufficientData { needed: usize, got: usize },
    Quadform(QuadformError),
}

impl fmt::Display for LyapunovError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LyapunovError::WrongOrder { k } => {
                write!(f, "descent audit requires a BDF3 trajectory, got k = {k}")
            }
            LyapunovError::BetaOutOfRange { beta, lo, hi } => {
                write!(f, "beta = {beta} outside the admissible range [{lo}, {hi})")
            }
            LyapunovError::EmptyRange { lo, hi } => {
                write!(
                    f,
                    "no admissible beta: c_f dt / 2 = {lo} is not below {hi}"
                )
            }
            LyapunovError::DecompositionMismatch { expected, got } => {
                write!(f, "decomposition built for beta = {got}, audit asked for {expected}")
            }
            LyapunovError::InsufficientData { needed, got } => {
                write!(f, "trajectory too short: need {needed} states, got {got}")
            }
            LyapunovError::Quadform(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for LyapunovError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            LyapunovError::Quadform(e) => Some(e),
            _ => None,
        }
    }
}

impl From<QuadformError> for LyapunovError {
    fn from(e: QuadformError) -> Self {
        LyapunovError::Quadform(e)
    }
}

fn beta_limit(k: u8) -> Option<f64> {
    match k {
        1 | 2 => Some(1.0),
        3 => Some(quadform::beta3_f64()),
        _ => None,
    }
}

/// Midpoint of the admissible correction interval
/// `(c_f dt / 2, beta_k)`, or `None` when that interval is empty (including
/// unsupported orders).
pub fn default_beta(k: u8, c_f: f64, dt: f64) -> Option<f64> {
    let hi = beta_limit(k)?;
    let lo = 0.5 * c_f * dt;
    if lo < hi {
        Some(0.5 * (lo + hi))
    } else {
        None
    }
}

/// Shifted energy `F(u) + Q(u - u_prev, u_prev - u_prev2) / dt` for the
/// decomposition's history correction `Q`.
pub fn hat_f(
    energy: &dyn Energy,
    dec: &Decomposition,
    dt: f64,
    u: &[f64],
    u_prev: &[f64],
    u_prev2: &[f64],
) -> Result<f64, LyapunovError> {
    let du = linalg::sub(u, u_prev);
    let du_prev = linalg::sub(u_prev, u_prev2);
    Ok(energy.value(u) + dec.q.lift(&du, &du_prev)? / dt)
}

/// Audit entries for one trajectory transition.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StepAudit {
    /// Index of the produced state.
    pub index: usize,
    /// Shifted energy after this transition.
    pub lyapunov: f64,
    /// `hat F(before) - hat F(after) - r_term`: the certified dissipation
    /// beyond the nonnegative remainder; stays above rounding noise exactly
    /// when the descent property holds.
    pub margin: f64,
    /// Remainder `r_tilde(dU^n, dU^{n-1}, dU^{n-2}) / dt`, nonnegative by
    /// construction of the decomposition.
    pub r_term: f64,
    /// Semiconvexity slack
    /// `F(prev) - F(new) + <W, dU> + (c_f/2) |dU|^2`, nonnegative for exact
    /// steps on a `c_f`-semiconvex energy.
    pub slack: f64,
    /// `|U^n - U^{n-1}|`.
    pub increment_norm: f64,
}

/// Step-by-step descent audit of one BDF3 trajectory.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DescentAudit {
    pub beta: f64,
    /// Shifted energy of the initialization, at the earliest index where
    /// the history correction is defined.
    pub initial_lyapunov: f64,
    pub steps: Vec<StepAudit>,
    pub min_margin: f64,
    pub min_slack: f64,
    /// Shifted energies are nonincreasing to rounding tolerance.
    pub monotone: bool,
    /// Every margin is above `-1e-10 (1 + |hat F|)`.
    pub ok: bool,
}

/// Audits the descent of the shifted energy along a BDF3 trajectory,
/// checking first that `beta` is admissible for the energy's constant and
/// the trajectory's step size.
pub fn descent_audit(
    traj: &Trajectory,
    energy: &dyn Energy,
    beta: f64,
    dec: &Decomposition,
) -> Result<DescentAudit, LyapunovError> {
    if traj.k != 3 {
        return Err(LyapunovError::WrongOrder { k: traj.k });
    }
    let hi = quadform::beta3_f64();
    let lo = 0.5 * energy.c_f() * traj.dt;
    if lo >= hi {
        return Err(LyapunovError::EmptyRange { lo, hi });
    }
    if beta < lo || beta >= hi {
        return Err(LyapunovError::BetaOutOfRange { beta, lo, hi });
    }
    if dec.beta != beta {
        return Err(LyapunovError::DecompositionMismatch {
            expected: beta,
            got: dec.beta,
        });
    }
    descent_audit_unchecked(traj, energy, dec)
}

/// The audit itself, without admissibility checks: useful as a diagnostic
/// for regimes where no `beta` certifies descent and the interesting output
/// is exactly how the audit fails.
pub fn descent_audit_unchecked(
    traj: &Trajectory,
    energy: &dyn Energy,
    dec: &Decomposition,
) -> Result<DescentAudit, LyapunovError> {
    if traj.k != 3 {
        return Err(LyapunovError::WrongOrder { k: traj.k });
    }
    let states = &traj.states;
    let len = states.len();
    if len < 4 {
        return Err(LyapunovError::InsufficientData { needed: 4, got: len });
    }
    let dt = traj.dt;
    let alpha = 11.0 / 6.0;
    let c_f = energy.c_f();

    // one shifted energy per index from the first with full history
    let mut hats = Vec::with_capacity(len - 2);
    for i in 2..len {
        hats.push(hat_f(
            energy,
            dec,
            dt,
            &states[i],
            &states[i - 1],
            &states[i - 2],
        )?);
    }
    let hat = |i: usize| hats[i - 2];

    let mut steps = Vec::with_capacity(len - 3);
    let mut min_margin = f64::INFINITY;
    let mut min_slack = f64::INFINITY;
    let mut monotone = true;
    let mut ok = true;
    for i in 3..len {
        let du = linalg::sub(&states[i], &states[i - 1]);
        let du1 = linalg::sub(&states[i - 1], &states[i - 2]);
        let du2 = linalg::sub(&states[i - 2], &states[i - 3]);
        let r_term = dec.r_tilde.lift(&du, &du1, &du2)? / dt;
        let margin = hat(i - 1) - hat(i) - r_term;

        let b = bdf_rhs(3, &states[..i]).expect("full history");
        let w: Vec<f64> = b
            .iter()
            .zip(&states[i])
            .map(|(bi, ui)| (bi - alpha * ui) / dt)
            .collect();
        let slack = energy.value(&states[i - 1]) - energy.value(&states[i])
            + linalg::dot(&w, &du)
            + 0.5 * c_f * linalg::dot(&du, &du);

        let tol = 1e-10 * (1.0 + hat(i).abs().max(hat(i - 1).abs()));
        if margin < -tol {
            ok = false;
        }
        if hat(i) > hat(i - 1) + tol {
            monotone = false;
        }
        min_margin = min_margin.min(margin);
        min_slack = min_slack.min(slack);
        steps.push(StepAudit {
            index: i,
            lyapunov: hat(i),
            margin,
            r_term,
            slack,
            increment_norm: linalg::norm(&du),
        });
    }

    Ok(DescentAudit {
        beta: dec.beta,
        initial_lyapunov: hat(2),
        steps,
        min_margin,
        min_slack,
        monotone,
        ok,
    })
}

/// Dissipation budget implied by a descent audit.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BudgetCheck {
    /// Shifted energy after the first audited transition.
    pub baseline: f64,
    /// Total remainder dissipation accumulated after the baseline.
    pub sum_r: f64,
    /// `baseline - inf F`: everything the trajectory can ever dissipate.
    pub budget: f64,
    pub ok: bool,
}

/// Checks that the accumulated remainder terms stay within the energy gap:
/// the descent property forces `sum_r <= baseline - inf F`.
pub fn budget_check(audit: &DescentAudit, lower_bound: f64) -> Result<BudgetCheck, LyapunovError> {
    if audit.steps.is_empty() {
        return Err(LyapunovError::InsufficientData { needed: 1, got: 0 });
    }
    let baseline = audit.steps[0].lyapunov;
    let sum_r: f64 = audit.steps[1..].iter().map(|s| s.r_term).sum();
    let budget = baseline - lower_bound;
    let ok = sum_r <= budget + 1e-8 * (1.0 + budget.abs());
    Ok(BudgetCheck {
        baseline,
        sum_r,
        budget,
        ok,
    })
}

/// Tail behaviour of a trajectory: how far it still moves and how spread
/// out its recent states are.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OmegaDiagnostics {
    /// Number of trailing states examined.
    pub window: usize,
    /// Largest single increment within the window.
    pub tail_max_increment: f64,
    /// Largest pairwise distance within the window; small values mean the
    /// omega-limit set collapsed to a point, values that stay large mean a
    /// cycle or a spread-out limit set.
    pub tail_diameter: f64,
    /// Same over the trailing half window, to expose whether the diameter
    /// is still shrinking.
    pub half_window_diameter: f64,
    /// `|W|` at the first audited transition.
    pub w_norm_first: f64,
    /// `|W|` at the last transition.
    pub w_norm_last: f64,
    /// `|U^{last} - U^{last-1}|`.
    pub final_increment: f64,
}

/// Computes tail diagnostics on the last
/// `max(50, len / 20)` states (clamped to what is available).
pub fn omega_diagnostics(traj: &Trajectory) -> Result<OmegaDiagnostics, LyapunovError> {
    let states = &traj.states;
    let len = states.len();
    let k = traj.k as usize;
    if len < k + 1 {
        return Err(LyapunovError::InsufficientData {
            needed: k + 1,
            got: len,
        });
    }
    let window = (len / 20).max(50).min(len);
    let tail = &states[len - window..];

    let mut tail_max_increment = 0.0_f64;
    for w in tail.windows(2) {
        tail_max_increment = tail_max_increment.max(linalg::norm(&linalg::sub(&w[1], &w[0])));
    }
    let diameter = |part: &[Vec<f64>]| {
        let mut d = 0.0_f64;
        for i in 0..part.len() {
            for j in i + 1..part.len() {
                d = d.max(linalg::norm(&linalg::sub(&part[i], &part[j])));
            }
        }
        d
    };
    let tail_diameter = diameter(tail);
    let half_window_diameter = diameter(&tail[tail.len() - (tail.len() / 2).max(1)..]);

    let coeffs = crate::quadform::exact::alpha(traj.k).expect("validated order");
    let alpha = (*coeffs.numer() as f64) / (*coeffs.denom() as f64);
    let w_at = |i: usize| -> f64 {
        let b = bdf_rhs(traj.k, &states[..i]).expect("full history");
        let w: Vec<f64> = b
            .iter()
            .zip(&states[i])
            .map(|(bi, ui)| (bi - alpha * ui) / traj.dt)
            .collect();
        linalg::norm(&w)
    };
    let w_norm_first = w_at(k);
    let w_norm_last = w_at(len - 1);
    let final_increment = linalg::norm(&linalg::sub(&states[len - 1], &states[len - 2]));

    Ok(OmegaDiagnostics {
        window,
        tail_max_increment,
        tail_diameter,
        half_window_diameter,
        w_norm_first,
        w_norm_last,
        final_increment,
    })
}

/// Uniform bound extracted from the descent structure.
#[derive(Clone, Debug)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BoundednessCheck {
    /// Energy level no state may exceed.
    pub bound: f64,
    pub max_value: f64,
    pub sup_norm: f64,
    /// States whose energy exceeds the bound beyond tolerance.
    pub violations: usize,
    pub ok: bool,
}

/// Checks that `F` stays below its initialization level along the whole
/// trajectory. For BDF3 in the admissible regime the level is the shifted
/// energy of the initialization, which dominates every later `F(U^n)`.
pub fn coercive_boundedness_check(
    traj: &Trajectory,
    energy: &dyn Energy,
) -> Result<BoundednessCheck, LyapunovError> {
    let k = traj.k as usize;
    let states = &traj.states;
    if states.len() < k {
        return Err(LyapunovError::InsufficientData {
            needed: k,
            got: states.len(),
        });
    }
    let mut bound = f64::NEG_INFINITY;
    for s in &states[..k] {
        bound = bound.max(energy.value(s));
    }
    if traj.k == 3 && states.len() >= 3 {
        if let Some(beta) = default_beta(3, energy.c_f(), traj.dt) {
            if let Ok(dec) = quadform::decompose(beta) {
                let hat2 = hat_f(energy, &dec, traj.dt, &states[2], &states[1], &states[0])?;
                bound = bound.max(hat2);
            }
        }
    }

    let tol = 1e-8 * (1.0 + bound.abs());
    let mut violations = 0;
    let mut max_value = f64::NEG_INFINITY;
    let mut sup_norm = 0.0_f64;
    for s in states {
        let v = energy.value(s);
        max_value = max_value.max(v);
        sup_norm = sup_norm.max(linalg::norm(s));
        if v > bound + tol {
            violations += 1;
        }
    }
    Ok(BoundednessCheck {
        bound,
        max_value,
        sup_norm,
        violations,
        ok: violations == 0,
    })
}
