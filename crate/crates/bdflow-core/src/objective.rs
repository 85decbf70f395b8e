//! Semiconvex energies: the oracle bundle the integrators consume, plus the
//! built-in library of concrete functions.
//!
//! An energy `F` on `R^M` is semiconvex with constant `c_F >= 0` when
//! `F + (c_F/2) |.|^2` is convex; equivalently, for every subgradient `W` at
//! `V`,
//!
//! `F(V') >= F(V) + <W, V' - V> - (c_F/2) |V' - V|^2`.
//!
//! All built-ins are C^2, so the subgradient is the ordinary gradient. Each
//! carries its semiconvexity constant (exact where derivable, sampled over a
//! declared box otherwise), a finite lower bound, and a proximal solver for
//! `argmin_P F(P) + |P - X|^2 / (2 tau)`, the implicit step the BDF schemes
//! reduce to.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, SymMatrix};
use crate::math;
use crate::quadform::exact;

/// Errors from energy construction and proximal solves.
#[derive(Clone, Debug, PartialEq)]
pub enum ObjectiveError {
    /// Vector length does not match the energy's dimension.
    Dimension { expected: usize, got: usize },
    /// The requested energy has no finite infimum (or violates its declared
    /// lower bound on the sampling box).
    UnboundedBelow { detail: String },
    /// Invalid constructor parameter; the message names it.
    InvalidParameter { what: &'static str },
    /// BDF order outside {1, 2, 3} in an order-dependent constructor.
    UnsupportedOrder { k: u8 },
    /// The proximal Newton iteration failed to reach the gradient tolerance.
    ProxDiverged { iterations: usize, grad_norm: f64 },
}

impl fmt::Display for ObjectiveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectiveError::Dimension { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            ObjectiveError::UnboundedBelow { detail } => {
                write!(f, "energy is unbounded below: {detail}")
            }
            ObjectiveError::InvalidParameter { what } => {
                write!(f, "invalid parameter: {what}")
            }
            ObjectiveError::UnsupportedOrder { k } => {
                write!(f, "unsupported BDF order k = {k} (supported: 1, 2, 3)")
            }
            ObjectiveError::ProxDiverged {
                iterations,
                grad_norm,
            } => write!(
                f,
                "proximal solve did not converge after {iterations} iterations \
                 (gradient norm {grad_norm:e})"
            ),
        }
    }
}

impl core::error::Error for ObjectiveError {}

/// A semiconvex energy with first- and second-order oracles.
///
/// Implementations must be immutable after construction; all methods are
/// safe to call concurrently.
pub trait Energy: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, u: &[f64]) -> f64;

    fn gradient(&self, u: &[f64]) -> Vec<f64>;

    fn hessian(&self, u: &[f64]) -> SymMatrix;

    /// A semiconvexity constant: `F + (c_f/2) |.|^2` is convex.
    fn c_f(&self) -> f64;

    /// A finite lower bound on `F` (the infimum for the built-ins).
    fn lower_bound(&self) -> f64;

    /// Solves `argmin_P F(P) + |P - X|^2 / (2 tau)` to gradient norm `gtol`.
    ///
    /// The default is damped Newton with Armijo backtracking starting from
    /// `X`. For `tau * c_f < 1` the objective is strongly convex and the
    /// minimizer is unique; outside that range the solve may fail or return
    /// a local minimizer, which callers in the multivalued regime must not
    /// rely on.
    fn prox(&self, tau: f64, x: &[f64], gtol: f64) -> Result<Vec<f64>, ObjectiveError> {
        prox_newton(self_as_energy(self), tau, x, gtol)
    }
}

// Coerces `&Self` to `&dyn Energy` inside the default method, where `Self`
// is not yet known to be sized.
fn self_as_energy<E: Energy + ?Sized>(e: &E) -> &E {
    e
}

/// Damped-Newton proximal solve shared by the built-ins.
pub(crate) fn prox_newton<E: Energy + ?Sized>(
    energy: &E,
    tau: f64,
    x: &[f64],
    gtol: f64,
) -> Result<Vec<f64>, ObjectiveError> {
    let n = energy.dim();
    if x.len() != n {
        return Err(ObjectiveError::Dimension {
            expected: n,
            got: x.len(),
        });
    }
    if !(tau > 0.0) || !(gtol > 0.0) {
        return Err(ObjectiveError::InvalidParameter {
            what: "prox requires tau > 0 and gtol > 0",
        });
    }
    let phi = |p: &[f64]| {
        let mut d2 = 0.0;
        for i in 0..n {
            let d = p[i] - x[i];
            d2 += d * d;
        }
        energy.value(p) + d2 / (2.0 * tau)
    };
    let mut p = x.to_vec();
    let mut grad_norm = f64::INFINITY;
    for iter in 0..100 {
        let mut grad = energy.gradient(&p);
        for i in 0..n {
            grad[i] += (p[i] - x[i]) / tau;
        }
        grad_norm = linalg::norm(&grad);
        if grad_norm <= gtol {
            return Ok(p);
        }
        let mut h = energy.hessian(&p);
        h.shift_diagonal(1.0 / tau);
        let dir: Vec<f64> = match h.cholesky_solve(&grad) {
            Some(d) => d.iter().map(|v| -v).collect(),
            // shifted Hessian not positive definite here: fall back to a
            // gradient step scaled by tau, which still descends phi
            None => grad.iter().map(|g| -g * tau).collect(),
        };
        let slope = linalg::dot(&grad, &dir);
        let phi0 = phi(&p);
        // absolute slack keeps the full Newton step acceptable once phi
        // differences drop to rounding level
        let slack = 4.0 * f64::EPSILON * (1.0 + phi0.abs());
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = p.iter().zip(&dir).map(|(pi, di)| pi + t * di).collect();
            if phi(&cand) <= phi0 + 1e-4 * t * slope + slack {
                p = cand;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(ObjectiveError::ProxDiverged {
                iterations: iter,
                grad_norm,
            });
        }
    }
    Err(ObjectiveError::ProxDiverged {
        iterations: 100,
        grad_norm,
    })
}

/// `F(U) = 1/2 <A U, U> - <b, U>` for symmetric positive semidefinite `A`
/// with `b` in the range of `A`.
///
/// Construction rejects energies without a finite infimum: a negative
/// eigenvalue, or a component of `b` along the kernel of `A` (linear drift).
/// The accepted energies are convex, so `c_f = 0`; the spectral
/// decomposition computed at construction also provides the exact gradient
/// flow, used as the reference solution in convergence-order studies.
pub struct Quadratic {
    a: SymMatrix,
    b: Vec<f64>,
    eig_values: Vec<f64>,
    eig_vectors: Vec<Vec<f64>>,
    spectral_tol: f64,
    lower: f64,
}

impl Quadratic {
    pub fn new(a: SymMatrix, b: Vec<f64>) -> Result<Self, ObjectiveError> {
        let n = a.n();
        if b.len() != n {
            return Err(ObjectiveError::Dimension {
                expected: n,
                got: b.len(),
            });
        }
        if n == 0 {
            return Err(ObjectiveError::InvalidParameter {
                what: "quadratic energy needs dimension >= 1",
            });
        }
        let dec = a.eigen_decomposition();
        let spread = dec
            .values
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
            .max(1.0);
        let tol = 1e-10 * spread;
        if dec.values[0] < -tol {
            return Err(ObjectiveError::UnboundedBelow {
                detail: alloc::format!(
                    "matrix has negative eigenvalue {:e}",
                    dec.values[0]
                ),
            });
        }
        let b_scale = 1.0 + linalg::norm(&b);
        let mut lower = 0.0;
        for (lam, v) in dec.values.iter().zip(&dec.vectors) {
            let bv = linalg::dot(v, &b);
            if lam.abs() <= tol {
                if bv.abs() > tol * b_scale {
                    return Err(ObjectiveError::UnboundedBelow {
                        detail: alloc::format!(
                            "linear term has component {bv:e} along the kernel"
                        ),
                    });
                }
            } else {
                lower -= 0.5 * bv * bv / lam;
            }
        }
        Ok(Quadratic {
            a,
            b,
            eig_values: dec.values,
            eig_vectors: dec.vectors,
            spectral_tol: tol,
            lower,
        })
    }

    /// Scalar convex quadratic `F(u) = (lambda/2) u^2`.
    pub fn scalar(lambda: f64) -> Result<Self, ObjectiveError> {
        Quadratic::new(SymMatrix::from_fn(1, |_, _| lambda), vec![0.0])
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.a
    }

    pub fn linear_term(&self) -> &[f64] {
        &self.b
    }

    /// Exact state of the gradient flow `U' = -A U + b` at time `t`:
    /// mode-wise `u_m(t) = b_m/lam_m + e^{-lam_m t} (u_m(0) - b_m/lam_m)`,
    /// with kernel modes constant (`b` has no kernel component by
    /// construction).
    pub fn flow_solution(&self, u0: &[f64], t: f64) -> Result<Vec<f64>, ObjectiveError> {
        let n = self.a.n();
        if u0.len() != n {
            return Err(ObjectiveError::Dimension {
                expected: n,
                got: u0.len(),
            });
        }
        let mut out = vec![0.0; n];
        for (lam, v) in self.eig_values.iter().zip(&self.eig_vectors) {
            let c0 = linalg::dot(v, u0);
            let ct = if lam.abs() <= self.spectral_tol {
                c0
            } else {
                let fixed = linalg::dot(v, &self.b) / lam;
                fixed + math::exp(-lam * t) * (c0 - fixed)
            };
            linalg::axpy(&mut out, ct, v);
        }
        Ok(out)
    }
}

impl Energy for Quadratic {
    fn dim(&self) -> usize {
        self.a.n()
    }

    fn value(&self, u: &[f64]) -> f64 {
        0.5 * linalg::dot(&self.a.matvec(u), u) - linalg::dot(&self.b, u)
    }

    fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let mut g = self.a.matvec(u);
        for (gi, bi) in g.iter_mut().zip(&self.b) {
            *gi -= bi;
        }
        g
    }

    fn hessian(&self, _u: &[f64]) -> SymMatrix {
        self.a.clone()
    }

    fn c_f(&self) -> f64 {
        0.0
    }

    fn lower_bound(&self) -> f64 {
        self.lower
    }

    /// One exact linear solve: `(A + I/tau) P = b + X/tau`.
    fn prox(&self, tau: f64, x: &[f64], gtol: f64) -> Result<Vec<f64>, ObjectiveError> {
        if x.len() != self.dim() {
            return Err(ObjectiveError::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if !(tau > 0.0) {
            return Err(ObjectiveError::InvalidParameter {
                what: "prox requires tau > 0",
            });
        }
        let mut shifted = self.a.clone();
        shifted.shift_diagonal(1.0 / tau);
        let rhs: Vec<f64> = self
            .b
            .iter()
            .zip(x)
            .map(|(bi, xi)| bi + xi / tau)
            .collect();
        match shifted.cholesky_solve(&rhs) {
            Some(p) => Ok(p),
            None => Err(ObjectiveError::ProxDiverged {
                iterations: 0,
                grad_norm: gtol,
            }),
        }
    }
}

/// Discretized Allen-Cahn energy on a 1D grid with free ends:
///
/// `F(U) = sum_i (U_{i+1} - U_i)^2 / (2h) +
///         well_scale * sum_i h/4 (U_i^2 - 1)^2`.
///
/// The Dirichlet part is convex and vanishes on constants, so the minimal
/// semiconvexity constant is exactly `well_scale * h` (attained at `U = 0`
/// along the constant direction). `F >= 0` with equality at `U = +-1`.
pub struct AllenCahn1d {
    n: usize,
    h: f64,
    well_scale: f64,
}

impl AllenCahn1d {
    pub fn new(n: usize, h: f64, well_scale: f64) -> Result<Self, ObjectiveError> {
        if n < 2 {
            return Err(ObjectiveError::InvalidParameter {
                what: "allen-cahn grid needs n >= 2",
            });
        }
        if !(h > 0.0) {
            return Err(ObjectiveError::InvalidParameter {
                what: "allen-cahn mesh width must be positive",
            });
        }
        if !(well_scale >= 0.0) {
            return Err(ObjectiveError::InvalidParameter {
                what: "allen-cahn well scale must be nonnegative",
            });
        }
        Ok(AllenCahn1d { n, h, well_scale })
    }
}

impl Energy for AllenCahn1d {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, u: &[f64]) -> f64 {
        let mut dirichlet = 0.0;
        for i in 0..self.n - 1 {
            let d = u[i + 1] - u[i];
            dirichlet += d * d;
        }
        let mut wells = 0.0;
        for &ui in u {
            let w = ui * ui - 1.0;
            wells += w * w;
        }
        dirichlet / (2.0 * self.h) + self.well_scale * self.h * 0.25 * wells
    }

    fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut g = vec![0.0; n];
        for i in 0..n {
            let mut lap = 0.0;
            if i > 0 {
                lap += u[i] - u[i - 1];
            }
            if i + 1 < n {
                lap -= u[i + 1] - u[i];
            }
            g[i] = lap / self.h + self.well_scale * self.h * (u[i] * u[i] - 1.0) * u[i];
        }
        g
    }

    fn hessian(&self, u: &[f64]) -> SymMatrix {
        let n = self.n;
        let h = self.h;
        let w = self.well_scale;
        SymMatrix::from_fn(n, |i, j| {
            if i == j {
                let degree = if i == 0 || i == n - 1 { 1.0 } else { 2.0 };
                degree / h + w * h * (3.0 * u[i] * u[i] - 1.0)
            } else if j == i + 1 {
                -1.0 / h
            } else {
                0.0
            }
        })
    }

    fn c_f(&self) -> f64 {
        self.well_scale * self.h
    }

    fn lower_bound(&self) -> f64 {
        0.0
    }
}

/// One term `coefficient * prod_i x_i^{powers[i]}` of a [`Polynomial`].
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coefficient: f64,
    pub powers: Vec<u32>,
}

/// Multivariate polynomial energy with analytic derivatives.
///
/// Global semiconvexity constants of polynomials are not available in closed
/// form, so the constructor estimates `c_f` as
/// `max(0, -min lambda_min(Hessian))` sampled over a caller-declared box
/// (an odd grid through the box plus deterministic random points), and the
/// box is kept as metadata. The lower bound must be declared by the caller
/// and is sanity-checked by sampling on a 4x-enlarged box.
pub struct Polynomial {
    dim: usize,
    terms: Vec<Monomial>,
    bounds: Vec<(f64, f64)>,
    c_f: f64,
    lower: f64,
}

impl Polynomial {
    pub fn new(
        dim: usize,
        terms: Vec<Monomial>,
        bounds: &[(f64, f64)],
        lower_bound: f64,
    ) -> Result<Self, ObjectiveError> {
        if dim == 0 {
            return Err(ObjectiveError::InvalidParameter {
                what: "polynomial energy needs dimension >= 1",
            });
        }
        if bounds.len() != dim {
            return Err(ObjectiveError::Dimension {
                expected: dim,
                got: bounds.len(),
            });
        }
        for t in &terms {
            if t.powers.len() != dim {
                return Err(ObjectiveError::Dimension {
                    expected: dim,
                    got: t.powers.len(),
                });
            }
            if !t.coefficient.is_finite() {
                return Err(ObjectiveError::InvalidParameter {
                    what: "monomial coefficients must be finite",
                });
            }
        }
        if bounds.iter().any(|&(lo, hi)| !(lo < hi)) {
            return Err(ObjectiveError::InvalidParameter {
                what: "sampling box must have lo < hi per axis",
            });
        }
        if !lower_bound.is_finite() {
            return Err(ObjectiveError::InvalidParameter {
                what: "declared lower bound must be finite",
            });
        }

        let mut poly = Polynomial {
            dim,
            terms,
            bounds: bounds.to_vec(),
            c_f: 0.0,
            lower: lower_bound,
        };
        poly.c_f = poly.sample_c_f();
        poly.check_lower_bound()?;
        Ok(poly)
    }

    /// `F(u) = scale/4 (u^2 - 1)^2` on the line; `c_f = scale` exactly
    /// (the Hessian minimum `-scale` sits at `u = 0`), infimum 0 at `u = +-1`.
    pub fn double_well(scale: f64) -> Result<Self, ObjectiveError> {
        if !(scale > 0.0) {
            return Err(ObjectiveError::InvalidParameter {
                what: "double-well scale must be positive",
            });
        }
        let terms = vec![
            Monomial {
                coefficient: 0.25 * scale,
                powers: vec![4],
            },
            Monomial {
                coefficient: -0.5 * scale,
                powers: vec![2],
            },
            Monomial {
                coefficient: 0.25 * scale,
                powers: vec![0],
            },
        ];
        Polynomial::new(1, terms, &[(-2.0, 2.0)], 0.0)
    }

    /// The declared sampling box for the `c_f` estimate.
    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    fn sample_c_f(&self) -> f64 {
        let mut worst = 0.0_f64;
        let mut visit = |point: &[f64]| {
            let min_eig = self.hessian(point).min_eigenvalue();
            worst = worst.max(-min_eig);
        };
        // odd per-axis grid so the box midpoint (and 0 when centered) is hit
        let grid = 9usize;
        if self.dim <= 3 {
            let total = grid.pow(self.dim as u32);
            let mut point = vec![0.0; self.dim];
            for flat in 0..total {
                let mut rest = flat;
                for d in 0..self.dim {
                    let idx = rest % grid;
                    rest /= grid;
                    let (lo, hi) = self.bounds[d];
                    point[d] = lo + (hi - lo) * (idx as f64) / ((grid - 1) as f64);
                }
                visit(&point);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x0BDF_601D);
        let mut point = vec![0.0; self.dim];
        for _ in 0..512 {
            for d in 0..self.dim {
                let (lo, hi) = self.bounds[d];
                point[d] = lo + (hi - lo) * rng.random::<f64>();
            }
            visit(&point);
        }
        // the origin is where the built-ins attain their extreme curvature
        let origin = vec![0.0; self.dim];
        if self
            .bounds
            .iter()
            .all(|&(lo, hi)| lo <= 0.0 && 0.0 <= hi)
        {
            visit(&origin);
        }
        worst
    }

    fn check_lower_bound(&self) -> Result<(), ObjectiveError> {
        let tol = 1e-6 * (1.0 + self.lower.abs());
        let mut rng = ChaCha8Rng::seed_from_u64(0x0BDF_10EB);
        let mut point = vec![0.0; self.dim];
        for _ in 0..2048 {
            for d in 0..self.dim {
                let (lo, hi) = self.bounds[d];
                let mid = 0.5 * (lo + hi);
                let half = 0.5 * (hi - lo);
                point[d] = mid + 4.0 * half * (2.0 * rng.random::<f64>() - 1.0);
            }
            let v = self.value(&point);
            if v < self.lower - tol {
                return Err(ObjectiveError::UnboundedBelow {
                    detail: alloc::format!(
                        "value {v:e} below the declared lower bound {:e}",
                        self.lower
                    ),
                });
            }
        }
        Ok(())
    }
}

impl Energy for Polynomial {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, u: &[f64]) -> f64 {
        let mut acc = 0.0;
        for t in &self.terms {
            let mut prod = t.coefficient;
            for (x, &p) in u.iter().zip(&t.powers) {
                if p > 0 {
                    prod *= math::powi(*x, p as i32);
                }
            }
            acc += prod;
        }
        acc
    }

    fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        for t in &self.terms {
            for j in 0..self.dim {
                let pj = t.powers[j];
                if pj == 0 {
                    continue;
                }
                let mut prod = t.coefficient * pj as f64 * math::powi(u[j], pj as i32 - 1);
                for (d, (x, &p)) in u.iter().zip(&t.powers).enumerate() {
                    if d != j && p > 0 {
                        prod *= math::powi(*x, p as i32);
                    }
                }
                g[j] += prod;
            }
        }
        g
    }

    fn hessian(&self, u: &[f64]) -> SymMatrix {
        let mut h = SymMatrix::zeros(self.dim);
        for t in &self.terms {
            for j in 0..self.dim {
                for l in j..self.dim {
                    let (pj, pl) = (t.powers[j], t.powers[l]);
                    let factor = if j == l {
                        if pj < 2 {
                            continue;
                        }
                        (pj * (pj - 1)) as f64
                    } else {
                        if pj == 0 || pl == 0 {
                            continue;
                        }
                        (pj * pl) as f64
                    };
                    let mut prod = t.coefficient * factor;
                    for (d, (x, &p)) in u.iter().zip(&t.powers).enumerate() {
                        let drop = if d == j { 1 } else { 0 } + if d == l { 1 } else { 0 };
                        let q = p as i32 - drop;
                        if q > 0 {
                            prod *= math::powi(*x, q);
                        }
                    }
                    h.add(j, l, prod);
                }
            }
        }
        h
    }

    fn c_f(&self) -> f64 {
        self.c_f
    }

    fn lower_bound(&self) -> f64 {
        self.lower
    }
}

/// Even scalar energy with a concave core and a coercive quartic tail:
///
/// * `F(v) = -(c/2) v^2` on `[-1, 1]`,
/// * `F(v) = c (s^4 - s^2/2 - s - 1/2)` with `s = |v| - 1` outside,
///
/// glued C^2 at `|v| = 1`. `F'' = -c` on the core and `c (12 s^2 - 1)`
/// outside, so `c_f = c` exactly and the constant is attained.
///
/// With `c = lambda_k / dt` the alternating sequence `(-1)^n` solves the
/// BDFk scheme exactly: the scheme applied to alternating states produces
/// `lambda_k u` and the core gradient contributes `dt F'(u) = -lambda_k u`.
/// With `c = alpha_k / dt` the implicit step at right-hand side 0
/// degenerates on the core and every point of `[-1, 1]` solves it.
pub struct Barrier {
    c: f64,
    lower: f64,
    argmin_offset: f64,
    coercivity_radius: f64,
}

impl Barrier {
    /// Raw constructor from the core curvature `c > 0`.
    pub fn with_curvature(c: f64) -> Result<Self, ObjectiveError> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(ObjectiveError::InvalidParameter {
                what: "barrier curvature must be positive and finite",
            });
        }
        // outer branch minimum: 4 s^3 - s - 1 = 0, simple root near 0.77
        let mut s = 0.8_f64;
        for _ in 0..60 {
            let q = 4.0 * s * s * s - s - 1.0;
            let dq = 12.0 * s * s - 1.0;
            let next = s - q / dq;
            if (next - s).abs() <= 1e-16 * s {
                s = next;
                break;
            }
            s = next;
        }
        let profile = |t: f64| t * t * t * t - 0.5 * t * t - t - 0.5;
        let lower = c * profile(s);
        // coercivity radius: first |v| = 1 + s1 with F(v) = F(0) + 1 = 1
        let mut hi = s.max(1.0);
        while c * profile(hi) <= 1.0 {
            hi *= 2.0;
        }
        let mut lo = s;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if c * profile(mid) <= 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Barrier {
            c,
            lower,
            argmin_offset: s,
            coercivity_radius: 1.0 + hi,
        })
    }

    /// Curvature `c = lambda_k / dt`, making `(-1)^n` an exact BDFk
    /// trajectory at step size `dt`.
    pub fn new(k: u8, dt: f64) -> Result<Self, ObjectiveError> {
        if !(dt > 0.0) {
            return Err(ObjectiveError::InvalidParameter {
                what: "time step must be positive",
            });
        }
        let lam = exact::lambda(k).map_err(|_| ObjectiveError::UnsupportedOrder { k })?;
        Barrier::with_curvature((*lam.numer() as f64) / (*lam.denom() as f64) / dt)
    }

    /// Curvature `c = alpha_k / dt`, sitting exactly on the uniqueness
    /// threshold `c_f dt = alpha_k`: the implicit step with right-hand side
    /// 0 is solved by every point of `[-1, 1]`.
    pub fn at_uniqueness_threshold(k: u8, dt: f64) -> Result<Self, ObjectiveError> {
        if !(dt > 0.0) {
            return Err(ObjectiveError::InvalidParameter {
                what: "time step must be positive",
            });
        }
        let alpha = exact::alpha(k).map_err(|_| ObjectiveError::UnsupportedOrder { k })?;
        Barrier::with_curvature((*alpha.numer() as f64) / (*alpha.denom() as f64) / dt)
    }

    pub fn curvature(&self) -> f64 {
        self.c
    }

    /// `F(v) > F(0) + 1` for every `|v| >=` this radius.
    pub fn coercivity_radius(&self) -> f64 {
        self.coercivity_radius
    }

    /// Offset `s* = argmin` of the outer branch; the global minimizers are
    /// `v = +-(1 + s*)`.
    pub fn argmin(&self) -> f64 {
        1.0 + self.argmin_offset
    }
}

impl Energy for Barrier {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, u: &[f64]) -> f64 {
        let v = u[0];
        let a = v.abs();
        if a <= 1.0 {
            -0.5 * self.c * v * v
        } else {
            let s = a - 1.0;
            self.c * (s * s * s * s - 0.5 * s * s - s - 0.5)
        }
    }

    fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let v = u[0];
        let a = v.abs();
        let g = if a <= 1.0 {
            -self.c * v
        } else {
            let s = a - 1.0;
            v.signum() * self.c * (4.0 * s * s * s - s - 1.0)
        };
        vec![g]
    }

    fn hessian(&self, u: &[f64]) -> SymMatrix {
        let a = u[0].abs();
        let h = if a <= 1.0 {
            -self.c
        } else {
            let s = a - 1.0;
            self.c * (12.0 * s * s - 1.0)
        };
        SymMatrix::from_fn(1, |_, _| h)
    }

    fn c_f(&self) -> f64 {
        self.c
    }

    fn lower_bound(&self) -> f64 {
        self.lower
    }
}
