//! Quadratic forms attached to BDF time discretizations of gradient flows.
//!
//! For BDFk the pairing `sum_{j<=k} (1/j) <d^j U^{n+k}, d U^{n+k}>` of the
//! backward differences with the newest increment defines a small quadratic
//! form `gamma_k` in the increment variables `x_i = d U^{n+k+1-i}`. Writing
//!
//! `gamma_3(x1, x2, x3) = q(x1, x2) - q(x2, x3) + r(x1, x2, x3) + beta x1^2`
//!
//! with `q` positive definite and `r` positive (semi)definite is exactly what
//! makes the BDF3 scheme dissipative for semiconvex energies; the largest
//! `beta` for which this is possible is `beta_3 = 95/96`.
//!
//! This module provides the forms, the two-parameter Cholesky-style
//! parametrization `q = a^2 x2^2 + 2 a c x1 x2 + (b^2 + c^2) x1^2`, the Gauss
//! reduction of the remainder into three weighted squares, a certified
//! derivative-free maximization recovering `beta_3`, and the construction of
//! a concrete decomposition for any feasible `beta`. Closed-form coefficients
//! live in [`exact`] as rationals; all floating-point values here derive from
//! them.

pub mod exact;
mod search;

use alloc::vec::Vec;
use core::fmt;

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::SymMatrix;
use crate::math;

pub use exact::{RatForm2, RatForm3};

/// Errors from quadratic form construction, evaluation, and search.
#[derive(Clone, Debug, PartialEq)]
pub enum QuadformError {
    /// BDF order outside {1, 2, 3}.
    UnsupportedOrder { k: u8 },
    /// A leading principal minor failed the positivity test.
    NotPositiveDefinite { minor: usize, value: f64 },
    /// Evaluation at `b = a`, where the reduction divides by `b^2 - a^2`.
    BoundaryDivision { a: f64 },
    /// Parameter outside the admissible domain; the message names the bound.
    Domain { what: &'static str },
    /// Requested shift exceeds `beta_3 = 95/96`.
    BetaInfeasible { beta: f64, beta3: f64 },
    /// Requested shift is negative or not finite.
    BetaInvalid { beta: f64 },
    /// Vector arguments of mismatched lengths.
    DimensionMismatch { expected: usize, got: usize },
    /// The certification search did not corroborate its own result; carries
    /// the best value seen.
    SearchFailed { best: f64 },
}

impl fmt::Display for QuadformError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadformError::UnsupportedOrder { k } => {
                write!(f, "unsupported BDF order k = {k} (supported: 1, 2, 3)")
            }
            QuadformError::NotPositiveDefinite { minor, value } => write!(
                f,
                "form is not positive definite: leading principal minor {minor} is {value:e}"
            ),
            QuadformError::BoundaryDivision { a } => write!(
                f,
                "b = a = {a} lies on the boundary where the reduction divides by b^2 - a^2"
            ),
            QuadformError::Domain { what } => write!(f, "parameter out of domain: {what}"),
            QuadformError::BetaInfeasible { beta, beta3 } => write!(
                f,
                "no positive decomposition exists for beta = {beta}: the supremum is beta_3 = {beta3}"
            ),
            QuadformError::BetaInvalid { beta } => {
                write!(f, "beta = {beta} must be a finite non-negative real")
            }
            QuadformError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            QuadformError::SearchFailed { best } => write!(
                f,
                "certification search failed to corroborate its result (best value {best})"
            ),
        }
    }
}

impl core::error::Error for QuadformError {}

fn rat_f64(r: Rational64) -> f64 {
    (*r.numer() as f64) / (*r.denom() as f64)
}

/// `beta_3 = 95/96` as a float, derived from the rational constant.
pub fn beta3_f64() -> f64 {
    rat_f64(exact::beta3())
}

/// Symmetric quadratic form on R^2:
/// `q(x1, x2) = a11 x1^2 + 2 a12 x1 x2 + a22 x2^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct QuadraticForm2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl QuadraticForm2 {
    pub fn new(a11: f64, a12: f64, a22: f64) -> Self {
        QuadraticForm2 { a11, a12, a22 }
    }

    pub fn from_rational(r: &RatForm2) -> Self {
        QuadraticForm2::new(rat_f64(r.a11), rat_f64(r.a12), rat_f64(r.a22))
    }

    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        self.a11 * x1 * x1 + 2.0 * self.a12 * x1 * x2 + self.a22 * x2 * x2
    }

    pub fn matrix(&self) -> SymMatrix {
        let c = [self.a11, self.a12, self.a12, self.a22];
        SymMatrix::from_fn(2, |i, j| c[2 * i + j])
    }

    /// Leading principal minors `(a11, det)`.
    pub fn leading_minors(&self) -> [f64; 2] {
        [self.a11, self.a11 * self.a22 - self.a12 * self.a12]
    }

    /// Strict positive definiteness via Sylvester's criterion.
    pub fn is_positive_definite(&self) -> bool {
        self.leading_minors().iter().all(|&m| m > 0.0)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let e = self.matrix().eigenvalues();
        [e[0], e[1]]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Lifts the form to vector arguments:
    /// `Q(V1, V2) = a11 |V1|^2 + 2 a12 <V1, V2> + a22 |V2|^2`.
    ///
    /// Inherits (semi)definiteness from the scalar form.
    pub fn lift(&self, v1: &[f64], v2: &[f64]) -> Result<f64, QuadformError> {
        if v1.len() != v2.len() {
            return Err(QuadformError::DimensionMismatch {
                expected: v1.len(),
                got: v2.len(),
            });
        }
        Ok(self.a11 * crate::linalg::dot(v1, v1)
            + 2.0 * self.a12 * crate::linalg::dot(v1, v2)
            + self.a22 * crate::linalg::dot(v2, v2))
    }
}

/// Symmetric quadratic form on R^3, stored as the six independent
/// coefficients of its matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct QuadraticForm3 {
    pub a11: f64,
    pub a12: f64,
    pub a13: f64,
    pub a22: f64,
    pub a23: f64,
    pub a33: f64,
}

impl QuadraticForm3 {
    pub fn new(a11: f64, a12: f64, a13: f64, a22: f64, a23: f64, a33: f64) -> Self {
        QuadraticForm3 {
            a11,
            a12,
            a13,
            a22,
            a23,
            a33,
        }
    }

    pub fn from_rational(r: &RatForm3) -> Self {
        QuadraticForm3::new(
            rat_f64(r.a11),
            rat_f64(r.a12),
            rat_f64(r.a13),
            rat_f64(r.a22),
            rat_f64(r.a23),
            rat_f64(r.a33),
        )
    }

    pub fn eval(&self, x1: f64, x2: f64, x3: f64) -> f64 {
        self.a11 * x1 * x1
            + self.a22 * x2 * x2
            + self.a33 * x3 * x3
            + 2.0 * (self.a12 * x1 * x2 + self.a13 * x1 * x3 + self.a23 * x2 * x3)
    }

    pub fn matrix(&self) -> SymMatrix {
        let c = [
            self.a11, self.a12, self.a13, self.a12, self.a22, self.a23, self.a13, self.a23,
            self.a33,
        ];
        SymMatrix::from_fn(3, |i, j| c[3 * i + j])
    }

    /// Leading principal minors of orders 1..3.
    pub fn leading_minors(&self) -> [f64; 3] {
        let m2 = self.a11 * self.a22 - self.a12 * self.a12;
        let det = self.a11 * (self.a22 * self.a33 - self.a23 * self.a23)
            - self.a12 * (self.a12 * self.a33 - self.a23 * self.a13)
            + self.a13 * (self.a12 * self.a23 - self.a22 * self.a13);
        [self.a11, m2, det]
    }

    /// Strict positive definiteness via Sylvester's criterion.
    pub fn is_positive_definite(&self) -> bool {
        self.leading_minors().iter().all(|&m| m > 0.0)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let e = self.matrix().eigenvalues();
        [e[0], e[1], e[2]]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Positive semidefiniteness up to `tol`: no eigenvalue below `-tol`.
    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// Lifts the form to vector arguments `R(V1, V2, V3)`, replacing each
    /// product `x_i x_j` by the inner product `<V_i, V_j>`.
    pub fn lift(&self, v1: &[f64], v2: &[f64], v3: &[f64]) -> Result<f64, QuadformError> {
        if v1.len() != v2.len() || v1.len() != v3.len() {
            return Err(QuadformError::DimensionMismatch {
                expected: v1.len(),
                got: if v1.len() != v2.len() { v2.len() } else { v3.len() },
            });
        }
        use crate::linalg::dot;
        Ok(self.a11 * dot(v1, v1)
            + self.a22 * dot(v2, v2)
            + self.a33 * dot(v3, v3)
            + 2.0 * (self.a12 * dot(v1, v2) + self.a13 * dot(v1, v3) + self.a23 * dot(v2, v3)))
    }
}

/// The BDF2 pairing form `gamma_2(x1, x2) = 3/2 x1^2 - 1/2 x1 x2`.
pub fn gamma2() -> QuadraticForm2 {
    QuadraticForm2::from_rational(&exact::gamma2())
}

/// The BDF3 pairing form
/// `gamma_3(x1, x2, x3) = 11/6 x1^2 - 7/6 x1 x2 + 1/3 x1 x3`.
pub fn gamma3() -> QuadraticForm3 {
    QuadraticForm3::from_rational(&exact::gamma3())
}

/// The BDFk pairing form, dispatched on the order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GammaForm {
    /// `gamma_1(x1) = x1^2`.
    Bdf1 { coeff: f64 },
    Bdf2(QuadraticForm2),
    Bdf3(QuadraticForm3),
}

/// Returns `gamma_k` for `k` in {1, 2, 3}.
pub fn gamma_form(k: u8) -> Result<GammaForm, QuadformError> {
    match k {
        1 => Ok(GammaForm::Bdf1 { coeff: 1.0 }),
        2 => Ok(GammaForm::Bdf2(gamma2())),
        3 => Ok(GammaForm::Bdf3(gamma3())),
        _ => Err(QuadformError::UnsupportedOrder { k }),
    }
}

impl GammaForm {
    /// Number of increment variables the form takes.
    pub fn arity(&self) -> usize {
        match self {
            GammaForm::Bdf1 { .. } => 1,
            GammaForm::Bdf2(_) => 2,
            GammaForm::Bdf3(_) => 3,
        }
    }

    /// Evaluates at `x = (x1, ..., xk)`.
    pub fn eval(&self, x: &[f64]) -> Result<f64, QuadformError> {
        if x.len() != self.arity() {
            return Err(QuadformError::DimensionMismatch {
                expected: self.arity(),
                got: x.len(),
            });
        }
        Ok(match self {
            GammaForm::Bdf1 { coeff } => coeff * x[0] * x[0],
            GammaForm::Bdf2(q) => q.eval(x[0], x[1]),
            GammaForm::Bdf3(q) => q.eval(x[0], x[1], x[2]),
        })
    }
}

/// Cholesky-style parametrization of a positive definite 2x2 form:
///
/// `q(x1, x2) = a^2 x2^2 + 2 a c x1 x2 + (b^2 + c^2) x1^2`, with `a, b > 0`.
///
/// The search domain `Omega` for the BDF3 decomposition additionally requires
/// `b > a`; the optimal parameters sit on its boundary `b = a`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CholeskyParam {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl CholeskyParam {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        CholeskyParam { a, b, c }
    }

    /// `a > 0` and `b > a`: the open domain on which the Gauss reduction has
    /// positive second weight.
    pub fn in_omega(&self) -> bool {
        self.a > 0.0 && self.b > self.a
    }

    /// The quadratic form these parameters encode.
    pub fn form(&self) -> QuadraticForm2 {
        QuadraticForm2::new(
            self.b * self.b + self.c * self.c,
            self.a * self.c,
            self.a * self.a,
        )
    }
}

/// Recovers the Cholesky-style parameters of a positive definite form.
///
/// Inverse of [`CholeskyParam::form`]: `a = sqrt(a22)`, `c = a12 / a`,
/// `b = sqrt(det / a22)`. Fails with the first offending leading principal
/// minor when the form is not positive definite.
pub fn cholesky2(q: &QuadraticForm2) -> Result<CholeskyParam, QuadformError> {
    let [m1, m2] = q.leading_minors();
    if m1 <= 0.0 {
        return Err(QuadformError::NotPositiveDefinite { minor: 1, value: m1 });
    }
    if m2 <= 0.0 {
        return Err(QuadformError::NotPositiveDefinite { minor: 2, value: m2 });
    }
    let a = math::sqrt(q.a22);
    let c = q.a12 / a;
    let b = math::sqrt(m2 / q.a22);
    Ok(CholeskyParam::new(a, b, c))
}

/// The reduced objective
///
/// `f(a, b, c) = 11/6 - (7/6 + 2ac + c/(3a))^2 / (4 (b^2 - a^2))
///             - (b^2 + c^2 + 1/(36 a^2))`,
///
/// whose value is the `x1^2` coefficient left over after Gauss-reducing the
/// BDF3 remainder at these parameters. Its supremum over `Omega` is
/// `beta_3 = 95/96`, approached (not attained) at
/// `(1/sqrt(6), 1/sqrt(6), -7/(4 sqrt(6)))`.
///
/// Defined for `a > 0` and `b != a`; see [`exact::f_squared_coords`] for the
/// exact-rational version in the squared coordinates `(a^2, b^2, c/a)`.
pub fn f_eval(p: &CholeskyParam) -> Result<f64, QuadformError> {
    if !(p.a > 0.0) {
        return Err(QuadformError::Domain { what: "f requires a > 0" });
    }
    // (b - a)(b + a) instead of b^2 - a^2: near the boundary the direct
    // difference loses most of its digits to cancellation
    let w = (p.b - p.a) * (p.b + p.a);
    if w == 0.0 {
        return Err(QuadformError::BoundaryDivision { a: p.a });
    }
    let delta = 7.0 / 6.0 + 2.0 * p.a * p.c + p.c / (3.0 * p.a);
    Ok(11.0 / 6.0
        - delta * delta / (4.0 * w)
        - (p.b * p.b + p.c * p.c + 1.0 / (36.0 * p.a * p.a)))
}

/// The `c` that cancels the mixed term `delta = 7/6 + 2ac + c/(3a)`:
/// `c(a) = -7 / (6 (2a + 1/(3a)))`.
///
/// Along `(a, b, c(a))` with `b -> a+`, `f` tends to the boundary profile
/// [`g_eval`].
pub fn constrained_c(a: f64) -> f64 {
    -7.0 / (6.0 * (2.0 * a + 1.0 / (3.0 * a)))
}

/// Boundary profile of `f` on `b = a` with the constrained `c`:
///
/// `g(a) = 11/6 - a^2 - 49 / (36 (2a + 1/(3a))^2) - 1/(36 a^2)`.
pub fn g_eval(a: f64) -> Result<f64, QuadformError> {
    if !(a > 0.0) {
        return Err(QuadformError::Domain { what: "g requires a > 0" });
    }
    let l = 2.0 * a + 1.0 / (3.0 * a);
    Ok(11.0 / 6.0 - a * a - 49.0 / (36.0 * l * l) - 1.0 / (36.0 * a * a))
}

/// Closed-form derivative of [`g_eval`]:
///
/// `g'(a) = -(6a^2 - 1)(36a^4 + 33a^2 + 1)(36a^4 - 9a^2 + 1)
///          / (18 (6a^2 + 1)^3 a^3)`.
///
/// Its only positive root is `a = 1/sqrt(6)`: the second and third factors
/// have no real roots, so `g` has a unique interior critical point.
pub fn g_prime(a: f64) -> Result<f64, QuadformError> {
    if !(a > 0.0) {
        return Err(QuadformError::Domain { what: "g' requires a > 0" });
    }
    let a2 = a * a;
    let a4 = a2 * a2;
    let num = (6.0 * a2 - 1.0) * (36.0 * a4 + 33.0 * a2 + 1.0) * (36.0 * a4 - 9.0 * a2 + 1.0);
    let d = 6.0 * a2 + 1.0;
    Ok(-num / (18.0 * d * d * d * a2 * a))
}

/// One weighted square `w (l1 x1 + l2 x2 + l3 x3)^2` of a Gauss reduction.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct WeightedSquare {
    pub weight: f64,
    /// Coefficients of the linear form on `(x1, x2, x3)`.
    pub coeffs: [f64; 3],
}

impl WeightedSquare {
    pub fn eval(&self, x1: f64, x2: f64, x3: f64) -> f64 {
        let l = self.coeffs[0] * x1 + self.coeffs[1] * x2 + self.coeffs[2] * x3;
        self.weight * l * l
    }

    /// The symmetric 3x3 form `w l l^T` this square expands to.
    pub fn expand(&self) -> QuadraticForm3 {
        let [l1, l2, l3] = self.coeffs;
        let w = self.weight;
        QuadraticForm3::new(
            w * l1 * l1,
            w * l1 * l2,
            w * l1 * l3,
            w * l2 * l2,
            w * l2 * l3,
            w * l3 * l3,
        )
    }
}

/// Gauss reduction of the BDF3 remainder
/// `r(x1, x2, x3) = gamma_3 - q(x1, x2) + q(x2, x3)` at parameters `p`:
///
/// `r = (a x3 + c x2 + x1/(6a))^2
///    + (b^2 - a^2) (x2 - delta / (2 (b^2 - a^2)) x1)^2
///    + f(a, b, c) x1^2`,
///
/// eliminating `x3` first, then `x2`. `beta_term` is the weight
/// `f(a, b, c)` of the final pure `x1^2` square.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GaussReduction {
    pub squares: [WeightedSquare; 3],
    pub beta_term: f64,
}

impl GaussReduction {
    /// Re-expands the squares into the remainder form.
    pub fn remainder(&self) -> QuadraticForm3 {
        let mut acc = QuadraticForm3::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for s in &self.squares {
            let e = s.expand();
            acc.a11 += e.a11;
            acc.a12 += e.a12;
            acc.a13 += e.a13;
            acc.a22 += e.a22;
            acc.a23 += e.a23;
            acc.a33 += e.a33;
        }
        acc
    }
}

/// Gauss-reduces the BDF3 remainder at `p`. Requires `p` in `Omega`
/// (`a > 0`, `b > a`) so that the first two weights are positive.
pub fn gauss_reduce_r3(p: &CholeskyParam) -> Result<GaussReduction, QuadformError> {
    if !(p.a > 0.0) {
        return Err(QuadformError::Domain { what: "reduction requires a > 0" });
    }
    if p.b == p.a {
        return Err(QuadformError::BoundaryDivision { a: p.a });
    }
    if !p.in_omega() {
        return Err(QuadformError::Domain { what: "reduction requires b > a" });
    }
    let w2 = (p.b - p.a) * (p.b + p.a);
    let delta = 7.0 / 6.0 + 2.0 * p.a * p.c + p.c / (3.0 * p.a);
    let f = f_eval(p)?;
    let squares = [
        WeightedSquare {
            weight: 1.0,
            coeffs: [1.0 / (6.0 * p.a), p.c, p.a],
        },
        WeightedSquare {
            weight: w2,
            coeffs: [-delta / (2.0 * w2), 1.0, 0.0],
        },
        WeightedSquare {
            weight: f,
            coeffs: [1.0, 0.0, 0.0],
        },
    ];
    Ok(GaussReduction {
        squares,
        beta_term: f,
    })
}

/// Coefficient-wise residual of
/// `gamma_3 = q(x1, x2) - q(x2, x3) + r + beta x1^2`
/// in floating point; the maximum absolute entry is returned.
pub fn decomposition_residual(q: &QuadraticForm2, r: &QuadraticForm3, beta: f64) -> f64 {
    let g = gamma3();
    let entries = [
        g.a11 - q.a11 - r.a11 - beta,
        g.a12 - q.a12 - r.a12,
        g.a13 - r.a13,
        g.a22 - q.a22 + q.a11 - r.a22,
        g.a23 + q.a12 - r.a23,
        g.a33 + q.a22 - r.a33,
    ];
    entries.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// A certified shift decomposition of the BDF3 pairing form:
/// `gamma_3 = q(x1, x2) - q(x2, x3) + r_tilde + beta x1^2` with `q` positive
/// definite and `r_tilde` positive (semi)definite.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Decomposition {
    pub beta: f64,
    /// Parameters that generate `q`; for `beta = beta_3` this is the boundary
    /// point `b = a`.
    pub param: CholeskyParam,
    pub q: QuadraticForm2,
    pub r_tilde: QuadraticForm3,
}

impl Decomposition {
    /// Maximum absolute coefficient residual of the defining identity.
    pub fn identity_residual(&self) -> f64 {
        decomposition_residual(&self.q, &self.r_tilde, self.beta)
    }

    /// Checks the identity residual, positive definiteness of `q`, and
    /// positive semidefiniteness of `r_tilde` (eigenvalues above `-tol`).
    pub fn verify(&self, tol: f64) -> Result<(), QuadformError> {
        let res = self.identity_residual();
        if !(res <= tol) {
            return Err(QuadformError::SearchFailed { best: res });
        }
        let [m1, m2] = self.q.leading_minors();
        if m1 <= 0.0 {
            return Err(QuadformError::NotPositiveDefinite { minor: 1, value: m1 });
        }
        if m2 <= 0.0 {
            return Err(QuadformError::NotPositiveDefinite { minor: 2, value: m2 });
        }
        let min_eig = self.r_tilde.min_eigenvalue();
        if min_eig < -tol {
            return Err(QuadformError::NotPositiveDefinite {
                minor: 3,
                value: min_eig,
            });
        }
        Ok(())
    }
}

/// Segment endpoints of the continuation used by [`decompose`]: the basic
/// witness parameters and the optimal boundary parameters.
fn witness_param() -> CholeskyParam {
    CholeskyParam::new(
        1.0 / math::sqrt(6.0),
        math::sqrt(5.0 / 12.0),
        -1.0 / math::sqrt(6.0),
    )
}

fn optimal_param() -> CholeskyParam {
    let a = 1.0 / math::sqrt(6.0);
    CholeskyParam::new(a, a, -7.0 / (4.0 * math::sqrt(6.0)))
}

fn lerp_param(p0: &CholeskyParam, p1: &CholeskyParam, t: f64) -> CholeskyParam {
    CholeskyParam::new(
        p0.a + t * (p1.a - p0.a),
        p0.b + t * (p1.b - p0.b),
        p0.c + t * (p1.c - p0.c),
    )
}

/// Builds a decomposition certifying the shift `beta`.
///
/// * `beta = 95/96`: returns the closed-form optimal pair (`r_tilde` is
///   positive semidefinite of rank one, not definite).
/// * `beta < 95/96`: walks the segment from the basic witness parameters to
///   the optimal ones until the reduced objective `f` reaches
///   `max(5/6, (beta + beta_3)/2)`, then assembles `r_tilde` from the Gauss
///   squares plus the slack `(f - beta) x1^2`; the result is strictly
///   positive definite. Targeting the midpoint rather than `beta` itself
///   keeps the slack weight, and with it the conditioning of `r_tilde`,
///   bounded away from zero.
///
/// Fails for negative, non-finite, or infeasible (`> 95/96`) requests.
pub fn decompose(beta: f64) -> Result<Decomposition, QuadformError> {
    let beta3 = beta3_f64();
    if !beta.is_finite() || beta < 0.0 {
        return Err(QuadformError::BetaInvalid { beta });
    }
    if beta > beta3 {
        return Err(QuadformError::BetaInfeasible { beta, beta3 });
    }
    if beta == beta3 {
        return Ok(Decomposition {
            beta,
            param: optimal_param(),
            q: QuadraticForm2::from_rational(&exact::q3_star()),
            r_tilde: QuadraticForm3::from_rational(&exact::r3_tilde_star()),
        });
    }

    let p0 = witness_param();
    let p1 = optimal_param();
    let f_at = |t: f64| f_eval(&lerp_param(&p0, &p1, t)).expect("segment stays in Omega");
    let target = (0.5 * (beta + beta3)).max(rat_f64(exact::rat(5, 6)));

    let mut t = 0.0;
    if f_at(0.0) < target {
        // bracket the crossing: f tends to beta_3 > target along the segment
        let mut hi = 0.0;
        let mut found = false;
        for m in 1..=60 {
            hi = 1.0 - math::powi(0.5, m);
            if f_at(hi) >= target {
                found = true;
                break;
            }
        }
        if !found {
            return Err(QuadformError::SearchFailed { best: f_at(hi) });
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f_at(mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        t = hi;
    }

    let param = lerp_param(&p0, &p1, t);
    let reduction = gauss_reduce_r3(&param)?;
    let q = param.form();
    let mut r_tilde = QuadraticForm3::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, s) in reduction.squares.iter().enumerate() {
        let mut sq = *s;
        if i == 2 {
            sq.weight -= beta;
        }
        let e = sq.expand();
        r_tilde.a11 += e.a11;
        r_tilde.a12 += e.a12;
        r_tilde.a13 += e.a13;
        r_tilde.a22 += e.a22;
        r_tilde.a23 += e.a23;
        r_tilde.a33 += e.a33;
    }
    Ok(Decomposition {
        beta,
        param,
        q,
        r_tilde,
    })
}

/// Optimizer log of [`maximize_f`].
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SearchTrace {
    /// Best grid point of the coarse scan over the boundary profile `g`.
    pub coarse_a: f64,
    pub coarse_g: f64,
    /// Golden-section refinement: iterations and final bracket width.
    pub golden_iters: usize,
    pub bracket_width: f64,
    /// Best value per Nelder-Mead start on the full 3-parameter objective.
    pub nelder_mead_bests: Vec<f64>,
}

/// Result of the certified maximization of `f` over `Omega`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct FMaximum {
    /// The certified supremum, `beta_3` up to solver accuracy.
    pub beta_star: f64,
    /// The boundary parameters `(a*, a*, c(a*))` where the supremum is
    /// approached; not inside `Omega` itself.
    pub argmax: CholeskyParam,
    pub trace: SearchTrace,
}

/// Certifies the supremum of `f` over `Omega` numerically.
///
/// Two independent searches must agree:
///
/// 1. a coarse scan plus golden-section refinement of the boundary profile
///    `g` on `[1/sqrt(66), sqrt(11/6)]` (these bounds come from where any
///    admissible parameters must live: `a >= 1/sqrt(66)` and
///    `b^2 + c^2 < 11/6`);
/// 2. eight deterministic Nelder-Mead starts on `f` itself over `(a, b, c)`,
///    with `b <= a` rejected by penalty.
///
/// The Nelder-Mead sup estimate must fall within `[beta - 1e-3, beta + 1e-9]`
/// of the profile maximum, otherwise the search reports failure rather than
/// an uncorroborated value.
pub fn maximize_f() -> Result<FMaximum, QuadformError> {
    let lo = 1.0 / math::sqrt(66.0);
    let hi = math::sqrt(11.0 / 6.0);
    let g = |a: f64| g_eval(a).expect("grid stays positive");

    // coarse scan so the golden section never locks onto a wrong bracket
    let grid = 2048;
    let mut best_i = 0;
    let mut best_g = f64::NEG_INFINITY;
    for i in 0..=grid {
        let a = lo + (hi - lo) * (i as f64) / (grid as f64);
        let v = g(a);
        if v > best_g {
            best_g = v;
            best_i = i;
        }
    }
    let step = (hi - lo) / (grid as f64);
    let bracket_lo = (lo + step * (best_i as f64 - 1.0)).max(lo);
    let bracket_hi = (lo + step * (best_i as f64 + 1.0)).min(hi);
    let (a_star, g_star, golden_iters) = search::golden_max(g, bracket_lo, bracket_hi, 1e-13);

    // independent cross-check on the full objective
    let mut rng = ChaCha8Rng::seed_from_u64(0x0BDF_3A11);
    let penalized = |p: &[f64; 3]| {
        let (a, b, c) = (p[0], p[1], p[2]);
        if a <= 1e-6 || b <= a {
            return -1e9 * (1.0 + (a - b).max(1e-6 - a).max(0.0));
        }
        f_eval(&CholeskyParam::new(a, b, c)).unwrap_or(-1e9)
    };
    let mut nm_bests = Vec::with_capacity(8);
    let mut nm_sup = f64::NEG_INFINITY;
    for _ in 0..8 {
        let a0 = 0.15 + 1.0 * rng.random::<f64>();
        let gap = math::exp(math::ln(10.0) * (-3.0 * rng.random::<f64>()));
        let c0 = -1.5 + 2.0 * rng.random::<f64>();
        let (_, val) = search::nelder_mead_max(penalized, [a0, a0 + gap, c0], 0.05, 1500);
        nm_bests.push(val);
        nm_sup = nm_sup.max(val);
    }

    if nm_sup > g_star + 1e-9 || nm_sup < g_star - 1e-3 {
        return Err(QuadformError::SearchFailed { best: nm_sup });
    }

    Ok(FMaximum {
        beta_star: g_star,
        argmax: CholeskyParam::new(a_star, a_star, constrained_c(a_star)),
        trace: SearchTrace {
            coarse_a: lo + step * (best_i as f64),
            coarse_g: best_g,
            golden_iters,
            bracket_width: bracket_hi - bracket_lo,
            nelder_mead_bests: nm_bests,
        },
    })
}

/// Draws `n` parameters from `Omega` (log-scaled in `a`, `b - a`, and `|c|`,
/// with extra mass near the optimal ridge) and returns the largest `f` seen
/// with its location. Used to corroborate that no sample beats `beta_3`.
pub fn sample_f_supremum(n: usize, seed: u64) -> (f64, CholeskyParam) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    let mut arg = witness_param();
    let log10 = math::ln(10.0);
    for i in 0..n {
        let a = math::exp(log10 * (-3.0 + 6.0 * rng.random::<f64>()));
        let gap = math::exp(log10 * (-9.0 + 12.0 * rng.random::<f64>()));
        let b = a + gap;
        // every fourth draw hugs the ridge c = c(a) where f is largest
        let c = if i % 4 == 0 {
            let off = math::exp(log10 * (-12.0 + 12.0 * rng.random::<f64>()));
            let sign = if rng.random::<f64>() < 0.5 { -1.0 } else { 1.0 };
            constrained_c(a) + sign * off
        } else {
            let mag = math::exp(log10 * (-9.0 + 12.0 * rng.random::<f64>()));
            let sign = if rng.random::<f64>() < 0.5 { -1.0 } else { 1.0 };
            sign * mag
        };
        let p = CholeskyParam::new(a, b, c);
        if let Ok(v) = f_eval(&p) {
            if v > best {
                best = v;
                arg = p;
            }
        }
    }
    (best, arg)
}
