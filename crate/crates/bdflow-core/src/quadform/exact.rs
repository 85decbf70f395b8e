//! Exact rational versions of the closed-form constants and quadratic forms.
//!
//! Every coefficient that has a closed form is stored here as a
//! `Rational64` and the floating-point versions elsewhere in the crate are
//! derived from these. That separation lets tests assert identities like the
//! BDF3 decomposition residual being exactly zero, with no float tolerance
//! at all.

use num_rational::Rational64;

use super::QuadformError;

/// Shorthand for building a rational.
pub(crate) fn rat(num: i64, den: i64) -> Rational64 {
    Rational64::new(num, den)
}

/// Symmetric 2x2 form with rational coefficients:
/// `q(x1, x2) = a11 x1^2 + 2 a12 x1 x2 + a22 x2^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RatForm2 {
    pub a11: Rational64,
    pub a12: Rational64,
    pub a22: Rational64,
}

impl RatForm2 {
    pub fn eval(&self, x1: Rational64, x2: Rational64) -> Rational64 {
        self.a11 * x1 * x1 + rat(2, 1) * self.a12 * x1 * x2 + self.a22 * x2 * x2
    }
}

/// Symmetric 3x3 form with rational coefficients:
/// `r(x1, x2, x3) = a11 x1^2 + a22 x2^2 + a33 x3^2
///                + 2 a12 x1 x2 + 2 a13 x1 x3 + 2 a23 x2 x3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RatForm3 {
    pub a11: Rational64,
    pub a12: Rational64,
    pub a13: Rational64,
    pub a22: Rational64,
    pub a23: Rational64,
    pub a33: Rational64,
}

impl RatForm3 {
    pub fn eval(&self, x1: Rational64, x2: Rational64, x3: Rational64) -> Rational64 {
        self.a11 * x1 * x1
            + self.a22 * x2 * x2
            + self.a33 * x3 * x3
            + rat(2, 1) * (self.a12 * x1 * x2 + self.a13 * x1 * x3 + self.a23 * x2 * x3)
    }

    pub fn is_zero(&self) -> bool {
        let zero = rat(0, 1);
        self.a11 == zero
            && self.a12 == zero
            && self.a13 == zero
            && self.a22 == zero
            && self.a23 == zero
            && self.a33 == zero
    }
}

/// `alpha_k = sum_{j=1..k} 1/j`, the coefficient of the implicit unknown in
/// the BDFk step equation: 1, 3/2, 11/6.
pub fn alpha(k: u8) -> Result<Rational64, QuadformError> {
    match k {
        1 => Ok(rat(1, 1)),
        2 => Ok(rat(3, 2)),
        3 => Ok(rat(11, 6)),
        _ => Err(QuadformError::UnsupportedOrder { k }),
    }
}

/// Largest stability shift `beta_k` of the BDFk pairing form: 1, 1, 95/96.
pub fn beta(k: u8) -> Result<Rational64, QuadformError> {
    match k {
        1 | 2 => Ok(rat(1, 1)),
        3 => Ok(rat(95, 96)),
        _ => Err(QuadformError::UnsupportedOrder { k }),
    }
}

/// `2 beta_k`, the dissipation threshold on `c_F * dt`: 2, 2, 95/48.
pub fn two_beta(k: u8) -> Result<Rational64, QuadformError> {
    beta(k).map(|b| b * rat(2, 1))
}

/// `beta_3 = 95/96` as a rational.
pub fn beta3() -> Rational64 {
    rat(95, 96)
}

/// `lambda_k = sum_{j=1..k} 2^j / j`, the curvature that makes the alternating
/// sequence `(-1)^n` comply with the BDFk scheme: 2, 4, 20/3.
pub fn lambda(k: u8) -> Result<Rational64, QuadformError> {
    match k {
        1 => Ok(rat(2, 1)),
        2 => Ok(rat(4, 1)),
        3 => Ok(rat(20, 3)),
        _ => Err(QuadformError::UnsupportedOrder { k }),
    }
}

/// Coefficients of the BDFk combination `sum_{j=1..k} (1/j) d^j U^{n+k}` on
/// the states `(U^{n+k}, U^{n+k-1}, ..., U^n)`, newest first.
pub fn bdf_coeffs(k: u8) -> Result<alloc::vec::Vec<Rational64>, QuadformError> {
    match k {
        1 => Ok(alloc::vec![rat(1, 1), rat(-1, 1)]),
        2 => Ok(alloc::vec![rat(3, 2), rat(-2, 1), rat(1, 2)]),
        3 => Ok(alloc::vec![rat(11, 6), rat(-3, 1), rat(3, 2), rat(-1, 3)]),
        _ => Err(QuadformError::UnsupportedOrder { k }),
    }
}

/// The BDF2 pairing form `gamma_2(x1, x2) = 3/2 x1^2 - 1/2 x1 x2`.
pub fn gamma2() -> RatForm2 {
    RatForm2 {
        a11: rat(3, 2),
        a12: rat(-1, 4),
        a22: rat(0, 1),
    }
}

/// The BDF3 pairing form
/// `gamma_3(x1, x2, x3) = 11/6 x1^2 - 7/6 x1 x2 + 1/3 x1 x3`.
pub fn gamma3() -> RatForm3 {
    RatForm3 {
        a11: rat(11, 6),
        a12: rat(-7, 12),
        a13: rat(1, 6),
        a22: rat(0, 1),
        a23: rat(0, 1),
        a33: rat(0, 1),
    }
}

/// The basic BDF3 witness form `q_3 = 5/12 x1^2 + 1/6 (x1 - x2)^2`, which
/// certifies the shift `beta = 5/6`.
pub fn q3_witness() -> RatForm2 {
    RatForm2 {
        a11: rat(7, 12),
        a12: rat(-1, 6),
        a22: rat(1, 6),
    }
}

/// Remainder paired with [`q3_witness`]:
/// `r_3 = 5/6 x1^2 + 1/4 (x1 - x2)^2 + 1/6 (x1 - x2 + x3)^2`.
pub fn r3_witness() -> RatForm3 {
    RatForm3 {
        a11: rat(5, 4),
        a12: rat(-5, 12),
        a13: rat(1, 6),
        a22: rat(5, 12),
        a23: rat(-1, 6),
        a33: rat(1, 6),
    }
}

/// The optimal BDF3 form `q_3^* = 1/6 (x2 - 7/4 x1)^2 + 1/6 x1^2`, which
/// attains the largest shift `beta_3 = 95/96`.
pub fn q3_star() -> RatForm2 {
    RatForm2 {
        a11: rat(65, 96),
        a12: rat(-7, 24),
        a22: rat(1, 6),
    }
}

/// Remainder paired with [`q3_star`]:
/// `r~_3^* = 1/6 (x3 - 7/4 x2 + x1)^2` (positive semidefinite, rank one).
pub fn r3_tilde_star() -> RatForm3 {
    RatForm3 {
        a11: rat(1, 6),
        a12: rat(-7, 24),
        a13: rat(1, 6),
        a22: rat(49, 96),
        a23: rat(-7, 24),
        a33: rat(1, 6),
    }
}

/// Coefficient-wise residual of the decomposition identity
/// `gamma_3 = q(x1, x2) - q(x2, x3) + r + beta x1^2`.
///
/// A valid `(q, r, beta)` triple makes every entry exactly zero.
pub fn decomposition_residual(q: &RatForm2, r: &RatForm3, beta: Rational64) -> RatForm3 {
    let g = gamma3();
    RatForm3 {
        a11: g.a11 - q.a11 - r.a11 - beta,
        a12: g.a12 - q.a12 - r.a12,
        a13: g.a13 - r.a13,
        a22: g.a22 - q.a22 + q.a11 - r.a22,
        a23: g.a23 + q.a12 - r.a23,
        a33: g.a33 + q.a22 - r.a33,
    }
}

/// The reduced objective `f` written in the rational coordinates
/// `(A, B, rho) = (a^2, b^2, c/a)`:
///
/// `f = 11/6 - (7/6 + 2 rho A + rho/3)^2 / (4 (B - A)) - (B + rho^2 A + 1/(36 A))`.
///
/// Returns `None` when `A <= 0` or `B = A` (boundary of the search domain).
pub fn f_squared_coords(
    aa: Rational64,
    bb: Rational64,
    rho: Rational64,
) -> Option<Rational64> {
    let zero = rat(0, 1);
    if aa <= zero || bb == aa {
        return None;
    }
    let delta = rat(7, 6) + rat(2, 1) * rho * aa + rho / rat(3, 1);
    let penalty = delta * delta / (rat(4, 1) * (bb - aa));
    Some(rat(11, 6) - penalty - (bb + rho * rho * aa + rat(1, 36) / aa))
}

/// `f` at the basic witness point, in rational mode.
///
/// The witness has `(a^2, b^2, c/a) = (1/6, 5/12, -1)`; the value is exactly
/// `5/6`.
pub fn f_at_witness() -> Rational64 {
    f_squared_coords(rat(1, 6), rat(5, 12), rat(-1, 1)).expect("witness point is interior")
}

/// Residual of the alternating sequence `u_n = s (-1)^n` under the BDFk
/// recursion with the matched concave curvature `dt F'(v) = -lambda_k v`:
/// `sum_j (1/j) d^j u^{n+k} - lambda_k u^{n+k}`.
///
/// Exactly zero for every parity and scale (`newest` is the value of
/// `u^{n+k}`).
pub fn alternating_residual(k: u8, newest: Rational64) -> Result<Rational64, QuadformError> {
    let coeffs = bdf_coeffs(k)?;
    let lam = lambda(k)?;
    let mut acc = -(lam * newest);
    let mut state = newest;
    for c in coeffs {
        acc += c * state;
        state = -state;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_values_match_partial_harmonic_sums() {
        // independent oracle: alpha_k = sum_{j=1..k} 1/j accumulated directly
        let mut acc = rat(0, 1);
        for j in 1..=3u8 {
            acc += rat(1, i64::from(j));
            assert_eq!(alpha(j).unwrap(), acc);
        }
        assert!(alpha(4).is_err());
        assert!(alpha(0).is_err());
    }

    #[test]
    fn lambda_values_match_power_sums() {
        // independent oracle: lambda_k = sum_{j=1..k} 2^j / j
        let mut acc = rat(0, 1);
        let mut pow = rat(1, 1);
        for j in 1..=3u8 {
            pow *= rat(2, 1);
            acc += pow / rat(i64::from(j), 1);
            assert_eq!(lambda(j).unwrap(), acc);
        }
    }

    #[test]
    fn bdf_coeffs_match_backward_difference_expansion() {
        // Expand sum_{j<=k} (1/j) d^j via the recursion d^{j+1} u^m =
        // d^j u^m - d^j u^{m-1} on stencil weights, independent of the
        // hard-coded tables.
        for k in 1..=3u8 {
            let mut total = alloc::vec![rat(0, 1); k as usize + 1];
            // weights of d^j on (U^{n+k}, ..., U^{n+k-j}) start as d^1 = (1, -1)
            let mut diff = alloc::vec![rat(1, 1), rat(-1, 1)];
            for j in 1..=k {
                for (slot, w) in diff.iter().enumerate() {
                    total[slot] += *w / rat(i64::from(j), 1);
                }
                // d^{j+1} weights: w(j+1, i) = w(j, i) - w(j, i-1)
                let mut next = alloc::vec![rat(0, 1); diff.len() + 1];
                for (i, w) in diff.iter().enumerate() {
                    next[i] += *w;
                    next[i + 1] -= *w;
                }
                diff = next;
            }
            assert_eq!(bdf_coeffs(k).unwrap(), total, "k = {k}");
        }
    }

    #[test]
    fn gamma_forms_match_pairing_expansion() {
        // gamma_k(x) = sum_j (1/j) <d^j U^{n+k}, x1> with d^j expanded in the
        // difference variables x_i = d U^{n+k+1-i}.
        // k = 2: x1^2 + 1/2 (x1 - x2) x1
        let g2 = gamma2();
        for (x1, x2) in [(1, 1), (2, -3), (5, 7)] {
            let x1 = rat(x1, 1);
            let x2 = rat(x2, 1);
            let want = x1 * x1 + (x1 - x2) * x1 / rat(2, 1);
            assert_eq!(g2.eval(x1, x2), want);
        }
        // k = 3: x1^2 + 1/2 (x1 - x2) x1 + 1/3 (x1 - 2 x2 + x3) x1
        let g3 = gamma3();
        for (x1, x2, x3) in [(1, 0, 0), (1, 1, 1), (2, -1, 3), (0, 5, -2)] {
            let x1 = rat(x1, 1);
            let x2 = rat(x2, 1);
            let x3 = rat(x3, 1);
            let want = x1 * x1
                + (x1 - x2) * x1 / rat(2, 1)
                + (x1 - rat(2, 1) * x2 + x3) * x1 / rat(3, 1);
            assert_eq!(g3.eval(x1, x2, x3), want, "({x1}, {x2}, {x3})");
        }
        assert_eq!(g3.eval(rat(1, 1), rat(0, 1), rat(0, 1)), rat(11, 6));
        assert_eq!(g2.eval(rat(1, 1), rat(1, 1)), rat(1, 1));
    }

    #[test]
    fn witness_forms_expand_their_square_definitions() {
        // q_3 = 5/12 x1^2 + 1/6 (x1 - x2)^2
        let q = q3_witness();
        for (x1, x2) in [(1, 0), (0, 1), (3, -2), (7, 11)] {
            let x1 = rat(x1, 1);
            let x2 = rat(x2, 1);
            let want = rat(5, 12) * x1 * x1 + (x1 - x2) * (x1 - x2) / rat(6, 1);
            assert_eq!(q.eval(x1, x2), want);
        }
        // r_3 = 5/6 x1^2 + 1/4 (x1 - x2)^2 + 1/6 (x1 - x2 + x3)^2
        let r = r3_witness();
        for (x1, x2, x3) in [(1, 0, 0), (0, 1, 0), (0, 0, 1), (2, -1, 3), (5, 4, -6)] {
            let x1 = rat(x1, 1);
            let x2 = rat(x2, 1);
            let x3 = rat(x3, 1);
            let want = rat(5, 6) * x1 * x1
                + (x1 - x2) * (x1 - x2) / rat(4, 1)
                + (x1 - x2 + x3) * (x1 - x2 + x3) / rat(6, 1);
            assert_eq!(r.eval(x1, x2, x3), want);
        }
    }

    #[test]
    fn optimal_forms_expand_their_square_definitions() {
        // q_3^* = 1/6 (x2 - 7/4 x1)^2 + 1/6 x1^2
        let q = q3_star();
        for (x1, x2) in [(1, 0), (0, 1), (4, 7), (-3, 5)] {
            let x1 = rat(x1, 1);
            let x2 = rat(x2, 1);
            let lin = x2 - rat(7, 4) * x1;
            let want = lin * lin / rat(6, 1) + x1 * x1 / rat(6, 1);
            assert_eq!(q.eval(x1, x2), want);
        }
        assert_eq!(q.eval(rat(1, 1), rat(0, 1)), rat(65, 96));
        // r~_3^* = 1/6 (x3 - 7/4 x2 + x1)^2
        let r = r3_tilde_star();
        for (x1, x2, x3) in [(1, 0, 0), (0, 1, 0), (0, 0, 1), (2, -1, 3), (4, 4, 3)] {
            let x1 = rat(x1, 1);
            let x2 = rat(x2, 1);
            let x3 = rat(x3, 1);
            let lin = x3 - rat(7, 4) * x2 + x1;
            assert_eq!(r.eval(x1, x2, x3), lin * lin / rat(6, 1));
        }
    }

    #[test]
    fn witness_decomposition_residual_is_zero() {
        let res = decomposition_residual(&q3_witness(), &r3_witness(), rat(0, 1));
        assert!(res.is_zero(), "residual {res:?}");
    }

    #[test]
    fn optimal_decomposition_residual_is_zero() {
        let res = decomposition_residual(&q3_star(), &r3_tilde_star(), beta3());
        assert!(res.is_zero(), "residual {res:?}");
    }

    #[test]
    fn f_at_witness_is_five_sixths_exactly() {
        assert_eq!(f_at_witness(), rat(5, 6));
    }

    #[test]
    fn f_at_boundary_coordinates_recovers_beta3() {
        // At (A, B, rho) -> (1/6, 1/6, -7/4) the penalty numerator vanishes,
        // so f extends continuously with value 95/96; check along B = A + eps
        // with eps rational that the non-penalty part is exactly
        // 11/6 - eps - 1/6 - 49/96 - 1/6 and the penalty is zero.
        let aa = rat(1, 6);
        let rho = rat(-7, 4);
        for eps in [rat(1, 100), rat(1, 10_000)] {
            let f = f_squared_coords(aa, aa + eps, rho).unwrap();
            assert_eq!(f, beta3() - eps);
        }
        assert!(f_squared_coords(aa, aa, rho).is_none());
        assert!(f_squared_coords(rat(0, 1), rat(1, 6), rho).is_none());
    }

    #[test]
    fn alternating_residual_is_exactly_zero() {
        for k in 1..=3u8 {
            for newest in [rat(1, 1), rat(-1, 1)] {
                assert_eq!(alternating_residual(k, newest).unwrap(), rat(0, 1));
            }
        }
        assert!(alternating_residual(5, rat(1, 1)).is_err());
    }
}
