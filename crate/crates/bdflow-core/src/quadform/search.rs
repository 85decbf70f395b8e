//! Derivative-free maximizers used to certify the BDF3 stability constant:
//! golden-section search on a bracket and a small Nelder-Mead simplex
//! iteration. Both are deterministic for fixed inputs.

use alloc::vec::Vec;

use crate::math;

/// Maximizes a unimodal `f` on `[lo, hi]` by golden-section search until the
/// bracket is narrower than `xtol`. Returns `(x, f(x), iterations)`.
pub fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, xtol: f64) -> (f64, f64, usize) {
    let inv_phi = (math::sqrt(5.0) - 1.0) / 2.0;
    let mut a = lo;
    let mut b = hi;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iters = 0;
    while b - a > xtol && iters < 400 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
        iters += 1;
    }
    let x = 0.5 * (a + b);
    (x, f(x), iters)
}

/// Maximizes `f` over R^3 with a standard Nelder-Mead simplex started at
/// `start` with per-coordinate initial step `step`. Returns the best vertex
/// and its value after at most `max_iter` reflections.
pub fn nelder_mead_max(
    f: impl Fn(&[f64; 3]) -> f64,
    start: [f64; 3],
    step: f64,
    max_iter: usize,
) -> ([f64; 3], f64) {
    // minimize -f with the textbook coefficients
    let obj = |p: &[f64; 3]| -f(p);
    let mut simplex: Vec<[f64; 3]> = Vec::with_capacity(4);
    simplex.push(start);
    for d in 0..3 {
        let mut v = start;
        v[d] += step * (1.0 + v[d].abs());
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| obj(p)).collect();

    for _ in 0..max_iter {
        let mut order: [usize; 4] = [0, 1, 2, 3];
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).expect("finite objective"));
        let best = order[0];
        let worst = order[3];
        let second_worst = order[2];

        let spread = values[worst] - values[best];
        if spread.abs() <= 1e-15 * (1.0 + values[best].abs()) {
            break;
        }

        let mut centroid = [0.0; 3];
        for &i in &order[..3] {
            for d in 0..3 {
                centroid[d] += simplex[i][d] / 3.0;
            }
        }
        let dir = |t: f64| {
            let mut p = [0.0; 3];
            for d in 0..3 {
                p[d] = centroid[d] + t * (centroid[d] - simplex[worst][d]);
            }
            p
        };

        let reflected = dir(1.0);
        let fr = obj(&reflected);
        if fr < values[best] {
            let expanded = dir(2.0);
            let fe = obj(&expanded);
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            let contracted = if fr < values[worst] { dir(0.5) } else { dir(-0.5) };
            let fc = obj(&contracted);
            if fc < values[worst].min(fr) {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                // shrink toward the best vertex
                let anchor = simplex[best];
                for i in 0..4 {
                    if i == best {
                        continue;
                    }
                    for d in 0..3 {
                        simplex[i][d] = anchor[d] + 0.5 * (simplex[i][d] - anchor[d]);
                    }
                    values[i] = obj(&simplex[i]);
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..4 {
        if values[i] < values[best] {
            best = i;
        }
    }
    (simplex[best], -values[best])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, fx, _) = golden_max(|x| 3.0 - (x - 0.7) * (x - 0.7), 0.0, 2.0, 1e-12);
        assert!((x - 0.7).abs() < 1e-7);
        assert!((fx - 3.0).abs() < 1e-13);
    }

    #[test]
    fn nelder_mead_finds_quadratic_peak() {
        let f = |p: &[f64; 3]| {
            -(p[0] - 1.0) * (p[0] - 1.0)
                - 2.0 * (p[1] + 0.5) * (p[1] + 0.5)
                - 0.5 * (p[2] - 2.0) * (p[2] - 2.0)
        };
        let (p, fp) = nelder_mead_max(f, [0.0, 0.0, 0.0], 0.5, 500);
        assert!(fp > -1e-12, "value {fp}");
        assert!((p[0] - 1.0).abs() < 1e-5);
        assert!((p[1] + 0.5).abs() < 1e-5);
        assert!((p[2] - 2.0).abs() < 1e-5);
    }
}
