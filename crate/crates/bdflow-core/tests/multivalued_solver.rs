//! Exhaustiveness checks for the multivalued step solver against dense
//! residual scans, plus a smoke test of the higher-dimensional path.

use bdflow_core::integrator::{solve_step_multivalued, Regime, SchemeConfig};
use bdflow_core::linalg;
use bdflow_core::objective::{AllenCahn1d, Energy, Polynomial};

fn dense_crossings(e: &dyn Energy, alpha: f64, dt: f64, b: f64, lo: f64, hi: f64) -> usize {
    let n = 1_000_000;
    let psi = |u: f64| alpha * u - b + dt * e.gradient(&[u])[0];
    let mut crossings = 0;
    let mut prev = psi(lo);
    for i in 1..=n {
        let u = lo + (hi - lo) * (i as f64) / (n as f64);
        let v = psi(u);
        if prev.signum() != v.signum() {
            crossings += 1;
        }
        prev = v;
    }
    crossings
}

#[test]
fn double_well_roots_match_dense_scan_across_histories() {
    let e = Polynomial::double_well(1.0).unwrap();
    for &dt in &[1.9_f64, 1.95] {
        let cfg = SchemeConfig {
            k: 3,
            dt,
            max_steps: 1,
            solver_tol: 1e-12,
            stop_tol: 0.0,
        };
        assert_eq!(cfg.regime(e.c_f()), Regime::MultivaluedStable);
        let alpha = cfg.alpha();
        for &b in &[-0.6_f64, -0.2, 0.0, 0.1, 0.5] {
            let sols = solve_step_multivalued(&e, &cfg, &[b], 0).unwrap();
            let want = dense_crossings(&e, alpha, dt, b, -6.0, 6.0);
            assert_eq!(
                sols.states.len(),
                want,
                "dt={dt} b={b}: got {:?}",
                sols.states
            );
            // each reported root really solves the step equation
            for s in &sols.states {
                let r = alpha * s[0] - b + dt * e.gradient(&[s[0]])[0];
                assert!(r.abs() <= 1e-9, "dt={dt} b={b}: residual {r:e}");
            }
            // sorted ascending without duplicates
            for w in sols.states.windows(2) {
                assert!(w[0][0] < w[1][0]);
            }
        }
    }
}

#[test]
fn newton_multistart_finds_separated_solutions() {
    let e = AllenCahn1d::new(4, 1.0, 1.0).unwrap();
    let dt = 1.9;
    let cfg = SchemeConfig {
        k: 3,
        dt,
        max_steps: 1,
        solver_tol: 1e-10,
        stop_tol: 0.0,
    };
    let b = vec![0.0; 4];
    let sols = solve_step_multivalued(&e, &cfg, &b, 0).unwrap();
    assert!(
        sols.states.len() >= 2,
        "expected several solutions, got {:?}",
        sols.states
    );
    // the flat state solves the step, and so do the constant vectors
    // u (1,...,1) with alpha u + dt (u^3 - u) = 0; at least one nonzero
    // solution must be found alongside zero
    assert!(sols.states.iter().any(|s| linalg::norm(s) <= 1e-9));
    assert!(sols.states.iter().any(|s| linalg::norm(s) > 0.1));
    let alpha = cfg.alpha();
    for s in &sols.states {
        let mut r = e.gradient(s);
        for i in 0..4 {
            r[i] = alpha * s[i] - b[i] + dt * r[i];
        }
        assert!(dt * linalg::norm(&r) <= cfg.solver_tol * 1.001);
    }
}
