//! Descent audits across energies, stiffness levels, and correction
//! strengths: every admissible combination must certify monotone descent
//! of the shifted energy and respect the dissipation budget.

use bdflow_core::integrator::{run, BranchSelection, Regime, SchemeConfig};
use bdflow_core::lyapunov::{budget_check, default_beta, descent_audit};
use bdflow_core::objective::{AllenCahn1d, Barrier, Energy, Polynomial};
use bdflow_core::quadform::{beta3_f64, decompose};

struct Case {
    name: &'static str,
    energy: Box<dyn Energy>,
    init: Vec<Vec<f64>>,
}

fn cases() -> Vec<Case> {
    let n = 8;
    let cosine: Vec<f64> = (0..n)
        .map(|i| 0.6 * (core::f64::consts::PI * (i as f64) / ((n - 1) as f64)).cos())
        .collect();
    vec![
        Case {
            name: "double-well",
            energy: Box::new(Polynomial::double_well(1.0).unwrap()),
            init: vec![vec![0.6]; 3],
        },
        Case {
            name: "allen-cahn",
            energy: Box::new(AllenCahn1d::new(n, 1.0, 1.0).unwrap()),
            init: vec![cosine; 3],
        },
        Case {
            name: "barrier",
            energy: Box::new(Barrier::with_curvature(1.0).unwrap()),
            init: vec![vec![0.4]; 3],
        },
    ]
}

fn betas_for(c_f: f64, dt: f64) -> Vec<(&'static str, f64)> {
    let lo = 0.5 * c_f * dt;
    let hi = beta3_f64();
    vec![
        ("just above the floor", lo + 1e-9 * (1.0 + lo)),
        ("midpoint", default_beta(3, c_f, dt).unwrap()),
        ("near the ceiling", hi - 1e-3),
    ]
}

#[test]
fn descent_certifies_across_stiffness_grid() {
    // c_f dt targets: four in the unique regime, one multivalued
    let targets = [0.5, 1.0, 1.5, 1.8, 1.9];
    for case in cases() {
        let e = case.energy.as_ref();
        let c_f = e.c_f();
        assert!(c_f > 0.0, "{}: sweep needs a nonconvex energy", case.name);
        for &target in &targets {
            let dt = target / c_f;
            let cfg = SchemeConfig {
                k: 3,
                dt,
                max_steps: if target < 11.0 / 6.0 { 500 } else { 300 },
                solver_tol: 1e-12,
                stop_tol: 0.0,
            };
            let expected = if target < 11.0 / 6.0 {
                Regime::Unique
            } else {
                Regime::MultivaluedStable
            };
            assert_eq!(cfg.regime(c_f), expected, "{} target {target}", case.name);

            let traj = run(e, &cfg, &case.init, BranchSelection::LowestLyapunov)
                .unwrap_or_else(|err| panic!("{} target {target}: {err}", case.name));

            for (label, beta) in betas_for(c_f, dt) {
                let dec = decompose(beta).unwrap();
                let audit = descent_audit(&traj, e, beta, &dec).unwrap_or_else(|err| {
                    panic!("{} target {target} beta {label}: {err}", case.name)
                });
                assert!(
                    audit.ok,
                    "{} target {target} beta {label}: min margin {}",
                    case.name, audit.min_margin
                );
                assert!(
                    audit.monotone,
                    "{} target {target} beta {label}: not monotone",
                    case.name
                );
                assert!(
                    audit.min_slack >= -1e-9,
                    "{} target {target} beta {label}: slack {}",
                    case.name, audit.min_slack
                );
                let budget = budget_check(&audit, e.lower_bound()).unwrap();
                assert!(
                    budget.ok,
                    "{} target {target} beta {label}: dissipated {} of {}",
                    case.name, budget.sum_r, budget.budget
                );
            }
        }
    }
}

#[test]
fn multivalued_branches_all_pass_the_audit() {
    // in the stable multivalued window every branch policy must still
    // produce a descending trajectory
    let e = Polynomial::double_well(1.0).unwrap();
    let dt = 1.9;
    let cfg = SchemeConfig {
        k: 3,
        dt,
        max_steps: 300,
        solver_tol: 1e-12,
        stop_tol: 0.0,
    };
    let beta = default_beta(3, e.c_f(), dt).unwrap();
    let dec = decompose(beta).unwrap();
    for (name, selection) in [
        ("lowest-lyapunov", BranchSelection::LowestLyapunov),
        ("nearest-previous", BranchSelection::NearestPrevious),
        ("index-0", BranchSelection::Index(0)),
    ] {
        let init = vec![vec![0.05], vec![0.05], vec![0.05]];
        let traj = match run(&e, &cfg, &init, selection) {
            Ok(t) => t,
            Err(err) => panic!("{name}: {err}"),
        };
        let audit = descent_audit(&traj, &e, beta, &dec).unwrap();
        assert!(audit.ok, "{name}: min margin {}", audit.min_margin);
        assert!(audit.monotone, "{name}");
        let budget = budget_check(&audit, e.lower_bound()).unwrap();
        assert!(budget.ok, "{name}");
    }
}
