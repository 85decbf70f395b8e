use std::path::Path;
use std::time::Instant;

use bdflow_core::integrator::{
    self, BranchChoice, BranchSelection, SchemeConfig, StepRecord, StopReason, Trajectory,
};
use bdflow_core::linalg;
use bdflow_core::lyapunov::{self, BudgetCheck, DescentAudit};
use bdflow_core::objective::Energy;
use bdflow_core::quadform;

use crate::config::{self, MultivaluedConfig};
use crate::error::CliError;
use crate::export::{self, fmt_f64, fmt_opt, OutFormat};

use super::Report;

struct Branch {
    traj: Trajectory,
    residual: f64,
    audit: Option<DescentAudit>,
    budget: Option<BudgetCheck>,
}

/// Enumerates every solution of one BDF step past the uniqueness threshold,
/// then follows each branch forward and audits its descent. Shows how the
/// scheme turns multivalued and which branches still dissipate.
pub fn execute(config_path: &Path, format: OutFormat) -> Result<Report, CliError> {
    let start = Instant::now();
    let cfg: MultivaluedConfig = config::load(config_path)?;
    let scheme = cfg.scheme.build()?;
    let energy = cfg.energy.build(scheme.dt)?;
    let k = scheme.k as usize;
    let dim = energy.dim();
    if cfg.history.len() != k {
        return Err(CliError::Config(format!(
            "history needs exactly {k} states, got {}",
            cfg.history.len()
        )));
    }
    for s in &cfg.history {
        if s.len() != dim {
            return Err(CliError::Config(format!(
                "history state has length {}, energy dimension is {dim}",
                s.len()
            )));
        }
    }

    let b = integrator::bdf_rhs(scheme.k, &cfg.history)?;
    let sols = integrator::solve_step_multivalued(energy.as_ref(), &scheme, &b, k)?;

    let mut notes = Vec::new();
    notes.push(format!(
        "k = {}, dt = {}, regime {:?}: {} candidate states for the next step",
        scheme.k,
        scheme.dt,
        scheme.regime(energy.c_f()),
        sols.states.len()
    ));
    if let Some((lo, hi)) = sols.degenerate_interval {
        notes.push(format!(
            "degenerate interval of non-isolated solutions: [{lo:.12}, {hi:.12}]"
        ));
    }

    let beta = if scheme.k == 3 {
        lyapunov::default_beta(3, energy.c_f(), scheme.dt)
    } else {
        None
    };
    let dec = match beta {
        Some(b) => Some(quadform::decompose(b)?),
        None => None,
    };
    if scheme.k == 3 && beta.is_none() {
        notes.push(String::from(
            "no admissible audit strength at this stiffness; branches reported without audits",
        ));
    }

    let cont_cfg = SchemeConfig {
        max_steps: cfg.continue_steps,
        ..scheme.clone()
    };
    let mut branches = Vec::with_capacity(sols.states.len());
    for (i, cand) in sols.states.iter().enumerate() {
        let traj = follow_branch(
            energy.as_ref(),
            &scheme,
            &cont_cfg,
            &cfg.history,
            &sols,
            i,
        )?;
        let rec = traj.records[k].as_ref().expect("candidate step is recorded");
        let residual = rec.residual;
        let (audit, budget) = match (beta, &dec) {
            (Some(beta), Some(dec)) => {
                let audit = lyapunov::descent_audit(&traj, energy.as_ref(), beta, dec)?;
                let budget = lyapunov::budget_check(&audit, energy.lower_bound())?;
                (Some(audit), Some(budget))
            }
            _ => (None, None),
        };
        let label = if dim == 1 {
            format!("{:.12}", cand[0])
        } else {
            format!("|u| = {:.12}", linalg::norm(cand))
        };
        match &audit {
            Some(a) => notes.push(format!(
                "branch {i}: u = {label}, residual {residual:.3e}, audit {} (min margin {:.3e}), budget {}",
                if a.ok { "ok" } else { "VIOLATED" },
                a.min_margin,
                if budget.as_ref().is_some_and(|b| b.ok) {
                    "ok"
                } else {
                    "VIOLATED"
                }
            )),
            None => notes.push(format!(
                "branch {i}: u = {label}, residual {residual:.3e}"
            )),
        }
        branches.push(Branch {
            traj,
            residual,
            audit,
            budget,
        });
    }
    notes.push(format!("elapsed {:.2?}", start.elapsed()));

    let config_json = serde_json::to_value(&cfg).expect("config serializes");
    let payload = match format {
        OutFormat::Csv => csv_table(&config_json, energy.as_ref(), &branches),
        OutFormat::Json => json_report(&config_json, energy.as_ref(), &sols.degenerate_interval, &branches),
    };

    Ok(Report { payload, notes })
}

/// Glues `history + candidate i` into a trajectory and continues it with
/// nearest-previous selection.
fn follow_branch(
    energy: &dyn Energy,
    scheme: &SchemeConfig,
    cont_cfg: &SchemeConfig,
    history: &[Vec<f64>],
    sols: &integrator::StepSolutions,
    chosen: usize,
) -> Result<Trajectory, CliError> {
    let k = scheme.k as usize;
    let cand = &sols.states[chosen];
    let b = integrator::bdf_rhs(scheme.k, history)?;
    let alpha = scheme.alpha();
    let grad = energy.gradient(cand);
    let mut residual_vec = vec![0.0; cand.len()];
    let mut w = vec![0.0; cand.len()];
    for j in 0..cand.len() {
        residual_vec[j] = alpha * cand[j] - b[j] + scheme.dt * grad[j];
        w[j] = (b[j] - alpha * cand[j]) / scheme.dt;
    }
    let record = StepRecord {
        residual: linalg::norm(&residual_vec),
        w,
        branch: Some(BranchChoice {
            step: k,
            candidates: sols.states.clone(),
            chosen,
            degenerate: sols.degenerate_interval,
        }),
    };

    let mut states: Vec<Vec<f64>> = history.to_vec();
    states.push(cand.clone());
    let mut records: Vec<Option<StepRecord>> = vec![None; k];
    records.push(Some(record));

    let init: Vec<Vec<f64>> = states[states.len() - k..].to_vec();
    let cont = integrator::run(energy, cont_cfg, &init, BranchSelection::NearestPrevious)?;
    states.extend_from_slice(&cont.states[k..]);
    records.extend(cont.records[k..].iter().cloned());

    Ok(Trajectory {
        k: scheme.k,
        dt: scheme.dt,
        states,
        records,
        stop: cont.stop,
    })
}

fn csv_table(config_json: &serde_json::Value, energy: &dyn Energy, branches: &[Branch]) -> String {
    let dim = energy.dim();
    let mut columns: Vec<String> = ["branch", "index", "time", "energy", "increment_norm"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for j in 0..dim {
        columns.push(format!("state_{j}"));
    }
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();

    let mut rows = Vec::new();
    for (bi, branch) in branches.iter().enumerate() {
        let traj = &branch.traj;
        for i in 0..traj.len() {
            let mut row = vec![
                format!("{bi}"),
                format!("{i}"),
                fmt_f64(i as f64 * traj.dt),
                fmt_f64(energy.value(&traj.states[i])),
                fmt_opt((i > 0).then(|| linalg::norm(&traj.increment(i)))),
            ];
            for v in &traj.states[i] {
                row.push(fmt_f64(*v));
            }
            rows.push(row);
        }
    }
    export::csv_payload("multivalued-demo", config_json, &column_refs, &rows)
}

fn json_report(
    config_json: &serde_json::Value,
    energy: &dyn Energy,
    degenerate: &Option<(f64, f64)>,
    branches: &[Branch],
) -> String {
    let branch_values: Vec<serde_json::Value> = branches
        .iter()
        .map(|b| {
            let traj = &b.traj;
            let stop = match traj.stop {
                StopReason::Converged { at_step } => {
                    serde_json::json!({ "converged_at": at_step })
                }
                StopReason::MaxSteps => serde_json::json!("max-steps"),
            };
            serde_json::json!({
                "candidate": traj.states[traj.k as usize],
                "residual": b.residual,
                "states": traj.len(),
                "stop": stop,
                "final_state": traj.states.last(),
                "final_energy": energy.value(traj.states.last().expect("nonempty")),
                "audit": b.audit,
                "budget": b.budget,
            })
        })
        .collect();
    export::json_payload(&serde_json::json!({
        "config": config_json,
        "degenerate_interval": degenerate,
        "branches": branch_values,
    }))
}
