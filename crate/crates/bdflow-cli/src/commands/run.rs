use std::path::Path;
use std::time::Instant;

use bdflow_core::integrator::{self, Bootstrap, Regime, StopReason, Trajectory};
use bdflow_core::linalg;
use bdflow_core::lyapunov::{self, BudgetCheck, DescentAudit};
use bdflow_core::objective::Energy;
use bdflow_core::quadform;

use crate::config::{self, InitMode, RunConfig};
use crate::error::CliError;
use crate::export::{self, fmt_f64, fmt_opt, OutFormat};

use super::Report;

/// Integrates a gradient flow described by a TOML config, then audits the
/// result: shifted-energy descent (BDF3), dissipation budget, tail
/// diagnostics, and boundedness.
pub fn execute(config_path: &Path, format: OutFormat) -> Result<Report, CliError> {
    let start = Instant::now();
    let cfg: RunConfig = config::load(config_path)?;
    let scheme = cfg.scheme.build()?;
    let energy = cfg.energy.build(scheme.dt)?;
    let init = cfg.init.resolve(energy.dim(), scheme.k)?;
    let mode = match cfg.init.mode {
        InitMode::ExactList => Bootstrap::ExactList,
        InitMode::RampUp => Bootstrap::RampUp,
    };
    let selection = cfg.audit.selection()?;

    let init_states = integrator::bootstrap(energy.as_ref(), &scheme, &init, mode)?;
    let traj = integrator::run(energy.as_ref(), &scheme, &init_states, selection)?;
    let regime = scheme.regime(energy.c_f());

    let mut notes = Vec::new();
    notes.push(format!(
        "k = {}, dt = {}, regime {:?}, c_F = {:.6e}",
        scheme.k,
        scheme.dt,
        regime,
        energy.c_f()
    ));
    notes.push(match traj.stop {
        StopReason::Converged { at_step } => format!("converged at step {at_step}"),
        StopReason::MaxSteps => format!("stopped after max_steps = {}", scheme.max_steps),
    });

    let audit = resolve_audit(&cfg, &scheme, energy.as_ref(), &traj, &mut notes)?;
    let budget = match &audit {
        Some(a) => {
            let b = lyapunov::budget_check(a, energy.lower_bound())?;
            notes.push(format!(
                "dissipation budget: sum of remainders {:.6e} within {:.6e} ({})",
                b.sum_r,
                b.budget,
                verdict(b.ok)
            ));
            Some(b)
        }
        None => None,
    };

    let omega = lyapunov::omega_diagnostics(&traj).ok();
    if let Some(o) = &omega {
        notes.push(format!(
            "tail over last {} states: diameter {:.3e}, final increment {:.3e}, |W| {:.3e} -> {:.3e}",
            o.window, o.tail_diameter, o.final_increment, o.w_norm_first, o.w_norm_last
        ));
    }
    let bounded = lyapunov::coercive_boundedness_check(&traj, energy.as_ref()).ok();
    if let Some(b) = &bounded {
        notes.push(format!(
            "energy stays below its starting level: {} ({} violations, sup norm {:.6e})",
            verdict(b.ok),
            b.violations,
            b.sup_norm
        ));
    }

    let final_energy = energy.value(traj.states.last().expect("nonempty trajectory"));
    notes.push(format!(
        "{} states, final energy {final_energy:.12e}",
        traj.len()
    ));
    notes.push(format!("elapsed {:.2?}", start.elapsed()));

    let config_json = serde_json::to_value(&cfg).expect("config serializes");
    let payload = match format {
        OutFormat::Csv => csv_table(&config_json, energy.as_ref(), &traj, audit.as_ref()),
        OutFormat::Json => json_report(
            &config_json,
            energy.as_ref(),
            &traj,
            regime,
            audit.as_ref(),
            budget.as_ref(),
            omega.as_ref(),
            bounded.as_ref(),
        ),
    };

    Ok(Report { payload, notes })
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "VIOLATED"
    }
}

/// Picks the audit strength and runs the descent audit when one applies:
/// an explicit `beta` must be admissible (errors map to exit codes), an
/// omitted one falls back to the admissible midpoint when the regime has
/// one and skips the audit otherwise.
fn resolve_audit(
    cfg: &RunConfig,
    scheme: &bdflow_core::integrator::SchemeConfig,
    energy: &dyn Energy,
    traj: &Trajectory,
    notes: &mut Vec<String>,
) -> Result<Option<DescentAudit>, CliError> {
    if scheme.k != 3 {
        if cfg.audit.beta.is_some() {
            notes.push(String::from(
                "audit.beta ignored: descent audit is implemented for k = 3",
            ));
        }
        return Ok(None);
    }
    let beta = match cfg.audit.beta {
        Some(b) => b,
        None => match lyapunov::default_beta(3, energy.c_f(), scheme.dt) {
            Some(b) => b,
            None => {
                notes.push(String::from(
                    "no admissible beta for this stiffness and step size; descent audit skipped",
                ));
                return Ok(None);
            }
        },
    };
    let dec = quadform::decompose(beta)?;
    let audit = lyapunov::descent_audit(traj, energy, beta, &dec)?;
    notes.push(format!(
        "descent audit at beta = {beta:.12}: {} (min margin {:.3e}, min slack {:.3e}, monotone {})",
        verdict(audit.ok),
        audit.min_margin,
        audit.min_slack,
        audit.monotone
    ));
    Ok(Some(audit))
}

fn csv_table(
    config_json: &serde_json::Value,
    energy: &dyn Energy,
    traj: &Trajectory,
    audit: Option<&DescentAudit>,
) -> String {
    let dim = energy.dim();
    let mut columns: Vec<String> = [
        "index",
        "time",
        "energy",
        "residual",
        "w_norm",
        "increment_norm",
        "lyapunov",
        "margin",
        "r_term",
        "slack",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for j in 0..dim {
        columns.push(format!("state_{j}"));
    }
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();

    let mut per_index = vec![None; traj.len()];
    if let Some(a) = audit {
        for s in &a.steps {
            per_index[s.index] = Some(s);
        }
    }

    let mut rows = Vec::with_capacity(traj.len());
    for i in 0..traj.len() {
        let rec = traj.records[i].as_ref();
        let aud = per_index[i];
        let mut row = vec![
            format!("{i}"),
            fmt_f64(i as f64 * traj.dt),
            fmt_f64(energy.value(&traj.states[i])),
            fmt_opt(rec.map(|r| r.residual)),
            fmt_opt(rec.map(|r| linalg::norm(&r.w))),
            fmt_opt((i > 0).then(|| linalg::norm(&traj.increment(i)))),
            fmt_opt(aud.map(|s| s.lyapunov)),
            fmt_opt(aud.map(|s| s.margin)),
            fmt_opt(aud.map(|s| s.r_term)),
            fmt_opt(aud.map(|s| s.slack)),
        ];
        for v in &traj.states[i] {
            row.push(fmt_f64(*v));
        }
        rows.push(row);
    }
    export::csv_payload("run", config_json, &column_refs, &rows)
}

#[allow(clippy::too_many_arguments)]
fn json_report(
    config_json: &serde_json::Value,
    energy: &dyn Energy,
    traj: &Trajectory,
    regime: Regime,
    audit: Option<&DescentAudit>,
    budget: Option<&BudgetCheck>,
    omega: Option<&lyapunov::OmegaDiagnostics>,
    bounded: Option<&lyapunov::BoundednessCheck>,
) -> String {
    let energies: Vec<f64> = traj.states.iter().map(|s| energy.value(s)).collect();
    let residuals: Vec<Option<f64>> = traj
        .records
        .iter()
        .map(|r| r.as_ref().map(|r| r.residual))
        .collect();
    let w_norms: Vec<Option<f64>> = traj
        .records
        .iter()
        .map(|r| r.as_ref().map(|r| linalg::norm(&r.w)))
        .collect();
    let increments: Vec<Option<f64>> = (0..traj.len())
        .map(|i| (i > 0).then(|| linalg::norm(&traj.increment(i))))
        .collect();
    let stop = match traj.stop {
        StopReason::Converged { at_step } => serde_json::json!({ "converged_at": at_step }),
        StopReason::MaxSteps => serde_json::json!("max-steps"),
    };
    let value = serde_json::json!({
        "config": config_json,
        "k": traj.k,
        "dt": traj.dt,
        "regime": regime,
        "stop": stop,
        "steps": traj.len(),
        "final_state": traj.states.last(),
        "final_energy": energies.last(),
        "series": {
            "energy": energies,
            "residual": residuals,
            "w_norm": w_norms,
            "increment_norm": increments,
        },
        "audit": audit,
        "budget": budget,
        "omega": omega,
        "boundedness": bounded,
    });
    export::json_payload(&value)
}
