use std::path::Path;
use std::time::Instant;

use bdflow_core::integrator::{self, Reference};

use crate::config::{self, OrderStudyConfig, ReferenceKind};
use crate::error::CliError;
use crate::export::{self, fmt_f64, OutFormat};

use super::Report;

/// Measures the convergence order of BDFk on a configured flow by running
/// a ladder of step sizes against a reference solution and fitting the
/// log-log error slope.
pub fn execute(config_path: &Path, format: OutFormat) -> Result<Report, CliError> {
    let start = Instant::now();
    let cfg: OrderStudyConfig = config::load(config_path)?;
    if cfg.dts.is_empty() {
        return Err(CliError::Config(String::from(
            "order study needs at least one step size",
        )));
    }
    let energy = cfg.energy.build(cfg.dts[0])?;
    if cfg.init.len() != energy.dim() {
        return Err(CliError::Config(format!(
            "init has length {}, energy dimension is {}",
            cfg.init.len(),
            energy.dim()
        )));
    }

    let quad = cfg.energy.quadratic()?;
    let use_closed_form = match cfg.reference {
        ReferenceKind::ClosedForm => {
            if quad.is_none() {
                return Err(CliError::Config(String::from(
                    "closed-form reference needs a quadratic energy",
                )));
            }
            true
        }
        ReferenceKind::FineBdf3 => false,
        ReferenceKind::Auto => quad.is_some(),
    };

    let study = if use_closed_form {
        let quad = quad.expect("checked above");
        let init = cfg.init.clone();
        let flow = move |t: f64| {
            quad.flow_solution(&init, t)
                .expect("dimensions were validated")
        };
        integrator::order_study(
            energy.as_ref(),
            cfg.k,
            &cfg.init,
            cfg.t_final,
            &cfg.dts,
            Reference::ClosedForm(&flow),
            cfg.solver_tol,
        )?
    } else {
        integrator::order_study(
            energy.as_ref(),
            cfg.k,
            &cfg.init,
            cfg.t_final,
            &cfg.dts,
            Reference::FineBdf3 { refine: cfg.refine },
            cfg.solver_tol,
        )?
    };

    let config_json = serde_json::to_value(&cfg).expect("config serializes");
    let payload = match format {
        OutFormat::Csv => {
            let rows: Vec<Vec<String>> = study
                .rows
                .iter()
                .map(|r| vec![fmt_f64(r.dt), fmt_f64(r.error)])
                .collect();
            export::csv_payload("order-study", &config_json, &["dt", "error"], &rows)
        }
        OutFormat::Json => export::json_payload(&serde_json::json!({
            "config": config_json,
            "reference": if use_closed_form { "closed-form" } else { "fine-bdf3" },
            "study": study,
        })),
    };

    let mut notes = vec![format!(
        "BDF{} against the {} reference over {} step sizes",
        cfg.k,
        if use_closed_form { "closed-form" } else { "refined" },
        study.rows.len()
    )];
    match study.slope {
        Some(s) => notes.push(format!(
            "fitted error slope {s:.4} (expected close to {})",
            cfg.k
        )),
        None => notes.push(String::from(
            "too few usable error points to fit a slope",
        )),
    }
    for w in &study.warnings {
        notes.push(format!("warning: {w}"));
    }
    notes.push(format!("elapsed {:.2?}", start.elapsed()));

    Ok(Report { payload, notes })
}
