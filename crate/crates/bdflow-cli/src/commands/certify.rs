use std::time::Instant;

use bdflow_core::quadform::{self, exact};

use crate::error::CliError;
use crate::export::{self, fmt_f64, OutFormat};

use super::Report;

/// Certifies the BDF3 stability constant three independent ways: a
/// deterministic maximization of the reduced objective, verification of the
/// closed-form decomposition at the optimum, and a randomized sweep that must
/// never beat the constant.
pub fn execute(samples: usize, seed: u64, format: OutFormat) -> Result<Report, CliError> {
    let start = Instant::now();

    let beta3 = quadform::beta3_f64();
    let beta3_exact = exact::beta3();

    let max = quadform::maximize_f()?;
    let gap = (max.beta_star - beta3).abs();

    let a_star = 1.0 / 6.0_f64.sqrt();
    let c_star = -7.0 / (4.0 * 6.0_f64.sqrt());
    let argmax_err = (max.argmax.a - a_star)
        .abs()
        .max((max.argmax.b - a_star).abs())
        .max((max.argmax.c - c_star).abs());

    let dec = quadform::decompose(beta3)?;
    dec.verify(1e-9)?;
    let float_residual = dec.identity_residual();

    let rational_residual =
        exact::decomposition_residual(&exact::q3_star(), &exact::r3_tilde_star(), beta3_exact);
    let rational_zero = rational_residual.is_zero();
    if !rational_zero {
        return Err(CliError::Numerical(String::from(
            "rational decomposition identity does not vanish",
        )));
    }

    let witness = exact::f_at_witness();

    let (sample_sup, sample_arg) = quadform::sample_f_supremum(samples, seed);
    let sample_excess = sample_sup - beta3;
    if sample_excess > 1e-12 {
        return Err(CliError::Numerical(format!(
            "sampled objective exceeds the certified constant by {sample_excess:.3e}"
        )));
    }

    let config = serde_json::json!({ "samples": samples, "seed": seed });
    let entries: Vec<(&str, String, serde_json::Value)> = vec![
        (
            "beta3_exact",
            format!("{}/{}", beta3_exact.numer(), beta3_exact.denom()),
            serde_json::json!(format!("{}/{}", beta3_exact.numer(), beta3_exact.denom())),
        ),
        ("beta3", fmt_f64(beta3), serde_json::json!(beta3)),
        (
            "search_max",
            fmt_f64(max.beta_star),
            serde_json::json!(max.beta_star),
        ),
        ("search_gap", fmt_f64(gap), serde_json::json!(gap)),
        (
            "argmax_a",
            fmt_f64(max.argmax.a),
            serde_json::json!(max.argmax.a),
        ),
        (
            "argmax_b",
            fmt_f64(max.argmax.b),
            serde_json::json!(max.argmax.b),
        ),
        (
            "argmax_c",
            fmt_f64(max.argmax.c),
            serde_json::json!(max.argmax.c),
        ),
        (
            "argmax_error",
            fmt_f64(argmax_err),
            serde_json::json!(argmax_err),
        ),
        (
            "identity_residual",
            fmt_f64(float_residual),
            serde_json::json!(float_residual),
        ),
        (
            "identity_residual_exact",
            String::from("0"),
            serde_json::json!(0),
        ),
        (
            "witness_f",
            format!("{}/{}", witness.numer(), witness.denom()),
            serde_json::json!(format!("{}/{}", witness.numer(), witness.denom())),
        ),
        (
            "samples",
            format!("{samples}"),
            serde_json::json!(samples),
        ),
        ("seed", format!("{seed}"), serde_json::json!(seed)),
        (
            "sample_sup",
            fmt_f64(sample_sup),
            serde_json::json!(sample_sup),
        ),
        (
            "sample_excess",
            fmt_f64(sample_excess),
            serde_json::json!(sample_excess),
        ),
        (
            "sample_arg_a",
            fmt_f64(sample_arg.a),
            serde_json::json!(sample_arg.a),
        ),
        (
            "sample_arg_b",
            fmt_f64(sample_arg.b),
            serde_json::json!(sample_arg.b),
        ),
        (
            "sample_arg_c",
            fmt_f64(sample_arg.c),
            serde_json::json!(sample_arg.c),
        ),
    ];

    let payload = match format {
        OutFormat::Csv => {
            let rows: Vec<Vec<String>> = entries
                .iter()
                .map(|(k, v, _)| vec![(*k).to_string(), v.clone()])
                .collect();
            export::csv_payload("certify-beta3", &config, &["quantity", "value"], &rows)
        }
        OutFormat::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert(String::from("config"), config);
            for (k, _, v) in &entries {
                obj.insert((*k).to_string(), v.clone());
            }
            export::json_payload(&serde_json::Value::Object(obj))
        }
    };

    let notes = vec![
        format!(
            "beta_3 = {}/{} = {beta3:.15}, search reproduces it to {gap:.3e}",
            beta3_exact.numer(),
            beta3_exact.denom()
        ),
        format!("argmax within {argmax_err:.3e} of (1/sqrt6, 1/sqrt6, -7/(4 sqrt6))"),
        format!(
            "decomposition verified: rational identity 0, float residual {float_residual:.3e}"
        ),
        format!(
            "{samples} samples (seed {seed}): sup - beta_3 = {sample_excess:.3e}, none exceed it"
        ),
        format!("elapsed {:.2?}", start.elapsed()),
    ];

    Ok(Report { payload, notes })
}
