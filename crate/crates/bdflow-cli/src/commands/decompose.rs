use bdflow_core::quadform;

use crate::error::CliError;
use crate::export::{self, fmt_f64, OutFormat};

use super::Report;

/// Parses a correction strength given as a float or a fraction like `95/96`.
fn parse_beta(text: &str) -> Result<f64, CliError> {
    if let Some((n, d)) = text.split_once('/') {
        let n: i64 = n
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad fraction numerator in '{text}'")))?;
        let d: i64 = d
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad fraction denominator in '{text}'")))?;
        if d == 0 {
            return Err(CliError::Config(String::from("fraction denominator is zero")));
        }
        return Ok(n as f64 / d as f64);
    }
    text.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("cannot parse beta '{text}'")))
}

/// Computes and verifies the quadratic-form decomposition certifying BDF3
/// descent at strength `beta`.
pub fn execute(beta_text: &str, format: OutFormat) -> Result<Report, CliError> {
    let beta = parse_beta(beta_text)?;
    let dec = quadform::decompose(beta)?;
    dec.verify(1e-9)?;

    let residual = dec.identity_residual();
    let q_eigs = dec.q.eigenvalues();
    let r_eigs = dec.r_tilde.eigenvalues();

    let config = serde_json::json!({ "beta": beta });
    let entries: Vec<(&str, f64)> = vec![
        ("beta", beta),
        ("param_a", dec.param.a),
        ("param_b", dec.param.b),
        ("param_c", dec.param.c),
        ("q_a11", dec.q.a11),
        ("q_a12", dec.q.a12),
        ("q_a22", dec.q.a22),
        ("q_eig_min", q_eigs[0].min(q_eigs[1])),
        ("q_eig_max", q_eigs[0].max(q_eigs[1])),
        ("r_a11", dec.r_tilde.a11),
        ("r_a12", dec.r_tilde.a12),
        ("r_a13", dec.r_tilde.a13),
        ("r_a22", dec.r_tilde.a22),
        ("r_a23", dec.r_tilde.a23),
        ("r_a33", dec.r_tilde.a33),
        ("r_eig_0", r_eigs[0]),
        ("r_eig_1", r_eigs[1]),
        ("r_eig_2", r_eigs[2]),
        ("identity_residual", residual),
    ];

    let payload = match format {
        OutFormat::Csv => {
            let rows: Vec<Vec<String>> = entries
                .iter()
                .map(|(k, v)| vec![(*k).to_string(), fmt_f64(*v)])
                .collect();
            export::csv_payload("decompose", &config, &["quantity", "value"], &rows)
        }
        OutFormat::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert(String::from("config"), config);
            for (k, v) in &entries {
                obj.insert((*k).to_string(), serde_json::json!(v));
            }
            export::json_payload(&serde_json::Value::Object(obj))
        }
    };

    let notes = vec![
        format!(
            "q = {:.6} x1^2 + {:.6} x1 x2 + {:.6} x2^2 (eigenvalues {:.3e}, {:.3e})",
            dec.q.a11,
            2.0 * dec.q.a12,
            dec.q.a22,
            q_eigs[0],
            q_eigs[1]
        ),
        format!(
            "r_tilde eigenvalues {:.3e}, {:.3e}, {:.3e}; identity residual {residual:.3e}",
            r_eigs[0], r_eigs[1], r_eigs[2]
        ),
        format!(
            "gamma_3 = q(x1, x2) - q(x2, x3) + beta x1^2 + r_tilde holds at beta = {beta}"
        ),
    ];

    Ok(Report { payload, notes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_floats() {
        assert_eq!(parse_beta("95/96").unwrap(), 95.0 / 96.0);
        assert_eq!(parse_beta("0.9").unwrap(), 0.9);
        assert_eq!(parse_beta(" 5 / 6 ").unwrap(), 5.0 / 6.0);
        assert!(parse_beta("abc").is_err());
        assert!(parse_beta("1/0").is_err());
    }

    #[test]
    fn rejects_infeasible_beta_with_infeasible_error() {
        let err = execute("0.999", OutFormat::Csv).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }
}
