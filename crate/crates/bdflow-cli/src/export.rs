//! Deterministic data payloads: CSV with embedded config comments, or JSON.
//!
//! Payload bytes depend only on the inputs, never on wall-clock time, so
//! reruns of the same command produce identical files.

use std::io::Write;
use std::path::Path;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OutFormat {
    Csv,
    Json,
}

/// Full-precision float formatting used in every CSV cell.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Optional cell: empty string when the value is undefined for the row.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Assembles a CSV payload: `# ` comment lines (tool tag plus one line of
/// config JSON), a header row, then data rows.
pub fn csv_payload(
    command: &str,
    config_json: &serde_json::Value,
    columns: &[&str],
    rows: &[Vec<String>],
) -> String {
    let mut out = String::new();
    out.push_str(&format!("# bdflow {command}\n"));
    out.push_str(&format!("# config: {config_json}\n"));
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Pretty JSON payload with a trailing newline.
pub fn json_payload(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

/// Writes the payload to `out` when given, to stdout otherwise.
pub fn emit(payload: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, payload)?;
            Ok(())
        }
        None => {
            std::io::stdout().write_all(payload.as_bytes())?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_render_at_full_precision() {
        let v = 95.0 / 96.0;
        let s = fmt_f64(v);
        assert!(s.contains('e'));
        let back: f64 = s.parse().unwrap();
        assert_eq!(back.to_bits(), v.to_bits());
    }

    #[test]
    fn csv_embeds_config_and_rows() {
        let cfg = serde_json::json!({"samples": 10});
        let text = csv_payload(
            "demo",
            &cfg,
            &["a", "b"],
            &[vec![String::from("1"), String::from("2")]],
        );
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# bdflow demo");
        assert!(lines[1].starts_with("# config: {"));
        assert_eq!(lines[2], "a,b");
        assert_eq!(lines[3], "1,2");
    }
}
