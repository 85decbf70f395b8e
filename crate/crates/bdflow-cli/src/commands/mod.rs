pub mod certify;
pub mod counterexample;
pub mod decompose;
pub mod multivalued;
pub mod order_study;
pub mod run;

/// What a subcommand produces: a deterministic data payload for stdout or
/// `--out`, and human-readable notes for stderr.
#[derive(Debug)]
pub struct Report {
    pub payload: String,
    pub notes: Vec<String>,
}
