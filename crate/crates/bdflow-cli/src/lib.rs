//! Command-line frontend for the BDF gradient-flow toolkit: integrates
//! configured flows, certifies the BDF3 stability constant, prints stability
//! decompositions, demonstrates the non-dissipating alternating trajectory,
//! measures convergence orders, and walks multivalued step branches.
//!
//! Data payloads go to stdout (or `--out`) and are deterministic; human
//! summaries and timings go to stderr.

pub mod commands;
pub mod config;
pub mod error;
pub mod export;
