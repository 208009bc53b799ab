//! Data ingestion, reports and the command-line front end for beta
//! regression control charts. The numerics live in `betachart-core`.

pub mod cli;
pub mod ingest;
pub mod report;
pub mod runner;
pub mod svg;

/// Relative path of the bundled tire-process fixture and its SHA-256.
pub const TIRE_FIXTURE: &str = "data/tire.csv";
pub const TIRE_FIXTURE_DIGEST: &str = "data/tire.csv.sha256";
