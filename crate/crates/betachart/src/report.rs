//! JSON reports and CSV tables.

use std::io::Write;
use std::path::Path;

use betachart_core::arl::{ArlEstimate, ArlConfig};
use betachart_core::charts::{detect_signals, ChartKind, ChartResult};
use betachart_core::fit::{CoefficientRow, FittedBetaReg, LrTestResult, ModelSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub input: Option<String>,
    /// Seconds since the Unix epoch. Excluded from reproducibility checks.
    pub generated_unix_s: u64,
}

impl Metadata {
    pub fn now(command: &str, seed: Option<u64>, input: Option<&Path>) -> Self {
        let generated_unix_s = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            input: input.map(|p| p.display().to_string()),
            generated_unix_s,
        }
    }
}

/// Coefficient table and fit diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub spec: ModelSpec,
    pub n: usize,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    pub boundary_adjusted: bool,
    pub coefficients: Vec<CoefficientRow>,
}

impl ModelSummary {
    pub fn new(fit: &FittedBetaReg, coefficients: Vec<CoefficientRow>, boundary_adjusted: bool) -> Self {
        Self {
            spec: fit.spec.clone(),
            n: fit.mu_hat.len(),
            loglik: fit.loglik,
            converged: fit.converged,
            iterations: fit.iterations,
            boundary_adjusted,
            coefficients,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSignals {
    pub chart: ChartKind,
    /// 1-based, ascending.
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartReport {
    pub model: Option<ModelSummary>,
    pub lr_test: Option<LrTestResult>,
    pub charts: Vec<ChartResult>,
    pub signals: Vec<ChartSignals>,
    pub metadata: Metadata,
}

impl ChartReport {
    pub fn new(model: Option<ModelSummary>, lr_test: Option<LrTestResult>, charts: Vec<ChartResult>, metadata: Metadata) -> Self {
        let signals = charts
            .iter()
            .map(|c| ChartSignals { chart: c.kind, indices: detect_signals(c) })
            .collect();
        Self { model, lr_test, charts, signals, metadata }
    }

    pub fn signals_of(&self, kind: ChartKind) -> Option<&[usize]> {
        self.signals.iter().find(|s| s.chart == kind).map(|s| s.indices.as_slice())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArlReport {
    pub scenario: ScenarioInfo,
    pub config: ArlConfig,
    pub estimates: Vec<ArlEstimate>,
    pub metadata: Metadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInfo {
    pub preset: Option<u8>,
    pub beta: [f64; 3],
    pub gamma: [f64; 3],
    pub n: usize,
    pub approx_mean: f64,
    pub approx_sigma: f64,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> std::io::Result<T> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    Ok(serde_json::from_reader(f)?)
}

/// chart,t,y,lcl,ucl,signal, one row per chart and observation.
pub fn chart_csv(charts: &[ChartResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["chart", "t", "y", "lcl", "ucl", "signal"]).expect("in-memory write");
    for c in charts {
        for r in &c.rows {
            w.write_record([
                c.kind.name().to_string(),
                r.t.to_string(),
                r.y.to_string(),
                r.lcl.to_string(),
                r.ucl.to_string(),
                u8::from(r.signal).to_string(),
            ])
            .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
}

/// chart,delta,arl,mc_se,reps. Floats use the shortest representation that
/// round-trips, so equal results give equal bytes.
pub fn arl_csv(estimates: &[ArlEstimate]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["chart", "delta", "arl", "mc_se", "reps"]).expect("in-memory write");
    for e in estimates {
        w.write_record([
            e.chart_kind.name().to_string(),
            e.delta.to_string(),
            e.arl.to_string(),
            e.mc_std_error.to_string(),
            e.replications.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
}

/// Plain-text coefficient table in the usual estimate / se / z / p layout.
pub fn coefficient_table(rows: &[CoefficientRow]) -> String {
    let mut out = format!("{:<12} {:<14} {:>10} {:>10} {:>9} {:>9}\n", "submodel", "term", "estimate", "std.err", "z", "p");
    for r in rows {
        let sub = serde_json::to_value(r.submodel).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        out.push_str(&format!(
            "{:<12} {:<14} {:>10.4} {:>10.4} {:>9.2} {:>9.4}\n",
            sub, r.name, r.estimate, r.std_error, r.z_stat, r.p_value
        ));
    }
    out
}
