//! Scenario runner for composite non-Markovian qubit dynamics.
//!
//! A run validates a JSON config, computes one witness time series (or a CP
//! scan), transforms it, attributes the spectral peaks to noise sources and
//! writes CSV/JSON artifacts for external plotting.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use nmdis_core::channels::ChannelLabel;
use serde::{Deserialize, Serialize};

pub mod config;
pub mod error;
pub mod output;
pub mod scenario;

pub use config::{validate_config, Override, ScenarioConfig, ScenarioKind};
pub use error::{CliError, ConfigIssue, Result};
pub use scenario::{run_scenario, ScenarioOutput, ScenarioReport};

use scenario::{AnalyticComparison, CpSummary, PeakRow, RateSummary};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Printed to stdout after a run. Unlike the report file it carries the wall-clock duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub tool_version: String,
    pub config: ScenarioConfig,
    pub artifacts: Vec<PathBuf>,
    pub summary: RunSummary,
    pub duration_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub peaks: Vec<PeakRow>,
    pub power_share: BTreeMap<ChannelLabel, f64>,
    pub unattributed_share: Option<f64>,
    pub backflow_total: Option<f64>,
    pub backflow_intervals: Option<usize>,
    pub analytic: Vec<AnalyticComparison>,
    pub rate: Option<RateSummary>,
    pub cp: Option<CpSummary>,
}

impl RunSummary {
    fn from_report(r: &ScenarioReport) -> Self {
        Self {
            peaks: r.spectral.as_ref().map(|s| s.peaks.clone()).unwrap_or_default(),
            power_share: r
                .spectral
                .as_ref()
                .map(|s| s.attribution.power_share.clone())
                .unwrap_or_default(),
            unattributed_share: r.spectral.as_ref().map(|s| s.attribution.unattributed_share),
            backflow_total: r.backflow.as_ref().map(|b| b.total_backflow),
            backflow_intervals: r.backflow.as_ref().map(|b| b.intervals.len()),
            analytic: r.analytic.clone(),
            rate: r.rate.clone(),
            cp: r.cp.clone(),
        }
    }
}

/// Run a validated scenario and write its artifacts.
pub fn execute(cfg: &ScenarioConfig) -> Result<RunRecord> {
    let start = Instant::now();
    let out = run_scenario(cfg)?;
    let artifacts = output::write_outputs(cfg, &out)?;
    Ok(RunRecord {
        tool_version: VERSION.to_string(),
        config: cfg.clone(),
        artifacts,
        summary: RunSummary::from_report(&out.report),
        duration_seconds: start.elapsed().as_secs_f64(),
    })
}
