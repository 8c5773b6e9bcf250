//! Scenario runners: sample a witness, transform it, attribute peaks and summarize.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nmdis_core::channels::{nmad_kernel, rtn_kernel, Channel, ChannelChain, ChannelLabel, KrausChannel, RtnParams};
use nmdis_core::spectral::{analyze, characteristic_frequencies, sample, AttributionReport, SourceCandidate, Spectrum, TimeSeries};
use nmdis_core::witnesses::{
    backflow_intervals, cp_divisibility_scan, decoherence_rate, l1_coherence_matrix, pipeline_trace_distance,
    td_noiseless_analytic, td_nmad_analytic, td_nmad_exact, td_rtn_analytic, BackflowReport, RateSign,
    TimeGrid, RISE_TOL,
};
use nmdis_core::{DensityMatrix, Tolerances};
use serde::{Deserialize, Serialize};

use crate::config::{ScenarioConfig, ScenarioKind, Witness};
use crate::error::Result;

/// Tabular time-domain output, one row per sample or interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable {
    pub columns: Vec<String>,
    /// Preformatted cells; an empty string marks a missing value.
    pub rows: Vec<Vec<String>>,
}

/// Full-precision text form used in every CSV cell.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// Max |numeric − closed form| along the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticComparison {
    pub label: String,
    pub max_abs_deviation: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
}

impl AnalyticComparison {
    fn new(label: &str, reference: &[f64], other: &[f64], tolerance: f64) -> Self {
        let max_abs_deviation = reference
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Self {
            label: label.to_string(),
            max_abs_deviation,
            tolerance,
            within_tolerance: max_abs_deviation <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub witness: String,
    pub n_samples: usize,
    pub t_max: f64,
    pub dt: f64,
    pub min: f64,
    pub max: f64,
    pub first: f64,
    /// Samples replaced by interpolation.
    pub masked_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakRow {
    pub frequency: f64,
    pub angular_frequency: f64,
    pub power: f64,
    pub bin_index: usize,
    pub source: Option<ChannelLabel>,
    pub harmonic_order: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub bin_width: f64,
    pub angular_display: bool,
    pub candidates: Vec<SourceCandidate>,
    pub peaks: Vec<PeakRow>,
    pub attribution: AttributionReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
    pub sign_changes: usize,
    /// Zeros of Λ located by bisection between samples; η diverges there.
    pub poles: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpSummary {
    pub channel: Vec<ChannelLabel>,
    pub intervals: usize,
    pub cp: usize,
    pub ncp: usize,
    pub singular: usize,
    pub min_choi_eigenvalue: Option<f64>,
    /// Intervals where the Choi verdict and the sign of ∫η agree (dephasing only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_agreement: Option<RateAgreement>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateAgreement {
    pub compared: usize,
    pub agree: usize,
}

/// Everything a run learned, as written to `<scenario>_report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub tool_version: String,
    pub config: ScenarioConfig,
    pub series: SeriesSummary,
    #[serde(default)]
    pub analytic: Vec<AnalyticComparison>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backflow: Option<BackflowReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<RateSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cp: Option<CpSummary>,
}

/// In-memory result of [`run_scenario`].
#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub series: SeriesTable,
    pub time_series: Option<TimeSeries>,
    pub spectrum: Option<Spectrum>,
    pub report: ScenarioReport,
}

/// Run one scenario. Pure: no I/O, no randomness.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    match cfg.scenario {
        ScenarioKind::DecoherenceRate => {
            let p = cfg.rtn.expect("validated");
            rate_run(cfg, &p)
        }
        ScenarioKind::TdRtn => {
            let (p, jc) = (cfg.rtn.expect("validated"), cfg.jc.expect("validated"));
            let omega = jc.omega;
            witness_run(
                cfg,
                Witness::TraceDistance,
                &[
                    ("td_rtn_closed_form", Box::new(move |t| td_rtn_analytic(t, omega, &p)), 1e-10),
                    ("td_noiseless_closed_form", Box::new(move |t| td_noiseless_analytic(t, omega)), f64::INFINITY),
                ],
            )
        }
        ScenarioKind::TdNmad => {
            let (p, jc) = (cfg.nmad.expect("validated"), cfg.jc.expect("validated"));
            let omega = jc.omega;
            witness_run(
                cfg,
                Witness::TraceDistance,
                &[
                    ("td_nmad_closed_form", Box::new(move |t| td_nmad_analytic(t, omega, &p)), 1e-8),
                    ("td_nmad_exact_form", Box::new(move |t| td_nmad_exact(t, omega, &p)), 1e-10),
                ],
            )
        }
        ScenarioKind::CoherenceComposite => {
            let (r, n) = (cfg.rtn.expect("validated"), cfg.nmad.expect("validated"));
            witness_run(
                cfg,
                Witness::Coherence,
                &[(
                    "kernel_product",
                    Box::new(move |t| rtn_kernel(t, &r).abs() * nmad_kernel(t, &n).norm()),
                    1e-12,
                )],
            )
        }
        ScenarioKind::CpScan => cp_run(cfg),
        ScenarioKind::Custom => {
            let custom = cfg.custom.as_ref().expect("validated");
            match custom.witness {
                Witness::DecoherenceRate => {
                    let p = cfg.rtn.expect("validated");
                    rate_run(cfg, &p)
                }
                w => witness_run(cfg, w, &[]),
            }
        }
    }
}

type ClosedForm = Box<dyn Fn(f64) -> f64>;

fn times(cfg: &ScenarioConfig) -> (f64, Vec<f64>) {
    let n = cfg.grid.n_samples;
    let dt = cfg.grid.t_max / n as f64;
    (dt, (0..n).map(|i| i as f64 * dt).collect())
}

fn candidates(channels: &[Channel]) -> Vec<SourceCandidate> {
    let mut seen = BTreeMap::new();
    for c in channels {
        seen.entry(c.label()).or_insert_with(|| characteristic_frequencies(c));
    }
    seen.into_values().collect()
}

fn summary(witness: &str, cfg: &ScenarioConfig, s: &TimeSeries) -> SeriesSummary {
    SeriesSummary {
        witness: witness.to_string(),
        n_samples: s.len(),
        t_max: cfg.grid.t_max,
        dt: s.dt,
        min: s.values.iter().copied().fold(f64::INFINITY, f64::min),
        max: s.values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        first: s.values[0],
        masked_samples: s.pole_mask.len(),
    }
}

fn spectral_report(cfg: &ScenarioConfig, s: &TimeSeries, cands: Vec<SourceCandidate>, note: Option<String>) -> Result<(Spectrum, SpectralReport)> {
    let a = analyze(s, &cands, &cfg.spectral)?;
    let peaks = a
        .attribution
        .assignments
        .iter()
        .map(|asg| PeakRow {
            frequency: asg.peak.frequency,
            angular_frequency: 2.0 * PI * asg.peak.frequency,
            power: asg.peak.power,
            bin_index: asg.peak.bin_index,
            source: asg.attribution.label(),
            harmonic_order: match asg.attribution {
                nmdis_core::spectral::Attribution::Harmonic { order, .. } => Some(order),
                _ => None,
            },
        })
        .collect();
    let report = SpectralReport {
        bin_width: a.spectrum.bin_width(),
        angular_display: cfg.spectral.angular_display,
        candidates: cands,
        peaks,
        attribution: a.attribution,
        note,
    };
    Ok((a.spectrum, report))
}

fn witness_run(cfg: &ScenarioConfig, witness: Witness, closed_forms: &[(&str, ClosedForm, f64)]) -> Result<ScenarioOutput> {
    let channels = cfg.channels();
    let chain = ChannelChain::new(channels.clone());
    let (dt, ts) = times(cfg);
    let plus = DensityMatrix::plus();

    let values = ts
        .iter()
        .map(|&t| match witness {
            Witness::TraceDistance => pipeline_trace_distance(&chain, t),
            _ => Ok(l1_coherence_matrix(&chain.kraus_at(t)?.apply_matrix(plus.matrix()))),
        })
        .collect::<nmdis_core::Result<Vec<f64>>>()?;
    let series = TimeSeries::new(0.0, dt, values)?;

    let closed: Vec<Vec<f64>> = closed_forms
        .iter()
        .map(|(_, f, _)| ts.iter().map(|&t| f(t)).collect())
        .collect();
    let analytic = closed_forms
        .iter()
        .zip(&closed)
        .filter(|((_, _, tol), _)| tol.is_finite())
        .map(|((name, _, tol), v)| AnalyticComparison::new(name, &series.values, v, *tol))
        .collect();

    let witness_name = match witness {
        Witness::TraceDistance => "trace_distance",
        Witness::Coherence => "l1_coherence",
        Witness::DecoherenceRate => unreachable!("handled by rate_run"),
    };
    let mut columns = vec!["t".to_string(), witness_name.to_string()];
    columns.extend(closed_forms.iter().map(|(name, _, _)| name.to_string()));
    let rows = ts
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut row = vec![fmt_num(t), fmt_num(series.values[i])];
            row.extend(closed.iter().map(|c| fmt_num(c[i])));
            row
        })
        .collect();

    let (spectrum, spectral) = spectral_report(cfg, &series, candidates(&channels), None)?;
    let report = ScenarioReport {
        tool_version: crate::VERSION.to_string(),
        config: cfg.clone(),
        series: summary(witness_name, cfg, &series),
        analytic,
        spectral: Some(spectral),
        backflow: Some(backflow_intervals(&series, RISE_TOL)?),
        rate: None,
        cp: None,
    };
    Ok(ScenarioOutput {
        series: SeriesTable { columns, rows },
        time_series: Some(series),
        spectrum: Some(spectrum),
        report,
    })
}

fn rate_run(cfg: &ScenarioConfig, p: &RtnParams) -> Result<ScenarioOutput> {
    let (_, ts) = times(cfg);
    let series = sample(|t| decoherence_rate(t, p).ok(), cfg.grid.t_max, cfg.grid.n_samples)?;
    let kernel: Vec<f64> = ts.iter().map(|&t| rtn_kernel(t, p)).collect();
    let poles = kernel_zeros(p, &ts, &kernel);

    // a sample is flagged when it is masked or a zero of Λ lies before the next sample
    let pole_flag: Vec<bool> = (0..ts.len())
        .map(|i| series.is_masked(i) || (i + 1 < ts.len() && (kernel[i] > 0.0) != (kernel[i + 1] > 0.0)))
        .collect();
    let rows = ts
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let eta = (!series.is_masked(i)).then_some(series.values[i]);
            vec![
                fmt_num(t),
                fmt_opt(eta),
                fmt_num(kernel[i]),
                if pole_flag[i] { "1" } else { "0" }.to_string(),
            ]
        })
        .collect();

    let signs: Vec<i8> = (0..series.len())
        .filter(|&i| !series.is_masked(i) && ts[i] > 0.0)
        .map(|i| {
            let v = series.values[i];
            if v > 0.0 {
                1
            } else if v < 0.0 {
                -1
            } else {
                0
            }
        })
        .collect();
    let nonzero: Vec<i8> = signs.iter().copied().filter(|s| *s != 0).collect();
    let rate = RateSummary {
        positive: signs.iter().filter(|s| **s > 0).count(),
        negative: signs.iter().filter(|s| **s < 0).count(),
        zero: signs.iter().filter(|s| **s == 0).count(),
        sign_changes: nonzero.windows(2).filter(|w| w[0] != w[1]).count(),
        poles,
    };

    let note = "spectrum of the decoherence rate is informational; pole-masked samples are interpolated".to_string();
    let (spectrum, spectral) = spectral_report(cfg, &series, candidates(&[Channel::Rtn(*p)]), Some(note))?;
    let report = ScenarioReport {
        tool_version: crate::VERSION.to_string(),
        config: cfg.clone(),
        series: summary("decoherence_rate", cfg, &series),
        analytic: Vec::new(),
        spectral: Some(spectral),
        backflow: None,
        rate: Some(rate),
        cp: None,
    };
    Ok(ScenarioOutput {
        series: SeriesTable {
            columns: ["t", "eta", "kernel", "pole"].map(String::from).to_vec(),
            rows,
        },
        time_series: Some(series),
        spectrum: Some(spectrum),
        report,
    })
}

fn kernel_zeros(p: &RtnParams, ts: &[f64], kernel: &[f64]) -> Vec<f64> {
    let mut zeros = Vec::new();
    for i in 0..ts.len().saturating_sub(1) {
        if (kernel[i] > 0.0) == (kernel[i + 1] > 0.0) {
            continue;
        }
        let (mut lo, mut hi) = (ts[i], ts[i + 1]);
        let positive_lo = kernel[i] > 0.0;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (rtn_kernel(mid, p) > 0.0) == positive_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        zeros.push(0.5 * (lo + hi));
    }
    zeros
}

fn cp_run(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    let channels = cfg.channels();
    let channel = channels[0];
    let (_, ts) = times(cfg);
    let grid = TimeGrid::new(ts)?;
    let reports = cp_divisibility_scan(&channel, &grid, &Tolerances::default())?;

    let rows = reports
        .iter()
        .map(|r| {
            vec![
                fmt_num(r.interval.0),
                fmt_num(r.interval.1),
                fmt_opt(r.min_choi_eigenvalue),
                match r.cp_divisible {
                    Some(true) => "1".into(),
                    Some(false) => "0".into(),
                    None => String::new(),
                },
                match r.decoherence_rate_sign {
                    Some(RateSign::Positive) => "positive",
                    Some(RateSign::Negative) => "negative",
                    Some(RateSign::Zero) => "zero",
                    Some(RateSign::Pole) => "pole",
                    None => "",
                }
                .to_string(),
            ]
        })
        .collect();

    let rate_agreement = channel.dephasing_kernel(0.0).map(|_| {
        let compared: Vec<bool> = reports
            .iter()
            .filter_map(|r| match (r.cp_divisible, r.decoherence_rate_sign) {
                (Some(cp), Some(RateSign::Positive | RateSign::Zero)) => Some(cp),
                (Some(cp), Some(RateSign::Negative)) => Some(!cp),
                _ => None,
            })
            .collect();
        RateAgreement {
            compared: compared.len(),
            agree: compared.iter().filter(|x| **x).count(),
        }
    });
    let min_eigs: Vec<f64> = reports.iter().filter_map(|r| r.min_choi_eigenvalue).collect();
    let cp = CpSummary {
        channel: channel.labels(),
        intervals: reports.len(),
        cp: reports.iter().filter(|r| r.cp_divisible == Some(true)).count(),
        ncp: reports.iter().filter(|r| r.cp_divisible == Some(false)).count(),
        singular: reports.iter().filter(|r| r.singular_at.is_some()).count(),
        min_choi_eigenvalue: min_eigs.iter().copied().reduce(f64::min),
        rate_agreement,
    };
    let series = SeriesSummary {
        witness: "min_choi_eigenvalue".into(),
        n_samples: reports.len(),
        t_max: cfg.grid.t_max,
        dt: cfg.grid.t_max / cfg.grid.n_samples as f64,
        min: min_eigs.iter().copied().fold(f64::INFINITY, f64::min),
        max: min_eigs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        first: min_eigs.first().copied().unwrap_or(0.0),
        masked_samples: cp.singular,
    };
    let report = ScenarioReport {
        tool_version: crate::VERSION.to_string(),
        config: cfg.clone(),
        series,
        analytic: Vec::new(),
        spectral: None,
        backflow: None,
        rate: None,
        cp: Some(cp),
    };
    Ok(ScenarioOutput {
        series: SeriesTable {
            columns: ["t1", "t2", "min_choi_eigenvalue", "cp_divisible", "rate_sign"]
                .map(String::from)
                .to_vec(),
            rows,
        },
        time_series: None,
        spectrum: None,
        report,
    })
}
