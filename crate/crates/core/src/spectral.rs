//! Spectral analysis of witness time series.
//!
//! The transform approximates the continuous Fourier integral
//! `X(f) = ∫ x(t) e^{-2πift} dt` by `dt · Σ x[n] e^{-2πikn/N}` on ordinary
//! frequencies `f_k = k / (N dt)`. Channel characteristic frequencies are
//! angular and are divided by 2π before they are compared against a spectrum.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::channels::{Channel, ChannelLabel, JcParams, NmadParams, RtnParams, RtnRegime};
use crate::error::{Error, Result};

/// Smallest series length accepted by [`sample`] and [`dft`].
pub const MIN_SAMPLES: usize = 16;

/// Fraction of failed samples tolerated by [`sample`].
pub const MAX_FAILED_FRACTION: f64 = 0.1;

/// Neighbour power (relative to the peak bin) below which parabolic refinement is skipped.
const REFINE_FLOOR: f64 = 1e-8;

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
    /// Indices whose original sample was invalid (pole or failure) and were interpolated.
    #[serde(default)]
    pub pole_mask: Vec<usize>,
}

impl TimeSeries {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("must be > 0, got {dt}"),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("TimeSeries::new"));
        }
        Ok(Self {
            t0,
            dt,
            values,
            pole_mask: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|i| self.time(i))
    }

    pub fn is_masked(&self, i: usize) -> bool {
        self.pole_mask.binary_search(&i).is_ok()
    }

    /// Element-wise scaling (masked indices are kept).
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }
}

/// Sample `f` on tᵢ = i·t_max/n, i ∈ [0, n).
///
/// `None` marks a pole or failed evaluation; such samples are recorded in
/// `pole_mask` and filled by linear interpolation between valid neighbours.
pub fn sample<F>(f: F, t_max: f64, n_samples: usize) -> Result<TimeSeries>
where
    F: Fn(f64) -> Option<f64>,
{
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t_max",
            reason: format!("must be > 0, got {t_max}"),
        });
    }
    if n_samples < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            required: MIN_SAMPLES,
            got: n_samples,
        });
    }
    let dt = t_max / n_samples as f64;
    let raw: Vec<Option<f64>> = (0..n_samples)
        .map(|i| f(i as f64 * dt).filter(|v| v.is_finite()))
        .collect();
    let failed = raw.iter().filter(|v| v.is_none()).count();
    if failed as f64 > MAX_FAILED_FRACTION * n_samples as f64 {
        return Err(Error::SamplingFailure {
            failed,
            total: n_samples,
        });
    }
    let pole_mask: Vec<usize> = raw
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.is_none().then_some(i))
        .collect();
    Ok(TimeSeries {
        t0: 0.0,
        dt,
        values: interpolate_gaps(&raw),
        pole_mask,
    })
}

fn interpolate_gaps(raw: &[Option<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; raw.len()];
    let mut prev: Option<usize> = None;
    let mut i = 0;
    while i < raw.len() {
        if let Some(v) = raw[i] {
            out[i] = v;
            prev = Some(i);
            i += 1;
            continue;
        }
        let next = (i..raw.len()).find(|&j| raw[j].is_some());
        let end = next.unwrap_or(raw.len());
        for (k, slot) in out.iter_mut().enumerate().take(end).skip(i) {
            *slot = match (prev, next) {
                (Some(p), Some(n)) => {
                    let (vp, vn) = (raw[p].unwrap(), raw[n].unwrap());
                    vp + (vn - vp) * (k - p) as f64 / (n - p) as f64
                }
                (Some(p), None) => raw[p].unwrap(),
                (None, Some(n)) => raw[n].unwrap(),
                (None, None) => 0.0,
            };
        }
        i = end;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    None,
    Hann,
}

impl Window {
    fn weights(self, n: usize) -> Vec<f64> {
        match self {
            Window::None => vec![1.0; n],
            // periodic Hann
            Window::Hann => (0..n)
                .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / n as f64).cos()))
                .collect(),
        }
    }
}

/// Non-negative half of the scaled DFT of a real series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Ordinary frequencies f_k = k/(N dt), k = 0..=N/2.
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    pub power: Vec<f64>,
    /// Length of the transformed series.
    pub n: usize,
    pub dt: f64,
}

impl Spectrum {
    fn from_full(full: &[Complex64], dt: f64) -> Self {
        let n = full.len();
        let half = n / 2;
        let df = 1.0 / (n as f64 * dt);
        let amplitudes: Vec<Complex64> = full[..=half].iter().map(|z| z * dt).collect();
        Self {
            frequencies: (0..=half).map(|k| k as f64 * df).collect(),
            power: amplitudes.iter().map(|z| z.norm_sqr()).collect(),
            amplitudes,
            n,
            dt,
        }
    }

    pub fn bin_width(&self) -> f64 {
        1.0 / (self.n as f64 * self.dt)
    }

    pub fn angular_frequencies(&self) -> Vec<f64> {
        self.frequencies.iter().map(|f| 2.0 * PI * f).collect()
    }

    /// Σ over all N bins of |X_k|² recovered from the half spectrum.
    pub fn full_power_sum(&self) -> f64 {
        let last = self.power.len() - 1;
        self.power
            .iter()
            .enumerate()
            .map(|(k, p)| {
                if k == 0 || (k == last && self.n.is_multiple_of(2)) {
                    *p
                } else {
                    2.0 * p
                }
            })
            .sum()
    }

    /// Σ|X|²/(N dt), which equals Σ|x|² dt for an unwindowed, undetrended series.
    pub fn parseval_energy(&self) -> f64 {
        self.full_power_sum() / (self.n as f64 * self.dt)
    }

    /// Total power in bins k ≥ 1.
    pub fn non_dc_power(&self) -> f64 {
        self.power.iter().skip(1).sum()
    }

    /// Nearest bin to an ordinary frequency.
    pub fn bin_of(&self, f: f64) -> usize {
        ((f / self.bin_width()).round().max(0.0) as usize).min(self.power.len() - 1)
    }
}

fn prepared_signal(series: &TimeSeries, window: Window, detrend: bool) -> Result<Vec<f64>> {
    let n = series.len();
    if n < MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            required: MIN_SAMPLES,
            got: n,
        });
    }
    let mean = if detrend {
        series.values.iter().sum::<f64>() / n as f64
    } else {
        0.0
    };
    let w = window.weights(n);
    Ok(series
        .values
        .iter()
        .zip(&w)
        .map(|(x, wi)| (x - mean) * wi)
        .collect())
}

/// Scaled DFT via FFT.
pub fn dft(series: &TimeSeries, window: Window, detrend: bool) -> Result<Spectrum> {
    let x = prepared_signal(series, window, detrend)?;
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(buf.len()).process(&mut buf);
    Ok(Spectrum::from_full(&buf, series.dt))
}

/// Direct O(N²) evaluation of the same transform; reference for [`dft`].
pub fn dft_reference(series: &TimeSeries, window: Window, detrend: bool) -> Result<Spectrum> {
    let x = prepared_signal(series, window, detrend)?;
    let n = x.len();
    let twiddles: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / n as f64))
        .collect();
    let full: Vec<Complex64> = (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut idx = 0usize;
            for &xn in &x {
                acc += twiddles[idx] * xn;
                idx += k;
                if idx >= n {
                    idx -= n;
                }
            }
            acc
        })
        .collect();
    Ok(Spectrum::from_full(&full, series.dt))
}

/// (f, |X(f)|²) pairs.
pub fn power_spectrum(spec: &Spectrum) -> Vec<(f64, f64)> {
    spec.frequencies
        .iter()
        .zip(&spec.power)
        .map(|(f, p)| (*f, *p))
        .collect()
}

/// A local maximum of the power spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Refined ordinary frequency.
    pub frequency: f64,
    /// Interpolated peak power.
    pub power: f64,
    pub bin_index: usize,
}

/// Local maxima above `rel_threshold · max(non-DC power)`, strongest first.
///
/// Maxima closer than `min_separation_bins` to a stronger accepted peak are
/// dropped. Each peak is refined by a parabola through the log-power of its
/// three bins, unless a neighbour is at the numerical floor (an on-bin line).
pub fn find_peaks(spec: &Spectrum, rel_threshold: f64, min_separation_bins: usize) -> Result<Vec<Peak>> {
    if !(rel_threshold > 0.0 && rel_threshold < 1.0) {
        return Err(Error::InvalidParameter {
            name: "rel_threshold",
            reason: format!("must lie in (0, 1), got {rel_threshold}"),
        });
    }
    let p = &spec.power;
    if p.len() < 3 {
        return Err(Error::EmptySpectrum);
    }
    let max_non_dc = p[1..].iter().copied().fold(0.0, f64::max);
    if max_non_dc <= 0.0 {
        return Ok(Vec::new());
    }
    let threshold = rel_threshold * max_non_dc;
    let last = p.len() - 1;

    let mut candidates: Vec<usize> = (1..=last)
        .filter(|&k| {
            let left_ok = p[k] > p[k - 1];
            let right_ok = k == last || p[k] >= p[k + 1];
            left_ok && right_ok && p[k] > threshold
        })
        .collect();
    candidates.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));

    let mut accepted: Vec<usize> = Vec::new();
    for k in candidates {
        if accepted.iter().all(|&j| j.abs_diff(k) >= min_separation_bins.max(1)) {
            accepted.push(k);
        }
    }

    let df = spec.bin_width();
    Ok(accepted
        .into_iter()
        .map(|k| {
            let (offset, power) = refine(p, k);
            Peak {
                frequency: (k as f64 + offset) * df,
                power,
                bin_index: k,
            }
        })
        .collect())
}

fn refine(p: &[f64], k: usize) -> (f64, f64) {
    if k + 1 >= p.len() {
        return (0.0, p[k]);
    }
    let (l, c, r) = (p[k - 1], p[k], p[k + 1]);
    if l <= REFINE_FLOOR * c || r <= REFINE_FLOOR * c {
        return (0.0, c);
    }
    let (a, b, g) = (l.ln(), c.ln(), r.ln());
    let denom = a - 2.0 * b + g;
    if denom >= 0.0 {
        return (0.0, c);
    }
    let offset = (0.5 * (a - g) / denom).clamp(-0.5, 0.5);
    let log_peak = b - 0.25 * (a - g) * offset;
    (offset, log_peak.exp())
}

/// One characteristic angular frequency and where it comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicFrequency {
    pub angular: f64,
    pub note: String,
}

impl CharacteristicFrequency {
    fn new(angular: f64, note: &str) -> Self {
        Self {
            angular,
            note: note.to_string(),
        }
    }

    pub fn ordinary(&self) -> f64 {
        self.angular / (2.0 * PI)
    }
}

/// Frequencies a noise source is expected to imprint on a witness.
///
/// A non-oscillating source (damped RTN, overdamped NMAD) has an empty list
/// and only its decay rate as metadata; it never claims a peak.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceCandidate {
    pub label: ChannelLabel,
    pub characteristic_angular_frequencies: Vec<CharacteristicFrequency>,
    /// Envelope decay rate (not a peak location).
    pub decay_rate: Option<f64>,
}

impl SourceCandidate {
    pub fn is_oscillatory(&self) -> bool {
        !self.characteristic_angular_frequencies.is_empty()
    }
}

pub fn jc_candidate(p: &JcParams) -> SourceCandidate {
    let w = p.omega.abs();
    SourceCandidate {
        label: ChannelLabel::Jc,
        characteristic_angular_frequencies: vec![
            CharacteristicFrequency::new(2.0 * w, "2ω: cos(2ωt) term of the trace distance"),
            CharacteristicFrequency::new(4.0 * w, "4ω: cos(4ωt) term of the trace distance"),
        ],
        decay_rate: None,
    }
}

pub fn rtn_candidate(p: &RtnParams) -> SourceCandidate {
    let freqs = match (p.regime(), p.oscillation_frequency()) {
        (RtnRegime::Oscillatory, Some(mu)) => vec![
            CharacteristicFrequency::new(mu, "μ = γ√((2a/γ)² − 1): oscillation of Λ(t)"),
            CharacteristicFrequency::new(2.0 * mu, "2μ: oscillation of Λ(t)²"),
        ],
        _ => Vec::new(),
    };
    SourceCandidate {
        label: ChannelLabel::Rtn,
        characteristic_angular_frequencies: freqs,
        decay_rate: Some(p.gamma),
    }
}

pub fn nmad_candidate(p: &NmadParams) -> SourceCandidate {
    let omega = p.big_omega();
    let osc = omega.im.abs();
    let freqs = if osc > 1e-12 * omega.norm().max(f64::MIN_POSITIVE) {
        vec![
            CharacteristicFrequency::new(0.5 * osc, "|Im Ω|/2: oscillation of G(t)"),
            CharacteristicFrequency::new(osc, "|Im Ω|: oscillation of |G(t)|²"),
        ]
    } else {
        Vec::new()
    };
    SourceCandidate {
        label: ChannelLabel::Nmad,
        characteristic_angular_frequencies: freqs,
        decay_rate: Some(0.5 * p.z().re),
    }
}

pub fn characteristic_frequencies(channel: &Channel) -> SourceCandidate {
    match channel {
        Channel::Rtn(p) => rtn_candidate(p),
        Channel::Nmad(p) => nmad_candidate(p),
        Channel::Jc(p) => jc_candidate(p),
    }
}

/// How a peak was explained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Attribution {
    /// Within tolerance of a characteristic frequency of `label`.
    Source { label: ChannelLabel, matched_angular: f64 },
    /// Within tolerance of `order` × an already attributed peak.
    Harmonic {
        label: ChannelLabel,
        fundamental_frequency: f64,
        order: u32,
    },
    Unattributed,
}

impl Attribution {
    pub fn label(&self) -> Option<ChannelLabel> {
        match self {
            Attribution::Source { label, .. } | Attribution::Harmonic { label, .. } => Some(*label),
            Attribution::Unattributed => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub peak: Peak,
    pub attribution: Attribution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionReport {
    pub assignments: Vec<Assignment>,
    /// Per-source fraction of non-DC spectral power (direct and harmonic peaks).
    pub power_share: BTreeMap<ChannelLabel, f64>,
    /// 1 − Σ power_share: unattributed peaks plus everything off-peak.
    pub unattributed_share: f64,
}

impl AttributionReport {
    pub fn share(&self, label: ChannelLabel) -> f64 {
        self.power_share.get(&label).copied().unwrap_or(0.0)
    }

    pub fn harmonics(&self) -> impl Iterator<Item = &Assignment> {
        self.assignments
            .iter()
            .filter(|a| matches!(a.attribution, Attribution::Harmonic { .. }))
    }

    pub fn assigned_to(&self, label: ChannelLabel) -> impl Iterator<Item = &Assignment> {
        self.assignments
            .iter()
            .filter(move |a| a.attribution.label() == Some(label))
    }
}

fn relative_distance(f: f64, target: f64) -> f64 {
    (f - target).abs() / target.abs()
}

/// Assign peaks to sources by nearest characteristic frequency.
///
/// A peak matches a candidate when its relative distance to one of the
/// candidate's ordinary frequencies is at most `match_tol`. Equal distances
/// go to the candidate with more matching frequencies, then the smaller label.
/// Unmatched peaks lying within `match_tol` of n·f₀ (n ≥ 2) for a directly
/// matched peak f₀ become harmonics of that source. Shares use the bin power
/// of each peak.
pub fn attribute(
    peaks: &[Peak],
    candidates: &[SourceCandidate],
    spectrum: &Spectrum,
    match_tol: f64,
) -> Result<AttributionReport> {
    if !(match_tol > 0.0 && match_tol <= 0.5) {
        return Err(Error::InvalidParameter {
            name: "match_tol",
            reason: format!("must lie in (0, 0.5], got {match_tol}"),
        });
    }

    let mut attributions: Vec<Attribution> = peaks
        .iter()
        .map(|peak| direct_match(peak.frequency, candidates, match_tol))
        .collect();

    let fundamentals: Vec<(f64, f64, ChannelLabel)> = peaks
        .iter()
        .zip(&attributions)
        .filter_map(|(p, a)| match a {
            Attribution::Source { label, .. } => Some((p.frequency, p.power, *label)),
            _ => None,
        })
        .collect();

    for (peak, attribution) in peaks.iter().zip(attributions.iter_mut()) {
        if *attribution != Attribution::Unattributed {
            continue;
        }
        let mut best: Option<(f64, u32, f64, f64, ChannelLabel)> = None;
        for &(f0, p0, label) in &fundamentals {
            if f0 <= 0.0 {
                continue;
            }
            let order = (peak.frequency / f0).round();
            if order < 2.0 {
                continue;
            }
            let err = relative_distance(peak.frequency, order * f0);
            if err > match_tol {
                continue;
            }
            let key = (err, order as u32, -p0);
            let better = match best {
                None => true,
                Some((e, o, _, bp, _)) => key < (e, o, -bp),
            };
            if better {
                best = Some((err, order as u32, f0, p0, label));
            }
        }
        if let Some((_, order, f0, _, label)) = best {
            *attribution = Attribution::Harmonic {
                label,
                fundamental_frequency: f0,
                order,
            };
        }
    }

    let total = spectrum.non_dc_power();
    let mut power_share: BTreeMap<ChannelLabel, f64> = candidates.iter().map(|c| (c.label, 0.0)).collect();
    if total > 0.0 {
        for (peak, attribution) in peaks.iter().zip(&attributions) {
            if let Some(label) = attribution.label() {
                let bin_power = spectrum.power.get(peak.bin_index).copied().unwrap_or(0.0);
                *power_share.entry(label).or_insert(0.0) += bin_power / total;
            }
        }
    }
    let assigned: f64 = power_share.values().sum();

    Ok(AttributionReport {
        assignments: peaks
            .iter()
            .zip(attributions)
            .map(|(peak, attribution)| Assignment {
                peak: *peak,
                attribution,
            })
            .collect(),
        power_share,
        unattributed_share: (1.0 - assigned).max(0.0),
    })
}

fn direct_match(f: f64, candidates: &[SourceCandidate], match_tol: f64) -> Attribution {
    // (distance, −match count, label, matched angular)
    let mut best: Option<(f64, i64, ChannelLabel, f64)> = None;
    for cand in candidates {
        let count = cand
            .characteristic_angular_frequencies
            .iter()
            .filter(|c| c.ordinary() > 0.0 && relative_distance(f, c.ordinary()) <= match_tol)
            .count() as i64;
        for cf in &cand.characteristic_angular_frequencies {
            let target = cf.ordinary();
            if target <= 0.0 {
                continue;
            }
            let d = relative_distance(f, target);
            if d > match_tol {
                continue;
            }
            let better = match best {
                None => true,
                Some((bd, bc, bl, _)) => {
                    if (d - bd).abs() > 1e-12 * bd.max(1e-300) {
                        d < bd
                    } else {
                        (-count, cand.label) < (bc, bl)
                    }
                }
            };
            if better {
                best = Some((d, -count, cand.label, cf.angular));
            }
        }
    }
    match best {
        Some((_, _, label, matched_angular)) => Attribution::Source { label, matched_angular },
        None => Attribution::Unattributed,
    }
}

/// Knobs for [`analyze`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralSettings {
    pub window: Window,
    pub detrend: bool,
    pub rel_threshold: f64,
    pub min_separation_bins: usize,
    pub match_tol: f64,
    /// Report frequency axes multiplied by 2π.
    pub angular_display: bool,
}

impl Default for SpectralSettings {
    fn default() -> Self {
        Self {
            window: Window::None,
            detrend: true,
            rel_threshold: 0.01,
            min_separation_bins: 2,
            match_tol: 0.05,
            angular_display: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralAnalysis {
    pub spectrum: Spectrum,
    pub peaks: Vec<Peak>,
    pub attribution: AttributionReport,
}

/// dft → find_peaks → attribute.
pub fn analyze(
    series: &TimeSeries,
    candidates: &[SourceCandidate],
    settings: &SpectralSettings,
) -> Result<SpectralAnalysis> {
    let spectrum = dft(series, settings.window, settings.detrend)?;
    let peaks = find_peaks(&spectrum, settings.rel_threshold, settings.min_separation_bins)?;
    let attribution = attribute(&peaks, candidates, &spectrum, settings.match_tol)?;
    Ok(SpectralAnalysis {
        spectrum,
        peaks,
        attribution,
    })
}
