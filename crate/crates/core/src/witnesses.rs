//! Non-Markovianity witnesses.
//!
//! Distinguishability (trace distance and its backflow), l1 coherence, the
//! canonical decoherence rate of a dephasing channel, and complete positivity
//! of intermediate maps tested through their Choi matrices.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{nmad_kernel, rtn_kernel, rtn_kernel_with_derivative, KrausChannel, NmadParams, RtnParams, Superoperator};
use crate::error::{Error, Result};
use crate::matcore::{hermitian_eigenvalues, invert, trace_norm, CMatrix, DensityMatrix, Tolerances};
use crate::spectral::TimeSeries;

/// |Λ| at or below which η is reported as a pole.
pub const POLE_GUARD: f64 = 1e-9;

/// Minimum Choi eigenvalue still accepted as completely positive.
pub const CP_THRESHOLD: f64 = -1e-10;

/// Default minimum rise between samples counted as backflow.
pub const RISE_TOL: f64 = 1e-12;

/// Trapezoid sub-steps per interval when integrating η in a CP scan.
pub const RATE_SUBSTEPS: usize = 64;

/// ½ Tr|ρ₁ − ρ₂|.
pub fn trace_distance(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<f64> {
    trace_distance_matrices(r1.matrix(), r2.matrix())
}

/// Same as [`trace_distance`] on raw Hermitian matrices.
pub fn trace_distance_matrices(r1: &CMatrix, r2: &CMatrix) -> Result<f64> {
    if r1.dim() != r2.dim() {
        return Err(Error::DimensionMismatch {
            left: r1.dim(),
            right: r2.dim(),
        });
    }
    Ok(0.5 * trace_norm(&(r1 - r2), &Tolerances::default())?)
}

/// Trace distance of the two qubit states reached from |0⟩ and |1⟩ by `channel` at time `t`.
pub fn pipeline_trace_distance<C: KrausChannel + ?Sized>(channel: &C, t: f64) -> Result<f64> {
    let k = channel.kraus_at(t)?;
    trace_distance_matrices(
        &k.apply_matrix(DensityMatrix::ket0().matrix()),
        &k.apply_matrix(DensityMatrix::ket1().matrix()),
    )
}

/// Trace distance of the JC pair without noise: √(7 + cos 4ωt) / 2√2.
pub fn td_noiseless_analytic(t: f64, omega: f64) -> f64 {
    (7.0 + (4.0 * omega * t).cos()).sqrt() / (2.0 * SQRT_2)
}

/// JC pair followed by RTN dephasing with kernel value `lambda`.
pub fn td_rtn_from_kernel(t: f64, omega: f64, lambda: f64) -> f64 {
    let l2 = lambda * lambda;
    let c2 = (2.0 * omega * t).cos();
    let c4 = (4.0 * omega * t).cos();
    // the radicand equals 8(cos⁴ωt + Λ² sin²ωt) ≥ 0 up to rounding
    (4.0 * l2 - 4.0 * (l2 - 1.0) * c2 + c4 + 3.0).max(0.0).sqrt().abs() / (2.0 * SQRT_2)
}

pub fn td_rtn_analytic(t: f64, omega: f64, p: &RtnParams) -> f64 {
    td_rtn_from_kernel(t, omega, rtn_kernel(t, p))
}

/// Four-term closed form of the NMAD trace distance, evaluated with g = |G|.
///
/// The radicand can turn negative, so the square root and the outer moduli
/// are taken over ℂ. This expression is not the trace distance of the
/// pipeline states for g < 1; see [`td_nmad_exact`].
pub fn td_nmad_from_kernel(t: f64, omega: f64, g: f64) -> f64 {
    let wt = omega * t;
    let g2 = g * g;
    let (c2, c4) = ((2.0 * wt).cos(), (4.0 * wt).cos());
    let (cos, sin) = (wt.cos(), wt.sin());
    let a = 0.25 * (1.0 - g2 - 2.0 * c2 * (g2 - 1.0));
    let b = cos.powi(4) * (g2 - 1.0).powi(2) + 0.5 * g * ((7.0 + c4) * g + 8.0 * (g2 - 1.0) * sin * sin);
    let root = 0.5 * Complex64::new(b, 0.0).sqrt();
    let a = Complex64::new(a, 0.0);
    0.5 * (a - root).norm() + 0.5 * (a + root).norm()
}

pub fn td_nmad_analytic(t: f64, omega: f64, p: &NmadParams) -> f64 {
    td_nmad_from_kernel(t, omega, nmad_kernel(t, p).norm())
}

/// Trace distance of the JC pair followed by amplitude damping with |G| = g:
/// √(g⁴cos⁴ωt + g²sin²ωt).
pub fn td_nmad_exact_from_kernel(t: f64, omega: f64, g: f64) -> f64 {
    let (c, s) = ((omega * t).cos(), (omega * t).sin());
    let g2 = g * g;
    (g2 * g2 * c.powi(4) + g2 * s * s).sqrt()
}

pub fn td_nmad_exact(t: f64, omega: f64, p: &NmadParams) -> f64 {
    td_nmad_exact_from_kernel(t, omega, nmad_kernel(t, p).norm())
}

/// Σ_{i≠j} |ρᵢⱼ|.
pub fn l1_coherence(rho: &DensityMatrix) -> f64 {
    l1_coherence_matrix(rho.matrix())
}

pub fn l1_coherence_matrix(m: &CMatrix) -> f64 {
    let n = m.dim();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += m[(i, j)].norm();
            }
        }
    }
    sum
}

/// η = −Λ'/(2Λ) for the RTN kernel.
pub fn decoherence_rate(t: f64, p: &RtnParams) -> Result<f64> {
    let (l, dl) = rtn_kernel_with_derivative(t, p);
    rate_from_kernel(t, l, dl)
}

fn rate_from_kernel(t: f64, l: f64, dl: f64) -> Result<f64> {
    if l.abs() <= POLE_GUARD {
        return Err(Error::PoleAtZeroKernel { t, kernel: l });
    }
    Ok(-dl / (2.0 * l))
}

/// Composite trapezoid approximation of ∫η dt over [t1, t2].
pub fn integrated_rate(p: &RtnParams, t1: f64, t2: f64, substeps: usize) -> Result<f64> {
    integrate_kernel_rate(|t| Some(rtn_kernel_with_derivative(t, p)), t1, t2, substeps)
}

fn integrate_kernel_rate<F>(kernel: F, t1: f64, t2: f64, substeps: usize) -> Result<f64>
where
    F: Fn(f64) -> Option<(f64, f64)>,
{
    let n = substeps.max(1);
    let h = (t2 - t1) / n as f64;
    let mut sum = 0.0;
    let mut first_sign = None;
    for i in 0..=n {
        let t = if i == n { t2 } else { t1 + i as f64 * h };
        let (l, dl) = kernel(t).ok_or(Error::InvalidParameter {
            name: "channel",
            reason: "not a pure dephasing channel".into(),
        })?;
        let eta = rate_from_kernel(t, l, dl)?;
        // Λ changed sign between sub-steps: η passed through a pole
        if *first_sign.get_or_insert(l > 0.0) != (l > 0.0) {
            return Err(Error::PoleAtZeroKernel { t, kernel: l });
        }
        sum += if i == 0 || i == n { 0.5 * eta } else { eta };
    }
    Ok(sum * h)
}

/// ℰ(t₂) ℰ(t₁)⁻¹.
pub fn intermediate_map(s2: &Superoperator, s1: &Superoperator, tol: &Tolerances) -> Result<Superoperator> {
    let inv = invert(&s1.matrix, tol).map_err(|e| e.at_time(s1.time))?;
    Ok(Superoperator {
        time: s2.time,
        matrix: &s2.matrix * &inv,
    })
}

/// (ℰ ⊗ I)|Φ⁺⟩⟨Φ⁺| with the unnormalized |Φ⁺⟩ = |00⟩ + |11⟩.
pub fn choi(s: &Superoperator) -> CMatrix {
    let mut out = CMatrix::zeros(4);
    for a in 0..2 {
        for b in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    out[(2 * a + i, 2 * b + j)] = s.matrix[(2 * a + b, 2 * i + j)];
                }
            }
        }
    }
    out
}

/// Strictly increasing list of times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeGrid(Vec<f64>);

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InsufficientSamples {
                required: 2,
                got: times.len(),
            });
        }
        if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: "times must be finite and non-negative".into(),
            });
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: "times must be strictly increasing".into(),
            });
        }
        Ok(Self(times))
    }

    /// `n` intervals of equal width covering [t0, t1].
    pub fn uniform(t0: f64, t1: f64, n: usize) -> Result<Self> {
        if n == 0 || t0.is_nan() || t1.is_nan() || t1 <= t0 {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: format!("need t1 > t0 and n ≥ 1, got [{t0}, {t1}] with n = {n}"),
            });
        }
        let h = (t1 - t0) / n as f64;
        let mut v: Vec<f64> = (0..n).map(|i| t0 + i as f64 * h).collect();
        v.push(t1);
        Self::new(v)
    }

    /// Each interval split into `factor` equal parts.
    pub fn refined(&self, factor: usize) -> Self {
        let factor = factor.max(1);
        let mut v = Vec::with_capacity((self.0.len() - 1) * factor + 1);
        for w in self.0.windows(2) {
            let h = (w[1] - w[0]) / factor as f64;
            v.extend((0..factor).map(|k| w[0] + k as f64 * h));
        }
        v.push(*self.0.last().unwrap());
        Self(v)
    }

    pub fn times(&self) -> &[f64] {
        &self.0
    }

    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.0.windows(2).map(|w| (w[0], w[1]))
    }
}

impl TryFrom<Vec<f64>> for TimeGrid {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<TimeGrid> for Vec<f64> {
    fn from(g: TimeGrid) -> Self {
        g.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateSign {
    Positive,
    Negative,
    Zero,
    /// Λ vanishes inside the interval.
    Pole,
}

/// CP test of one intermediate map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpReport {
    pub interval: (f64, f64),
    pub min_choi_eigenvalue: Option<f64>,
    /// Sign of ∫η over the interval, for dephasing channels only.
    pub decoherence_rate_sign: Option<RateSign>,
    pub cp_divisible: Option<bool>,
    /// Set when ℰ(t₁) could not be inverted.
    pub singular_at: Option<f64>,
}

/// Choi test of ℰ(t_{i+1}) ℰ(t_i)⁻¹ on each grid interval.
///
/// A singular map at the left endpoint is flagged on that interval rather than
/// skipped. Any other error aborts the scan.
pub fn cp_divisibility_scan<C: KrausChannel + ?Sized>(
    channel: &C,
    grid: &TimeGrid,
    tol: &Tolerances,
) -> Result<Vec<CpReport>> {
    let maps = grid
        .times()
        .iter()
        .map(|&t| channel.superoperator_at(t))
        .collect::<Result<Vec<_>>>()?;
    let dephasing = channel.dephasing_kernel(0.0).is_some();

    let mut reports = Vec::with_capacity(maps.len() - 1);
    for (w, (t1, t2)) in maps.windows(2).zip(grid.intervals()) {
        let rate_sign = dephasing.then(|| {
            match integrate_kernel_rate(|t| channel.dephasing_kernel(t), t1, t2, RATE_SUBSTEPS) {
                Ok(v) if v > 0.0 => RateSign::Positive,
                Ok(v) if v < 0.0 => RateSign::Negative,
                Ok(_) => RateSign::Zero,
                Err(_) => RateSign::Pole,
            }
        });
        let report = match intermediate_map(&w[1], &w[0], tol) {
            Ok(im) => {
                let min_eig = min_choi_eigenvalue(&im, tol)?;
                CpReport {
                    interval: (t1, t2),
                    min_choi_eigenvalue: Some(min_eig),
                    decoherence_rate_sign: rate_sign,
                    cp_divisible: Some(min_eig >= CP_THRESHOLD),
                    singular_at: None,
                }
            }
            Err(Error::SingularMap { .. }) => CpReport {
                interval: (t1, t2),
                min_choi_eigenvalue: None,
                decoherence_rate_sign: rate_sign,
                cp_divisible: None,
                singular_at: Some(t1),
            },
            Err(e) => return Err(e),
        };
        reports.push(report);
    }
    Ok(reports)
}

/// Smallest eigenvalue of the Choi matrix of `s`.
pub fn min_choi_eigenvalue(s: &Superoperator, tol: &Tolerances) -> Result<f64> {
    let c = choi(s);
    // near-singular maps produce huge entries; normalize before the eigensolve
    let scale = c.max_abs().max(1.0);
    let c = c.scale_real(1.0 / scale).hermitian_part(f64::INFINITY)?;
    let values = hermitian_eigenvalues(&c, tol)?;
    Ok(values.last().copied().unwrap_or(0.0) * scale)
}

/// Runs of increasing witness values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackflowReport {
    pub intervals: Vec<(f64, f64)>,
    /// Σ of positive increments over the sampled grid.
    pub total_backflow: f64,
}

/// Maximal runs where successive samples rise by more than `rise_tol`.
pub fn backflow_intervals(series: &TimeSeries, rise_tol: f64) -> Result<BackflowReport> {
    let v = &series.values;
    if v.len() < 2 {
        return Err(Error::InsufficientSamples {
            required: 2,
            got: v.len(),
        });
    }
    let mut intervals = Vec::new();
    let mut total = 0.0;
    let mut start: Option<usize> = None;
    for i in 1..v.len() {
        let rise = v[i] - v[i - 1];
        if rise > rise_tol {
            total += rise;
            start.get_or_insert(i - 1);
        } else if let Some(s) = start.take() {
            intervals.push((series.time(s), series.time(i - 1)));
        }
    }
    if let Some(s) = start {
        intervals.push((series.time(s), series.time(v.len() - 1)));
    }
    Ok(BackflowReport {
        intervals,
        total_backflow: total,
    })
}
