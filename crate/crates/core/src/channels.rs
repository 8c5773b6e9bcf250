//! Memory kernels and Kraus families for the three qubit channels.
//!
//! * random telegraph noise (RTN): pure dephasing with the damped-harmonic
//!   kernel Λ(t);
//! * non-Markovian amplitude damping (NMAD): zero-temperature decay with the
//!   complex kernel G(t) of a Lorentzian reservoir;
//! * Jaynes-Cummings-type exchange (JC): the reduced map on qubit A when it
//!   swaps excitations with a partner qubit prepared in |+⟩.
//!
//! Superoperators act on row-major vectorized density matrices,
//! vec(ρ) = (ρ₀₀, ρ₀₁, ρ₁₀, ρ₁₁), so `S = Σ K ⊗ conj(K)`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{invert, kron, CMatrix, DensityMatrix, Tolerances};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Completeness tolerance for Kraus sets built by this module.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// Within this distance of 2a/γ = 1 the RTN kernel switches to its power series.
pub const RTN_CRITICAL_BAND: f64 = 1e-6;

/// |Ω| below which the NMAD kernel uses its Ω → 0 limit.
pub const NMAD_OMEGA_FLOOR: f64 = 1e-14;

/// Slack on |G(t)| ≤ 1 before a kernel value is treated as a bug.
pub const NMAD_KERNEL_SLACK: f64 = 1e-10;

/// Which channel family an operator came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelLabel {
    Rtn,
    Nmad,
    Jc,
}

impl ChannelLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelLabel::Rtn => "rtn",
            ChannelLabel::Nmad => "nmad",
            ChannelLabel::Jc => "jc",
        }
    }
}

impl fmt::Display for ChannelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite, got {value}"),
        })
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "t",
            reason: format!("time must be finite and >= 0, got {t}"),
        })
    }
}

// ---------------------------------------------------------------------------
// Random telegraph noise

/// Random telegraph noise: amplitude `a` and kernel damping rate `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RtnParams {
    pub a: f64,
    pub gamma: f64,
}

/// Shape of Λ(t).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RtnRegime {
    /// 2a/γ < 1: pure decay.
    Damped,
    /// 2a/γ = 1 within [`RTN_CRITICAL_BAND`].
    Critical,
    /// 2a/γ > 1: damped oscillation.
    Oscillatory,
}

impl RtnParams {
    pub fn new(a: f64, gamma: f64) -> Result<Self> {
        let p = Self { a, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_finite("a", self.a)?;
        check_finite("gamma", self.gamma)?;
        if self.a < 0.0 {
            return Err(Error::InvalidParameter {
                name: "a",
                reason: format!("must be >= 0, got {}", self.a),
            });
        }
        if self.gamma <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: format!("must be > 0, got {}", self.gamma),
            });
        }
        Ok(())
    }

    /// Correlation time of the fluctuator, recorded as 1/γ. Not used in any computation.
    pub fn tau(&self) -> f64 {
        1.0 / self.gamma
    }

    pub fn ratio(&self) -> f64 {
        2.0 * self.a / self.gamma
    }

    pub fn regime(&self) -> RtnRegime {
        let r = self.ratio();
        if (r - 1.0).abs() < RTN_CRITICAL_BAND {
            RtnRegime::Critical
        } else if r > 1.0 {
            RtnRegime::Oscillatory
        } else {
            RtnRegime::Damped
        }
    }

    /// γ² − 4a², computed without cancellation.
    fn discriminant(&self) -> f64 {
        (self.gamma - 2.0 * self.a) * (self.gamma + 2.0 * self.a)
    }

    /// Oscillation frequency μ = γ√((2a/γ)² − 1) when oscillatory.
    pub fn oscillation_frequency(&self) -> Option<f64> {
        match self.regime() {
            RtnRegime::Oscillatory => Some((-self.discriminant()).sqrt()),
            _ => None,
        }
    }
}

/// cosh(√x)-type and sinh(√x)/√x-type series in x = (γ² − 4a²)t².
fn critical_series(x: f64) -> (f64, f64) {
    let mut c_term = 1.0;
    let mut s_term = 1.0;
    let mut c = 1.0;
    let mut s = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        c_term *= x / ((2.0 * kf - 1.0) * (2.0 * kf));
        s_term *= x / ((2.0 * kf) * (2.0 * kf + 1.0));
        c += c_term;
        s += s_term;
        if c_term.abs() <= f64::EPSILON * c.abs() && s_term.abs() <= f64::EPSILON * s.abs() {
            break;
        }
    }
    (c, s)
}

/// Λ(t) and dΛ/dt together.
///
/// Both regimes share the form Λ = e^{-γt}[C(t) + γ S(t)], Λ' = −4a² e^{-γt} S(t),
/// with (C, S) = (cos μt, sin μt / μ) for 2a/γ > 1 and (cosh νt, sinh νt / ν)
/// for 2a/γ < 1.
pub fn rtn_kernel_with_derivative(t: f64, p: &RtnParams) -> (f64, f64) {
    if t == 0.0 {
        return (1.0, 0.0);
    }
    let (a, gamma) = (p.a, p.gamma);
    let q = p.discriminant();
    let four_a2 = 4.0 * a * a;
    let x = q * t * t;

    if (p.ratio() - 1.0).abs() < RTN_CRITICAL_BAND && x.abs() <= 1.0 {
        let (c, s) = critical_series(x);
        let s = s * t;
        let decay = (-gamma * t).exp();
        return (decay * (c + gamma * s), -four_a2 * decay * s);
    }

    if q < 0.0 {
        let mu = (-q).sqrt();
        let decay = (-gamma * t).exp();
        let (sin, cos) = (mu * t).sin_cos();
        let value = decay * (cos + gamma / mu * sin);
        let derivative = -four_a2 / mu * decay * sin;
        (value, derivative)
    } else if q > 0.0 {
        // e^{-γt}cosh νt etc. written as two decaying exponentials; γ − ν = 4a²/(γ + ν).
        let nu = q.sqrt();
        let slow = (-(four_a2 / (gamma + nu)) * t).exp();
        let fast = (-(gamma + nu) * t).exp();
        let value = 0.5 * ((1.0 + gamma / nu) * slow + (1.0 - gamma / nu) * fast);
        let derivative = -0.5 * four_a2 / nu * (slow - fast);
        (value, derivative)
    } else {
        let decay = (-gamma * t).exp();
        (decay * (1.0 + gamma * t), -four_a2 * decay * t)
    }
}

/// RTN memory kernel Λ(t) ∈ [−1, 1].
pub fn rtn_kernel(t: f64, p: &RtnParams) -> f64 {
    rtn_kernel_with_derivative(t, p).0
}

/// Closed-form dΛ/dt.
pub fn rtn_kernel_derivative(t: f64, p: &RtnParams) -> f64 {
    rtn_kernel_with_derivative(t, p).1
}

// ---------------------------------------------------------------------------
// Non-Markovian amplitude damping

/// Lorentzian-reservoir amplitude damping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NmadParams {
    /// Lorentzian width λ.
    pub lambda_width: f64,
    /// Effective coupling γ_M.
    pub gamma_m: f64,
    /// Qubit transition frequency ω₀.
    #[serde(default)]
    pub omega_0: f64,
    /// Lorentzian peak ω_c.
    #[serde(default)]
    pub omega_c: f64,
}

impl NmadParams {
    /// Resonant (δ = 0) parameters.
    pub fn resonant(lambda_width: f64, gamma_m: f64) -> Result<Self> {
        let p = Self {
            lambda_width,
            gamma_m,
            omega_0: 0.0,
            omega_c: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_finite("lambda_width", self.lambda_width)?;
        check_finite("gamma_m", self.gamma_m)?;
        check_finite("omega_0", self.omega_0)?;
        check_finite("omega_c", self.omega_c)?;
        if self.lambda_width <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "lambda_width",
                reason: format!("must be > 0, got {}", self.lambda_width),
            });
        }
        if self.gamma_m <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "gamma_m",
                reason: format!("must be > 0, got {}", self.gamma_m),
            });
        }
        Ok(())
    }

    /// Detuning δ = ω₀ − ω_c.
    pub fn delta(&self) -> f64 {
        self.omega_0 - self.omega_c
    }

    /// w = γ_M λ / 2.
    pub fn w(&self) -> f64 {
        0.5 * self.gamma_m * self.lambda_width
    }

    /// λ − iδ.
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.lambda_width, -self.delta())
    }

    /// Ω = √(λ² − 2iδλ − 4w²), principal branch.
    pub fn big_omega(&self) -> Complex64 {
        let l = self.lambda_width;
        let w = self.w();
        // `+ 0.0` turns a signed −0 into +0 so δ = 0 lands on the +i side of the cut.
        Complex64::new(l * l - 4.0 * w * w, -2.0 * self.delta() * l + 0.0).sqrt()
    }
}

/// NMAD memory kernel G(t).
///
/// G = e^{−zt/2}[cosh(Ωt/2) + (z/Ω) sinh(Ωt/2)] with z = λ − iδ, evaluated as
/// ½[(1 + z/Ω)e^{(Ω−z)t/2} + (1 − z/Ω)e^{−(Ω+z)t/2}] so large t never overflows.
pub fn nmad_kernel(t: f64, p: &NmadParams) -> Complex64 {
    if t == 0.0 {
        return ONE;
    }
    let z = p.z();
    let omega = p.big_omega();
    if omega.norm() < NMAD_OMEGA_FLOOR {
        return (-z * t * 0.5).exp() * (ONE + z * t * 0.5);
    }
    let delta = p.delta();
    let w = p.w();
    // Ω − z = (Ω² − z²)/(Ω + z) = (δ² − 4w²)/(Ω + z)
    let omega_minus_z = Complex64::new(delta * delta - 4.0 * w * w, 0.0) / (omega + z);
    let ratio = z / omega;
    let slow = (omega_minus_z * t * 0.5).exp();
    let fast = (-(omega + z) * t * 0.5).exp();
    ((ONE + ratio) * slow + (ONE - ratio) * fast) * 0.5
}

/// Lorentzian reservoir spectral density J(ω) = γ_M λ² / (2π[(ω − ω_c)² + λ²]).
pub fn lorentzian_density(omega: f64, p: &NmadParams) -> f64 {
    let l = p.lambda_width;
    let d = omega - p.omega_c;
    p.gamma_m * l * l / (2.0 * PI * (d * d + l * l))
}

// ---------------------------------------------------------------------------
// Jaynes-Cummings exchange

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JcParams {
    pub omega: f64,
}

impl JcParams {
    pub fn new(omega: f64) -> Result<Self> {
        let p = Self { omega };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_finite("omega", self.omega)
    }
}

// ---------------------------------------------------------------------------
// Kraus sets

/// One Kraus operator and the channels it was built from, outermost first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrausOperator {
    pub matrix: CMatrix,
    pub sources: Vec<ChannelLabel>,
}

/// Time-evaluated Kraus operators of a qubit channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrausSet {
    pub time: f64,
    pub operators: Vec<KrausOperator>,
}

impl KrausSet {
    pub fn new(time: f64, operators: Vec<KrausOperator>) -> Self {
        Self { time, operators }
    }

    fn tagged(time: f64, label: ChannelLabel, matrices: Vec<CMatrix>) -> Self {
        Self {
            time,
            operators: matrices
                .into_iter()
                .map(|matrix| KrausOperator {
                    matrix,
                    sources: vec![label],
                })
                .collect(),
        }
    }

    /// The identity channel {I}.
    pub fn identity(time: f64) -> Self {
        Self {
            time,
            operators: vec![KrausOperator {
                matrix: CMatrix::identity(2),
                sources: Vec::new(),
            }],
        }
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn matrices(&self) -> impl Iterator<Item = &CMatrix> {
        self.operators.iter().map(|k| &k.matrix)
    }

    /// max |Σ K†K − I| entry.
    pub fn completeness_deviation(&self) -> f64 {
        let dim = self.operators.first().map_or(2, |k| k.matrix.dim());
        let mut sum = CMatrix::zeros(dim);
        for k in self.matrices() {
            sum = &sum + &(&k.adjoint() * k);
        }
        sum.max_abs_diff(&CMatrix::identity(dim))
    }

    pub fn check_complete(&self) -> Result<()> {
        let dev = self.completeness_deviation();
        if dev <= COMPLETENESS_TOL {
            Ok(())
        } else {
            Err(Error::Incomplete(dev))
        }
    }

    /// Σ K ρ K† on a raw matrix, no validation.
    pub fn apply_matrix(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(rho.dim());
        for k in self.matrices() {
            out = &out + &(&(k * rho) * &k.adjoint());
        }
        out
    }

    /// ρ → Σ K ρ K†; the output is re-validated as a density matrix.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_complete()?;
        DensityMatrix::new(self.apply_matrix(rho.matrix()))
    }

    /// `outer ∘ inner`: operators {Oᵢ Iⱼ}, applied as inner first.
    pub fn compose(outer: &KrausSet, inner: &KrausSet) -> KrausSet {
        let mut operators = Vec::with_capacity(outer.len() * inner.len());
        for o in &outer.operators {
            for i in &inner.operators {
                let mut sources = o.sources.clone();
                sources.extend_from_slice(&i.sources);
                operators.push(KrausOperator {
                    matrix: &o.matrix * &i.matrix,
                    sources,
                });
            }
        }
        KrausSet {
            time: outer.time.max(inner.time),
            operators,
        }
    }

    /// Σ K ⊗ conj(K) under the row-major vec convention.
    pub fn superoperator(&self) -> Superoperator {
        let mut m = CMatrix::zeros(4);
        for k in self.matrices() {
            m = &m + &kron(k, &k.conj());
        }
        Superoperator {
            time: self.time,
            matrix: m,
        }
    }
}

/// {√((1+Λ)/2) I, √((1−Λ)/2) σ₃}.
pub fn rtn_kraus(t: f64, p: &RtnParams) -> KrausSet {
    let lam = rtn_kernel(t, p).clamp(-1.0, 1.0);
    let k1 = CMatrix::identity(2).scale_real((0.5 * (1.0 + lam)).sqrt());
    let k2 = CMatrix::real_diag(&[1.0, -1.0]).scale_real((0.5 * (1.0 - lam)).sqrt());
    KrausSet::tagged(t, ChannelLabel::Rtn, vec![k1, k2])
}

/// {diag(1, G), √(1−|G|²) |0⟩⟨1|}.
pub fn nmad_kraus(t: f64, p: &NmadParams) -> Result<KrausSet> {
    let g = nmad_kernel(t, p);
    nmad_kraus_from_kernel(t, g)
}

/// NMAD Kraus pair for an explicit kernel value.
pub fn nmad_kraus_from_kernel(t: f64, g: Complex64) -> Result<KrausSet> {
    let magnitude = g.norm();
    if !magnitude.is_finite() || magnitude > 1.0 + NMAD_KERNEL_SLACK {
        return Err(Error::KernelOutOfRange { t, magnitude });
    }
    let a1 = CMatrix::diag(&[ONE, g]);
    let decay = (1.0 - g.norm_sqr()).max(0.0).sqrt();
    let a2 = CMatrix::from_rows([[ZERO, Complex64::new(decay, 0.0)], [ZERO, ZERO]]);
    Ok(KrausSet::tagged(t, ChannelLabel::Nmad, vec![a1, a2]))
}

/// Reduced JC map on qubit A with the partner prepared in |+⟩.
pub fn jc_kraus(t: f64, p: &JcParams) -> KrausSet {
    let (s, c) = (p.omega * t).sin_cos();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mis = Complex64::new(0.0, -s * h);
    let j1 = CMatrix::from_rows([[Complex64::new(h, 0.0), ZERO], [mis, Complex64::new(c * h, 0.0)]]);
    let j2 = CMatrix::from_rows([[Complex64::new(c * h, 0.0), mis], [ZERO, Complex64::new(h, 0.0)]]);
    KrausSet::tagged(t, ChannelLabel::Jc, vec![j1, j2])
}

// ---------------------------------------------------------------------------
// Superoperators

/// Row-major vec: (ρ₀₀, ρ₀₁, ρ₁₀, ρ₁₁).
pub fn vectorize(rho: &CMatrix) -> Vec<Complex64> {
    rho.as_slice().to_vec()
}

pub fn unvectorize(v: &[Complex64]) -> Result<CMatrix> {
    CMatrix::from_vec(v.to_vec())
}

/// 4x4 matrix acting on vectorized qubit states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Superoperator {
    pub time: f64,
    pub matrix: CMatrix,
}

impl Superoperator {
    pub fn identity(time: f64) -> Self {
        Self {
            time,
            matrix: CMatrix::identity(4),
        }
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let out = self.matrix.matvec(&vectorize(rho));
        unvectorize(&out).expect("4 entries form a 2x2 matrix")
    }

    /// Deviation of the trace covector (1,0,0,1) from being left-fixed.
    pub fn trace_preservation_deviation(&self) -> f64 {
        (0..4)
            .map(|col| (self.matrix[(0, col)] + self.matrix[(3, col)] - trace_covector(col)).norm())
            .fold(0.0, f64::max)
    }

    /// `self ∘ other` (other applied first).
    pub fn then_after(&self, other: &Superoperator) -> Superoperator {
        Superoperator {
            time: self.time,
            matrix: &self.matrix * &other.matrix,
        }
    }

    /// Inverse map; singular maps report this superoperator's time.
    pub fn inverse(&self, tol: &Tolerances) -> Result<Superoperator> {
        let matrix = invert(&self.matrix, tol).map_err(|e| e.at_time(self.time))?;
        Ok(Superoperator {
            time: self.time,
            matrix,
        })
    }
}

fn trace_covector(col: usize) -> Complex64 {
    if col == 0 || col == 3 {
        ONE
    } else {
        ZERO
    }
}

// ---------------------------------------------------------------------------
// Channel abstraction

/// Anything that yields a Kraus set at each time.
pub trait KrausChannel {
    fn kraus_at(&self, t: f64) -> Result<KrausSet>;

    fn labels(&self) -> Vec<ChannelLabel>;

    /// (Λ, dΛ/dt) for pure dephasing channels of the form ρ₀₁ → Λ ρ₀₁.
    fn dephasing_kernel(&self, _t: f64) -> Option<(f64, f64)> {
        None
    }

    fn superoperator_at(&self, t: f64) -> Result<Superoperator> {
        Ok(self.kraus_at(t)?.superoperator())
    }
}

impl KrausChannel for RtnParams {
    fn kraus_at(&self, t: f64) -> Result<KrausSet> {
        check_time(t)?;
        Ok(rtn_kraus(t, self))
    }

    fn labels(&self) -> Vec<ChannelLabel> {
        vec![ChannelLabel::Rtn]
    }

    fn dephasing_kernel(&self, t: f64) -> Option<(f64, f64)> {
        Some(rtn_kernel_with_derivative(t, self))
    }
}

impl KrausChannel for NmadParams {
    fn kraus_at(&self, t: f64) -> Result<KrausSet> {
        check_time(t)?;
        nmad_kraus(t, self)
    }

    fn labels(&self) -> Vec<ChannelLabel> {
        vec![ChannelLabel::Nmad]
    }
}

impl KrausChannel for JcParams {
    fn kraus_at(&self, t: f64) -> Result<KrausSet> {
        check_time(t)?;
        Ok(jc_kraus(t, self))
    }

    fn labels(&self) -> Vec<ChannelLabel> {
        vec![ChannelLabel::Jc]
    }
}

/// A single channel of any family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Channel {
    Rtn(RtnParams),
    Nmad(NmadParams),
    Jc(JcParams),
}

impl Channel {
    pub fn label(&self) -> ChannelLabel {
        match self {
            Channel::Rtn(_) => ChannelLabel::Rtn,
            Channel::Nmad(_) => ChannelLabel::Nmad,
            Channel::Jc(_) => ChannelLabel::Jc,
        }
    }
}

impl KrausChannel for Channel {
    fn kraus_at(&self, t: f64) -> Result<KrausSet> {
        match self {
            Channel::Rtn(p) => p.kraus_at(t),
            Channel::Nmad(p) => p.kraus_at(t),
            Channel::Jc(p) => p.kraus_at(t),
        }
    }

    fn labels(&self) -> Vec<ChannelLabel> {
        vec![self.label()]
    }

    fn dephasing_kernel(&self, t: f64) -> Option<(f64, f64)> {
        match self {
            Channel::Rtn(p) => p.dephasing_kernel(t),
            _ => None,
        }
    }
}

/// Concatenation of channels; `stages[0]` acts first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelChain {
    pub stages: Vec<Channel>,
}

impl ChannelChain {
    pub fn new(stages: Vec<Channel>) -> Self {
        Self { stages }
    }
}

impl KrausChannel for ChannelChain {
    fn kraus_at(&self, t: f64) -> Result<KrausSet> {
        check_time(t)?;
        let mut acc = KrausSet::identity(t);
        for stage in &self.stages {
            acc = KrausSet::compose(&stage.kraus_at(t)?, &acc);
        }
        Ok(acc)
    }

    fn labels(&self) -> Vec<ChannelLabel> {
        self.stages.iter().map(Channel::label).collect()
    }

    fn dephasing_kernel(&self, t: f64) -> Option<(f64, f64)> {
        match self.stages.as_slice() {
            [only] => only.dephasing_kernel(t),
            _ => None,
        }
    }
}
