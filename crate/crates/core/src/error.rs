use thiserror::Error;

/// Errors raised by the numerical kernels, channels, witnesses and spectral tools.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e} > {tolerance:.1e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("dimension mismatch: {left}x{left} vs {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid matrix shape: {0}")]
    InvalidShape(String),

    #[error("non-finite entry produced by {0}")]
    NonFinite(&'static str),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("singular map{}: pivot {pivot:.3e}", fmt_time(*.time))]
    SingularMap { time: Option<f64>, pivot: f64 },

    #[error("eigensolver did not converge (residual {residual:.3e})")]
    NoConvergence { residual: f64 },

    #[error("memory kernel out of range at t = {t}: |G| = {magnitude}")]
    KernelOutOfRange { t: f64, magnitude: f64 },

    #[error("decoherence rate has a pole at t = {t} (kernel value {kernel:.3e})")]
    PoleAtZeroKernel { t: f64, kernel: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("need at least {required} samples, got {got}")]
    InsufficientSamples { required: usize, got: usize },

    #[error("sampled function failed at {failed} of {total} points")]
    SamplingFailure { failed: usize, total: usize },

    #[error("Kraus set is not complete (max deviation {0:.3e})")]
    Incomplete(f64),

    #[error("empty spectrum")]
    EmptySpectrum,
}

fn fmt_time(time: Option<f64>) -> String {
    match time {
        Some(t) => format!(" at t = {t}"),
        None => String::new(),
    }
}

impl Error {
    /// Attach a time stamp to a singular-map error raised deep in a solve.
    pub fn at_time(self, t: f64) -> Self {
        match self {
            Error::SingularMap { pivot, .. } => Error::SingularMap {
                time: Some(t),
                pivot,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
