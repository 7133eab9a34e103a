use thiserror::Error;

/// Every failure the toolkit reports. Numerical checks that "fail" as part of
/// their normal output (empirical constants, verdicts) are not errors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("symbol quadrature did not converge at xi = {xi:?} (relative change {rel_change:.3e})")]
    QuadratureNotConverged { xi: [f64; 2], rel_change: f64 },

    #[error("density under-resolved: |exp(psi t)| = {decay:.3e} at the Nyquist frequency (t = {t})")]
    AliasingDetected { t: f64, decay: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("kappa(eps r) <= l(eps) kappa(r) fails at eps = {eps:.4e}, r = {r:.4e} (ratio {ratio:.6})")]
    NotScaling { eps: f64, r: f64, ratio: f64 },

    #[error("LP base {base} too large: only {shells} shells fit under the Nyquist frequency")]
    BaseTooLarge { base: u32, shells: usize },

    #[error("Bernstein kernel invalid: {condition} violated at {at:.4e} ({detail})")]
    KernelInvalid { condition: &'static str, at: f64, detail: String },

    #[error("domination fails: rescaled density below mu0 at R = {r_scale:.4e}, |y| = {y:.4e}")]
    DominationFailed { r_scale: f64, y: f64 },

    #[error("moment integral unbounded: {0}")]
    MomentUnbounded(String),

    #[error("measure invariant violated: {0}")]
    MeasureInvalid(String),

    #[error("Monte Carlo relative error {rel_error:.3} exceeds {limit} for {quantity}")]
    StatisticalPower { quantity: String, rel_error: f64, limit: f64 },

    #[error("outer-time tail carries {share:.3} of the Hormander integral (limit 0.1)")]
    TruncationDominant { share: f64 },

    #[error("level set {{M f > {alpha}}} is empty")]
    EmptyLevelSet { alpha: f64 },

    #[error("prerequisite failed: {0}")]
    PrereqFailed(String),

    #[error("config error in {field}: {message}")]
    Config { field: String, message: String },

    #[error("suite '{suite}' prerequisite failed: {cause}")]
    SuitePrereq { suite: String, cause: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Variant name, used when an error is reported as a suite prerequisite.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::QuadratureNotConverged { .. } => "QuadratureNotConverged",
            Error::AliasingDetected { .. } => "AliasingDetected",
            Error::GridMismatch(_) => "GridMismatch",
            Error::NotScaling { .. } => "NotScaling",
            Error::BaseTooLarge { .. } => "BaseTooLarge",
            Error::KernelInvalid { .. } => "KernelInvalid",
            Error::DominationFailed { .. } => "DominationFailed",
            Error::MomentUnbounded(_) => "MomentUnbounded",
            Error::MeasureInvalid(_) => "MeasureInvalid",
            Error::StatisticalPower { .. } => "StatisticalPower",
            Error::TruncationDominant { .. } => "TruncationDominant",
            Error::EmptyLevelSet { .. } => "EmptyLevelSet",
            Error::PrereqFailed(_) => "PrereqFailed",
            Error::Config { .. } => "ConfigError",
            Error::SuitePrereq { .. } => "SuitePrereqError",
            Error::Io(_) => "IoError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
