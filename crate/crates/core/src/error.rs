//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors reported by synthesis, quadrature, integration and dispatch.
#[derive(Debug, Error)]
pub enum Error {
    /// Two constraint times coincide within the duplicate tolerance, so the
    /// Gram matrix is singular by construction.
    #[error("constraint times {t0} and {t1} coincide within {tol:e}")]
    DuplicateTimes { t0: f64, t1: f64, tol: f64 },

    /// The linear solve could not reach the interpolation residual bound even
    /// after the extended-precision retry.
    #[error("ill-conditioned constraint set (condition number {condition:e}): residual {residual:e} exceeds bound {bound:e}")]
    IllConditioned {
        condition: f64,
        residual: f64,
        bound: f64,
    },

    /// No grid points fall inside the requested characterization window.
    #[error("characterization window [{lo}, {hi}] contains no grid points")]
    EmptyWindow { lo: f64, hi: f64 },

    /// Panel refinement hit the depth limit before the quadrature tolerance.
    #[error("quadrature tolerance {tol:e} unachievable on [{a}, {b}] (estimated error {err:e})")]
    TolUnachievable { a: f64, b: f64, tol: f64, err: f64 },

    /// The adaptive step controller reduced the step below the representable
    /// resolution of the time axis.
    #[error("ODE step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    /// The integrated state norm drifted further than the allowed budget.
    #[error("state norm drift {drift:e} exceeds budget {budget:e}")]
    NormDriftExceeded { drift: f64, budget: f64 },

    /// Partial fractions of the two-oscillator Green function are invalid for
    /// (near-)degenerate roots.
    #[error("dispersion roots {w1} and {w2} too close for partial fractions")]
    DegenerateRoots { w1: f64, w2: f64 },

    /// A resonance of the driven system lies inside the drive's frequency band.
    #[error("resonance at {omega} lies inside the drive band [-{bandlimit}, {bandlimit}]")]
    ResonanceInBand { omega: f64, bandlimit: f64 },

    /// Mode-function extraction requires a static frequency profile at the
    /// integration endpoint.
    #[error("frequency profile not static at t = {t}: |w'/w^2| = {flatness:e} exceeds {threshold:e}")]
    NotAsymptoticallyStatic {
        t: f64,
        flatness: f64,
        threshold: f64,
    },

    /// A manifest or input document failed validation.
    #[error("validation failed at `{path}`: {message}")]
    ValidationFailed { path: String, message: String },

    /// A plot series references a column absent from the CSV header.
    #[error("column `{column}` not found in {file}")]
    MissingColumn { column: String, file: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code convention: 1 for validation problems, 2 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DuplicateTimes { .. }
            | Error::EmptyWindow { .. }
            | Error::ValidationFailed { .. }
            | Error::MissingColumn { .. }
            | Error::Io(_)
            | Error::Json(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
