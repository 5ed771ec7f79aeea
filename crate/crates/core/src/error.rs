use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coin is not unitary (residual {residual:.3e} exceeds 1e-12)")]
    NonUnitary { residual: f64 },

    #[error("degenerate coin: |a| = {abs_a} (need 0 < |a| < 1)")]
    DegenerateCoin { abs_a: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("q = {q} is an endpoint regime; the arcsine mixture needs 0 < q < 1")]
    EndpointRegime { q: f64 },

    #[error("trace drift {drift:.3e} at step {step}")]
    TraceDrift { step: usize, drift: f64 },

    #[error("norm drift {drift:.3e} at step {step}")]
    NormDrift { step: usize, drift: f64 },

    #[error("both Kraus branches starved at step {step} (norms {norm_a:.3e}, {norm_b:.3e})")]
    BranchStarved { step: usize, norm_a: f64, norm_b: f64 },

    #[error("{what} violated at step {step}: {value:.3e}")]
    InvariantViolation {
        what: &'static str,
        step: usize,
        value: f64,
    },

    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("lemma violation: {0}")]
    LemmaViolation(String),

    #[error("two eigenvalues are equidistant from 1 ({first} vs {second})")]
    EigenvalueAmbiguity { first: f64, second: f64 },

    #[error("quadrature routes disagree at x = {x}: {trapezoid} vs {kronrod}")]
    QuadratureDisagreement {
        x: f64,
        trapezoid: f64,
        kronrod: f64,
    },

    #[error("odd-parity mass at position {x} for step {t}")]
    ParityViolation { x: i64, t: usize },

    #[error("imaginary residual {value:.3e} in a real-valued characteristic function")]
    ImaginaryResidual { value: f64 },

    #[error("unknown engine '{name}' (available: {available})")]
    UnknownEngine { name: String, available: String },

    #[error("t = {t} exceeds the exact-engine cap {cap}; raise the cap explicitly")]
    ExactCapExceeded { t: usize, cap: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Numerical invariant failures, as opposed to bad input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::TraceDrift { .. }
                | Error::NormDrift { .. }
                | Error::BranchStarved { .. }
                | Error::InvariantViolation { .. }
                | Error::NonConvergence { .. }
                | Error::LemmaViolation(_)
                | Error::EigenvalueAmbiguity { .. }
                | Error::QuadratureDisagreement { .. }
                | Error::ImaginaryResidual { .. }
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Csv(_) | Error::Json(_))
    }
}
