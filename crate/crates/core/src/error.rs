use thiserror::Error;

use crate::combinatorics::UnimodalPermutation;
use crate::unimodal::ValidationReport;

pub type Result<T> = std::result::Result<T, RenormError>;

#[derive(Debug, Clone, Error)]
pub enum RenormError {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("sample is not finite at node {index} (x = {x})")]
    NonFiniteSample { index: usize, x: f64 },

    #[error("x = {x} outside the evaluation domain [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("degenerate interval: endpoints coincide at {0}")]
    DegenerateInterval(f64),

    #[error("branch power is only defined on (-inf, 0], got y = {0}")]
    BranchDomain(f64),

    #[error("radius {r} exceeds the analyticity proxy of the series (maximum usable radius {max_r})")]
    RadiusTooLarge { r: f64, max_r: f64 },

    #[error("map is not unimodal: {0:?}")]
    NotUnimodal(Box<ValidationReport>),

    #[error("root finding failed in bracket [{lo}, {hi}]: {reason}")]
    RootFinding { lo: f64, hi: f64, reason: String },

    #[error("map is not renormalizable with period <= {m_max}")]
    NotRenormalizable { m_max: usize },

    #[error("inconsistent combinatorics: {0}")]
    Inconsistent(String),

    #[error("refit residual {residual:.3e} exceeds tolerance {tol:.1e} at degree {degree}; increase the degree")]
    RefitPrecision { residual: f64, tol: f64, degree: usize },

    #[error("Newton iteration diverged after {iterations} iterations (residual {residual:.3e})")]
    Divergence {
        iterations: usize,
        residual: f64,
        last: Vec<f64>,
    },

    #[error("renormalization step {step} realized {found} instead of {expected}")]
    WordViolation {
        step: usize,
        expected: UnimodalPermutation,
        found: String,
    },

    #[error("QR iteration did not converge for eigenvalue {index} after {iterations} iterations")]
    QrNonConvergence {
        index: usize,
        iterations: usize,
        /// Eigenvalues that had already deflated, as (re, im).
        partial: Vec<(f64, f64)>,
    },

    #[error("no sign change of the critical iterate in bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("wrong window: critical orbit returns at iterate {returned} before period {period}")]
    WrongWindow { period: usize, returned: usize },

    #[error("renormalization tower broke at step {step}: {reason}")]
    TowerBreak { step: usize, reason: String },

    #[error("combinatorics differ at level {level}")]
    CombinatoricsMismatch { level: usize },

    #[error("periodic orbit failed at symbol position {position}: {reason}")]
    OrbitSeed { position: usize, reason: String },

    #[error("coordinate change invalid: {0}")]
    InvalidCoordChange(String),
}
