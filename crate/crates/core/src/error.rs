use thiserror::Error;

use crate::coarse::PositivityReport;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A state or evaluation point falls outside the grid that is supposed
    /// to cover it (estimated probability mass outside the grid, off-grid
    /// interpolation, and the like).
    #[error("domain coverage: {0}")]
    DomainCoverage(String),

    /// A quantity that should be real (or otherwise internally consistent)
    /// came out with a residue above the documented threshold.
    #[error("numerical consistency: {0}")]
    NumericalConsistency(String),

    /// A field or state degenerated to something the operation cannot use
    /// (all-zero row, vanishing amplitude, ...).
    #[error("degenerate state: {0}")]
    DegenerateState(String),

    /// The integrand psi'/psi diverges at an interior node of psi.
    #[error("node singularity: {0}")]
    NodeSingularity(String),

    /// The boundary ratio psi(b)/psi(-b) does not converge along the
    /// approach to the boundary.
    #[error("indeterminate boundary: {0}")]
    IndeterminateBoundary(String),

    /// Too many grid points were masked for the result to be trusted.
    #[error("unreliable domain: masked fraction {0:.4} exceeds 0.05")]
    UnreliableDomain(f64),

    /// The positivity verdict does not change sign over the search interval.
    #[error("bracketing failure on [{lo}, {hi}]: verdicts do not bracket a sign change (lo positive: {}, hi positive: {})", lo_report.positive, hi_report.positive)]
    Bracketing {
        lo: f64,
        hi: f64,
        lo_report: Box<PositivityReport>,
        hi_report: Box<PositivityReport>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
