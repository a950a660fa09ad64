use thiserror::Error;

/// Errors surfaced by the numerical engines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rod data: {0}")]
    InvalidRodData(String),

    #[error("invalid family parameters: {0}")]
    InvalidParams(String),

    #[error("point (rho={rho}, z={z}) outside family domain: {reason}")]
    OutsideDomain { rho: f64, z: f64, reason: String },

    #[error("chart inversion failed to converge at (rho={rho}, z={z}) after {iters} iterations")]
    InversionFailure { rho: f64, z: f64, iters: usize },

    #[error("matrix not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("asymptotic class mismatch: {0}")]
    ClassMismatch(String),

    #[error("rod data mismatch: {0}")]
    RodMismatch(String),

    #[error("non-monotone flux sequence: {0}")]
    NonMonotoneFlux(String),

    #[error("quadrature domain error: {0}")]
    BadDomain(String),

    #[error("integrability defect {defect:e} above tolerance {tol:e} in path quadrature")]
    PathDependence { defect: f64, tol: f64 },

    #[error("reference map is not harmonic: sup residual {residual:e} exceeds {tol:e}")]
    NotHarmonic { residual: f64, tol: f64 },

    #[error("relaxation did not converge: residual {residual:e} after {sweeps} sweeps")]
    NoConvergence { residual: f64, sweeps: usize },

    #[error("rod-structure case detection failed for v=({0}, {1})")]
    CaseDetection(i64, i64),

    #[error("defect cross-check disagreement: limit {limit} vs identity {identity} (tol {tol:e})")]
    DefectDisagreement { limit: f64, identity: f64, tol: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
