use thiserror::Error;

/// Errors raised by grid construction, geometry, integration and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("body is not strictly convex: lambda_min = {lambda_min:e} at node {node} (threshold {threshold:e})")]
    NonConvex {
        node: usize,
        lambda_min: f64,
        threshold: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("interpolation failure: {0}")]
    InterpolationFailure(String),

    #[error("step rejected at t = {t} after {attempts} halvings (last dt = {dt:e})")]
    StepRejected { t: f64, dt: f64, attempts: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
