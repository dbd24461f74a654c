use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("point is off the manifold (|K<x,x> + 1| = {residual:.3e}{})", row_suffix(*.row))]
    OffManifold { residual: f64, row: Option<usize> },

    #[error("point lies on or outside the unit disk boundary (norm {norm}){}", row_suffix(*.row))]
    OutsideDisk { norm: f64, row: Option<usize> },

    #[error("angle {0} is outside the open interval (pi/4, 3pi/4)")]
    AngleOutOfRange(f64),

    #[error("split dimension {dim} is invalid for {kind} geometry of dimension {manifold_dim}")]
    InvalidSplitDim {
        dim: usize,
        kind: &'static str,
        manifold_dim: usize,
    },

    #[error("tangent vector has nonzero timelike component {0}")]
    NotTangentAtOrigin(f64),

    #[error("vector is not tangent at the base point (<u, mu> = {0:.3e})")]
    NotTangent(f64),

    #[error("distance argument {0} is below 1")]
    DistanceDomain(f64),

    #[error("discriminant {0:.3e} is negative beyond rounding")]
    NegativeDiscriminant(f64),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("NaN coordinate at row {0}")]
    NanCoordinate(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("task mismatch: {0}")]
    Task(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn row_suffix(row: Option<usize>) -> String {
    match row {
        Some(r) => format!(" at row {r}"),
        None => String::new(),
    }
}

impl Error {
    /// Attach a row index to point-level validation errors.
    pub fn at_row(self, row: usize) -> Self {
        match self {
            Error::OffManifold { residual, .. } => Error::OffManifold {
                residual,
                row: Some(row),
            },
            Error::OutsideDisk { norm, .. } => Error::OutsideDisk {
                norm,
                row: Some(row),
            },
            other => other,
        }
    }
}
