use std::path::PathBuf;

use thiserror::Error;

use crate::complex::Simplex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("simplex {simplex} at {value} precedes its face {face} at {face_value}")]
    MonotonicityViolation {
        simplex: Simplex,
        value: f64,
        face: Simplex,
        face_value: f64,
    },

    #[error("simplex {simplex} is missing its face {face}")]
    MissingFace { simplex: Simplex, face: Simplex },

    #[error("simplex {simplex} already stored at {existing}, refusing value {value}")]
    DuplicateSimplex {
        simplex: Simplex,
        existing: f64,
        value: f64,
    },

    #[error("simplex {0} is not in the complex")]
    SimplexNotFound(Simplex),

    #[error("invalid simplex: {0}")]
    InvalidSimplex(String),

    #[error("filtration value {0} is not a finite non-negative number")]
    InvalidValue(f64),

    #[error("point {index} has {found} coordinates, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("point cloud is empty")]
    EmptyPointCloud,

    #[error("point {index} has a non-finite coordinate")]
    NonFiniteCoordinate { index: usize },

    #[error("complex would hold more than {budget} simplices; tighten --max-edge or --max-dim")]
    CapacityExceeded { budget: usize },

    #[error("no persistence intervals to select from")]
    EmptyIntervalSet,

    #[error("no labeled vertices to propagate from")]
    NoLabeledData,

    #[error("need at least {needed} training points, found {found}")]
    InsufficientTraining { needed: usize, found: usize },

    #[error("class {class} has {size} member(s); at least 2 are required to split")]
    DegenerateClass { class: usize, size: usize },

    #[error("AUC is undefined: class {0} is absent from the ground truth or is the only class present")]
    UndefinedAuc(usize),

    #[error("no classifiers requested")]
    NoClassifiers,

    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),

    #[error("label column `{0}` not found in header")]
    MissingLabelColumn(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse { row: usize, column: usize, message: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
