use std::path::PathBuf;

use thiserror::Error;

/// Pipeline stage an error originated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Graph,
    Weights,
    Operator,
    Eigensolve,
    Embedding,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stage::Graph => "knn graph",
            Stage::Weights => "heat weights",
            Stage::Operator => "operator assembly",
            Stage::Eigensolve => "eigensolve",
            Stage::Embedding => "embedding",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("format error at row {row}: {msg}")]
    Format { row: usize, msg: String },

    #[error("parse error at row {row}, column {column}: cannot read {cell:?} as a finite number")]
    Parse {
        row: usize,
        column: usize,
        cell: String,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index out of bounds: {0}")]
    Bounds(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("label {0} has no entry in the class grouping")]
    UnmappedLabel(i64),

    #[error("unknown class {0}")]
    UnknownClass(i64),

    #[error("positivity violated at node {node}: {msg}")]
    Positivity { node: usize, msg: String },

    #[error("edge ({i}, {j}) is outside the graph's edge set")]
    EdgeDomain { i: usize, j: usize },

    #[error("division by zero: {0}")]
    Division(String),

    #[error("graph has {components} connected components; increase k or enable auto-connect")]
    Disconnected { components: usize },

    #[error("operator asymmetry {asymmetry:.3e} exceeds tolerance {tolerance:.1e} in the X-weighted matrix")]
    Asymmetric { asymmetry: f64, tolerance: f64 },

    #[error("pencil is not definite: degree of node {node} is {value}")]
    Definiteness { node: usize, value: f64 },

    #[error("eigensolver did not converge in {iterations} iterations; worst residual {worst_residual:.3e}")]
    Convergence {
        iterations: usize,
        worst_residual: f64,
        residuals: Vec<f64>,
    },

    #[error("degenerate edge ({i}, {j}): |a_i - a_j| = 1 makes the propagation ratio undefined")]
    DegenerateEdge { i: usize, j: usize },

    #[error("stratification error: {0}")]
    Stratification(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("config error in field `{field}`: {msg}")]
    Config { field: String, msg: String },

    #[error("{stage}: {source}")]
    Staged {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at(self, stage: Stage) -> Self {
        Error::Staged {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, with stage labels stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Staged { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
