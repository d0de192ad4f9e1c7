use thiserror::Error;

/// Validation failures raised while building a [`crate::Graph`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop at vertex {vertex}")]
    SelfLoop { vertex: usize },
    #[error("duplicate edge {u}-{v}")]
    DuplicateEdge { u: usize, v: usize },
    #[error("coupling on edge {u}-{v} must be strictly positive, got {value}")]
    NonPositiveCoupling { u: usize, v: usize, value: String },
    #[error("edge endpoint {vertex} is not a declared vertex")]
    DanglingEndpoint { vertex: usize },
    #[error("vertex ids must be exactly 0..{count} without repeats")]
    NonDenseVertices { count: usize },
    #[error("malformed rational {0:?}")]
    MalformedRational(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),

    #[error("{name} must sum to zero over the vertices, got total {total}")]
    NonZeroSum { name: &'static str, total: i64 },

    #[error("source function has {got} entries, graph has {expected} vertices")]
    SourceLength { expected: usize, got: usize },

    #[error("source function references unknown vertex {0}")]
    UnknownVertex(String),

    #[error("configurations live on different multigraphs ({left} vs {right} slots)")]
    SlotMismatch { left: usize, right: usize },

    #[error("amplitude has {got} entries, graph has {expected} edges")]
    AmplitudeLength { expected: usize, got: usize },

    #[error("angle {value} at vertex {vertex} is outside [0, 2pi)")]
    AngleOutOfRange { vertex: usize, value: f64 },

    #[error("gauge fixing needs a mean-zero observable (total {total}); use full-dimension mode")]
    GaugeNeedsMeanZero { total: i64 },

    #[error("quadrature needs at least 2 points per angle, got {0}")]
    GridTooSmall(usize),

    #[error("sample count must be positive")]
    NoSamples,

    #[error("invalid json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
