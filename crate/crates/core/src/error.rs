use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported output activation `{0}`")]
    UnsupportedActivation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty logits vector")]
    EmptyLogits,

    #[error("invalid class index {class} (network has {num_classes} classes)")]
    InvalidClass { class: usize, num_classes: usize },

    #[error("counterfactual class {0} is the class the network already predicts")]
    FactualClass(usize),

    #[error("hamming distance {distance} out of range 1..={max}")]
    DistanceOutOfRange { distance: usize, max: usize },

    #[error("dimension {dim} exceeds the vertex enumeration cap of {cap}")]
    VertexCap { dim: usize, cap: usize },

    #[error("{neurons} hidden neurons exceeds the full decomposition cap of {cap}")]
    DecompositionCap { neurons: usize, cap: usize },

    #[error("linear program error: {0}")]
    Lp(String),

    #[error("vertex data not present in explanation")]
    MissingVrep,
}
