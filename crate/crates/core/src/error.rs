use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported ambient dimension {0} (expected 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("element {index} has degenerate measure {measure:e} (floor {floor:e})")]
    DegenerateElement { index: usize, measure: f64, floor: f64 },
    #[error("element {element} references vertex {vertex} but only {count} vertices exist")]
    BadConnectivity { element: usize, vertex: usize, count: usize },
    #[error("surface is not closed: {0}")]
    NotClosed(String),
    #[error("surface is not consistently oriented: {0}")]
    Inconsistent(String),
    #[error("normal at vertex {0} is undefined (incident normals cancel)")]
    FoldOver(usize),
    #[error("field length {got} does not match vertex count {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("time step {dt:e} exceeds the stability cap {cap:e}")]
    StabilityCap { dt: f64, cap: f64 },
    #[error("sample time {0} lies outside the transform domain")]
    OutsideTimeDomain(f64),
    #[error("trajectories do not share a time range")]
    NoOverlap,
    #[error("X-mean-convexity fails after perturbation (margin {margin:e}); use a smaller epsilon or a finer mesh")]
    NotXMeanConvex { margin: f64 },
    #[error("grid margin violated: {0}")]
    GridMargin(String),
    #[error("grid geometry mismatch")]
    GridMismatch,
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("unknown preset {name:?}; available: {available}")]
    UnknownPreset { name: String, available: String },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
