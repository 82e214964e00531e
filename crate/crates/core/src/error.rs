use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh has no triangles")]
    EmptyMesh,
    #[error("triangle {triangle} references vertex {vertex} but only {nv} vertices exist")]
    VertexOutOfRange { triangle: usize, vertex: usize, nv: usize },
    #[error("region tag list has length {got}, expected {expected}")]
    RegionLength { got: usize, expected: usize },
    #[error("triangle {0} is a duplicate of triangle {1}")]
    DuplicateTriangle(usize, usize),
    #[error("triangle {0} is degenerate (area {1:e})")]
    DegenerateTriangle(usize, f64),
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),
    #[error("triangle index {0} out of range")]
    TriangleOutOfRange(usize),

    #[error("matrix dimension mismatch: {0}")]
    Dimension(String),
    #[error("factorization failed: matrix is numerically singular (n = {n}, h = {h:e})")]
    Singular { n: usize, h: f64 },
    #[error("linear residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("problem `{0}` has no exact solution")]
    MissingExact(String),
    #[error("fields live on different meshes or spaces")]
    MeshMismatch,
    #[error("operation not supported: {0}")]
    Unsupported(String),
    #[error("all indicators are zero; nothing to mark")]
    ZeroIndicators,
    #[error("cannot fit convergence orders: {0}")]
    OrderFit(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
