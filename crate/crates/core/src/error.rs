use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("mean curvature |H| = {0} must be < 1")]
    MeanCurvatureOutOfRange(f64),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh has no boundary")]
    EmptyBoundary,

    #[error("boundary loop has {0} vertices, need at least 3")]
    DegenerateBoundaryLoop(usize),

    #[error("degenerate embedded triangle {triangle} (area {area:e})")]
    DegenerateTriangle { triangle: usize, area: f64 },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("field has {found} entries, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("solvability margin {margin} is below the required {required}")]
    SolvabilityViolated { margin: f64, required: f64 },

    #[error("no barrier constant K <= {k_max} passed verification (last residual {last_residual:e})")]
    BarrierSearchFailed { k_max: f64, last_residual: f64 },

    #[error("quadratic fit at sample {sample} has {found} stencil points, need {needed}")]
    TooFewNeighbors { sample: usize, found: usize, needed: usize },

    #[error("Newton iteration did not converge after {iterations} steps (gradient norm {grad_norm:e})")]
    NewtonNotConverged { iterations: usize, grad_norm: f64 },

    #[error("line search found no sufficient decrease at Newton step {0}")]
    LineSearchFailed(usize),

    #[error("boundary data not ordered: phi1 < phi2 at vertex {0}")]
    UnorderedBoundaryData(usize),

    #[error("epsilon schedule must be strictly decreasing inside (0, 1)")]
    BadSchedule,

    #[error("geodesic ball of radius {radius} around vertex {vertex} leaves the domain")]
    BallExitsDomain { vertex: usize, radius: f64 },

    #[error("sup norm {norm} is not below T = {t}")]
    OutsideCone { norm: f64, t: f64 },

    #[error("value {value} on column {column} is not on the level grid")]
    NotSnapped { column: usize, value: f64 },

    #[error("voxel set violates containment on column {0}")]
    Containment(usize),

    #[error("invalid product grid: {0}")]
    InvalidGrid(String),

    #[error("axisymmetric Newton solve failed: {0}")]
    OracleFailed(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_curvature(h: f64) -> Result<()> {
    if h.is_finite() && h.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::MeanCurvatureOutOfRange(h))
    }
}
