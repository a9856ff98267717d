use thiserror::Error;

/// Errors raised by geometric and numerical operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("point is not on the space: {0}")]
    OffManifold(String),

    #[error("mismatched spaces: {0}")]
    SpaceMismatch(String),

    #[error("tangent vectors are based at different points")]
    BaseMismatch,

    #[error("points are antipodal (distance {distance} vs diameter {diameter}); the geodesic is not unique")]
    Antipodal { distance: f64, diameter: f64 },

    #[error("tangent vector of norm {norm} reaches the conjugate distance {diameter}")]
    BeyondConjugate { norm: f64, diameter: f64 },

    #[error("parameter {t} outside the geodesic domain [0, {tau}]")]
    OutsideDomain { t: f64, tau: f64 },

    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),

    #[error("triangle inequality violated by sides ({0}, {1}, {2})")]
    TriangleInequality(f64, f64, f64),

    #[error("perimeter {perimeter} is not below twice the model diameter {diameter}")]
    PerimeterTooLarge { perimeter: f64, diameter: f64 },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("operation not supported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric limit did not stabilize: {0}")]
    NoConvergence(String),

    #[error("support leaves the safe zone: {0}")]
    SafeZone(String),

    #[error("barycenter iteration did not converge in {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("gradient search: {0}")]
    GradientSearch(String),

    #[error("curvature audit: {0}")]
    Audit(String),

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, GeoError>;

impl From<std::io::Error> for GeoError {
    fn from(e: std::io::Error) -> Self {
        GeoError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for GeoError {
    fn from(e: serde_json::Error) -> Self {
        GeoError::Parse(e.to_string())
    }
}

impl From<csv::Error> for GeoError {
    fn from(e: csv::Error) -> Self {
        GeoError::Parse(e.to_string())
    }
}
