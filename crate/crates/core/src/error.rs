use thiserror::Error;

/// Errors raised by geometric and numerical operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point not interior")]
    PointNotInterior,
    #[error("point not on boundary (residual {residual:.3e})")]
    NotOnBoundary { residual: f64 },
    #[error("root finder did not converge: {0}")]
    NoConvergence(&'static str),
    #[error("zero direction vector")]
    ZeroDirection,
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("singular projective map")]
    SingularMap,
    #[error("improper projective image: the vanishing line meets the closure")]
    ImproperImage,
    #[error("segment not contained in the closed domain")]
    SegmentNotInDomain,
    #[error("region not contained in the closed domain")]
    RegionOutsideDomain,
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("degenerate triangle vertices (coincident or collinear)")]
    DegenerateVertices,
    #[error("invalid ideal triangle: {0}")]
    InvalidTriangle(String),
    #[error("singular normalization constraints")]
    SingularConstraints,
    #[error("strip too wide: domain does not cross the strip on both sides")]
    StripTooWide,
    #[error("insufficient signal: graph vanishes on the fit window")]
    InsufficientSignal,
    #[error("function is not convex on the sample grid")]
    NotConvex,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
