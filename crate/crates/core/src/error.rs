use thiserror::Error;

use crate::grid::GridFunction;
use crate::solver::SolveDiagnostics;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be 2 or 3, got {0}")]
    InvalidDimension(usize),
    #[error("resolution must be odd so the thin plane is a node layer, got {0}")]
    EvenResolution(usize),
    #[error("resolution must be at least 17, got {0}")]
    ResolutionTooSmall(usize),
    #[error("extent must be positive and finite, got {0}")]
    InvalidExtent(f64),
    #[error("non-finite value at node {index}")]
    NonFinite { index: usize },
    #[error("point {0:?} lies outside the grid domain")]
    OutsideDomain(Vec<f64>),
    #[error("inadmissible ball: {0}")]
    InadmissibleBall(String),
    #[error("boundary mass below degeneracy floor at radius {radius}")]
    DegenerateBoundaryMass { radius: f64 },
    #[error("inadmissible boundary data: {0}")]
    InadmissibleBoundary(String),
    #[error(
        "solver did not converge after {} sweeps (residual {:.3e}, complementarity {:.3e})",
        .diagnostics.sweeps_used,
        .diagnostics.final_residual,
        .diagnostics.final_complementarity
    )]
    NonConvergence {
        diagnostics: SolveDiagnostics,
        field: Box<GridFunction>,
    },
    #[error("field is degenerate on the unit sphere")]
    DegenerateField,
    #[error("rescaled domain exceeds the source grid: {0}")]
    DomainExceeded(String),
    #[error("polynomial is not in the admissible class (negative on the thin sphere)")]
    NotInQ,
    #[error("normal vector must be a unit tangential vector")]
    NonUnitNormal,
    #[error("seed point is not classified as regular")]
    NotRegularSeed,
    #[error("no free-boundary crossing in the requested window")]
    NoCrossingInWindow,
    #[error("fit is not a singular polynomial fit")]
    NotSingularFit,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
