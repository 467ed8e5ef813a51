use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("point has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point is within the degeneracy cutoff of the origin")]
    DegenerateOrigin,

    #[error("evaluation point lies on the reflection orbit of the source point")]
    DegenerateOrbit,

    #[error("point lies outside the closed unit ball (|x| = {norm})")]
    OutsideBall { norm: f64 },

    #[error("point is not on the unit sphere (|y| = {norm})")]
    NotOnSphere { norm: f64 },

    #[error("point is not in the positive Weyl chamber z_1 > z_2")]
    NotInChamber,

    #[error("tolerance not reached: estimate {estimate}, error bound {error_bound}")]
    ToleranceNotReached { estimate: f64, error_bound: f64 },

    #[error("integrand or field produced a non-finite value at {at}")]
    NonFinite { at: String },

    #[error("finite-difference stencil leaves the region of {label}")]
    StencilOutsideRegion { label: String },

    #[error("point too close to the reflecting hyperplane for step {h} (x_1 = {x1})")]
    TooCloseToWall { x1: f64, h: f64 },

    #[error("extrapolation did not settle: last correction {last_correction}")]
    SlowConvergence { last_correction: f64 },

    #[error("output error: {0}")]
    Io(String),
}
