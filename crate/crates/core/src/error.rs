use thiserror::Error;

use crate::tree::VertexPath;

/// Errors shared by all solver and boundary modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid tree spec: {0}")]
    InvalidSpec(String),

    #[error("invalid vertex path {path}: {reason}")]
    InvalidPath { path: VertexPath, reason: String },

    #[error("invalid boundary distribution: {0}")]
    InvalidDistribution(String),

    #[error("degenerate edge-type model: {0}")]
    DegenerateModel(String),

    #[error(
        "fixed-point iteration did not converge after {iterations} iterations \
         (last delta {last_delta:.3e}); lambda may be inside or too close to the spectrum"
    )]
    NonConvergence { iterations: usize, last_delta: f64 },

    #[error("division by a jet whose value coefficient is {magnitude:.3e}")]
    DivisionBySingularJet { magnitude: f64 },

    #[error("square root of a jet whose value coefficient is {magnitude:.3e}")]
    SqrtOfSingularJet { magnitude: f64 },

    #[error("denominator lambda - U(x,x) has magnitude {magnitude:.3e}; lambda sits at a pole")]
    ZeroDenominator { magnitude: f64 },

    #[error("Green function magnitude {magnitude:.3e} is numerically zero at this vertex")]
    VanishingGreen { magnitude: f64 },

    #[error("first-passage bound violated: sum {sum:.6e} exceeds |lambda| = {lambda_abs:.6e}")]
    SpectralBound { sum: f64, lambda_abs: f64 },

    #[error("arc {arc} is a strict ancestor of {vertex}; the kernel is not constant on it")]
    ArcTooCoarse { vertex: VertexPath, arc: VertexPath },

    #[error("requested {steps} steps but the truncated ball has radius {radius}")]
    HorizonExceeded { steps: usize, radius: usize },

    #[error("|lambda| = {lambda_abs:.6e} does not exceed rho upper bound {rho_hi:.6e}; series tail not controlled")]
    TailNotControlled { lambda_abs: f64, rho_hi: f64 },

    #[error("truncated ball would exceed {limit} vertices (reached {vertices})")]
    BallTooLarge { vertices: usize, limit: usize },

    #[error("|1 - F(x-,x)F(x,x-)| = {magnitude:.3e} is too close to zero; lambda sits at the spectrum edge")]
    DenominatorNearOne { magnitude: f64 },

    #[error("function is not lambda-polyharmonic of order {order}: defect {defect:.3e} at {vertex}")]
    NotPolyharmonic { order: usize, defect: f64, vertex: VertexPath },

    #[error("evaluator ball radius {radius} is too small; need at least {required}")]
    InsufficientRadius { radius: usize, required: usize },

    #[error("lambda = 0 is outside the admissible eigenvalue range for this operation")]
    ZeroLambda,

    #[error("lambda = {lambda} is within {distance:.3e} of the spectral segment [-rho, rho]")]
    BranchCut { lambda: num_complex::Complex64, distance: f64 },

    #[error("jet order {have} is too low for this operation; need at least {need}")]
    OrderTooLow { have: usize, need: usize },

    #[error("evaluator has no value at {vertex}")]
    EvaluatorDomain { vertex: VertexPath },
}

pub type Result<T> = std::result::Result<T, Error>;
