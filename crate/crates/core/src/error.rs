use thiserror::Error;

use crate::dsl::DslError;
use crate::jets::JetError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FinslerError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error("phi = {value} is not positive at (x0, r, s, z) = {point:?}")]
    NonPositivePhi { value: f64, point: [f64; 4] },
    #[error("dimension n = {0} is outside the supported range 2..=6")]
    InvalidDimension(usize),
    #[error("invalid sample point: {0}")]
    InvalidPoint(String),
    #[error("point (x0, r, s, z) = {0:?} lies outside the metric domain")]
    OutOfDomain([f64; 4]),
    #[error("grid has no points")]
    EmptyGrid,
    #[error("Lambda vanishes at the point")]
    SingularLambda,
    #[error("phi - z phi_z vanishes at the point")]
    SingularOmega,
    #[error("phi_zz vanishes at the point")]
    SingularPhiZZ,
    #[error("z = 0 is not allowed here")]
    ZDivision,
    #[error("fundamental tensor is singular")]
    SingularMetric,
    #[error("phi depends on s (|phi_s| = {0:e})")]
    NotSIndependent(f64),
    #[error("degenerate denominator in {0}")]
    DegenerateDenominator(&'static str),
    #[error("least-squares fit is rank deficient ({samples} samples for {unknowns} unknowns)")]
    RankDeficientFit { samples: usize, unknowns: usize },
    #[error("Delta = g1 g3 - g2^2 = {0} is not positive")]
    NegativeDelta(f64),
    #[error("g2 vanishes")]
    ZeroG2,
    #[error("alpha = 0: the canonical form is undefined")]
    DegenerateAlphaBeta,
}

pub type Result<T, E = FinslerError> = std::result::Result<T, E>;
