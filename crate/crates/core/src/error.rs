use thiserror::Error;

use crate::algebra::AlgebraShape;

/// Errors raised by algebra, functional, metric, channel and model operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid algebra shape: {0}")]
    InvalidShape(String),

    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch {
        left: AlgebraShape,
        right: AlgebraShape,
    },

    #[error("element is not self-adjoint (deviation {0:e})")]
    NotSelfAdjoint(f64),

    #[error("functional is not positive (minimum eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("functional is not faithful (minimum eigenvalue {0:e})")]
    NotFaithful(f64),

    #[error("functional is not absolutely continuous w.r.t. the base point (kernel block norm {0:e})")]
    NotAbsolutelyContinuous(f64),

    #[error("Kraus family is not unital (deviation {0:e})")]
    NotUnital(f64),

    #[error("point {point:?} lies outside the model domain")]
    OutOfDomain { point: Vec<f64> },

    #[error("finite-difference step underflow at {point:?}")]
    StepUnderflow { point: Vec<f64> },

    #[error("model is not J-regular at {point:?}: tangent {coordinate} charges the kernel (norm {kernel_norm:e})")]
    NotJRegular {
        point: Vec<f64>,
        coordinate: usize,
        kernel_norm: f64,
    },

    #[error("Gel'fand ideal criteria disagree (expectation {expectation:e}, block norm {block_norm:e})")]
    InconsistentCriteria { expectation: f64, block_norm: f64 },

    #[error("singular linear system")]
    SingularSystem,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
