use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coefficient modes differ: {left} vs {right}")]
    ModeMismatch { left: String, right: String },

    #[error("division by the zero series")]
    DivisionByZero,

    #[error("leading coefficient is below the zero threshold of {mode}")]
    NegligibleLeading { mode: String },

    #[error("series has a nonzero constant term; its τ-primitive is logarithmic")]
    LogarithmicPrimitive,

    #[error("operation needs a floating-point mode: {0}")]
    ExactModeUnsupported(&'static str),

    #[error("Im τ = {im} is below the evaluation floor {floor}")]
    BelowEvaluationFloor { im: f64, floor: f64 },

    #[error("estimated tail {tail:e} exceeds tolerance {tol:e} at truncation {trunc}")]
    TailBound { tail: f64, tol: f64, trunc: i64 },

    #[error("point lies outside the domain of the residue system: {0}")]
    OutsideDomain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix ({a}, {b}; {c}, {d}) does not have determinant 1")]
    NotUnimodular { a: i64, b: i64, c: i64, d: i64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64, last: Vec<f64> },

    #[error("line search collapsed at iteration {iterations} (residual {residual:e})")]
    StepCollapse { iterations: usize, residual: f64, last: Vec<f64> },

    #[error("singular linear system")]
    Singular,

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("path cannot avoid poles: {0}")]
    PoleProximity(String),

    #[error("J is not real/monotone on the arc: {0}")]
    ArcInversion(String),

    #[error("eta-quotient grid too fine: refinement {refinement}, {length} coefficients")]
    GridOverflow { refinement: i64, length: i64 },

    #[error("parse error: {0}")]
    Parse(String),
}
