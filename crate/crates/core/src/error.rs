use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("exact division failed: nonzero remainder")]
    NotDivisible,

    /// The numerator of `D f` was not divisible by one of the denominator
    /// forms, i.e. the input was not quasi-invariant along that hyperplane.
    #[error("pole along {form} = 0 does not cancel (x-exponent {x_exponent:?})")]
    PoleCancellationFailure { form: String, x_exponent: Vec<i32> },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("degree bound violated after step {step}: z-degree {degree} > {bound}")]
    DegreeAnomaly { step: usize, degree: u32, bound: u32 },

    #[error("axiom {axiom} violated: {detail}")]
    AxiomViolation { axiom: u8, detail: String },

    #[error("eigen-relation violated: {0}")]
    EigenViolation(String),

    #[error("{check}: residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualExceeded { check: String, residual: f64, tolerance: f64 },

    #[error("point is within {distance:e} of the singular locus {locus}")]
    HyperplaneHit { locus: String, distance: f64 },

    #[error("height {requested} exceeds the configured maximum {max}")]
    HeightBudget { requested: u32, max: u32 },

    #[error("expansion exponent {exponent:?} lies outside L+")]
    SupportViolation { exponent: Vec<i32> },

    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("evaluation hit a pole: {0}")]
    PoleHit(String),

    #[error("not quasi-invariant; failing conditions: {0:?}")]
    NotQuasiInvariant(Vec<String>),

    #[error("malformed serialized data: {0}")]
    Deserialization(String),
}
