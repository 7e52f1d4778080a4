use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument was outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// The model description is structurally malformed (normalization,
    /// decomposability, shape). Distinct from criticality violations.
    #[error("structural model error: {0}")]
    Structural(String),

    /// The model is structurally fine but violates a criticality condition.
    #[error("model violates criticality hypothesis: {0}")]
    NotCritical(String),

    /// A configured iteration or population budget was exhausted.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    /// Input collections were empty where data is required.
    #[error("empty input: {0}")]
    EmptyInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
