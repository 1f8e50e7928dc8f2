use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("probability {value} for cell (y={y}, m1={m1}, m2={m2}, x={x}) is outside [0, 1]")]
    NegativeProbability {
        y: u8,
        m1: u8,
        m2: u8,
        x: u8,
        value: f64,
    },

    #[error("arm x={arm} sums to {sum}, expected 1")]
    ArmNotNormalized { arm: u8, sum: f64 },

    #[error("arm x={arm} has no records")]
    EmptyArm { arm: u8 },

    #[error("response type index {0} is outside 0..16384")]
    IndexOutOfRange(usize),

    #[error("counterfactual distribution is invalid: {0}")]
    InvalidCounterfactual(String),

    #[error("linear program is infeasible (phase-one residual {residual:e})")]
    Infeasible { residual: f64 },

    #[error("simplex failed: {0}")]
    NumericalFailure(String),

    #[error("dirichlet draw degenerated after {retries} retries")]
    DegenerateDraw { retries: usize },

    #[error("unknown estimand `{0}`")]
    UnknownEstimand(String),

    #[error("no closed-form bound for {0}; use the LP oracle")]
    NoClosedForm(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable variant name, printed by the CLI on data errors.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NegativeProbability { .. } => "NegativeProbability",
            Error::ArmNotNormalized { .. } => "ArmNotNormalized",
            Error::EmptyArm { .. } => "EmptyArm",
            Error::IndexOutOfRange(_) => "IndexOutOfRange",
            Error::InvalidCounterfactual(_) => "InvalidCounterfactual",
            Error::Infeasible { .. } => "Infeasible",
            Error::NumericalFailure(_) => "NumericalFailure",
            Error::DegenerateDraw { .. } => "DegenerateDraw",
            Error::UnknownEstimand(_) => "UnknownEstimand",
            Error::NoClosedForm(_) => "NoClosedForm",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::MalformedInput(_) => "MalformedInput",
            Error::Io(_) => "Io",
            Error::Csv(_) => "Csv",
            Error::Json(_) => "Json",
        }
    }
}
