use thiserror::Error;

/// Errors raised anywhere in the scattering pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("division by zero at recursion stage {stage}")]
    DivideByZero { stage: usize },

    #[error("degenerate system: {0}")]
    Degenerate(String),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("energy {energy} lies within {distance:e} of eigenvalue {eigenvalue}")]
    Pole {
        energy: f64,
        eigenvalue: f64,
        distance: f64,
    },

    #[error("|W+| = {w_plus}, |W-| = {w_minus} are not unimodular")]
    NotUnimodular { w_plus: f64, w_minus: f64 },

    #[error("potential evaluation failed at x = {x}: {reason}")]
    PotentialEval { x: f64, reason: String },

    #[error("index {index} outside [{lo}, {hi}]")]
    Index { index: i64, lo: i64, hi: i64 },

    #[error("energy {energy} could not be evaluated: {reason}")]
    Unevaluable { energy: f64, reason: String },

    #[error("no plateau meets tolerance {tolerance:e}; smallest variation found {best_variation:e}")]
    NoPlateau { tolerance: f64, best_variation: f64 },

    #[error("oracle grid unresolved: unitarity defect {defect:e}")]
    Resolution { defect: f64 },

    #[error(transparent)]
    Parse(#[from] crate::potentials::expr::ParseError),
}

pub type Result<T> = std::result::Result<T, Error>;
