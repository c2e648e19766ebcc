use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown material `{name}` (available: {available})")]
    UnknownMaterial { name: String, available: String },

    #[error("unknown exciton `{name}` (available: {available})")]
    UnknownExciton { name: String, available: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("layer stack is empty")]
    EmptyStack,

    #[error("no transmission peak found in [{lo_nm} nm, {hi_nm} nm]")]
    NoPeak { lo_nm: f64, hi_nm: f64 },

    #[error("field profile does not match the layer stack: {0}")]
    FieldMismatch(String),

    #[error("stack carries no quantum-well sheets")]
    NoSheets,

    #[error("index ordering violated: expected n1 > n2, got n1 = {n1}, n2 = {n2}")]
    IndexOrdering { n1: f64, n2: f64 },

    #[error("stable beyond bracket: P({t_top_k} K) = {p_top:.3e} < threshold {threshold}")]
    NoCrossing { threshold: f64, t_top_k: f64, p_top: f64 },

    #[error("dissociated below bracket: P({t_bottom_k} K) = {p_bottom:.3e} >= threshold {threshold}")]
    BelowBracket { threshold: f64, t_bottom_k: f64, p_bottom: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for failures of a numerical procedure rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoPeak { .. }
                | Error::NoCrossing { .. }
                | Error::BelowBracket { .. }
                | Error::Numerical(_)
        )
    }
}
