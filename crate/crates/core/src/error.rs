use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("invalid field `{field}`: {reason}")]
    InvalidField { field: String, reason: String },
    #[error("config parse error: {0}")]
    Config(String),
    #[error("battery depleted: slot needs {need} J but only {have} J stored")]
    BatteryDepleted { need: f64, have: f64 },
    #[error("subcarrier {i} in slot {n} is shared by users {a} and {b}")]
    Exclusivity {
        i: usize,
        n: usize,
        a: usize,
        b: usize,
    },
    #[error("infeasible: violated constraint family {family}")]
    Infeasible { family: String },
    #[error("iteration limit reached in {0}")]
    IterationLimit(String),
    #[error("vertex cap {0} exceeded")]
    VertexCap(usize),
    #[error("non-monotone SCA step: objective {before} -> {after}")]
    NonMonotone { before: f64, after: f64 },
    #[error("degenerate linearization point: {0}")]
    Degenerate(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("oracle state-action space {size} exceeds cap {cap}")]
    OracleCap { size: f64, cap: f64 },
    #[error("slot {slot}: {source}")]
    AtSlot {
        slot: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn invalid(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    pub fn infeasible(family: impl Into<String>) -> Self {
        Error::Infeasible {
            family: family.into(),
        }
    }

    pub fn at_slot(self, slot: usize) -> Self {
        Error::AtSlot {
            slot,
            source: Box::new(self),
        }
    }

    /// True when the root cause is an infeasible instance.
    pub fn is_infeasible(&self) -> bool {
        match self {
            Error::Infeasible { .. } => true,
            Error::AtSlot { source, .. } => source.is_infeasible(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
