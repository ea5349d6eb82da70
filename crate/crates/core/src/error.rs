use thiserror::Error;

use crate::rational::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("expected a table of {expected} entries, found {found}")]
    Arity { expected: usize, found: usize },

    #[error(
        "marginal is ill-defined: the box signals from party {party} toward the traced-out parties"
    )]
    IllDefinedMarginal { party: char },

    #[error("mixture weights sum to {0}, expected 1")]
    WeightSum(Rational),

    #[error("mixture weight {0} is negative")]
    NegativeWeight(Rational),

    #[error("mixture needs one weight per box and at least one box")]
    MixtureShape,

    #[error("parity constraints contradict each other at inputs x={0} y={1} z={2}")]
    Contradiction(u8, u8, u8),

    #[error("malformed constraint: {0}")]
    MalformedConstraint(String),

    #[error("unknown builtin box `{0}`")]
    UnknownBuiltin(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("box is not a valid no-signalling box: {0}")]
    InvalidBox(String),

    #[error("invalid wiring: {0}")]
    InvalidWiring(String),

    #[error("malformed linear program: {0}")]
    MalformedLp(String),

    #[error("invalid GYNI weights: {0}")]
    InvalidWeights(String),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
