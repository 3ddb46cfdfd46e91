use thiserror::Error;

use crate::field::Rational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("the zero polynomial has no roots to isolate")]
    ZeroPolynomial,
    #[error("the zero function has no zero set")]
    ZeroFunction,
    #[error("pole at t = {0}")]
    Pole(Rational),
    #[error("gcrd of two zero operators is undefined")]
    BothZero,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unsupported expression: {0}")]
    Unsupported(String),
    #[error("invalid piece: {0}")]
    InvalidPiece(String),
    #[error("no jet at t = {point} of order {order}: derivative diverges")]
    NoJet { point: Rational, order: u32 },
    #[error("jet not computable at t = {point}: {reason}")]
    JetUnavailable { point: Rational, reason: String },
    #[error("incompatible: {0}")]
    Incompatible(String),
    #[error("interval [{lo}, {hi}] is not contained in the domain")]
    OutOfDomain { lo: Rational, hi: Rational },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("verification failed: {0}")]
    Verification(String),
}
