use thiserror::Error;

use crate::torus::Mode;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode mismatch: {left} vs {right}")]
    ModeMismatch { left: Mode, right: Mode },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("window half-width {half_width} too small for shift {shift}")]
    WindowTooSmall { half_width: i64, shift: i64 },

    #[error("sample at n = {n} is not unimodular (|f(n)| = {modulus})")]
    NonUnimodular { n: i64, modulus: f64 },

    #[error("translates by {a} and {b} coincide on the truncated window")]
    IdenticalTranslates { a: i64, b: i64 },

    #[error("table is not associative: ({s}*{t})*{u} != {s}*({t}*{u})")]
    NonAssociative { s: usize, t: usize, u: usize },

    #[error("invalid multiplication table: {0}")]
    InvalidTable(String),

    #[error("not an abelian group: {0}")]
    NotAbelianGroup(String),

    #[error("depth {k} exceeds configured limit {limit}")]
    DepthLimit { k: usize, limit: usize },

    #[error("invalid ring data: {0}")]
    InvalidRing(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
