use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{op}: zero has no unit part")]
    ZeroValue { op: &'static str },
    #[error("{op}: invariant t = {t} must avoid 0 and 1")]
    DegenerateT { op: &'static str, t: String },
    #[error("{op}: place is unramified for the character (n = 0); use eval_orbital_unramified")]
    UseUnramified { op: &'static str },
    #[error("{op}: place is ramified (n = {n}); use the ramified evaluators")]
    UseRamified { op: &'static str, n: u32 },
    #[error("character construction: {0}")]
    Character(String),
    #[error("{op}: character is not primitive")]
    Imprimitive { op: &'static str },
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("{op}: parameter out of window: {detail}")]
    OutOfWindow { op: &'static str, detail: String },
    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
    #[error("form {label}: Hecke violation at p = {p}, exponent {exponent}")]
    Hecke { label: String, p: u64, exponent: u32 },
    #[error("{0}")]
    Unsupported(String),
    #[error("need at least {needed} coefficients, have {have}")]
    InsufficientCoefficients { needed: usize, have: usize },
    #[error("root number fit is ill-conditioned (|det| = {det:e}); supply more coefficients")]
    IllConditioned { det: f64 },
    #[error("fitted root number has modulus {modulus}, expected 1")]
    RootNumber { modulus: f64 },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Errors caused by bad input values rather than by mathematical domain restrictions.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::NotPrime(_)
                | Error::Character(_)
                | Error::NotFundamental(_)
                | Error::Parse { .. }
                | Error::Argument(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
