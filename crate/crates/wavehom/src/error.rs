//! Error type shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cell problem right-hand side has mean {mean:.3e}; (I - pi) must be applied first")]
    NonZeroMeanRhs { mean: f64 },

    #[error("{solver} did not converge: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence {
        solver: &'static str,
        residual: f64,
        iterations: usize,
    },

    #[error("requested order {requested} exceeds the supported maximum {max}")]
    OrderTooLarge { requested: usize, max: usize },

    #[error("profile provides derivatives up to order {available}, {required} are needed")]
    InsufficientDerivatives { required: usize, available: usize },

    #[error("corrector table has depth {depth}, order {required} is needed")]
    TableTooShallow { required: usize, depth: usize },

    #[error("second-order operator is degenerate: {0}")]
    DegenerateA2(String),

    #[error("eps = {eps} exceeds the stability threshold eps0 = {eps0:.4e}")]
    EpsilonTooLarge { eps: f64, eps0: f64 },

    #[error("periodic box of length {box_len} is too small: waves reach {reach:.3} before t = {t_end}")]
    BoxTooSmall {
        box_len: f64,
        reach: f64,
        t_end: f64,
    },

    #[error("time step {dt:.3e} violates the CFL limit {limit:.3e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("time {t} was not stored by the solver")]
    TimeNotStored { t: f64 },

    #[error("fit window [{t1}, {t2}] is too short: need t2 >= 4 t1 and t1 >= 2")]
    WindowTooShort { t1: f64, t2: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
