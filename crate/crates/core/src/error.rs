use thiserror::Error;

/// Failures raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} = {value} lies outside [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("infeasible equilibrium: inlet density {u_star} must exceed {bound} (radicand {radicand})")]
    InfeasibleEquilibrium {
        u_star: f64,
        bound: f64,
        radicand: f64,
    },

    #[error("the (A, C) pair is not observable")]
    Unobservable,

    #[error("pole placement missed pole {pole} by relative error {error:e}")]
    PlacementInaccurate { pole: String, error: f64 },

    #[error("eigenvalue iteration did not converge")]
    EigenNoConvergence,

    #[error("kernel solver for {family} did not converge after {sweeps} sweeps (last delta {delta:e})")]
    SolverDivergence {
        family: &'static str,
        sweeps: usize,
        delta: f64,
    },

    #[error("invalid gain: {0}")]
    InvalidGain(String),

    #[error("CFL number {cfl} exceeds the limit {limit}")]
    Cfl { cfl: f64, limit: f64 },

    #[error("blow-up at t = {t} s: density {rho} at node {node}")]
    BlowUp { t: f64, node: usize, rho: f64 },

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("invalid field `{field}`: {reason}")]
    Field { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Field { field: field.into(), reason: reason.into() }
    }

    /// True for failures caused by the configuration rather than by the
    /// numerics or the file system.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::Domain { .. }
                | Error::InfeasibleEquilibrium { .. }
                | Error::Unobservable
                | Error::InvalidGain(_)
                | Error::Cfl { .. }
                | Error::Parse { .. }
                | Error::Field { .. }
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::Csv(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
