//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Weighted headway for a route pair with zero sequence weight.
    #[error("headway undefined for route pair ({from}, {to}): zero sequence weight")]
    UndefinedPair { from: String, to: String },

    /// A route whose conflict set carries no demand cannot be analysed.
    #[error("route {route} has no conflicting demand")]
    NoDemand { route: String },

    /// Hypoexponential fitting is restricted to coefficients of variation in (0, 1].
    #[error("coefficient of variation {cv} not representable by a hypoexponential distribution")]
    UnsupportedCv { cv: f64 },

    /// Eq-of-moments fit failed (degenerate discriminant or denominator).
    #[error("phase-type fit failed for mean={mean}, cv={cv}: {reason}")]
    FitFailed { mean: f64, cv: f64, reason: String },

    /// State enumeration exceeded the configured cap.
    #[error("state space too large: {states} states exceed cap {cap} (set JUNCTIONQ_STATE_CAP to override)")]
    StateSpaceTooLarge { states: usize, cap: usize },

    /// The reachable chain is not strongly connected.
    #[error("chain is reducible: {unreachable} of {states} states cannot return to the initial state")]
    ReducibleChain { states: usize, unreachable: usize },

    /// Stationary solver did not reach the residual tolerance.
    #[error("stationary solve did not converge: residual {residual:.3e} after {sweeps} sweeps (tol {tol:.1e})")]
    SolverDidNotConverge { residual: f64, sweeps: usize, tol: f64 },

    /// Brent's method requires a sign change over the bracket.
    #[error("no sign change on bracket [{a}, {b}]: f(a)={fa:.6e}, f(b)={fb:.6e}")]
    NoSignChange { a: f64, b: f64, fa: f64, fb: f64 },

    /// Brent's method ran out of iterations.
    #[error("root search exceeded {max_iter} iterations; best bracket [{a}, {b}]")]
    RootSearchDidNotConverge { a: f64, b: f64, max_iter: usize },

    /// Hertel's factor is defined for occupation ratios strictly below one.
    #[error("occupation ratio {rho} outside (0, 1) for Hertel scaling")]
    RhoOutOfRange { rho: f64 },

    /// An error raised while evaluating the root function at a specific train count.
    #[error("phi evaluation failed at n_total={n_total}: {source}")]
    PhiEvaluation {
        n_total: f64,
        #[source]
        source: Box<Error>,
    },

    /// Scenario file or schema problems.
    #[error("config error: {0}")]
    Config(String),

    #[error("config error: headway table is missing {} conflicting pair(s) with demand: {}", .pairs.len(), .pairs.join(", "))]
    MissingHeadways { pairs: Vec<String> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn at_n(self, n_total: f64) -> Self {
        Error::PhiEvaluation {
            n_total,
            source: Box::new(self),
        }
    }
}
