use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("space mismatch: expected dims {expected:?}, found {found:?}")]
    SpaceMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("not a valid density matrix: {0}")]
    InvalidState(String),

    /// Fock truncation cannot hold the requested state.
    #[error("truncation too small: {tail_mass:e} probability mass beyond n_max = {n_max}")]
    TruncationTooSmall { n_max: usize, tail_mass: f64 },

    /// More than one independent trace-one null vector of the Liouvillian.
    /// `nullity` is `None` when the system is too large for a dense rank count.
    #[error("degenerate steady state (null-space dimension {})", fmt_nullity(.nullity))]
    DegenerateSteadyState { nullity: Option<usize> },

    #[error("steady-state solve did not converge: residual {residual:e}")]
    ConvergenceFailure { residual: f64 },

    #[error("steady-state solution not Hermitian before symmetrization: asymmetry {asymmetry:e}")]
    AsymmetricSolution { asymmetry: f64 },

    #[error("integration too stiff at t = {time}: {rejections} consecutive step rejections (dt = {dt:e}); use a smaller dt")]
    Stiffness {
        time: f64,
        dt: f64,
        rejections: usize,
    },

    #[error("radiance witness undefined: single-qubit photon number {denominator:e} too small")]
    UndefinedWitness { denominator: f64 },

    #[error("symmetry check failed: {0}")]
    SymmetryViolation(String),

    #[error("linear algebra failure: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn fmt_nullity(n: &Option<usize>) -> String {
    match n {
        Some(n) => n.to_string(),
        None => ">1".to_string(),
    }
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag used as the in-row error marker in sweep output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::SpaceMismatch { .. } => "space-mismatch",
            Error::InvalidState(_) => "invalid-state",
            Error::TruncationTooSmall { .. } => "truncation-too-small",
            Error::DegenerateSteadyState { .. } => "degenerate-steady-state",
            Error::ConvergenceFailure { .. } => "convergence-failure",
            Error::AsymmetricSolution { .. } => "asymmetric-solution",
            Error::Stiffness { .. } => "stiffness",
            Error::UndefinedWitness { .. } => "undefined-witness",
            Error::SymmetryViolation(_) => "symmetry-violation",
            Error::Numerical(_) => "numerical",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }
}
