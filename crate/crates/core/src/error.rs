use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("site index {index} out of range 1..={n_sites}")]
    SiteOutOfRange { index: usize, n_sites: usize },

    #[error("steady state is not unique (all reservoir rates vanish or the Lyapunov system is singular)")]
    NonUniqueSteadyState,

    #[error("steady state is numerically ill-determined: slowest relaxation rate {slowest_rate:.3e} is below double-precision resolution")]
    IllConditioned { slowest_rate: f64 },

    #[error("unphysical correlation matrix{}: eigenvalues span [{min_eig:.3e}, {max_eig:.3e}], hermiticity residual {hermiticity:.3e}", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    Physicality {
        step: Option<usize>,
        min_eig: f64,
        max_eig: f64,
        hermiticity: f64,
    },

    #[error("logarithm of C/(1-C) is singular: eigenvalue {eigenvalue:.3e} at the boundary of [0,1] with nonzero coupling")]
    SingularLogarithm { eigenvalue: f64 },

    #[error("trace expected real, imaginary residue {0:.3e}")]
    ImaginaryResidue(f64),

    #[error("singular linear system: {0}")]
    SingularSolve(String),

    #[error("eigenvalue {re:.6e}{im:+.3e}i leaves the admissible real interval")]
    ComplexEigenvalue { re: f64, im: f64 },

    #[error("system of {n_sites} sites exceeds the Fock-space limit of {max} sites")]
    TooLarge { n_sites: usize, max: usize },

    #[error("jump probability {probability:.3} per step exceeds 1; reduce the time step")]
    StepTooLarge { probability: f64 },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Stable machine-readable class of the error.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation(_) => "validation",
            Error::Domain(_) => "domain",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::SiteOutOfRange { .. } => "site_out_of_range",
            Error::NonUniqueSteadyState => "non_unique_steady_state",
            Error::IllConditioned { .. } => "ill_conditioned",
            Error::Physicality { .. } => "physicality",
            Error::SingularLogarithm { .. } => "singular_logarithm",
            Error::ImaginaryResidue(_) => "imaginary_residue",
            Error::SingularSolve(_) => "singular_solve",
            Error::ComplexEigenvalue { .. } => "complex_eigenvalue",
            Error::TooLarge { .. } => "too_large",
            Error::StepTooLarge { .. } => "step_too_large",
            Error::Internal(_) => "internal",
        }
    }
}
