use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("not a density matrix: {reason}")]
    NotDensity { reason: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The initial state carries an irrelevant part under the chosen projector,
    /// so the homogeneous equation does not apply.
    #[error("{}initial state is not invariant under P_theta (theta = {theta}, residual {residual:.3e})",
        match component { Some(i) => format!("component {i}: "), None => String::new() })]
    NotHomogeneous {
        component: Option<usize>,
        theta: f64,
        residual: f64,
    },

    #[error("generator has eigenvalues with positive real part (max Re = {max_real:.3e}); the solution diverges")]
    Divergent { max_real: f64 },

    #[error("stationary subspace of the generator is not semisimple; no steady state exists")]
    DefectiveKernel,

    #[error("numerical routine failed: {0}")]
    Numerical(String),
}

impl Error {
    /// True for failures caused by a violated numerical precondition rather
    /// than malformed input.
    pub fn is_numerical_precondition(&self) -> bool {
        matches!(
            self,
            Error::NotHomogeneous { .. }
                | Error::Divergent { .. }
                | Error::DefectiveKernel
                | Error::NotHermitian { .. }
                | Error::NotDensity { .. }
                | Error::Numerical(_)
        )
    }
}
