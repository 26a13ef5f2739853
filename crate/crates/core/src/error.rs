use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid subband index {0} (expected 1 or 2)")]
    InvalidSubband(u8),

    #[error("fermi level solve did not converge for density {density:e} cm^-2")]
    FermiLevel { density: f64 },

    #[error("newton solver did not converge after {iterations} iterations (relative residual {residual:e}): {reason}")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        reason: String,
    },

    #[error("converged state violates physical bounds: {0}")]
    Unphysical(String),

    #[error("integration unstable at t = {t} ps; reduce dt (currently {dt} ps)")]
    Unstable { t: f64, dt: f64 },

    #[error("integration reached t_max = {t_max} ps with rhs norm {norm:e} above tolerance")]
    Timeout { t_max: f64, norm: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter { .. } | Error::InvalidSubband(_) => 2,
            Error::FermiLevel { .. }
            | Error::NonConvergence { .. }
            | Error::Unphysical(_)
            | Error::Unstable { .. }
            | Error::Timeout { .. } => 3,
            Error::Format(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
        }
    }
}
