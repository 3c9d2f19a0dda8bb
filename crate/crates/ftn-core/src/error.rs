use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The folded spectrum has (numerical) nulls and no regularizer was supplied.
    #[error("folded spectrum has a null (minimum {min:.3e}); supply a regularizer > 0")]
    NullSpectrum { min: f64 },

    #[error("trellis needs {states} states, budget is {budget}")]
    StateExplosion { states: f64, budget: usize },

    #[error("every subchannel is null, nothing to allocate power to")]
    AllNull,

    #[error("cyclic prefix of {cp_len} symbols is shorter than the required {required}")]
    CpTooShort { cp_len: usize, required: usize },

    #[error("candidate steering signals are numerically collinear")]
    IllConditioned,

    #[error("basis pulse is not orthogonal at this symbol spacing (leakage {leakage:.2e})")]
    NotOrthogonal { leakage: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
