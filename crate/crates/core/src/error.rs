use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error(
        "no propagating cavity mode: sin^2(theta)/n_eff^2 = {ratio} >= 1 \
         (angle {angle_deg} deg, n_eff {n_eff}); the field is evanescent at this angle"
    )]
    Evanescent { angle_deg: f64, n_eff: f64, ratio: f64 },

    #[error(
        "mode {mode} is weakly coupled: N g^2 - (kappa - gamma)^2 / 4 = {radicand} cm^-2 < 0, \
         no real polariton splitting exists"
    )]
    WeakCoupling { mode: usize, radicand: f64 },

    #[error("excitation manifold n = {0} is not supported (only 0, 1, 2)")]
    UnsupportedManifold(usize),

    #[error("eigensolver failed on the {0}-excitation block")]
    Eigen(usize),

    #[error("coherence {label} has zero dephasing; the resonance is a pole on the real frequency axis")]
    ZeroDephasing { label: String },

    #[error("anharmonicity formula is singular: delta^2 = 16 g^2 (delta = {detuning}, g = {coupling})")]
    FormulaPole { detuning: f64, coupling: f64 },

    #[error("no assigned peak matches `{0}`")]
    MissingPeak(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
