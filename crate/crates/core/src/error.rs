use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QcaError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operation requires a {expected} automaton, got {got}")]
    WrongModel { expected: &'static str, got: String },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NonUnitary { residual: f64 },

    #[error("band degeneracy at k = {k:?} (omega = {omega:.3e}); the quantity is undefined there")]
    Degenerate { k: Vec<f64>, omega: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("envelope leaks onto the cell boundary (amplitude {leak:.3e} > 1e-12)")]
    EnvelopeTooWide { leak: f64 },

    #[error("state is not narrowband around k0: mass within 4 sigma is {inside:.9}")]
    NotNarrowband { inside: f64 },

    #[error("state mixes frequency branches (opposite-branch weight {weight:.3e})")]
    BranchMixed { weight: f64 },

    #[error("state is not in the {expected} representation")]
    WrongRepresentation { expected: &'static str },

    #[error("packet is wider than half the lattice (mass {mass:.3e} near the antipode)")]
    UnwrapInvalid { mass: f64 },

    #[error("packet not cleared from the interaction region after {steps} steps (R = {reflected:.6}, T = {transmitted:.6}, lingering {lingering:.3e})")]
    NotCleared {
        steps: usize,
        reflected: f64,
        transmitted: f64,
        lingering: f64,
    },

    #[error("point ({omega:.6}, {k:.6}) is outside the deformation domain (image ({big_omega:.6}, {big_k:.6}))")]
    OutOfDomain {
        omega: f64,
        k: f64,
        big_omega: f64,
        big_k: f64,
    },

    #[error("no dominant spectral peak (signal-to-noise {snr:.2} < 3)")]
    NoDominantPeak { snr: f64 },
}

pub type Result<T, E = QcaError> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> QcaError {
    QcaError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
