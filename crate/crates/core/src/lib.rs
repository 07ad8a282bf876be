//! Weyl, Dirac and Maxwell quantum cellular automata.

pub mod automata;
pub mod deformed;
pub mod dispersive;
pub mod error;
pub mod linalg;
pub mod maxwell;
pub mod packets;
pub mod pheno;
pub mod scattering;
pub mod spectral;
pub mod zitter;

pub use automata::{AutomatonSpec, Chirality, CoinOperator, Model, WaveVector};
pub use error::{QcaError, Result};
