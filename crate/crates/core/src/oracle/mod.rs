//! Independent reference spectra: dense exact diagonalization of small
//! Hamiltonians and magnetic Bloch (Harper) solvers at rational flux.

mod bloch;
mod dense;

pub use bloch::{
    farey_fluxes, harper_matrix_square, harper_spectrum_honeycomb, harper_spectrum_honeycomb_gauge,
    harper_spectrum_square, magnetic_bloch_spectrum, Gauge, HarperSpectrum, RationalFlux, DEFAULT_K_GRID, MAX_Q,
};
pub use dense::{broadened_dos, exact_dos, exact_eigenvalues, MAX_DENSE_DIM};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("matrix dimension {dim} exceeds the dense limit of {max}")]
    TooLarge { dim: usize, max: usize },
    #[error("invalid flux {p}/{q}: {reason}")]
    InvalidFlux { p: i64, q: u64, reason: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
}
