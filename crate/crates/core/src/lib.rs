//! Magnetic tight-binding spectra of periodic 2D lattices.
//!
//! Pipeline: parse a structure, assign hoppings by distance, find plaquettes
//! and their field periods, build finite flakes with Peierls phases, and
//! compute densities of states across a field sweep with the kernel
//! polynomial method. Dense and magnetic-Bloch oracles serve as ground truth.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod geometry;
pub mod kpm;
pub mod magnetic;
pub mod oracle;
pub mod plaquette;
pub mod structure;
pub mod sweep;

use thiserror::Error;

/// Any error raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Structure(#[from] structure::StructureError),
    #[error(transparent)]
    Plaquette(#[from] plaquette::PlaquetteError),
    #[error(transparent)]
    Magnetic(#[from] magnetic::MagneticError),
    #[error(transparent)]
    Kpm(#[from] kpm::KpmError),
    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
    #[error(transparent)]
    Sweep(#[from] sweep::SweepError),
}
