//! Minimal faces (plaquettes) of planar lattice graphs and the field
//! periodicities they imply.

mod faces;
mod period;

pub use faces::{
    area_classes, check_planar, enumerate_faces, face_walks, flake_faces, DirectedBond, FaceVertex, FaceWalk,
    FlakeFace, Plaquette,
};
pub use period::{
    beat_period, beat_periods, period_of_area, Beat, FluxQuantum, ANGSTROM2_TO_M2, ELEMENTARY_CHARGE, MAX_MULTIPLE,
    PLANCK,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlaquetteError {
    #[error("non-planar embedding: {0}")]
    Embedding(String),
    #[error("domain error: {0}")]
    Domain(String),
}
