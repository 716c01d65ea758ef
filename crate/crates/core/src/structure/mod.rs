//! Crystal structure ingestion, distance-based hopping assignment and
//! finite flake construction.
//!
//! Everything here is strictly two-dimensional: z coordinates and the third
//! lattice vector are dropped at parse time.

mod builtin;
mod config;
mod flake;
mod lattice;
mod neighbors;
mod xyz;

pub use builtin::{honeycomb, kagome, porous_honeycomb, square, BuiltinLattice, BuiltinSpec, PORE_SCALE_THREE_HALVES};
pub use config::{parse_hopping_config, HoppingConfig, OnsiteEnergies};
pub use flake::{build_flake, build_flake_with_limit, Edge, Flake, DEFAULT_MAX_SITES};
pub use lattice::{assign_hoppings, Bond, HoppingRule, Lattice, Site, DISTANCE_TOLERANCE};
pub use neighbors::CellList;
pub use xyz::parse_structure;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructureError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("invalid hopping rule: {0}")]
    InvalidRule(String),
    #[error(
        "ambiguous hopping: sites {site_a} and {site_b} at distance {distance:.6} Å match rules {rule_a} and {rule_b}"
    )]
    AmbiguousHopping {
        site_a: usize,
        site_b: usize,
        distance: f64,
        rule_a: usize,
        rule_b: usize,
    },
    #[error("flake of {requested} sites exceeds the limit of {max}")]
    TooLarge { requested: usize, max: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no on-site energy configured for species {0:?}")]
    UnknownSpecies(String),
    #[error("unknown built-in lattice {0:?}")]
    UnknownBuiltin(String),
}
