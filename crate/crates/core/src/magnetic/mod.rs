//! Peierls substitution and assembly of the magnetic tight-binding
//! Hamiltonian H(B) of a flake.
//!
//! Gauge: A = (B·y, 0, 0). The phase picked up from site n to site m is the
//! straight-line integral `(2π/Φ₀) B ȳ (x_m − x_n)`, with ȳ the midpoint
//! ordinate; the midpoint rule is exact for this linear gauge.

mod sparse;

pub use sparse::{CsrPattern, SparseHermitian};

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::Vec2;
use crate::plaquette::{FluxQuantum, ANGSTROM2_TO_M2};
use crate::structure::{Flake, OnsiteEnergies, StructureError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MagneticError {
    #[error("matrix is not Hermitian: {0}")]
    NotHermitian(String),
    #[error(transparent)]
    Config(#[from] StructureError),
    #[error("field must be finite, got {0}")]
    NonFiniteField(f64),
}

/// Peierls phase (radians) for hopping from `pos_n` to `pos_m` (Å) in a
/// perpendicular field `b` (Tesla).
pub fn peierls_phase(pos_n: Vec2, pos_m: Vec2, b: f64, flux_quantum: FluxQuantum) -> f64 {
    phase_coefficient(pos_n, pos_m, flux_quantum) * b
}

/// Phase per Tesla for the bond n → m.
fn phase_coefficient(pos_n: Vec2, pos_m: Vec2, flux_quantum: FluxQuantum) -> f64 {
    let mid_y = 0.5 * (pos_n.y + pos_m.y);
    TAU / flux_quantum.value() * mid_y * (pos_m.x - pos_n.x) * ANGSTROM2_TO_M2
}

#[derive(Debug, Clone, Copy)]
enum Entry {
    Diagonal(f64),
    /// Hopping amplitude and phase per Tesla for this storage direction.
    Bond {
        t: f64,
        phase_per_tesla: f64,
    },
}

/// Reusable assembler: builds the CSR pattern and per-entry phase
/// coefficients of a flake once, then fills values for any field.
#[derive(Debug, Clone)]
pub struct Assembler {
    pattern: Arc<CsrPattern>,
    entries: Vec<Entry>,
}

impl Assembler {
    pub fn new(flake: &Flake, onsite: &OnsiteEnergies, flux_quantum: FluxQuantum) -> Result<Self, MagneticError> {
        let n = flake.len();
        let diag: Vec<f64> = flake
            .sites()
            .iter()
            .map(|s| onsite.get(&s.species))
            .collect::<Result<_, _>>()?;
        let mut rows: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for e in flake.edges() {
            rows[e.n].push(e.m);
            rows[e.m].push(e.n);
        }
        let pattern = Arc::new(CsrPattern::from_rows(rows));
        let mut entries = vec![Entry::Diagonal(0.0); pattern.nnz()];
        for (i, &d) in diag.iter().enumerate() {
            entries[pattern.find(i, i).expect("diagonal stored")] = Entry::Diagonal(d);
        }
        let pos = |i: usize| flake.sites()[i].position;
        for e in flake.edges() {
            let c = phase_coefficient(pos(e.n), pos(e.m), flux_quantum);
            let fwd = pattern.find(e.n, e.m).expect("edge stored");
            let bwd = pattern.find(e.m, e.n).expect("edge stored");
            entries[fwd] = Entry::Bond {
                t: e.t,
                phase_per_tesla: c,
            };
            entries[bwd] = Entry::Bond {
                t: e.t,
                phase_per_tesla: -c,
            };
        }
        Ok(Assembler { pattern, entries })
    }

    pub fn pattern(&self) -> &Arc<CsrPattern> {
        &self.pattern
    }

    /// H(B) sharing this assembler's sparsity pattern.
    pub fn hamiltonian(&self, b: f64) -> Result<SparseHermitian, MagneticError> {
        if !b.is_finite() {
            return Err(MagneticError::NonFiniteField(b));
        }
        let values = self
            .entries
            .iter()
            .map(|e| match *e {
                Entry::Diagonal(d) => Complex64::new(d, 0.0),
                Entry::Bond { t, phase_per_tesla } => Complex64::from_polar(t, phase_per_tesla * b),
            })
            .collect();
        Ok(SparseHermitian::from_parts(self.pattern.clone(), values))
    }
}

/// H(B) for a flake: `H[n,m] = t e^{iφ(n,m,B)}`, `H[m,n]` its conjugate and
/// `H[n,n]` the on-site energy of the species at n.
pub fn assemble(
    flake: &Flake,
    onsite: &OnsiteEnergies,
    b: f64,
    flux_quantum: FluxQuantum,
) -> Result<SparseHermitian, MagneticError> {
    Assembler::new(flake, onsite, flux_quantum)?.hamiltonian(b)
}
