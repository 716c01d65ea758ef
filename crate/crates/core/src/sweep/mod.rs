//! Magnetic-field sweeps: DOS(E, B) on a shared energy grid, energy
//! centering, periodicity detection and spectrum serialization.

mod io;
mod period;

pub use io::{read_binary, write_binary, write_csv, write_pgm, BINARY_MAGIC};
pub use period::{autocorrelation, measure_period, PeriodCandidate, MIN_PERIOD_POINTS, STRENGTH_THRESHOLD};

use rayon::prelude::*;
use thiserror::Error;

use crate::kpm::{estimate_bounds, mix_seed, moments, reconstruct_dos, KpmError, KpmParams, SpectralBounds};
use crate::magnetic::{Assembler, MagneticError};
use crate::plaquette::FluxQuantum;
use crate::structure::{Flake, OnsiteEnergies};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Kpm(#[from] KpmError),
    #[error(transparent)]
    Magnetic(#[from] MagneticError),
    #[error("cannot center spectrum: {0}")]
    Centering(String),
    #[error("insufficient sweep range: {0}")]
    InsufficientRange(String),
    #[error("malformed spectrum file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPlan {
    pub b_min: f64,
    pub b_max: f64,
    pub b_points: usize,
    pub kpm: KpmParams,
    pub flake_dims: (usize, usize),
}

impl SweepPlan {
    pub fn validate(&self) -> Result<(), SweepError> {
        if !self.b_min.is_finite() || !self.b_max.is_finite() || self.b_min > self.b_max {
            return Err(SweepError::InvalidPlan(format!(
                "need finite b_min <= b_max, got [{}, {}]",
                self.b_min, self.b_max
            )));
        }
        if self.b_points < 1 {
            return Err(SweepError::InvalidPlan("b_points must be >= 1".into()));
        }
        if self.b_points == 1 && self.b_min != self.b_max {
            return Err(SweepError::InvalidPlan("a single B point needs b_min == b_max".into()));
        }
        self.kpm.validate()?;
        Ok(())
    }

    /// Uniform B grid; the last point is `b_max` exactly.
    pub fn b_values(&self) -> Vec<f64> {
        if self.b_points == 1 {
            return vec![self.b_min];
        }
        let step = (self.b_max - self.b_min) / (self.b_points - 1) as f64;
        (0..self.b_points)
            .map(|i| {
                if i == self.b_points - 1 {
                    self.b_max
                } else {
                    self.b_min + step * i as f64
                }
            })
            .collect()
    }
}

/// DOS(E, B) matrix, row-major with one row per B value.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub b_values: Vec<f64>,
    pub energies: Vec<f64>,
    pub dos: Vec<f64>,
    pub centered: bool,
}

impl Spectrum {
    pub fn new(b_values: Vec<f64>, energies: Vec<f64>, dos: Vec<f64>, centered: bool) -> Result<Self, SweepError> {
        if dos.len() != b_values.len() * energies.len() {
            return Err(SweepError::Format(format!(
                "dos has {} entries for {}x{} grid",
                dos.len(),
                b_values.len(),
                energies.len()
            )));
        }
        Ok(Spectrum {
            b_values,
            energies,
            dos,
            centered,
        })
    }

    pub fn b_points(&self) -> usize {
        self.b_values.len()
    }

    pub fn energy_points(&self) -> usize {
        self.energies.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.energies.len();
        &self.dos[i * n..(i + 1) * n]
    }

    /// Trapezoidal integral of row `i`.
    pub fn row_integral(&self, i: usize) -> f64 {
        crate::kpm::trapezoid(&self.energies, self.row(i))
    }
}

/// Stream seed for a field value, keyed on B rounded to 1 µT so refined
/// grids reuse the same noise at shared fields.
pub fn field_seed(global: u64, b: f64) -> u64 {
    mix_seed(global, (b * 1e6).round() as i64 as u64)
}

/// Runs KPM at every B of the plan on one shared energy grid.
pub fn run_sweep(
    flake: &Flake,
    onsite: &OnsiteEnergies,
    flux_quantum: FluxQuantum,
    plan: &SweepPlan,
) -> Result<Spectrum, SweepError> {
    plan.validate()?;
    if flake.dims() != plan.flake_dims {
        return Err(SweepError::InvalidPlan(format!(
            "plan expects a {:?} flake, got {:?}",
            plan.flake_dims,
            flake.dims()
        )));
    }
    let assembler = Assembler::new(flake, onsite, flux_quantum)?;
    let bounds = global_bounds(&assembler, plan)?;
    let b_values = plan.b_values();
    let rows: Vec<Vec<f64>> = b_values
        .par_iter()
        .map(|&b| -> Result<Vec<f64>, SweepError> {
            let h = assembler.hamiltonian(b)?;
            let params = KpmParams {
                rng_seed: field_seed(plan.kpm.rng_seed, b),
                ..plan.kpm
            };
            let mu = moments(&h, &bounds, &params)?;
            let curve = reconstruct_dos(&mu, &bounds, &params)?;
            Ok(curve.density.into_iter().map(|v| v.max(0.0)).collect())
        })
        .collect::<Result<_, _>>()?;
    let energies = crate::kpm::uniform_grid(bounds.e_min, bounds.e_max, plan.kpm.energy_points);
    Spectrum::new(b_values, energies, rows.concat(), false)
}

/// Union of Lanczos bounds at b_min, b_max and three interior fields.
fn global_bounds(assembler: &Assembler, plan: &SweepPlan) -> Result<SpectralBounds, SweepError> {
    let span = plan.b_max - plan.b_min;
    let probes = [0.0, 0.25, 0.5, 0.75, 1.0].map(|f| plan.b_min + f * span);
    let mut acc: Option<SpectralBounds> = None;
    for b in probes {
        let h = assembler.hamiltonian(b)?;
        let bb = estimate_bounds(&h, plan.kpm.rescale_margin, field_seed(plan.kpm.rng_seed, b))?;
        acc = Some(acc.map_or(bb, |a| a.union(&bb)));
    }
    Ok(acc.expect("five probes"))
}

/// Shifts the energy grid so the support of the spectrum (DOS above
/// 10⁻⁶ of its maximum) is centred on zero. Already-centred spectra are
/// returned unchanged.
pub fn center_energies(spectrum: &Spectrum) -> Result<Spectrum, SweepError> {
    if spectrum.centered {
        return Ok(spectrum.clone());
    }
    let max = spectrum.dos.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(SweepError::Centering("spectrum is identically zero".into()));
    }
    let floor = 1e-6 * max;
    let n = spectrum.energy_points();
    let supported = |j: usize| (0..spectrum.b_points()).any(|i| spectrum.dos[i * n + j] > floor);
    let lo = (0..n).find(|&j| supported(j)).expect("max > floor somewhere");
    let hi = (0..n).rev().find(|&j| supported(j)).expect("max > floor somewhere");
    let shift = -0.5 * (spectrum.energies[lo] + spectrum.energies[hi]);
    let mut out = spectrum.clone();
    for e in &mut out.energies {
        *e += shift;
    }
    out.centered = true;
    Ok(out)
}
