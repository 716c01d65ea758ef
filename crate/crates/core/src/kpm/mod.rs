//! Kernel Polynomial Method: Chebyshev moments of a rescaled Hamiltonian,
//! estimated stochastically with random-phase vectors, and Jackson-damped
//! reconstruction of the density of states.

mod bounds;
mod moments;
mod reconstruct;

pub use bounds::{estimate_bounds, LANCZOS_STEPS};
pub use moments::moments;
pub use reconstruct::{jackson_kernel, jackson_sigma, reconstruct_dos};

use thiserror::Error;

use crate::magnetic::SparseHermitian;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KpmError {
    #[error("invalid KPM parameters: {0}")]
    InvalidParams(String),
    #[error("matrix of dimension {0} is too small for spectral bounds")]
    Degenerate(usize),
    #[error("Chebyshev recursion diverged at order {order}: bounds do not contain the spectrum")]
    BoundsViolated { order: usize },
    #[error("invalid moments: {0}")]
    InvalidMoments(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KpmParams {
    pub num_moments: usize,
    pub num_random_vectors: usize,
    pub energy_points: usize,
    /// Fraction of the half-width kept free at each end of [−1, 1].
    pub rescale_margin: f64,
    pub rng_seed: u64,
}

impl Default for KpmParams {
    fn default() -> Self {
        KpmParams {
            num_moments: 512,
            num_random_vectors: 3,
            energy_points: 512,
            rescale_margin: 0.01,
            rng_seed: 0,
        }
    }
}

impl KpmParams {
    pub fn validate(&self) -> Result<(), KpmError> {
        let bad = |m: String| Err(KpmError::InvalidParams(m));
        if self.num_moments < 2 {
            return bad(format!("num_moments must be >= 2, got {}", self.num_moments));
        }
        if self.num_random_vectors < 1 {
            return bad("num_random_vectors must be >= 1".into());
        }
        if self.energy_points < 2 {
            return bad(format!("energy_points must be >= 2, got {}", self.energy_points));
        }
        if !(self.rescale_margin > 0.0 && self.rescale_margin < 0.5) {
            return bad(format!(
                "rescale_margin must lie in (0, 0.5), got {}",
                self.rescale_margin
            ));
        }
        Ok(())
    }
}

/// Energy interval (eV) assumed to contain the whole spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    pub e_min: f64,
    pub e_max: f64,
}

impl SpectralBounds {
    pub fn new(e_min: f64, e_max: f64) -> Result<Self, KpmError> {
        if !(e_min < e_max) || !e_min.is_finite() || !e_max.is_finite() {
            return Err(KpmError::InvalidParams(format!(
                "spectral bounds need e_min < e_max, got [{e_min}, {e_max}]"
            )));
        }
        Ok(SpectralBounds { e_min, e_max })
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.e_min + self.e_max)
    }

    pub fn width(&self) -> f64 {
        self.e_max - self.e_min
    }

    /// Smallest interval containing both.
    pub fn union(&self, other: &SpectralBounds) -> SpectralBounds {
        SpectralBounds {
            e_min: self.e_min.min(other.e_min),
            e_max: self.e_max.max(other.e_max),
        }
    }

    /// Affine map `E ↦ (E − shift) / scale` sending the bounds onto
    /// `[−1 + margin, 1 − margin]`; returns `(shift, scale)`.
    pub fn rescaling(&self, margin: f64) -> (f64, f64) {
        (self.center(), 0.5 * self.width() / (1.0 - margin))
    }
}

/// Density of states on a uniform, ascending energy grid (states/eV).
#[derive(Debug, Clone, PartialEq)]
pub struct DosCurve {
    pub energies: Vec<f64>,
    pub density: Vec<f64>,
}

impl DosCurve {
    /// Trapezoidal integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.energies, &self.density)
    }

    /// ∫ |ρ₁ − ρ₂| dE on the shared grid.
    pub fn l1_distance(&self, other: &DosCurve) -> f64 {
        assert_eq!(self.energies.len(), other.energies.len());
        let diff: Vec<f64> = self
            .density
            .iter()
            .zip(&other.density)
            .map(|(a, b)| (a - b).abs())
            .collect();
        trapezoid(&self.energies, &diff)
    }
}

pub(crate) fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

/// Bounds estimation, moments and reconstruction in one call.
pub fn density_of_states(h: &SparseHermitian, params: &KpmParams) -> Result<(DosCurve, SpectralBounds), KpmError> {
    params.validate()?;
    let bounds = estimate_bounds(h, params.rescale_margin, params.rng_seed)?;
    let mu = moments(h, &bounds, params)?;
    Ok((reconstruct_dos(&mu, &bounds, params)?, bounds))
}

/// SplitMix64 finaliser, used to derive independent stream seeds.
pub(crate) fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
