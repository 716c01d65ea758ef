use std::f64::consts::TAU;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::OracleError;
use crate::structure::{honeycomb, Lattice};

pub const DEFAULT_K_GRID: usize = 32;
pub const MAX_Q: u64 = 200;

/// Flux p/q per unit cell in units of Φ₀, in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RationalFlux {
    p: i64,
    q: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl RationalFlux {
    pub fn new(p: i64, q: u64) -> Result<Self, OracleError> {
        let err = |reason: &str| OracleError::InvalidFlux {
            p,
            q,
            reason: reason.into(),
        };
        if q == 0 {
            return Err(err("denominator must be positive"));
        }
        if gcd(p.unsigned_abs(), q) != 1 {
            return Err(err("p and q must be coprime"));
        }
        Ok(RationalFlux { p, q })
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

impl fmt::Display for RationalFlux {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// All coprime p/q in [0, 1] with q ≤ `q_max`, ascending.
pub fn farey_fluxes(q_max: u64) -> Vec<RationalFlux> {
    let mut out: Vec<RationalFlux> = (1..=q_max)
        .flat_map(|q| (0..=q as i64).filter_map(move |p| RationalFlux::new(p, q).ok()))
        .collect();
    out.sort_by(|a, b| (a.p * b.q as i64).cmp(&(b.p * a.q as i64)));
    out
}

/// Eigenvalues of the magnetic Bloch Hamiltonian at each point of a k mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct HarperSpectrum {
    pub flux: RationalFlux,
    /// Ascending eigenvalues per k point.
    pub per_k: Vec<Vec<f64>>,
}

impl HarperSpectrum {
    /// Band intervals: the range of the i-th eigenvalue over the mesh.
    pub fn bands(&self) -> Vec<(f64, f64)> {
        let n = self.per_k.first().map_or(0, Vec::len);
        (0..n)
            .map(|i| {
                self.per_k
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
                        (lo.min(e[i]), hi.max(e[i]))
                    })
            })
            .collect()
    }

    /// Every eigenvalue over the mesh, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.per_k.iter().flatten().copied().collect();
        all.sort_by(f64::total_cmp);
        all
    }

    pub fn min(&self) -> f64 {
        self.per_k.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.per_k.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn check_q(flux: RationalFlux, k_grid: usize) -> Result<(), OracleError> {
    if flux.q > MAX_Q {
        return Err(OracleError::Precondition(format!("q = {} exceeds {MAX_Q}", flux.q)));
    }
    if k_grid == 0 {
        return Err(OracleError::Precondition("k_grid must be positive".into()));
    }
    Ok(())
}

fn hermitian_eigenvalues(m: DMatrix<Complex64>) -> Vec<f64> {
    let mut e: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// The q×q Harper matrix of the square lattice at Bloch momentum (k1, k2).
pub fn harper_matrix_square(flux: RationalFlux, t: f64, k1: f64, k2: f64) -> DMatrix<Complex64> {
    let q = flux.q as usize;
    let phi = flux.value();
    let mut m = DMatrix::from_element(q, q, Complex64::new(0.0, 0.0));
    for j in 0..q {
        m[(j, j)] += Complex64::new(2.0 * t * (k2 + TAU * phi * j as f64).cos(), 0.0);
        if j + 1 < q {
            m[(j, j + 1)] += Complex64::new(t, 0.0);
            m[(j + 1, j)] += Complex64::new(t, 0.0);
        }
    }
    let corner = Complex64::from_polar(t, q as f64 * k1);
    m[(q - 1, 0)] += corner;
    m[(0, q - 1)] += corner.conj();
    m
}

/// Square-lattice Harper spectrum on a `k_grid`×`k_grid` mesh of the
/// magnetic Brillouin zone.
pub fn harper_spectrum_square(flux: RationalFlux, t: f64, k_grid: usize) -> Result<HarperSpectrum, OracleError> {
    check_q(flux, k_grid)?;
    let dk = TAU / (flux.q as f64 * k_grid as f64);
    let per_k = (0..k_grid * k_grid)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / k_grid, idx % k_grid);
            hermitian_eigenvalues(harper_matrix_square(flux, t, dk * i as f64, dk * j as f64))
        })
        .collect();
    Ok(HarperSpectrum { flux, per_k })
}

/// Landau gauge choice in fractional coordinates (u1, u2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gauge {
    /// A ∝ (0, u1): magnetic supercell along a1.
    AlongA1,
    /// A ∝ (−u2, 0): magnetic supercell along a2.
    AlongA2,
}

/// Magnetic Bloch spectrum of any bonded lattice with flux p/q per unit cell
/// (zero on-site energies), on a `k_grid`×`k_grid` mesh.
pub fn magnetic_bloch_spectrum(
    lattice: &Lattice,
    flux: RationalFlux,
    k_grid: usize,
    gauge: Gauge,
) -> Result<HarperSpectrum, OracleError> {
    check_q(flux, k_grid)?;
    let q = flux.q as i64;
    let ns = lattice.sites().len();
    let dim = ns * q as usize;
    let phi = flux.value();
    let p = flux.p as f64;
    let frac: Vec<[f64; 2]> = lattice.sites().iter().map(|s| lattice.fractional(s.position)).collect();

    // One hop per bond and supercell row; the k-dependent factor is applied per mesh point.
    struct Hop {
        row: usize,
        col: usize,
        amp: Complex64,
        shift: f64,
        other: f64,
    }
    let (sup, oth) = match gauge {
        Gauge::AlongA1 => (0usize, 1usize),
        Gauge::AlongA2 => (1, 0),
    };
    let mut hops = Vec::new();
    for b in lattice.bonds() {
        for w in 0..q {
            let mut cell_n = [0i64; 2];
            cell_n[sup] = w;
            let un = [frac[b.from][0] + cell_n[0] as f64, frac[b.from][1] + cell_n[1] as f64];
            let um = [
                frac[b.to][0] + (cell_n[0] + b.offset[0] as i64) as f64,
                frac[b.to][1] + (cell_n[1] + b.offset[1] as i64) as f64,
            ];
            let (theta, gauge_sign) = match gauge {
                Gauge::AlongA1 => (TAU * phi * 0.5 * (un[0] + um[0]) * (um[1] - un[1]), -1.0),
                Gauge::AlongA2 => (-TAU * phi * 0.5 * (un[1] + um[1]) * (um[0] - un[0]), 1.0),
            };
            let target = w + b.offset[sup] as i64;
            let shift = target.div_euclid(q);
            let w_target = target.rem_euclid(q);
            let gauge_phase = gauge_sign * TAU * p * shift as f64 * um[oth];
            hops.push(Hop {
                row: w as usize * ns + b.from,
                col: w_target as usize * ns + b.to,
                amp: Complex64::from_polar(b.t, theta + gauge_phase),
                shift: shift as f64,
                other: b.offset[oth] as f64,
            });
        }
    }

    let per_k = (0..k_grid * k_grid)
        .into_par_iter()
        .map(|idx| {
            let theta_sup = TAU * (idx / k_grid) as f64 / k_grid as f64;
            let theta_oth = TAU * (idx % k_grid) as f64 / (k_grid as f64 * q as f64);
            let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
            for h in &hops {
                let v = h.amp * Complex64::from_polar(1.0, h.shift * theta_sup + h.other * theta_oth);
                m[(h.row, h.col)] += v;
                m[(h.col, h.row)] += v.conj();
            }
            hermitian_eigenvalues(m)
        })
        .collect();
    Ok(HarperSpectrum { flux, per_k })
}

fn honeycomb_with_t(t: f64) -> Result<Lattice, OracleError> {
    let built = honeycomb(1.42);
    let mut rule = built.rules[0].clone();
    rule.t = t;
    built
        .lattice
        .with_hoppings(&[rule])
        .map_err(|e| OracleError::Precondition(e.to_string()))
}

/// Honeycomb magnetic Bloch spectrum (2q×2q) with flux p/q per hexagon.
pub fn harper_spectrum_honeycomb(flux: RationalFlux, t: f64, k_grid: usize) -> Result<HarperSpectrum, OracleError> {
    harper_spectrum_honeycomb_gauge(flux, t, k_grid, Gauge::AlongA1)
}

pub fn harper_spectrum_honeycomb_gauge(
    flux: RationalFlux,
    t: f64,
    k_grid: usize,
    gauge: Gauge,
) -> Result<HarperSpectrum, OracleError> {
    check_q(flux, k_grid)?;
    magnetic_bloch_spectrum(&honeycomb_with_t(t)?, flux, k_grid, gauge)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::square;

    fn f(p: i64, q: u64) -> RationalFlux {
        RationalFlux::new(p, q).unwrap()
    }

    #[test]
    fn flux_validation() {
        assert!(RationalFlux::new(2, 4).is_err());
        assert!(RationalFlux::new(1, 0).is_err());
        assert!(RationalFlux::new(0, 2).is_err());
        assert!(RationalFlux::new(0, 1).is_ok());
        assert!(RationalFlux::new(-1, 3).is_ok());
    }

    #[test]
    fn farey_three() {
        let v: Vec<String> = farey_fluxes(3).iter().map(|r| r.to_string()).collect();
        assert_eq!(v, ["0/1", "1/3", "1/2", "2/3", "1/1"]);
    }

    #[test]
    fn zero_flux_square_band() {
        let s = harper_spectrum_square(f(0, 1), -1.0, 16).unwrap();
        assert!((s.min() + 4.0).abs() < 1e-12 && (s.max() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn half_flux_square_closed_form() {
        let s = harper_spectrum_square(f(1, 2), -1.0, 32).unwrap();
        let r = 2.0 * 2f64.sqrt();
        assert!((s.max() - r).abs() < 1e-8 && (s.min() + r).abs() < 1e-8);
        let k = TAU / 64.0;
        let m = harper_matrix_square(f(1, 2), -1.0, k * 3.0, k * 5.0);
        let e = hermitian_eigenvalues(m);
        let exact = 2.0 * ((k * 3.0).cos().powi(2) + (k * 5.0).cos().powi(2)).sqrt();
        assert!((e[1] - exact).abs() < 1e-12 && (e[0] + exact).abs() < 1e-12, "{e:?}");
    }

    #[test]
    fn square_band_count_and_flux_symmetries() {
        let a = harper_spectrum_square(f(1, 5), -1.0, 8).unwrap();
        let b = harper_spectrum_square(f(4, 5), -1.0, 8).unwrap();
        let c = harper_spectrum_square(f(6, 5), -1.0, 8).unwrap();
        assert_eq!(a.bands().len(), 5);
        for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
            assert!((x - y).abs() < 1e-10);
        }
        for (x, y) in a.eigenvalues().iter().zip(c.eigenvalues()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn generic_bloch_matches_harper_on_square() {
        let lat = square(1.0).lattice;
        for flux in [f(1, 3), f(2, 5), f(1, 4)] {
            let h = harper_spectrum_square(flux, -1.0, 6).unwrap();
            for gauge in [Gauge::AlongA1, Gauge::AlongA2] {
                let g = magnetic_bloch_spectrum(&lat, flux, 6, gauge).unwrap();
                for ((lo1, hi1), (lo2, hi2)) in h.bands().iter().zip(g.bands()) {
                    assert!((lo1 - lo2).abs() < 0.05 && (hi1 - hi2).abs() < 0.05, "{flux}");
                }
                assert!((h.min() - g.min()).abs() < 0.02 && (h.max() - g.max()).abs() < 0.02);
            }
        }
    }

    #[test]
    fn honeycomb_zero_flux_and_chiral_symmetry() {
        let s = harper_spectrum_honeycomb(f(0, 1), -2.7, 24).unwrap();
        assert!((s.max() - 8.1).abs() < 1e-9 && (s.min() + 8.1).abs() < 1e-9);
        for flux in [f(1, 3), f(2, 7)] {
            let s = harper_spectrum_honeycomb(flux, -2.7, 6).unwrap();
            for e in &s.per_k {
                let n = e.len();
                for i in 0..n {
                    assert!((e[i] + e[n - 1 - i]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn honeycomb_half_flux_gauge_independent() {
        let a = harper_spectrum_honeycomb_gauge(f(1, 2), -2.7, 12, Gauge::AlongA1).unwrap();
        let b = harper_spectrum_honeycomb_gauge(f(1, 2), -2.7, 12, Gauge::AlongA2).unwrap();
        let (ea, eb) = (a.eigenvalues(), b.eigenvalues());
        assert_eq!(ea.len(), eb.len());
        for (x, y) in ea.iter().zip(&eb) {
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn q_limit() {
        assert!(harper_spectrum_square(f(1, 201), -1.0, 1).is_err());
    }
}
