use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{mix_seed, KpmError, SpectralBounds};
use crate::magnetic::SparseHermitian;

/// Lanczos steps used for bound estimation (capped by the dimension).
pub const LANCZOS_STEPS: usize = 100;

const MIN_WIDTH: f64 = 1e-6;

fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral bounds from the extremal Ritz values of a symmetric Lanczos run,
/// widened by `margin · (θ_max − θ_min)` on each side.
///
/// Containment holds with overwhelming probability for a random start vector
/// but is not proven; a violated bound is caught later by the moment recursion.
pub fn estimate_bounds(h: &SparseHermitian, margin: f64, seed: u64) -> Result<SpectralBounds, KpmError> {
    let n = h.dim();
    if n < 2 {
        return Err(KpmError::Degenerate(n));
    }
    if !(0.0..0.5).contains(&margin) {
        return Err(KpmError::InvalidParams(format!(
            "margin must lie in [0, 0.5), got {margin}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, u64::MAX));
    let scale = 1.0 / (n as f64).sqrt();
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::from_polar(scale, rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    let mut v_prev = vec![Complex64::new(0.0, 0.0); n];
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let steps = LANCZOS_STEPS.min(n);
    let norm_scale = h.values().iter().map(|x| x.norm()).fold(0.0, f64::max).max(1e-300);
    for j in 0..steps {
        h.apply(&v, &mut w);
        let a = dot(&v, &w).re;
        let b_prev = if j == 0 { 0.0 } else { beta[j - 1] };
        for i in 0..n {
            w[i] -= v[i] * a + v_prev[i] * b_prev;
        }
        alpha.push(a);
        if j + 1 == steps {
            break;
        }
        let b = norm(&w);
        if b <= 1e-12 * norm_scale {
            break;
        }
        beta.push(b);
        for i in 0..n {
            v_prev[i] = v[i];
            v[i] = w[i] / b;
        }
    }
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |r, c| {
        if r == c {
            alpha[r]
        } else if r + 1 == c {
            beta[r]
        } else if c + 1 == r {
            beta[c]
        } else {
            0.0
        }
    });
    let ritz = t.symmetric_eigenvalues();
    let lo = ritz.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ritz.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = hi - lo;
    let (e_min, e_max) = if spread < MIN_WIDTH {
        let c = 0.5 * (lo + hi);
        (c - 0.5 * MIN_WIDTH, c + 0.5 * MIN_WIDTH)
    } else {
        (lo - margin * spread, hi + margin * spread)
    };
    SpectralBounds::new(e_min, e_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::magnetic::assemble;
    use crate::plaquette::FluxQuantum;
    use crate::structure::{build_flake, square, OnsiteEnergies};

    #[test]
    fn dimer_bounds() {
        let t = Complex64::new(-2.7, 0.0);
        let h = SparseHermitian::from_triplets(2, &[(0, 1, t), (1, 0, t)]).unwrap();
        let b = estimate_bounds(&h, 0.01, 1).unwrap();
        assert!(b.e_min <= -2.7 && b.e_max >= 2.7, "{b:?}");
        assert!(b.width() <= 5.4 * 1.05);
    }

    #[test]
    fn zero_matrix_has_minimum_width() {
        let h = SparseHermitian::from_triplets(3, &[(0, 0, Complex64::new(0.0, 0.0))]).unwrap();
        let b = estimate_bounds(&h, 0.01, 0).unwrap();
        assert!((b.width() - 1e-6).abs() < 1e-15);
        assert!(b.center().abs() < 1e-15);
    }

    #[test]
    fn square_flake_bounds_cover_band() {
        let f = build_flake(&square(1.0).lattice, 20, 20).unwrap();
        let h = assemble(&f, &OnsiteEnergies::default(), 0.0, FluxQuantum::HOverE).unwrap();
        let b = estimate_bounds(&h, 0.01, 3).unwrap();
        assert!(b.e_min <= -4.0 && b.e_max >= 4.0, "{b:?}");
        // Exact extremes are ±4 cos(π/21).
        let exact = 4.0 * (std::f64::consts::PI / 21.0).cos();
        assert!(b.e_max - exact < 0.02 * 2.0 * exact + 1e-9);
    }

    #[test]
    fn one_by_one_is_degenerate() {
        let h = SparseHermitian::from_triplets(1, &[(0, 0, Complex64::new(1.0, 0.0))]).unwrap();
        assert_eq!(estimate_bounds(&h, 0.01, 0), Err(KpmError::Degenerate(1)));
    }
}
