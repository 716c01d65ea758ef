use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{mix_seed, KpmError, KpmParams, SpectralBounds};
use crate::magnetic::SparseHermitian;

fn dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// Chebyshev moments μ_k ≈ Tr T_k(H̃), k = 0..num_moments, normalised so that
/// μ₀ equals the matrix dimension. Imaginary parts are stochastic noise.
///
/// Each random-phase vector runs on its own rayon task; the per-vector
/// results are summed in vector order so the output does not depend on the
/// thread count.
pub fn moments(h: &SparseHermitian, bounds: &SpectralBounds, params: &KpmParams) -> Result<Vec<Complex64>, KpmError> {
    params.validate()?;
    let n = h.dim();
    if n < 1 {
        return Err(KpmError::Degenerate(n));
    }
    let (shift, scale) = bounds.rescaling(params.rescale_margin);
    let per_vector: Vec<Vec<Complex64>> = (0..params.num_random_vectors)
        .into_par_iter()
        .map(|r| vector_moments(h, shift, scale, params.num_moments, mix_seed(params.rng_seed, r as u64)))
        .collect::<Result<_, _>>()?;
    let m = params.num_moments;
    let mut total = vec![Complex64::new(0.0, 0.0); m];
    for mu in &per_vector {
        for (t, v) in total.iter_mut().zip(mu) {
            *t += v;
        }
    }
    let norm = n as f64 / total[0].re;
    Ok(total.into_iter().map(|v| v * norm).collect())
}

fn vector_moments(
    h: &SparseHermitian,
    shift: f64,
    scale: f64,
    m: usize,
    seed: u64,
) -> Result<Vec<Complex64>, KpmError> {
    let n = h.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r: Vec<Complex64> = (0..n)
        .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    let limit = 1e3 * n as f64;
    let mut mu = vec![Complex64::new(0.0, 0.0); m];
    let mut prev = r.clone();
    let mut cur = vec![Complex64::new(0.0, 0.0); n];
    h.chebyshev_step(&r, &mut cur, shift, scale);
    for v in cur.iter_mut() {
        *v *= 0.5;
    }
    let mu0 = dot(&r, &r);
    let mu1 = dot(&r, &cur);
    mu[0] = mu0;
    if m > 1 {
        mu[1] = mu1;
    }
    // From v_n and v_{n+1} = cur: μ_{2n} = 2⟨v_n|v_n⟩ − μ₀, μ_{2n+1} = 2⟨v_n|v_{n+1}⟩ − μ₁.
    let mut order = 1;
    while 2 * order < m {
        // prev ← v_{order+1}, then swap so cur = v_{order+1}, prev = v_order.
        h.chebyshev_step(&cur, &mut prev, shift, scale);
        std::mem::swap(&mut cur, &mut prev);
        let nn = dot(&prev, &prev).re;
        if !(nn <= limit) {
            return Err(KpmError::BoundsViolated { order });
        }
        mu[2 * order] = 2.0 * nn - mu0;
        if 2 * order + 1 < m {
            mu[2 * order + 1] = 2.0 * dot(&prev, &cur) - mu1;
        }
        order += 1;
    }
    Ok(mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(values: &[f64]) -> SparseHermitian {
        let t: Vec<_> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| (i, i, Complex64::new(v, 0.0)))
            .collect();
        SparseHermitian::from_triplets(values.len(), &t).unwrap()
    }

    #[test]
    fn diagonal_matrix_moments_are_exact() {
        // Random phases give exact traces for diagonal matrices.
        let eps = [-1.5, -0.2, 0.4, 1.9];
        let h = diag(&eps);
        let b = SpectralBounds::new(-2.0, 2.0).unwrap();
        let p = KpmParams {
            num_moments: 9,
            num_random_vectors: 2,
            ..Default::default()
        };
        let mu = moments(&h, &b, &p).unwrap();
        let (shift, scale) = b.rescaling(p.rescale_margin);
        for (k, m) in mu.iter().enumerate() {
            let exact: f64 = eps
                .iter()
                .map(|e| (k as f64 * ((e - shift) / scale).acos()).cos())
                .sum();
            assert!((m - exact).norm() < 1e-10, "k={k}: {m} vs {exact}");
        }
    }

    #[test]
    fn diverges_when_bounds_too_tight() {
        let h = diag(&[-10.0, 10.0]);
        let b = SpectralBounds::new(-1.0, 1.0).unwrap();
        let p = KpmParams {
            num_moments: 64,
            num_random_vectors: 1,
            ..Default::default()
        };
        assert!(matches!(moments(&h, &b, &p), Err(KpmError::BoundsViolated { .. })));
    }

    #[test]
    fn deterministic_for_seed() {
        let h = diag(&[0.1, 0.2, -0.3]);
        let b = SpectralBounds::new(-1.0, 1.0).unwrap();
        let p = KpmParams {
            num_moments: 16,
            num_random_vectors: 4,
            rng_seed: 99,
            ..Default::default()
        };
        assert_eq!(moments(&h, &b, &p).unwrap(), moments(&h, &b, &p).unwrap());
    }
}
