use std::f64::consts::PI;

use num_complex::Complex64;

use super::{uniform_grid, DosCurve, KpmError, KpmParams, SpectralBounds};

/// Jackson damping factors g_0..g_{M−1}.
pub fn jackson_kernel(m: usize) -> Vec<f64> {
    let mp1 = (m + 1) as f64;
    let q = PI / mp1;
    let cot = q.cos() / q.sin();
    (0..m)
        .map(|k| {
            let k = k as f64;
            ((mp1 - k) * (q * k).cos() + (q * k).sin() * cot) / mp1
        })
        .collect()
}

/// Standard deviation of the Jackson-broadened delta peak at rescaled
/// position `x` ∈ [−1, 1] for `m` moments, in rescaled units.
pub fn jackson_sigma(x: f64, m: usize) -> f64 {
    let g = jackson_kernel(m.max(3));
    let var = 0.5 * (1.0 + g[2] * (2.0 * x * x - 1.0)) - g[1] * g[1] * x * x;
    var.max(0.0).sqrt()
}

/// Σ c_k T_k(x) by Clenshaw recurrence.
fn clenshaw(c: &[f64], x: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    c[0] + x * b1 - b2
}

/// Jackson-damped density of states from Chebyshev moments, on
/// `params.energy_points` uniform energies spanning `bounds`.
///
/// The series is evaluated at Chebyshev nodes (4× oversampled) and linearly
/// resampled onto the uniform grid.
pub fn reconstruct_dos(mu: &[Complex64], bounds: &SpectralBounds, params: &KpmParams) -> Result<DosCurve, KpmError> {
    let m = mu.len();
    if m < 2 {
        return Err(KpmError::InvalidMoments(format!("need at least 2 moments, got {m}")));
    }
    if !(mu[0].re > 0.0) {
        return Err(KpmError::InvalidMoments(format!(
            "mu_0 must be positive, got {}",
            mu[0].re
        )));
    }
    if mu.iter().any(|v| !v.is_finite()) {
        return Err(KpmError::InvalidMoments("non-finite moment".into()));
    }
    if params.energy_points < 2 {
        return Err(KpmError::InvalidParams("energy_points must be >= 2".into()));
    }
    let g = jackson_kernel(m);
    let coeffs: Vec<f64> = mu
        .iter()
        .zip(&g)
        .enumerate()
        .map(|(k, (mk, gk))| if k == 0 { mk.re * gk } else { 2.0 * mk.re * gk })
        .collect();

    let nodes = 4 * m.max(params.energy_points);
    // Ascending x: θ runs from π down to 0.
    let (xs, rho): (Vec<f64>, Vec<f64>) = (0..nodes)
        .rev()
        .map(|j| {
            let theta = PI * (j as f64 + 0.5) / nodes as f64;
            let x = theta.cos();
            (x, clenshaw(&coeffs, x) / (PI * theta.sin()))
        })
        .unzip();

    let (shift, scale) = bounds.rescaling(params.rescale_margin);
    let energies = uniform_grid(bounds.e_min, bounds.e_max, params.energy_points);
    let mut density = Vec::with_capacity(energies.len());
    let mut j = 0;
    for &e in &energies {
        let x = (e - shift) / scale;
        while j + 2 < nodes && xs[j + 1] < x {
            j += 1;
        }
        let value = if x <= xs[0] {
            rho[0]
        } else if x >= xs[nodes - 1] {
            rho[nodes - 1]
        } else {
            let w = (x - xs[j]) / (xs[j + 1] - xs[j]);
            rho[j] + w * (rho[j + 1] - rho[j])
        };
        density.push(value / scale);
    }
    Ok(DosCurve { energies, density })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_endpoints() {
        let g = jackson_kernel(64);
        assert!((g[0] - 1.0).abs() < 1e-14);
        assert!(g.iter().all(|&v| v > -1e-15 && v <= 1.0 + 1e-15));
        assert!(g.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn sigma_scales_like_pi_over_m() {
        for m in [128usize, 512, 2048] {
            let s = jackson_sigma(0.0, m);
            assert!((s * m as f64 / PI - 1.0).abs() < 0.02, "{m}: {s}");
            assert!(jackson_sigma(0.9, m) < s);
        }
    }

    #[test]
    fn clenshaw_matches_direct_sum() {
        let c = [0.3, -1.2, 0.7, 0.05];
        for x in [-0.9, 0.0, 0.4] {
            let direct: f64 = c
                .iter()
                .enumerate()
                .map(|(k, ck)| ck * (k as f64 * f64::acos(x)).cos())
                .sum();
            assert!((clenshaw(&c, x) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn single_level_integrates_to_one() {
        // Moments of one eigenvalue at x0: μ_k = T_k(x0).
        let x0: f64 = 0.3;
        let m = 256;
        let mu: Vec<Complex64> = (0..m)
            .map(|k| Complex64::new((k as f64 * x0.acos()).cos(), 0.0))
            .collect();
        let b = SpectralBounds::new(-1.0, 1.0).unwrap();
        let p = KpmParams {
            num_moments: m,
            energy_points: 2001,
            ..Default::default()
        };
        let dos = reconstruct_dos(&mu, &b, &p).unwrap();
        assert!((dos.integral() - 1.0).abs() < 1e-3, "{}", dos.integral());
        let peak = dos
            .density
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        let (shift, scale) = b.rescaling(p.rescale_margin);
        assert!((dos.energies[peak] - (x0 * scale + shift)).abs() < 0.01);
        assert!(dos.density.iter().all(|&v| v >= -1e-10));
    }
}
