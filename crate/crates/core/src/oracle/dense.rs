use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::OracleError;
use crate::kpm::DosCurve;
use crate::magnetic::SparseHermitian;

pub const MAX_DENSE_DIM: usize = 4000;

/// All eigenvalues of `h`, ascending, by dense Hermitian diagonalization.
pub fn exact_eigenvalues(h: &SparseHermitian) -> Result<Vec<f64>, OracleError> {
    let n = h.dim();
    if n > MAX_DENSE_DIM {
        return Err(OracleError::TooLarge {
            dim: n,
            max: MAX_DENSE_DIM,
        });
    }
    let dense = h.to_dense();
    let m = DMatrix::from_row_slice(n, n, &dense);
    let mut eig: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Sum of unit-weight Gaussians, one per eigenvalue, with energy-dependent
/// width `sigma(E_n)`, sampled on `grid`.
pub fn broadened_dos(eigenvalues: &[f64], grid: &[f64], sigma: impl Fn(f64) -> f64) -> DosCurve {
    let mut density = vec![0.0; grid.len()];
    for &e in eigenvalues {
        let s = sigma(e);
        let norm = 1.0 / (s * (2.0 * PI).sqrt());
        let reach = 10.0 * s;
        let lo = grid.partition_point(|&x| x < e - reach);
        let hi = grid.partition_point(|&x| x <= e + reach);
        for (d, &x) in density[lo..hi].iter_mut().zip(&grid[lo..hi]) {
            let z = (x - e) / s;
            *d += norm * (-0.5 * z * z).exp();
        }
    }
    DosCurve {
        energies: grid.to_vec(),
        density,
    }
}

/// Gaussian-broadened exact density of states (width `sigma`, eV).
pub fn exact_dos(h: &SparseHermitian, sigma: f64, grid: &[f64]) -> Result<DosCurve, OracleError> {
    if !(sigma > 0.0) {
        return Err(OracleError::Precondition(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(OracleError::Precondition(
            "energy grid must be strictly ascending".into(),
        ));
    }
    let eig = exact_eigenvalues(h)?;
    Ok(broadened_dos(&eig, grid, |_| sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kpm::uniform_grid;
    use num_complex::Complex64;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn dimer_eigenvalues() {
        let h = SparseHermitian::from_triplets(2, &[(0, 1, c(-2.7)), (1, 0, c(-2.7))]).unwrap();
        let e = exact_eigenvalues(&h).unwrap();
        assert!((e[0] + 2.7).abs() < 1e-12 && (e[1] - 2.7).abs() < 1e-12);
    }

    #[test]
    fn chain_of_three() {
        let h =
            SparseHermitian::from_triplets(3, &[(0, 1, c(-1.0)), (1, 0, c(-1.0)), (1, 2, c(-1.0)), (2, 1, c(-1.0))])
                .unwrap();
        let e = exact_eigenvalues(&h).unwrap();
        let s = 2f64.sqrt();
        for (a, b) in e.iter().zip([-s, 0.0, s]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_matrix_single_peak_of_weight_dim() {
        let h = SparseHermitian::from_triplets(5, &[(0, 0, c(0.0))]).unwrap();
        let grid = uniform_grid(-1.0, 1.0, 2001);
        let dos = exact_dos(&h, 0.05, &grid).unwrap();
        assert!((dos.integral() - 5.0).abs() < 5.0 * 0.005);
        assert!((dos.density[1000] - 5.0 / (0.05 * (2.0 * PI).sqrt())).abs() < 1e-9);
    }

    #[test]
    fn size_limit() {
        let n = MAX_DENSE_DIM + 1;
        let h = SparseHermitian::from_triplets(n, &[(0, 0, c(1.0))]).unwrap();
        assert!(matches!(exact_eigenvalues(&h), Err(OracleError::TooLarge { .. })));
    }
}
