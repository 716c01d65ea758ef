use std::sync::Arc;

use num_complex::Complex64;

use super::MagneticError;

/// Compressed-sparse-row index arrays, shared between matrices with the same
/// sparsity pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrPattern {
    dim: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
}

impl CsrPattern {
    /// Builds a pattern from per-row column lists (sorted and deduplicated here).
    pub fn from_rows(rows: Vec<Vec<usize>>) -> Self {
        let dim = rows.len();
        let mut row_offsets = Vec::with_capacity(dim + 1);
        let mut col_indices = Vec::new();
        row_offsets.push(0);
        for mut cols in rows {
            cols.sort_unstable();
            cols.dedup();
            col_indices.extend(cols);
            row_offsets.push(col_indices.len());
        }
        CsrPattern {
            dim,
            row_offsets,
            col_indices,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    /// Storage index of entry (row, col), if present.
    pub fn find(&self, row: usize, col: usize) -> Option<usize> {
        let lo = self.row_offsets[row];
        let hi = self.row_offsets[row + 1];
        self.col_indices[lo..hi].binary_search(&col).ok().map(|k| lo + k)
    }
}

/// Hermitian matrix in CSR form with both triangles stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHermitian {
    pattern: Arc<CsrPattern>,
    values: Vec<Complex64>,
}

/// Relative tolerance for the Hermiticity check of externally built matrices.
const HERMITIAN_TOL: f64 = 1e-12;

impl SparseHermitian {
    /// Wraps values over a pattern, checking H = H† entry by entry.
    pub fn new(pattern: Arc<CsrPattern>, values: Vec<Complex64>) -> Result<Self, MagneticError> {
        if values.len() != pattern.nnz() {
            return Err(MagneticError::NotHermitian(format!(
                "{} values for {} stored entries",
                values.len(),
                pattern.nnz()
            )));
        }
        let h = SparseHermitian { pattern, values };
        h.check_hermitian()?;
        Ok(h)
    }

    /// Trusted constructor for values produced by the assembler.
    pub(crate) fn from_parts(pattern: Arc<CsrPattern>, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), pattern.nnz());
        SparseHermitian { pattern, values }
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, Complex64)]) -> Result<Self, MagneticError> {
        let mut rows = vec![Vec::new(); dim];
        for &(r, c, _) in triplets {
            if r >= dim || c >= dim {
                return Err(MagneticError::NotHermitian(format!(
                    "entry ({r}, {c}) outside {dim}x{dim}"
                )));
            }
            rows[r].push(c);
        }
        let pattern = Arc::new(CsrPattern::from_rows(rows));
        let mut values = vec![Complex64::new(0.0, 0.0); pattern.nnz()];
        for &(r, c, v) in triplets {
            let k = pattern.find(r, c).expect("entry is in the pattern");
            values[k] += v;
        }
        SparseHermitian::new(pattern, values)
    }

    /// Builds from a dense row-major matrix, keeping nonzero entries.
    pub fn from_dense(dim: usize, dense: &[Complex64]) -> Result<Self, MagneticError> {
        assert_eq!(dense.len(), dim * dim);
        let triplets: Vec<_> = (0..dim)
            .flat_map(|r| (0..dim).map(move |c| (r, c)))
            .filter(|&(r, c)| dense[r * dim + c] != Complex64::new(0.0, 0.0))
            .map(|(r, c)| (r, c, dense[r * dim + c]))
            .collect();
        SparseHermitian::from_triplets(dim, &triplets)
    }

    pub fn dim(&self) -> usize {
        self.pattern.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn pattern(&self) -> &Arc<CsrPattern> {
        &self.pattern
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.pattern.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.pattern.col_indices
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.pattern
            .find(row, col)
            .map_or(Complex64::new(0.0, 0.0), |k| self.values[k])
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let n = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for k in self.pattern.row_offsets[r]..self.pattern.row_offsets[r + 1] {
                out[r * n + self.pattern.col_indices[k]] = self.values[k];
            }
        }
        out
    }

    /// Verifies entry (n, m) = conj(entry (m, n)), real diagonal and strictly
    /// increasing column indices per row.
    pub fn check_hermitian(&self) -> Result<(), MagneticError> {
        let p = &self.pattern;
        let scale = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
        for r in 0..p.dim {
            let cols = &p.col_indices[p.row_offsets[r]..p.row_offsets[r + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(MagneticError::NotHermitian(format!(
                    "row {r} column indices not strictly increasing"
                )));
            }
            for k in p.row_offsets[r]..p.row_offsets[r + 1] {
                let c = p.col_indices[k];
                let v = self.values[k];
                let mirror = p
                    .find(c, r)
                    .map(|j| self.values[j])
                    .ok_or_else(|| MagneticError::NotHermitian(format!("entry ({r}, {c}) has no mirror")))?;
                if (v - mirror.conj()).norm() > HERMITIAN_TOL * scale {
                    return Err(MagneticError::NotHermitian(format!(
                        "entry ({r}, {c}) = {v} but ({c}, {r}) = {mirror}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// y = H x
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let p = &self.pattern;
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in p.row_offsets[r]..p.row_offsets[r + 1] {
                acc += self.values[k] * x[p.col_indices[k]];
            }
            *out = acc;
        }
    }

    /// Chebyshev step in place: `prev ← 2 (H − shift) / scale · cur − prev`.
    pub(crate) fn chebyshev_step(&self, cur: &[Complex64], prev: &mut [Complex64], shift: f64, scale: f64) {
        let p = &self.pattern;
        let two_over = 2.0 / scale;
        for (r, out) in prev.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in p.row_offsets[r]..p.row_offsets[r + 1] {
                acc += self.values[k] * cur[p.col_indices[k]];
            }
            *out = (acc - cur[r] * shift) * two_over - *out;
        }
    }

    /// Gershgorin interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let p = &self.pattern;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in 0..p.dim {
            let mut centre = 0.0;
            let mut radius = 0.0;
            for k in p.row_offsets[r]..p.row_offsets[r + 1] {
                if p.col_indices[k] == r {
                    centre = self.values[k].re;
                } else {
                    radius += self.values[k].norm();
                }
            }
            lo = lo.min(centre - radius);
            hi = hi.max(centre + radius);
        }
        if p.dim == 0 {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }
}
