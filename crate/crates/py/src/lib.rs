//! Python bindings for `hofstadter`.
//!
//! Arrays cross the boundary as plain lists; energies are in eV, fields in
//! Tesla and lengths in Ångström.

use std::fs::File;
use std::io::{BufReader, BufWriter};

use hofstadter::kpm::{self, KpmParams};
use hofstadter::magnetic::{self, SparseHermitian};
use hofstadter::oracle::{self, RationalFlux};
use hofstadter::plaquette::{self, FluxQuantum};
use hofstadter::structure::{self, BuiltinSpec, HoppingRule, OnsiteEnergies};
use hofstadter::sweep::{self, SweepPlan};
use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn err(e: impl Into<hofstadter::Error>) -> PyErr {
    PyValueError::new_err(e.into().to_string())
}

fn flux_quantum(name: &str) -> PyResult<FluxQuantum> {
    name.parse().map_err(PyValueError::new_err)
}

fn kpm_params(num_moments: usize, num_random_vectors: usize, energy_points: usize, seed: u64) -> KpmParams {
    KpmParams {
        num_moments,
        num_random_vectors,
        energy_points,
        rng_seed: seed,
        ..KpmParams::default()
    }
}

/// A periodic lattice: cell vectors, basis sites and bonds.
#[pyclass(name = "Lattice", module = "hofstadter_py", frozen)]
struct PyLattice {
    inner: structure::Lattice,
}

#[pymethods]
impl PyLattice {
    /// `square`, `honeycomb` (or `graphene`), `kagome`, `porous-honeycomb[(bond,scale)]`.
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        let spec: BuiltinSpec = name.parse().map_err(err)?;
        Ok(PyLattice {
            inner: spec.build().map_err(err)?.lattice,
        })
    }

    /// Parses extended-XYZ text and bonds it with the carbon default rule.
    #[staticmethod]
    fn from_xyz(text: &str) -> PyResult<Self> {
        let bare = structure::parse_structure(text).map_err(err)?;
        Ok(PyLattice {
            inner: bare.with_hoppings(&[HoppingRule::carbon_default()]).map_err(err)?,
        })
    }

    /// Rebonds the lattice with `(species_a, species_b, d_min, d_max, t)` rules.
    fn with_hoppings(&self, rules: Vec<(String, String, f64, f64, f64)>) -> PyResult<Self> {
        let rules = rules
            .into_iter()
            .map(|(a, b, lo, hi, t)| HoppingRule::new(a, b, lo, hi, t))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        Ok(PyLattice {
            inner: self.inner.with_hoppings(&rules).map_err(err)?,
        })
    }

    #[getter]
    fn cell_vectors(&self) -> ((f64, f64), (f64, f64)) {
        let (a1, a2) = (self.inner.a1(), self.inner.a2());
        ((a1.x, a1.y), (a2.x, a2.y))
    }

    #[getter]
    fn cell_area(&self) -> f64 {
        self.inner.cell_area()
    }

    #[getter]
    fn sites(&self) -> Vec<(String, f64, f64)> {
        self.inner
            .sites()
            .iter()
            .map(|s| (s.species.clone(), s.position.x, s.position.y))
            .collect()
    }

    /// `(from, to, (n1, n2), t)` for each bond of the cell.
    #[getter]
    fn bonds(&self) -> Vec<(usize, usize, (i32, i32), f64)> {
        self.inner
            .bonds()
            .iter()
            .map(|b| (b.from, b.to, (b.offset[0], b.offset[1]), b.t))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Lattice(sites={}, bonds={}, cell_area={:.4})",
            self.inner.sites().len(),
            self.inner.bonds().len(),
            self.inner.cell_area()
        )
    }
}

/// Plaquettes of the lattice as dicts with `area`, `period` and `vertices`.
#[pyfunction]
#[pyo3(signature = (lattice, flux_quantum = "h_over_e"))]
fn plaquettes(py: Python<'_>, lattice: &PyLattice, flux_quantum: &str) -> PyResult<Vec<Py<pyo3::types::PyDict>>> {
    let fq = self::flux_quantum(flux_quantum)?;
    let faces = plaquette::enumerate_faces(&lattice.inner, fq).map_err(err)?;
    faces
        .iter()
        .map(|f| {
            let d = pyo3::types::PyDict::new(py);
            d.set_item("area", f.area)?;
            d.set_item("period", f.period)?;
            let poly: Vec<(f64, f64)> = f.polygon(&lattice.inner).iter().map(|p| (p.x, p.y)).collect();
            d.set_item("vertices", poly)?;
            Ok(d.unbind())
        })
        .collect()
}

/// Field period (Tesla) of a loop of the given area (Å²).
#[pyfunction]
#[pyo3(signature = (area, flux_quantum = "h_over_e"))]
fn period_of_area(area: f64, flux_quantum: &str) -> PyResult<f64> {
    plaquette::period_of_area(area, self::flux_quantum(flux_quantum)?).map_err(err)
}

/// Smallest common near-multiple of `periods` as `(period, multiples)`, or None.
#[pyfunction]
#[pyo3(signature = (periods, tolerance = 0.02))]
fn beat_period(periods: Vec<f64>, tolerance: f64) -> PyResult<Option<(f64, Vec<u32>)>> {
    Ok(plaquette::beat_period(&periods, tolerance)
        .map_err(err)?
        .map(|b| (b.period, b.multiples)))
}

/// A finite open-boundary flake of `nx x ny` cells.
#[pyclass(name = "Flake", module = "hofstadter_py", frozen)]
struct PyFlake {
    inner: structure::Flake,
}

#[pymethods]
impl PyFlake {
    #[new]
    fn new(lattice: &PyLattice, nx: usize, ny: usize) -> PyResult<Self> {
        Ok(PyFlake {
            inner: structure::build_flake(&lattice.inner, nx, ny).map_err(err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn positions(&self) -> Vec<(f64, f64)> {
        self.inner
            .sites()
            .iter()
            .map(|s| (s.position.x, s.position.y))
            .collect()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.inner.edges().iter().map(|e| (e.n, e.m, e.t)).collect()
    }

    /// Sparse Hamiltonian at field `b` (Tesla).
    #[pyo3(signature = (b, flux_quantum = "h_over_e", onsite = 0.0))]
    fn hamiltonian(&self, b: f64, flux_quantum: &str, onsite: f64) -> PyResult<PyHamiltonian> {
        let fq = self::flux_quantum(flux_quantum)?;
        let h = magnetic::assemble(&self.inner, &OnsiteEnergies::uniform(onsite), b, fq).map_err(err)?;
        Ok(PyHamiltonian { inner: h })
    }

    /// DOS(E, B) over a uniform field grid.
    #[allow(clippy::too_many_arguments)]
    #[pyo3(signature = (b_min, b_max, b_points, num_moments = 512, num_random_vectors = 3, energy_points = 512, seed = 0, flux_quantum = "h_over_e", onsite = 0.0))]
    fn sweep(
        &self,
        py: Python<'_>,
        b_min: f64,
        b_max: f64,
        b_points: usize,
        num_moments: usize,
        num_random_vectors: usize,
        energy_points: usize,
        seed: u64,
        flux_quantum: &str,
        onsite: f64,
    ) -> PyResult<PySpectrum> {
        let fq = self::flux_quantum(flux_quantum)?;
        let plan = SweepPlan {
            b_min,
            b_max,
            b_points,
            kpm: kpm_params(num_moments, num_random_vectors, energy_points, seed),
            flake_dims: self.inner.dims(),
        };
        let flake = &self.inner;
        let spectrum = py
            .detach(|| sweep::run_sweep(flake, &OnsiteEnergies::uniform(onsite), fq, &plan))
            .map_err(err)?;
        Ok(PySpectrum { inner: spectrum })
    }
}

/// Hermitian sparse matrix in CSR form.
#[pyclass(name = "Hamiltonian", module = "hofstadter_py", frozen)]
struct PyHamiltonian {
    inner: SparseHermitian,
}

#[pymethods]
impl PyHamiltonian {
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.inner.nnz()
    }

    /// `(row, col, value)` for every stored entry.
    fn triplets(&self) -> Vec<(usize, usize, Complex64)> {
        let offsets = self.inner.row_offsets();
        let mut out = Vec::with_capacity(self.inner.nnz());
        for r in 0..self.inner.dim() {
            for k in offsets[r]..offsets[r + 1] {
                out.push((r, self.inner.col_indices()[k], self.inner.values()[k]));
            }
        }
        out
    }

    /// Sorted eigenvalues by dense diagonalisation.
    fn eigenvalues(&self) -> PyResult<Vec<f64>> {
        oracle::exact_eigenvalues(&self.inner).map_err(err)
    }

    /// KPM density of states as `(energies, density)`.
    #[pyo3(signature = (num_moments = 512, num_random_vectors = 3, energy_points = 512, seed = 0))]
    fn dos(
        &self,
        py: Python<'_>,
        num_moments: usize,
        num_random_vectors: usize,
        energy_points: usize,
        seed: u64,
    ) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let params = kpm_params(num_moments, num_random_vectors, energy_points, seed);
        let h = &self.inner;
        let (curve, _) = py.detach(|| kpm::density_of_states(h, &params)).map_err(err)?;
        Ok((curve.energies, curve.density))
    }
}

/// DOS(E, B) matrix with one row per field.
#[pyclass(name = "Spectrum", module = "hofstadter_py", frozen)]
struct PySpectrum {
    inner: sweep::Spectrum,
}

#[pymethods]
impl PySpectrum {
    #[getter]
    fn b_values(&self) -> Vec<f64> {
        self.inner.b_values.clone()
    }

    #[getter]
    fn energies(&self) -> Vec<f64> {
        self.inner.energies.clone()
    }

    #[getter]
    fn centered(&self) -> bool {
        self.inner.centered
    }

    /// Rows of the DOS matrix, one per field value.
    #[getter]
    fn dos(&self) -> Vec<Vec<f64>> {
        (0..self.inner.b_points()).map(|i| self.inner.row(i).to_vec()).collect()
    }

    fn center(&self) -> PyResult<PySpectrum> {
        Ok(PySpectrum {
            inner: sweep::center_energies(&self.inner).map_err(err)?,
        })
    }

    /// Candidate periods as `(period_tesla, strength)`, strongest first.
    fn measure_period(&self) -> PyResult<Vec<(f64, f64)>> {
        Ok(sweep::measure_period(&self.inner)
            .map_err(err)?
            .into_iter()
            .map(|c| (c.period, c.strength))
            .collect())
    }

    fn write_binary(&self, path: &str) -> PyResult<()> {
        let f = File::create(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        sweep::write_binary(&self.inner, BufWriter::new(f)).map_err(err)
    }

    #[staticmethod]
    fn read_binary(path: &str) -> PyResult<PySpectrum> {
        let f = File::open(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        Ok(PySpectrum {
            inner: sweep::read_binary(BufReader::new(f)).map_err(err)?,
        })
    }
}

fn flux(p: i64, q: u64) -> PyResult<RationalFlux> {
    RationalFlux::new(p, q).map_err(err)
}

/// Harper eigenvalues of the square lattice at flux p/q, one list per k point.
#[pyfunction]
#[pyo3(signature = (p, q, t = -1.0, k_grid = oracle::DEFAULT_K_GRID))]
fn harper_square(p: i64, q: u64, t: f64, k_grid: usize) -> PyResult<Vec<Vec<f64>>> {
    Ok(oracle::harper_spectrum_square(flux(p, q)?, t, k_grid)
        .map_err(err)?
        .per_k)
}

/// Magnetic Bloch eigenvalues of the honeycomb lattice at flux p/q per hexagon.
#[pyfunction]
#[pyo3(signature = (p, q, t = -2.7, k_grid = oracle::DEFAULT_K_GRID))]
fn harper_honeycomb(p: i64, q: u64, t: f64, k_grid: usize) -> PyResult<Vec<Vec<f64>>> {
    Ok(oracle::harper_spectrum_honeycomb(flux(p, q)?, t, k_grid)
        .map_err(err)?
        .per_k)
}

/// All reduced fractions p/q in [0, 1] with q ≤ q_max, ascending.
#[pyfunction]
fn farey_fluxes(q_max: u64) -> Vec<(i64, u64)> {
    oracle::farey_fluxes(q_max).iter().map(|f| (f.p(), f.q())).collect()
}

#[pymodule]
fn hofstadter_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLattice>()?;
    m.add_class::<PyFlake>()?;
    m.add_class::<PyHamiltonian>()?;
    m.add_class::<PySpectrum>()?;
    m.add_function(wrap_pyfunction!(plaquettes, m)?)?;
    m.add_function(wrap_pyfunction!(period_of_area, m)?)?;
    m.add_function(wrap_pyfunction!(beat_period, m)?)?;
    m.add_function(wrap_pyfunction!(harper_square, m)?)?;
    m.add_function(wrap_pyfunction!(harper_honeycomb, m)?)?;
    m.add_function(wrap_pyfunction!(farey_fluxes, m)?)?;
    Ok(())
}
