//! Python bindings for `polyrep-core`.
//!
//! Library errors surface as `ValueError` (bad input or unmet precondition),
//! `ArithmeticError` (numeric tolerance) or `OSError` (files and caches).

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;

use polyrep_core::arcintegral::{self, QuadratureSpec};
use polyrep_core::arcsum::{self, DampedSeries, TruncationPlan};
use polyrep_core::labcli;
use polyrep_core::repcount;
use polyrep_core::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Tolerance { .. } => PyArithmeticError::new_err(e.to_string()),
        Error::Io(_) | Error::Cache(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(name = "IntPolynomial", frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyIntPolynomial(polyrep_core::IntPolynomial);

#[pymethods]
impl PyIntPolynomial {
    /// `coeffs[h-1] = a_h`; accepts a list of ints or the text form "a1,a2,...".
    #[new]
    fn new(coeffs: &Bound<'_, PyAny>) -> PyResult<Self> {
        let inner = if let Ok(s) = coeffs.extract::<String>() {
            s.parse()
        } else {
            polyrep_core::IntPolynomial::new(coeffs.extract::<Vec<i64>>()?)
        };
        inner.map(Self).map_err(to_py)
    }

    #[getter]
    fn degree(&self) -> usize {
        self.0.degree()
    }

    #[getter]
    fn lead(&self) -> i64 {
        self.0.lead()
    }

    #[getter]
    fn coeffs(&self) -> Vec<i64> {
        self.0.coeffs().to_vec()
    }

    fn eval(&self, n: u64) -> PyResult<i128> {
        self.0.eval(n).map_err(to_py)
    }

    fn monotone_threshold(&self) -> u64 {
        self.0.monotone_threshold()
    }

    fn inverse_at(&self, y: f64) -> PyResult<f64> {
        self.0.inverse_at(y).map_err(to_py)
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("IntPolynomial(\"{}\")", self.0)
    }
}

#[pyclass(name = "MangoldtTable", frozen)]
struct PyMangoldtTable(polyrep_core::MangoldtTable);

#[pymethods]
impl PyMangoldtTable {
    #[new]
    fn new(py: Python<'_>, limit: u64) -> PyResult<Self> {
        py.detach(|| polyrep_core::MangoldtTable::build(limit))
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        polyrep_core::MangoldtTable::load_cache(path).map(Self).map_err(to_py)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.0.save_cache(path).map_err(to_py)
    }

    #[getter]
    fn limit(&self) -> u64 {
        self.0.limit()
    }

    /// `Λ(n)`.
    fn von_mangoldt(&self, n: u64) -> PyResult<f64> {
        self.0.require(n).map_err(to_py)?;
        Ok(self.0.lambda(n))
    }

    fn chebyshev_psi(&self, x: u64) -> PyResult<f64> {
        self.0.chebyshev_psi(x).map_err(to_py)
    }
}

#[pyclass(name = "RepSeries", frozen)]
struct PyRepSeries(polyrep_core::RepSeries);

#[pymethods]
impl PyRepSeries {
    #[getter]
    fn base(&self) -> u64 {
        self.0.base
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values.clone()
    }

    #[getter]
    fn method(&self) -> String {
        self.0.method.to_string()
    }

    /// `[(n, R(n)), ...]` over the window.
    fn items(&self) -> Vec<(u64, f64)> {
        self.0.iter().collect()
    }

    fn interval_sum(&self) -> f64 {
        self.0.interval_sum()
    }

    fn weighted_interval_sum(&self) -> f64 {
        self.0.weighted_interval_sum()
    }

    fn __len__(&self) -> usize {
        self.0.values.len()
    }
}

#[pyfunction]
fn rep_brute(
    py: Python<'_>,
    phi: &PyIntPolynomial,
    j: usize,
    base: u64,
    len: u64,
    table: &PyMangoldtTable,
) -> PyResult<PyRepSeries> {
    py.detach(|| repcount::rep_brute(&phi.0, j, base, len, &table.0))
        .map(PyRepSeries)
        .map_err(to_py)
}

#[pyfunction]
fn rep_convolve(
    py: Python<'_>,
    phi: &PyIntPolynomial,
    j: usize,
    base: u64,
    len: u64,
    table: &PyMangoldtTable,
) -> PyResult<PyRepSeries> {
    py.detach(|| repcount::rep_convolve(&phi.0, j, base, len, &table.0))
        .map(PyRepSeries)
        .map_err(to_py)
}

#[pyfunction]
fn required_limit(phi: &PyIntPolynomial, j: usize, top: u64) -> PyResult<u64> {
    repcount::required_limit(&phi.0, j, top).map_err(to_py)
}

/// `(radius, tail_bound)`.
#[pyfunction]
fn plan_truncation(phi: &PyIntPolynomial, base: u64, tol: f64) -> PyResult<(u64, f64)> {
    let p = arcsum::plan_truncation(&phi.0, base, tol).map_err(to_py)?;
    Ok((p.radius, p.tail_bound))
}

fn plan_of(phi: &PyIntPolynomial, base: u64, tol: f64) -> PyResult<TruncationPlan> {
    arcsum::plan_truncation(&phi.0, base, tol).map_err(to_py)
}

/// `S̃_φ(α)` for each `α`, truncated with tail at most `tol`.
#[pyfunction]
#[pyo3(signature = (phi, base, alphas, table, tol = 1e-12))]
fn s_tilde_phi(
    py: Python<'_>,
    phi: &PyIntPolynomial,
    base: u64,
    alphas: Vec<f64>,
    table: &PyMangoldtTable,
    tol: f64,
) -> PyResult<Vec<Complex64>> {
    let plan = plan_of(phi, base, tol)?;
    py.detach(|| {
        let s = DampedSeries::s_tilde_phi(&phi.0, base, plan, &table.0)?;
        Ok(alphas.iter().map(|&a| s.eval(a)).collect())
    })
    .map_err(to_py)
}

#[pyfunction]
fn major_approx(k: usize, lead: i64, base: u64, alpha: f64) -> Complex64 {
    arcsum::major_approx(k, lead, base, alpha)
}

#[pyfunction]
fn u_sum(alpha: f64, len: u64) -> Complex64 {
    arcsum::u_sum(alpha, len)
}

#[pyfunction]
fn gamma(x: f64) -> f64 {
    arcsum::gamma(x)
}

#[pyfunction]
fn gamma_const(k: usize) -> f64 {
    arcsum::gamma_const(k)
}

#[pyfunction]
fn gamma_kj(k: usize, j: usize) -> f64 {
    arcsum::gamma_kj(k, j)
}

#[pyfunction]
fn a_factor(base: u64, c: f64) -> PyResult<f64> {
    arcsum::a_factor(base, c).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (base, len, j, k, lead = 1))]
fn main_term(base: u64, len: u64, j: usize, k: usize, lead: i64) -> f64 {
    arcsum::main_term(base, len, j, k, lead)
}

#[pyfunction]
fn telescope_residual(x: Complex64, y: Complex64, j: u32) -> PyResult<f64> {
    if j < 2 {
        return Err(PyValueError::new_err("j must be >= 2"));
    }
    Ok(arcsum::telescope_residual(x, y, j))
}

/// Bandwidth-exact `Σ_{n=N+1}^{N+H} e^{−n/N} R(n)` through the circle integral.
#[pyfunction]
#[pyo3(signature = (phi, j, base, len, table, tol = 1e-12))]
fn full_circle_sum(
    py: Python<'_>,
    phi: &PyIntPolynomial,
    j: usize,
    base: u64,
    len: u64,
    table: &PyMangoldtTable,
    tol: f64,
) -> PyResult<f64> {
    let plan = plan_of(phi, base, tol)?;
    py.detach(|| {
        let s = DampedSeries::s_tilde_phi(&phi.0, base, plan, &table.0)?;
        let grid = arcintegral::exact_grid_size(&s, j, base, len);
        arcintegral::full_circle_with(&s, j, base, len, grid)
    })
    .map_err(to_py)
}

/// `(exact, e^{−1} H N^λ)`.
#[pyfunction]
fn damped_power_sum(base: u64, len: u64, lam: f64) -> PyResult<(f64, f64)> {
    let d = arcintegral::damped_power_sum(base, len, lam).map_err(to_py)?;
    Ok((d.exact, d.asymptotic))
}

/// `(∫_{−X}^{X} z^{−μ} e(−nα) dα, e^{−n/N} n^{μ−1}/Γ(μ))`.
#[pyfunction]
#[pyo3(signature = (base, mu, n, x, abs_tol = 1e-9))]
fn kernel_integral(
    py: Python<'_>,
    base: u64,
    mu: f64,
    n: u64,
    x: f64,
    abs_tol: f64,
) -> PyResult<(Complex64, f64)> {
    let spec = QuadratureSpec::for_frequency(n as f64, abs_tol);
    let v = py
        .detach(|| arcintegral::kernel_integral(base, mu, n, x, &spec))
        .map_err(to_py)?;
    Ok((v.integral, v.main))
}

#[pyfunction]
fn admissible_h_window(base: u64, k: usize, epsilon: f64) -> PyResult<(f64, f64)> {
    labcli::admissible_h_window(base, k, epsilon).map_err(to_py)
}

#[pymodule]
fn polyrep(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyIntPolynomial>()?;
    m.add_class::<PyMangoldtTable>()?;
    m.add_class::<PyRepSeries>()?;
    m.add_function(wrap_pyfunction!(rep_brute, m)?)?;
    m.add_function(wrap_pyfunction!(rep_convolve, m)?)?;
    m.add_function(wrap_pyfunction!(required_limit, m)?)?;
    m.add_function(wrap_pyfunction!(plan_truncation, m)?)?;
    m.add_function(wrap_pyfunction!(s_tilde_phi, m)?)?;
    m.add_function(wrap_pyfunction!(major_approx, m)?)?;
    m.add_function(wrap_pyfunction!(u_sum, m)?)?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_const, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_kj, m)?)?;
    m.add_function(wrap_pyfunction!(a_factor, m)?)?;
    m.add_function(wrap_pyfunction!(main_term, m)?)?;
    m.add_function(wrap_pyfunction!(telescope_residual, m)?)?;
    m.add_function(wrap_pyfunction!(full_circle_sum, m)?)?;
    m.add_function(wrap_pyfunction!(damped_power_sum, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_integral, m)?)?;
    m.add_function(wrap_pyfunction!(admissible_h_window, m)?)?;
    Ok(())
}
