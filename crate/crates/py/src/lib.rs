//! Python bindings for `bf-core`.

use bf_core::closed_form as cf;
use bf_core::eig::eig_matrix;
use bf_core::operator_assembly::{assemble_flat, assemble_stokes, TruncatedOperator};
use bf_core::reduction::{block_diagonalize, check_structure_with, eigenpair_of_u, sylvester_det, SylvesterCoeffs};
use bf_core::spectral_engine::{
    self as se, compress_symplectic, contour_radius, riesz_projector, EngineConfig, DEFAULT_NODES,
};
use bf_core::validation::{self, ValidationConfig};
use bf_core::{BfError, Complex64};
use nalgebra::{DMatrix, Matrix4};
use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

create_exception!(bf_spectra, DomainError, PyValueError, "Parameters outside the supported domain.");
create_exception!(bf_spectra, NumericalError, PyArithmeticError, "A numerical stage failed.");

fn to_py(e: BfError) -> PyErr {
    match e {
        BfError::SingularKappa { .. }
        | BfError::ResonantKappa { .. }
        | BfError::NotUnstable { .. }
        | BfError::InvalidInput(_) => DomainError::new_err(e.to_string()),
        _ => NumericalError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for bf_core::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

#[pyfunction]
fn kappa_critical() -> f64 {
    cf::kappa_critical()
}

#[pyfunction]
fn phase_speed(kappa: f64) -> f64 {
    cf::phase_speed(kappa)
}

/// `(e11, e22, e12)`.
#[pyfunction]
fn coeffs_e(kappa: f64) -> PyResult<(f64, f64, f64)> {
    cf::coeffs_e(kappa).py_err()
}

#[pyfunction]
fn whitham_benjamin(kappa: f64) -> PyResult<f64> {
    cf::whitham_benjamin(kappa).py_err()
}

#[pyfunction]
fn breve_c(kappa: f64) -> f64 {
    cf::breve_c(kappa)
}

/// Region label: "Unstable", "Stable", "Critical", "Resonant" or "Singular".
#[pyfunction]
fn classify(kappa: f64) -> &'static str {
    cf::classify(kappa).as_str()
}

#[pyfunction]
fn mu_bar_leading(kappa: f64, eps: f64) -> PyResult<f64> {
    cf::mu_bar_leading(kappa, eps).py_err()
}

#[pyfunction]
fn delta_bf_leading(kappa: f64, mu: f64, eps: f64) -> PyResult<f64> {
    cf::delta_bf_leading(kappa, mu, eps).py_err()
}

/// `(lambda1_plus, lambda1_minus, regime)` at leading order.
#[pyfunction]
fn lambda1_leading(kappa: f64, mu: f64, eps: f64) -> PyResult<(Complex64, Complex64, String)> {
    let p = cf::lambda1_leading(kappa, mu, eps).py_err()?;
    Ok((p.value_plus, p.value_minus, format!("{:?}", p.regime)))
}

#[pyfunction]
fn lambda0_leading(kappa: f64, mu: f64) -> (Complex64, Complex64) {
    cf::lambda0_leading(kappa, mu)
}

/// Flat near-zero eigenvalues `[lambda1+, lambda1-, lambda0+, lambda0-]`.
#[pyfunction]
fn flat_quadruple(kappa: f64, mu: f64) -> Vec<Complex64> {
    cf::flat_quadruple(kappa, mu).to_vec()
}

/// Sup-norm residuals of the two traveling-wave equations.
#[pyfunction]
#[pyo3(signature = (kappa, eps, k_max = 32))]
fn stokes_residual(kappa: f64, eps: f64, k_max: usize) -> PyResult<(f64, f64)> {
    bf_core::stokes_expansion::stokes_residual(kappa, eps, k_max).py_err()
}

/// Sylvester determinant from the five block coefficients.
#[pyfunction]
fn sylvester_determinant(a: f64, b: f64, c: f64, d: f64, e: f64) -> f64 {
    sylvester_det(&SylvesterCoeffs { a, b, c, d, e })
}

/// Truncated Bloch-Floquet operator.
#[pyclass(name = "Operator", frozen)]
struct PyOperator {
    inner: TruncatedOperator,
}

#[pymethods]
impl PyOperator {
    #[staticmethod]
    #[pyo3(signature = (kappa, eps, mu, k_max = 32))]
    fn stokes(kappa: f64, eps: f64, mu: f64, k_max: usize) -> PyResult<Self> {
        Ok(PyOperator {
            inner: assemble_stokes(kappa, eps, mu, k_max).py_err()?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (kappa, mu, k_max = 32))]
    fn flat(kappa: f64, mu: f64, k_max: usize) -> PyResult<Self> {
        Ok(PyOperator {
            inner: assemble_flat(kappa, mu, k_max).py_err()?,
        })
    }

    #[getter]
    fn k_max(&self) -> usize {
        self.inner.k_max
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    /// Row index of `(component, k)`.
    fn index(&self, comp: usize, k: i64) -> usize {
        self.inner.index(comp, k)
    }

    /// Dense matrix as a list of rows.
    fn matrix(&self) -> Vec<Vec<Complex64>> {
        let m = &self.inner.matrix;
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    }

    fn eigenvalues(&self) -> PyResult<Vec<Complex64>> {
        Ok(eig_matrix(&self.inner.matrix, false).py_err()?.eigenvalues)
    }

    fn __repr__(&self) -> String {
        format!("Operator(K={}, dim={})", self.inner.k_max, self.inner.dim())
    }
}

/// The four eigenvalues continued from the flat kernel.
#[pyclass(name = "Quadruple", frozen, get_all)]
struct PyQuadruple {
    values: Vec<Complex64>,
    labeled: bool,
    gap_ratio: f64,
}

#[pymethods]
impl PyQuadruple {
    #[getter]
    fn lambda1_plus(&self) -> Complex64 {
        self.values[0]
    }

    #[getter]
    fn lambda1_minus(&self) -> Complex64 {
        self.values[1]
    }

    #[getter]
    fn lambda0_plus(&self) -> Complex64 {
        self.values[2]
    }

    #[getter]
    fn lambda0_minus(&self) -> Complex64 {
        self.values[3]
    }

    fn __repr__(&self) -> String {
        format!("Quadruple(values={:?}, labeled={})", self.values, self.labeled)
    }
}

impl From<se::Quadruple> for PyQuadruple {
    fn from(q: se::Quadruple) -> Self {
        PyQuadruple {
            values: q.values.to_vec(),
            labeled: q.labeled,
            gap_ratio: q.gap_ratio,
        }
    }
}

#[pyfunction]
#[pyo3(signature = (kappa, eps, mu, k_max = 32, gap_factor = 2.0))]
fn near_zero_quadruple(kappa: f64, eps: f64, mu: f64, k_max: usize, gap_factor: f64) -> PyResult<PyQuadruple> {
    let cfg = EngineConfig {
        gap_factor,
        ..EngineConfig::default()
    };
    let (q, _) = se::quadruple_at(kappa, eps, mu, k_max, &cfg).py_err()?;
    Ok(q.into())
}

/// Sampled figure-eight branch.
#[pyclass(name = "SpectralBranch", frozen, get_all)]
struct PyBranch {
    kappa: f64,
    eps: f64,
    mu_grid: Vec<f64>,
    lambda1_plus: Vec<Complex64>,
    lambda1_minus: Vec<Complex64>,
    mu_bar_numeric: Option<f64>,
}

#[pyfunction]
#[pyo3(signature = (kappa, eps, mu_max, n_samples = 40, k_max = 32))]
fn trace_figure_eight(py: Python<'_>, kappa: f64, eps: f64, mu_max: f64, n_samples: usize, k_max: usize) -> PyResult<PyBranch> {
    let b = py
        .detach(|| se::trace_figure_eight(kappa, eps, mu_max, n_samples, k_max))
        .py_err()?;
    Ok(PyBranch {
        kappa: b.kappa,
        eps: b.eps,
        mu_grid: b.mu_grid,
        lambda1_plus: b.lambda1_plus,
        lambda1_minus: b.lambda1_minus,
        mu_bar_numeric: b.mu_bar_numeric,
    })
}

/// `(mu_star, rate)` of the largest real part on the unstable band.
#[pyfunction]
#[pyo3(signature = (kappa, eps, k_max = 32))]
fn max_growth_rate(py: Python<'_>, kappa: f64, eps: f64, k_max: usize) -> PyResult<(f64, f64)> {
    py.detach(|| se::max_growth_rate(kappa, eps, k_max)).py_err()
}

/// Projects onto the quadruple, compresses symplectically and block
/// diagonalizes. Returns `(u_plus, u_minus, s_eigenvalues, sweeps)`.
#[pyfunction]
#[pyo3(signature = (kappa, eps, mu, k_max = 16))]
fn reduce(kappa: f64, eps: f64, mu: f64, k_max: usize) -> PyResult<(Complex64, Complex64, Vec<Complex64>, usize)> {
    let op = assemble_stokes(kappa, eps, mu, k_max).py_err()?;
    let spec = se::eig(&op).py_err()?;
    let quad = se::near_zero_quadruple(&spec, kappa, mu).py_err()?;
    let p = riesz_projector(&op, contour_radius(&spec, &quad), DEFAULT_NODES).py_err()?;
    let sym = compress_symplectic(&op, &p).py_err()?;
    let l4 = Matrix4::from_fn(|i, j| sym.l4[(i, j)]);
    let blocks = check_structure_with(&l4, 0.0, 1e-12).py_err()?.with_shift(sym.drift);
    let out = block_diagonalize(&blocks).py_err()?;
    let (up, um) = eigenpair_of_u(&out.u2);
    let s = eig_matrix(&DMatrix::from_fn(2, 2, |i, j| out.s2[(i, j)]), false).py_err()?;
    Ok((up, um, s.eigenvalues, out.iterations))
}

/// Runs acceptance checks; returns `(id, name, passed, detail)` tuples.
#[pyfunction]
#[pyo3(signature = (criteria = None, seed = None))]
fn validate(py: Python<'_>, criteria: Option<Vec<usize>>, seed: Option<u64>) -> PyResult<Vec<(usize, String, bool, String)>> {
    let mut cfg = ValidationConfig::default();
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let ids = criteria.unwrap_or_else(|| (1..=validation::CRITERIA.len()).collect());
    if let Some(bad) = ids.iter().find(|&&id| id == 0 || id > validation::CRITERIA.len()) {
        return Err(DomainError::new_err(format!("unknown criterion {bad}")));
    }
    let out = py.detach(|| ids.iter().map(|&id| validation::run(id, &cfg)).collect::<Vec<_>>());
    Ok(out
        .into_iter()
        .map(|o| (o.id, o.name.to_string(), o.passed, o.detail))
        .collect())
}

#[pymodule]
pub fn bf_spectra(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DomainError", m.py().get_type::<DomainError>())?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<PyOperator>()?;
    m.add_class::<PyQuadruple>()?;
    m.add_class::<PyBranch>()?;
    m.add_function(wrap_pyfunction!(kappa_critical, m)?)?;
    m.add_function(wrap_pyfunction!(phase_speed, m)?)?;
    m.add_function(wrap_pyfunction!(coeffs_e, m)?)?;
    m.add_function(wrap_pyfunction!(whitham_benjamin, m)?)?;
    m.add_function(wrap_pyfunction!(breve_c, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(mu_bar_leading, m)?)?;
    m.add_function(wrap_pyfunction!(delta_bf_leading, m)?)?;
    m.add_function(wrap_pyfunction!(lambda1_leading, m)?)?;
    m.add_function(wrap_pyfunction!(lambda0_leading, m)?)?;
    m.add_function(wrap_pyfunction!(flat_quadruple, m)?)?;
    m.add_function(wrap_pyfunction!(stokes_residual, m)?)?;
    m.add_function(wrap_pyfunction!(sylvester_determinant, m)?)?;
    m.add_function(wrap_pyfunction!(near_zero_quadruple, m)?)?;
    m.add_function(wrap_pyfunction!(trace_figure_eight, m)?)?;
    m.add_function(wrap_pyfunction!(max_growth_rate, m)?)?;
    m.add_function(wrap_pyfunction!(reduce, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
