//! Python bindings for `binrec`.
//!
//! Functions take and return plain lists of nodal values so the module has
//! no dependency beyond the interpreter.

use std::sync::Arc;

use binrec::experiments::{sign_mismatch_fraction, RecoveryProblem};
use binrec::{
    build_interval_mesh, build_square_mesh, error_metric as core_error_metric, initial_guess,
    min_feature_width, parameter_heuristics, project_binary, run_recovery, total_energy,
    BinaryPattern, BlurOperator, Error, FeFunction, ModelParams, NoiseSpec, Potential,
};
use pyo3::exceptions::{PyArithmeticError, PyNotImplementedError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Numerical { .. } => PyArithmeticError::new_err(e.to_string()),
        Error::Unsupported(_) => PyNotImplementedError::new_err(e.to_string()),
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn potential(name: &str) -> PyResult<Potential> {
    name.parse().map_err(py_err)
}

fn function(mesh: &Arc<binrec::Mesh>, values: Vec<f64>) -> PyResult<FeFunction> {
    FeFunction::new(mesh.clone(), values).map_err(py_err)
}

/// Uniform mesh of the unit interval (`dim=1`) or unit square (`dim=2`).
#[pyclass(name = "Mesh", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMesh {
    inner: Arc<binrec::Mesh>,
}

#[pymethods]
impl PyMesh {
    #[new]
    #[pyo3(signature = (n_cells, dim = 1))]
    fn new(n_cells: usize, dim: usize) -> PyResult<Self> {
        let mesh = match dim {
            1 => build_interval_mesh(n_cells),
            2 => build_square_mesh(n_cells),
            _ => {
                return Err(PyValueError::new_err(format!(
                    "dim must be 1 or 2, got {dim}"
                )))
            }
        }
        .map_err(py_err)?;
        Ok(Self {
            inner: Arc::new(mesh),
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h()
    }

    #[getter]
    fn num_nodes(&self) -> usize {
        self.inner.num_nodes()
    }

    #[getter]
    fn num_elements(&self) -> usize {
        self.inner.num_elements()
    }

    fn nodes(&self) -> Vec<Vec<f64>> {
        (0..self.inner.num_nodes())
            .map(|i| self.inner.node(i).to_vec())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Mesh(dim={}, n_cells={}, nodes={})",
            self.inner.dim(),
            self.inner.cells_per_side(),
            self.inner.num_nodes()
        )
    }
}

/// Model and iteration parameters.
#[pyclass(name = "Params", get_all, set_all, skip_from_py_object)]
#[derive(Clone)]
struct PyParams {
    alpha: f64,
    gamma: f64,
    sigma: f64,
    epsilon: f64,
    h: f64,
    omega: f64,
    rho: f64,
    tol: f64,
    max_iters: usize,
}

impl From<ModelParams> for PyParams {
    fn from(p: ModelParams) -> Self {
        Self {
            alpha: p.alpha,
            gamma: p.gamma,
            sigma: p.sigma,
            epsilon: p.epsilon,
            h: p.h,
            omega: p.omega,
            rho: p.rho,
            tol: p.tol,
            max_iters: p.max_iters,
        }
    }
}

impl PyParams {
    fn model(&self) -> PyResult<ModelParams> {
        let p = ModelParams {
            alpha: self.alpha,
            gamma: self.gamma,
            sigma: self.sigma,
            epsilon: self.epsilon,
            h: self.h,
            omega: self.omega,
            rho: self.rho,
            tol: self.tol,
            max_iters: self.max_iters,
        };
        p.validate().map_err(py_err)?;
        Ok(p)
    }
}

#[pymethods]
impl PyParams {
    fn __repr__(&self) -> String {
        format!(
            "Params(alpha={}, gamma={}, sigma={}, epsilon={}, h={}, rho={}, tol={}, max_iters={})",
            self.alpha,
            self.gamma,
            self.sigma,
            self.epsilon,
            self.h,
            self.rho,
            self.tol,
            self.max_iters
        )
    }
}

/// Default parameters for a ground truth whose smallest feature has width `omega`.
#[pyfunction]
#[pyo3(signature = (omega, potential, alpha = 0.0, gamma = 0.0))]
fn heuristics(omega: f64, potential: &str, alpha: f64, gamma: f64) -> PyResult<PyParams> {
    let p = parameter_heuristics(omega, self::potential(potential)?).map_err(py_err)?;
    Ok(p.with_problem(alpha, gamma).into())
}

/// A ground-truth pattern with its blur operator on a fixed mesh.
#[pyclass(name = "Problem", frozen)]
struct PyProblem {
    inner: RecoveryProblem,
}

fn pattern_by_name(name: &str, cuts: Option<Vec<f64>>, seed: u64) -> PyResult<BinaryPattern> {
    Ok(match (name, cuts) {
        ("barcode", Some(cuts)) => BinaryPattern::Barcode { cuts },
        ("three_bars", _) => BinaryPattern::three_bars(),
        ("barcode", None) => BinaryPattern::default_barcode(),
        ("blob", _) => BinaryPattern::default_blob(),
        ("qr", _) => BinaryPattern::qr_like(seed),
        (other, _) => return Err(PyValueError::new_err(format!("unknown pattern '{other}'"))),
    })
}

#[pymethods]
impl PyProblem {
    /// `pattern` is one of three_bars, barcode, blob or qr. Without
    /// `n_cells` the mesh is chosen from the heuristic grid width.
    #[new]
    #[pyo3(signature = (pattern, alpha, n_cells = None, cuts = None, pattern_seed = 0))]
    fn new(
        pattern: &str,
        alpha: f64,
        n_cells: Option<usize>,
        cuts: Option<Vec<f64>>,
        pattern_seed: u64,
    ) -> PyResult<Self> {
        let pattern = pattern_by_name(pattern, cuts, pattern_seed)?;
        pattern.validate().map_err(py_err)?;
        let inner = match n_cells {
            Some(n) => RecoveryProblem::with_cells(pattern, alpha, n),
            None => {
                let h = min_feature_width(&pattern) / 32.0;
                RecoveryProblem::new(pattern, alpha, h)
            }
        }
        .map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn omega(&self) -> f64 {
        min_feature_width(&self.inner.pattern)
    }

    #[getter]
    fn mesh(&self) -> PyMesh {
        PyMesh {
            inner: self.inner.mesh().clone(),
        }
    }

    #[getter]
    fn u_true(&self) -> Vec<f64> {
        self.inner.u_true.coeffs().to_vec()
    }

    /// Blurred truth plus seeded Gaussian noise of variance `gamma`.
    #[pyo3(signature = (gamma, seed = 0))]
    fn data(&self, gamma: f64, seed: u64) -> PyResult<Vec<f64>> {
        let y = self.inner.data(NoiseSpec { gamma, seed }).map_err(py_err)?;
        Ok(y.into_coeffs())
    }

    /// Heuristic parameters for this problem.
    #[pyo3(signature = (potential, gamma = 0.0))]
    fn params(&self, potential: &str, gamma: f64) -> PyResult<PyParams> {
        heuristics(self.omega(), potential, self.inner.blur.alpha(), gamma)
    }

    /// Runs the splitting iteration. Starts from the scaled data unless `u0` is given.
    #[pyo3(signature = (y_d, params, potential, u0 = None))]
    fn recover<'py>(
        &self,
        py: Python<'py>,
        y_d: Vec<f64>,
        params: &PyParams,
        potential: &str,
        u0: Option<Vec<f64>>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let mesh = self.inner.mesh();
        let pot = self::potential(potential)?;
        let p = params.model()?;
        let y_d = function(mesh, y_d)?;
        let u0 = match u0 {
            Some(v) => function(mesh, v)?,
            None => initial_guess(&y_d),
        };
        let blur = self.inner.blur.clone();
        let r = py
            .detach(|| run_recovery(&y_d, &blur, &p, pot, &u0))
            .map_err(py_err)?;
        let projected = project_binary(&r.final_u);
        let out = PyDict::new(py);
        out.set_item("u", r.final_u.coeffs().to_vec())?;
        out.set_item("projected", projected.coeffs().to_vec())?;
        out.set_item("initial_energy", r.initial_energy)?;
        out.set_item("energies", r.energies)?;
        out.set_item("diffs", r.diffs)?;
        out.set_item("iterations", r.iterations)?;
        out.set_item("converged", r.converged)?;
        out.set_item("monotone", r.monotone)?;
        let mismatch = sign_mismatch_fraction(&projected, &self.inner.u_true).map_err(py_err)?;
        out.set_item("sign_mismatch", mismatch)?;
        if mesh.dim() == 1 {
            out.set_item(
                "E",
                core_error_metric(&projected, &self.inner.u_true).map_err(py_err)?,
            )?;
        }
        Ok(out)
    }

    /// Total energy of `u` for data `y_d`.
    fn energy(
        &self,
        u: Vec<f64>,
        y_d: Vec<f64>,
        params: &PyParams,
        potential: &str,
    ) -> PyResult<f64> {
        let mesh = self.inner.mesh();
        total_energy(
            &function(mesh, u)?,
            &function(mesh, y_d)?,
            &self.inner.blur,
            &params.model()?,
            self::potential(potential)?,
        )
        .map_err(py_err)
    }
}

/// Applies the blur `(αK + M)⁻¹ M` to nodal values on `mesh`.
#[pyfunction]
fn blur(mesh: &PyMesh, alpha: f64, u: Vec<f64>) -> PyResult<Vec<f64>> {
    let op = BlurOperator::on_mesh(mesh.inner.clone(), alpha).map_err(py_err)?;
    let u = function(&mesh.inner, u)?;
    Ok(op.apply(&u).map_err(py_err)?.into_coeffs())
}

/// `TV(P u_rec − u_true) + ‖P u_rec − u_true‖_{L¹}` on a 1D mesh.
#[pyfunction]
fn error_metric(mesh: &PyMesh, u_rec: Vec<f64>, u_true: Vec<f64>) -> PyResult<f64> {
    core_error_metric(
        &function(&mesh.inner, u_rec)?,
        &function(&mesh.inner, u_true)?,
    )
    .map_err(py_err)
}

#[pymodule]
fn binrec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_class::<PyParams>()?;
    m.add_class::<PyProblem>()?;
    m.add_function(wrap_pyfunction!(heuristics, m)?)?;
    m.add_function(wrap_pyfunction!(blur, m)?)?;
    m.add_function(wrap_pyfunction!(error_metric, m)?)?;
    Ok(())
}
