//! Python bindings: basis construction, spectra, bound checks, projections and
//! the experiment runners.

use gpswf::approx::{self, TargetFunction, TargetSpec};
use gpswf::experiments::{self, decode_basis, encode_basis, ExperimentConfig, CACHE_VERSION};
use gpswf::gpswf::{self as core, GpswfBasis};
use gpswf::spectral::{self, compute_spectrum};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyBytes, PyDict, PyList};

create_exception!(gpswf_py, GpswfError, PyException);
create_exception!(gpswf_py, NumericalError, GpswfError);

fn err(e: gpswf::Error) -> PyErr {
    match &e {
        gpswf::Error::Index { .. } => PyIndexError::new_err(e.to_string()),
        gpswf::Error::Domain(_) | gpswf::Error::Config(_) => PyValueError::new_err(e.to_string()),
        _ if e.is_numerical() => NumericalError::new_err(e.to_string()),
        _ => GpswfError::new_err(e.to_string()),
    }
}

fn to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        serde_json::Value::Null => py.None().into_bound(py),
        serde_json::Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any(),
        serde_json::Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        serde_json::Value::String(s) => s.into_pyobject(py)?.into_any(),
        serde_json::Value::Array(a) => {
            let items = a.iter().map(|x| to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any()
        }
        serde_json::Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn ser<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &serde_json::to_value(v).map_err(|e| GpswfError::new_err(e.to_string()))?)
}

/// GPSWF basis ψ_0..ψ_{nmax-1} for weight (1-x²)^α and bandwidth c.
#[pyclass(name = "Basis", frozen, module = "gpswf_py")]
struct PyBasis {
    inner: GpswfBasis,
}

#[pymethods]
impl PyBasis {
    #[new]
    fn new(alpha: f64, c: f64, nmax: usize) -> PyResult<Self> {
        Ok(Self {
            inner: core::build_basis(alpha, c, nmax).map_err(err)?,
        })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c()
    }

    #[getter]
    fn nmax(&self) -> usize {
        self.inner.nmax()
    }

    /// Jacobi modes per parity.
    #[getter]
    fn trunc(&self) -> usize {
        self.inner.trunc()
    }

    #[getter]
    fn chi(&self) -> Vec<f64> {
        self.inner.chi().to_vec()
    }

    /// Coefficients β_k^n in the orthonormal Jacobi basis, k < 2·trunc.
    fn coefficients(&self, n: usize) -> PyResult<Vec<f64>> {
        if n >= self.inner.nmax() {
            return Err(PyIndexError::new_err(format!("n={n} out of range")));
        }
        Ok(self.inner.coefficients(n))
    }

    #[pyo3(signature = (n, x, derivative = 0))]
    fn eval(&self, n: usize, x: f64, derivative: usize) -> PyResult<f64> {
        self.inner.eval(n, x, derivative).map_err(err)
    }

    /// ψ_0(x), ..., ψ_{count-1}(x).
    #[pyo3(signature = (x, count = None, derivative = 0))]
    fn eval_all(&self, x: f64, count: Option<usize>, derivative: usize) -> PyResult<Vec<f64>> {
        self.inner.eval_all(x, derivative, count.unwrap_or(self.inner.nmax())).map_err(err)
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, &encode_basis(&self.inner, CACHE_VERSION))
    }

    #[staticmethod]
    fn from_bytes(data: &[u8]) -> PyResult<Self> {
        let (_, inner) = decode_basis(data).map_err(err)?;
        Ok(Self { inner })
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Basis(alpha={}, c={}, nmax={}, trunc={})",
            self.inner.alpha(),
            self.inner.c(),
            self.inner.nmax(),
            self.inner.trunc()
        )
    }
}

/// μ_n, λ_n and diagnostics for every basis function, as a list of dicts.
#[pyfunction]
fn spectrum<'py>(py: Python<'py>, basis: &PyBasis) -> PyResult<Bound<'py, PyAny>> {
    let sp = compute_spectrum(&basis.inner).map_err(err)?;
    let rows: Vec<serde_json::Value> = sp
        .iter()
        .map(|e| {
            serde_json::json!({
                "n": e.n,
                "chi": e.chi,
                "mu_re": e.mu().re,
                "mu_im": e.mu().im,
                "mu_abs": e.mu_abs,
                "ln_mu_abs": e.ln_mu_abs,
                "lambda": e.lambda,
                "ln_lambda": e.ln_lambda,
                "method": format!("{:?}", e.method).to_lowercase(),
                "probe_spread": e.probe_spread,
            })
        })
        .collect();
    to_py(py, &serde_json::Value::Array(rows))
}

/// Per-n verdicts of the eigenvalue bracket, improved lower bound, decay bounds and local estimate.
#[pyfunction]
fn bounds<'py>(py: Python<'py>, basis: &PyBasis) -> PyResult<Bound<'py, PyAny>> {
    let b = &basis.inner;
    let sp = compute_spectrum(b).map_err(err)?;
    let mut rows = Vec::new();
    for e in &sp {
        rows.push(serde_json::json!({
            "n": e.n,
            "chi_bracket": core::chi_bracket_check(b, e.n).map_err(err)?,
            "chi_lower": core::chi_lower_bound_check(b, e.n).map_err(err)?,
            "decay": spectral::decay_bound_check(e, b.alpha(), b.c()),
            "local_estimate": core::local_estimate(b, e.n, 1000).map_err(err)?,
        }));
    }
    to_py(py, &serde_json::Value::Array(rows))
}

/// Projects a target (a dict in the corpus config format) onto ψ_0..ψ_{n-1}.
#[pyfunction]
#[pyo3(signature = (basis, target, n, quad_order = None))]
fn project<'py>(py: Python<'py>, basis: &PyBasis, target: &str, n: usize, quad_order: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
    let spec: TargetSpec = serde_json::from_str(target).map_err(|e| PyValueError::new_err(format!("invalid target: {e}")))?;
    let f = TargetFunction::from_spec(&spec).map_err(err)?;
    let b = &basis.inner;
    let closed = f.closed_form_coefficients(b, 1).is_some() && f.norm_sq(b.alpha()).is_some();
    let p = match quad_order {
        None if closed => approx::project_closed_form(b, &f, &[n]).map_err(err)?.remove(0),
        order => approx::project(b, &f, n, order.unwrap_or(0).max(approx::quad_floor(b))).map_err(err)?,
    };
    ser(py, &p)
}

/// Runs a scenario; `config` is a JSON object in the experiment config format.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyAny>> {
    let cfg = ExperimentConfig::from_json(config).map_err(err)?;
    let report = py.detach(|| experiments::run(&cfg)).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("scenario", &report.scenario)?;
    out.set_item("summary", to_py(py, &report.summary)?)?;
    out.set_item("dir", report.dir.as_ref().map(|d| d.display().to_string()))?;
    let tables = PyDict::new(py);
    for t in &report.tables {
        tables.set_item(&t.file, t.to_csv().map_err(err)?)?;
    }
    out.set_item("tables", tables)?;
    Ok(out.into_any())
}

#[pymodule]
pub fn gpswf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBasis>()?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(bounds, m)?)?;
    m.add_function(wrap_pyfunction!(project, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add("GpswfError", m.py().get_type::<GpswfError>())?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    Ok(())
}
