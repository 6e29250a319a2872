//! Python bindings: solution builders, the `μ̂` solvers and the checks.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use sgwave::families::{self, ArrayParam, WaveSolution};
use sgwave::shooting::{self, DEFAULT_MU_TOL};
use sgwave::soliton_fixedpoint::{self, FixedPointOptions};
use sgwave::verify;
use sgwave::washboard::Sign;

create_exception!(
    pysgwave,
    SgwaveError,
    PyException,
    "Solver error; `args[0]` is the error code."
);

fn err(e: sgwave::Error) -> PyErr {
    SgwaveError::new_err((e.code(), e.to_string()))
}

// serde value -> Python object through the json module.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| SgwaveError::new_err(("serialization", e.to_string())))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn helicity(h: i32) -> PyResult<Sign> {
    match h {
        1 => Ok(Sign::Plus),
        -1 => Ok(Sign::Minus),
        _ => Err(SgwaveError::new_err((
            "invalid_argument",
            format!("helicity must be +1 or -1, got {h}"),
        ))),
    }
}

/// A travelling-wave solution.
#[pyclass(name = "Wave", module = "pysgwave", frozen)]
pub struct Wave {
    inner: WaveSolution,
}

#[pymethods]
impl Wave {
    /// The stable uniform state; `unstable=True` gives the other one.
    #[staticmethod]
    #[pyo3(signature = (gamma, unstable = false))]
    fn constant(gamma: f64, unstable: bool) -> PyResult<Self> {
        let inner = if unstable {
            families::build_constant_unstable(gamma, true)
        } else {
            families::build_constant(gamma)
        };
        Ok(Self {
            inner: inner.map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (gamma, alpha = 1.0, helicity = 1))]
    fn soliton(gamma: f64, alpha: f64, helicity: i32) -> PyResult<Self> {
        let h = self::helicity(helicity)?;
        Ok(Self {
            inner: families::build_soliton(gamma, alpha, h).map_err(err)?,
        })
    }

    /// Give exactly one of `zm`, `mu`, `xi_period`, `abs_v`, `loop_i`.
    #[staticmethod]
    #[pyo3(signature = (gamma, alpha = 1.0, helicity = 1, *, zm = None, mu = None, xi_period = None, abs_v = None, loop_i = None))]
    #[allow(clippy::too_many_arguments)]
    fn array(
        gamma: f64,
        alpha: f64,
        helicity: i32,
        zm: Option<f64>,
        mu: Option<f64>,
        xi_period: Option<f64>,
        abs_v: Option<f64>,
        loop_i: Option<f64>,
    ) -> PyResult<Self> {
        let given: Vec<ArrayParam> = [
            zm.map(ArrayParam::ZM),
            mu.map(ArrayParam::Mu),
            xi_period.map(ArrayParam::Xi),
            abs_v.map(ArrayParam::AbsV),
            loop_i.map(ArrayParam::LoopI),
        ]
        .into_iter()
        .flatten()
        .collect();
        let [param] = given[..] else {
            return Err(SgwaveError::new_err((
                "invalid_argument",
                format!("exactly one array parameter required, got {}", given.len()),
            )));
        };
        let h = self::helicity(helicity)?;
        Ok(Self {
            inner: families::build_array(gamma, alpha, h, param).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (gamma, mu, alpha = 1.0, helicity = 1))]
    fn half_array(gamma: f64, mu: f64, alpha: f64, helicity: i32) -> PyResult<Self> {
        let h = self::helicity(helicity)?;
        Ok(Self {
            inner: families::build_half_array(gamma, alpha, h, mu).map_err(err)?,
        })
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.inner.family.name()
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.params.gamma
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.params.alpha
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.inner.params.mu
    }

    #[getter]
    fn v(&self) -> f64 {
        self.inner.params.v
    }

    #[getter]
    fn xi_period(&self) -> Option<f64> {
        self.inner.xi_period
    }

    #[getter]
    fn x_period(&self) -> Option<f64> {
        self.inner.x_period
    }

    #[getter]
    fn balance_residual(&self) -> Option<f64> {
        self.inner.balance_residual
    }

    #[getter]
    fn stable(&self) -> bool {
        self.inner.stable
    }

    fn phi(&self, x: f64, t: f64) -> PyResult<f64> {
        Ok(self.inner.map_to_xt(x, t).map_err(err)?.phi)
    }

    /// `(φ, φ_x, φ_t)` at `(x, t)`.
    fn field(&self, x: f64, t: f64) -> PyResult<(f64, f64, f64)> {
        let p = self.inner.map_to_xt(x, t).map_err(err)?;
        Ok((p.phi, p.phi_x, p.phi_t))
    }

    /// Rows `(ξ, g, u, φ)` on `n` evenly spaced points of `[lo, hi]`.
    fn sample(&self, lo: f64, hi: f64, n: usize) -> PyResult<Vec<(f64, f64, f64, f64)>> {
        let rows = self.inner.sample(lo, hi, n).map_err(err)?;
        Ok(rows.into_iter().map(|r| (r[0], r[1], r[2], r[3])).collect())
    }

    /// The metadata object the command line emits.
    fn metadata<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &sgwave::cli::wave_meta(&self.inner))
    }

    /// Finite-difference residual report on the default grid.
    fn residual_report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let grid = verify::default_grid(&self.inner);
        let r = verify::residual_report(&self.inner, &grid, &verify::DEFAULT_STEPS).map_err(err)?;
        to_py(py, &r)
    }

    fn asymptotic_check<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &verify::asymptotic_check(&self.inner).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        let p = &self.inner.params;
        format!(
            "Wave({}, gamma={}, alpha={}, v={})",
            self.inner.family.name(),
            p.gamma,
            p.alpha,
            p.v
        )
    }
}

/// `μ̂(γ)` by shooting; `γ = 1` is extrapolated.
#[pyfunction]
#[pyo3(signature = (gamma, mu_tol = DEFAULT_MU_TOL))]
fn hat_mu(gamma: f64, mu_tol: f64) -> PyResult<f64> {
    Ok(shooting::hat_mu_extended(gamma, mu_tol).map_err(err)?.hat_mu)
}

/// Lower and upper bounds on `μ̂(γ)`.
#[pyfunction]
fn hat_mu_bounds(gamma: f64) -> (f64, f64) {
    shooting::hat_mu_bounds(gamma)
}

#[pyfunction]
fn velocity_from_mu(mu: f64, alpha: f64) -> f64 {
    families::velocity_from_mu(mu, alpha)
}

#[pyfunction]
fn mu_from_velocity(v: f64, alpha: f64) -> PyResult<f64> {
    families::mu_from_velocity(v, alpha).map_err(err)
}

#[pyfunction]
fn bounds_sweep<'py>(py: Python<'py>, gammas: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    let rows = py.detach(|| verify::bounds_sweep(&gammas)).map_err(err)?;
    to_py(py, &rows)
}

/// Successive approximations for the soliton; returns a summary dict.
#[pyfunction]
#[pyo3(signature = (gamma, tol = 1e-10, max_iter = 200, force = false))]
fn fixed_point<'py>(
    py: Python<'py>,
    gamma: f64,
    tol: f64,
    max_iter: usize,
    force: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = FixedPointOptions {
        force,
        ..FixedPointOptions::default()
    };
    let run = soliton_fixedpoint::iterate_to_fixed_point_with(gamma, tol, max_iter, &opts).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("gamma", run.gamma)?;
    d.set_item("iterations", run.iterations())?;
    d.set_item("mu", run.mu())?;
    d.set_item("lambda", run.lambda)?;
    d.set_item("a", run.a)?;
    d.set_item("b", run.b)?;
    d.set_item("error_bound_mu", run.apriori_error_mu)?;
    d.set_item("error_bound_z", run.apriori_error_z)?;
    d.set_item("max_observed_ratio", run.max_observed_ratio())?;
    d.set_item("forced", run.forced)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (seed = 0, cases = 100))]
fn property_suite<'py>(py: Python<'py>, seed: u64, cases: usize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &verify::property_suite(seed, cases).map_err(err)?)
}

#[pymodule]
fn pysgwave(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SgwaveError", m.py().get_type::<SgwaveError>())?;
    m.add_class::<Wave>()?;
    m.add_function(wrap_pyfunction!(hat_mu, m)?)?;
    m.add_function(wrap_pyfunction!(hat_mu_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(velocity_from_mu, m)?)?;
    m.add_function(wrap_pyfunction!(mu_from_velocity, m)?)?;
    m.add_function(wrap_pyfunction!(bounds_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_point, m)?)?;
    m.add_function(wrap_pyfunction!(property_suite, m)?)?;
    Ok(())
}
