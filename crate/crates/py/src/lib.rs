//! Python module `deadcore`: grids, operator assembly, solvers and the
//! exponent analysis.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use deadcore::analysis::{self, CalibrationConfig, NuMode, Tolerances};
use deadcore::{
    ExteriorData, ExteriorShape, FracLapOperator, GridFunction, QuadratureConfig, ReactionMode, ReactionSpec,
    SolveReport, SolverConfig, TailModel,
};

fn to_py(e: deadcore::Error) -> PyErr {
    use deadcore::Error as E;
    match e {
        E::NotConverged { .. } | E::LinearSolve(_) | E::Calibration(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn reaction(gamma: f64, mode: &str) -> PyResult<ReactionSpec> {
    let mode: ReactionMode = mode.parse().map_err(to_py)?;
    ReactionSpec::new(gamma, mode).map_err(to_py)
}

fn solver(residual_tol: f64, max_iters: usize) -> PyResult<SolverConfig> {
    let cfg = SolverConfig { residual_tol, max_iters, ..Default::default() };
    cfg.validate().map_err(to_py)?;
    Ok(cfg)
}

/// Uniform grid `x_i = -R + i h`; the interior is `|x| < a`.
#[pyclass(name = "Grid", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyGrid {
    pub inner: Arc<deadcore::Grid>,
}

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (a, r, h))]
    pub fn new(a: f64, r: f64, h: f64) -> PyResult<Self> {
        Ok(PyGrid { inner: deadcore::Grid::new(a, r, h).map_err(to_py)? })
    }

    #[getter]
    pub fn a(&self) -> f64 {
        self.inner.spec.a
    }

    #[getter]
    pub fn r(&self) -> f64 {
        self.inner.spec.r
    }

    #[getter]
    pub fn h(&self) -> f64 {
        self.inner.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        self.inner.nodes().to_vec()
    }

    /// Half-open index range `(start, end)` of the interior nodes.
    pub fn interior(&self) -> (usize, usize) {
        let r = self.inner.interior();
        (r.start, r.end)
    }

    pub fn __len__(&self) -> usize {
        self.inner.len()
    }

    pub fn __repr__(&self) -> String {
        format!("Grid(a={}, R={}, h={})", self.a(), self.r(), self.h())
    }
}

/// Assembled fractional Laplacian on a grid.
#[pyclass(name = "Operator", frozen)]
pub struct PyOperator {
    pub inner: FracLapOperator,
}

#[pymethods]
impl PyOperator {
    #[new]
    pub fn new(grid: &PyGrid, s: f64) -> PyResult<Self> {
        Ok(PyOperator { inner: deadcore::assemble(grid.inner.clone(), s, QuadratureConfig::default()).map_err(to_py)? })
    }

    #[getter]
    pub fn s(&self) -> f64 {
        self.inner.s
    }

    /// Normalization constant `c_{1,s}`.
    #[getter]
    pub fn c(&self) -> f64 {
        self.inner.c
    }

    #[getter]
    pub fn grid(&self) -> PyGrid {
        PyGrid { inner: self.inner.grid.clone() }
    }

    /// `(-Δ)^s u` at the interior nodes for nodal values `u` (zero beyond R).
    pub fn apply(&self, values: Vec<f64>) -> PyResult<Vec<f64>> {
        let grid = self.inner.grid.clone();
        let u = GridFunction::new(grid.clone(), values, TailModel::Zero).map_err(to_py)?;
        let out = self.inner.apply(&u).map_err(to_py)?;
        Ok(grid.interior().map(|i| out.at(i).unwrap_or(f64::NAN)).collect())
    }
}

/// Least-squares growth fit `log sup_{B_r} |D^k u|` against `log r`.
#[pyclass(name = "Fit", frozen, get_all)]
pub struct PyFit {
    pub x0: f64,
    pub order: usize,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub radii: Vec<f64>,
    pub sups: Vec<f64>,
}

/// Solver output with the analysis tools attached.
#[pyclass(name = "Solution", frozen)]
pub struct PySolution {
    pub inner: SolveReport,
}

#[pymethods]
impl PySolution {
    #[getter]
    pub fn x(&self) -> Vec<f64> {
        self.inner.u.grid.nodes().to_vec()
    }

    #[getter]
    pub fn u(&self) -> Vec<f64> {
        self.inner.u.values.clone()
    }

    #[getter]
    pub fn residual(&self) -> f64 {
        self.inner.residual_inf
    }

    #[getter]
    pub fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    pub fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    pub fn energy(&self) -> f64 {
        self.inner.energy
    }

    #[getter]
    pub fn energy_trace(&self) -> Vec<f64> {
        self.inner.trace.iter().map(|r| r.energy).collect()
    }

    /// Rate `2s/(1-γ)`, with `s = 1` for the local problem.
    #[getter]
    pub fn beta(&self) -> f64 {
        self.inner.beta()
    }

    /// Dead-core intervals `(x_start, x_end)` where `|u| <= tau`.
    #[pyo3(signature = (tau = 1e-12))]
    pub fn dead_core(&self, tau: f64) -> Vec<(f64, f64)> {
        analysis::detect_dead_core(&self.inner.u, tau)
            .intervals
            .iter()
            .map(|iv| (iv.x_start, iv.x_end))
            .collect()
    }

    /// Branching points (one per run of candidate nodes).
    #[pyo3(signature = (nu = 2))]
    pub fn branching_points(&self, nu: usize) -> PyResult<Vec<f64>> {
        let mode = match nu {
            1 => NuMode::One,
            2 => NuMode::Two,
            _ => return Err(PyValueError::new_err("nu must be 1 or 2")),
        };
        let tol = Tolerances::default_for(self.inner.u.grid.h(), self.beta());
        let rep = analysis::detect_branching(&self.inner.u, mode, tol).map_err(to_py)?;
        Ok(rep.points().iter().map(|c| c.x0).collect())
    }

    /// Growth fit about `x0` on `k` radii in `[r_min, r_max]` (default `[8h, a/4]`, 8 radii).
    #[pyo3(signature = (x0 = 0.0, order = 0, r_min = None, r_max = None, k = None))]
    pub fn fit_exponent(
        &self,
        x0: f64,
        order: usize,
        r_min: Option<f64>,
        r_max: Option<f64>,
        k: Option<usize>,
    ) -> PyResult<PyFit> {
        let grid = &self.inner.u.grid;
        let (r0, r1, k0) = analysis::default_window(grid.h(), grid.spec.a);
        let f = analysis::fit_growth_exponent(&self.inner.u, x0, r_min.unwrap_or(r0), r_max.unwrap_or(r1), k.unwrap_or(k0), order)
            .map_err(to_py)?;
        Ok(PyFit {
            x0: f.x0,
            order: f.order,
            slope: f.slope,
            intercept: f.intercept,
            r_squared: f.r_squared,
            radii: f.radii,
            sups: f.sups,
        })
    }

    /// Blow-up `u(x0 + r x) / r^β` at the grid nodes.
    pub fn blow_up(&self, x0: f64, r: f64) -> PyResult<Vec<f64>> {
        let s = self.inner.s.unwrap_or(1.0);
        let v = analysis::blow_up(&self.inner.u, x0, r, s, self.inner.spec.gamma).map_err(to_py)?;
        Ok(v.values)
    }
}

/// Exponents for `(s, γ)`: `(nu, target, gradient_target, schauder)`, with
/// `nu` one of `"1"`, `"2"`, `"indeterminate"`.
#[pyfunction]
pub fn exponent_table(s: f64, gamma: f64) -> PyResult<(String, f64, f64, f64)> {
    let t = deadcore::exponent_table(s, gamma).map_err(to_py)?;
    Ok((t.nu.to_string(), t.target, t.gradient_target, t.schauder))
}

#[pyfunction]
pub fn normalization_constant(s: f64) -> PyResult<f64> {
    deadcore::normalization_constant(1, s).map_err(to_py)
}

/// Closed-form local two-phase profile `κ (x₊^β - x₋^β)` at `x`.
#[pyfunction]
pub fn local_profile(gamma: f64, x: Vec<f64>) -> PyResult<Vec<f64>> {
    let p = deadcore::exact_local_profile(gamma).map_err(to_py)?;
    Ok(x.iter().map(|&v| p.eval(v)).collect())
}

/// Nonlocal solve with exterior data `amplitude * shape`.
#[pyfunction]
#[pyo3(signature = (op, shape = "ramp", amplitude = 1.0, gamma = 0.2, mode = "two-phase", residual_tol = 1e-9, max_iters = 200))]
pub fn solve(
    op: &PyOperator,
    shape: &str,
    amplitude: f64,
    gamma: f64,
    mode: &str,
    residual_tol: f64,
    max_iters: usize,
) -> PyResult<PySolution> {
    let shape: ExteriorShape = shape.parse().map_err(to_py)?;
    let g = ExteriorData::new(shape, amplitude).map_err(to_py)?.sample(op.inner.grid.clone()).map_err(to_py)?;
    let rep = deadcore::solve(&op.inner, &g, &reaction(gamma, mode)?, &solver(residual_tol, max_iters)?).map_err(to_py)?;
    Ok(PySolution { inner: rep })
}

/// Local (s = 1) solve with Dirichlet values `(left, right)` at `∓a`.
#[pyfunction]
#[pyo3(signature = (grid, left, right, gamma = 0.2, mode = "two-phase", residual_tol = 1e-9, max_iters = 200))]
pub fn solve_local(
    grid: &PyGrid,
    left: f64,
    right: f64,
    gamma: f64,
    mode: &str,
    residual_tol: f64,
    max_iters: usize,
) -> PyResult<PySolution> {
    let rep = deadcore::solve_local(grid.inner.clone(), (left, right), &reaction(gamma, mode)?, &solver(residual_tol, max_iters)?)
        .map_err(to_py)?;
    Ok(PySolution { inner: rep })
}

/// Largest amplitude of odd data for which the origin passes the normalized
/// branching test; returns `(amplitude, solution)`.
#[pyfunction]
#[pyo3(signature = (op, shape = "ramp", gamma = 0.2))]
pub fn critical_amplitude(op: &PyOperator, shape: &str, gamma: f64) -> PyResult<(f64, PySolution)> {
    let shape: ExteriorShape = shape.parse().map_err(to_py)?;
    let found = analysis::critical_amplitude(
        &op.inner,
        shape,
        &reaction(gamma, "two-phase")?,
        &SolverConfig::default(),
        &CalibrationConfig::default(),
    )
    .map_err(to_py)?;
    Ok((found.amplitude, PySolution { inner: found.report }))
}

/// Seeded comparison campaign; returns `(failures, max_violation)`.
#[pyfunction]
#[pyo3(signature = (op, pairs = 100, seed = 0, gamma = 0.2))]
pub fn comparison_campaign(op: &PyOperator, pairs: usize, seed: u64, gamma: f64) -> PyResult<(usize, f64)> {
    let sum = analysis::comparison_campaign(&op.inner, &reaction(gamma, "two-phase")?, &SolverConfig::default(), pairs, seed)
        .map_err(to_py)?;
    Ok((sum.failures, sum.max_violation))
}

#[pymodule]
#[pyo3(name = "deadcore")]
fn deadcore_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyOperator>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyFit>()?;
    m.add_function(wrap_pyfunction!(exponent_table, m)?)?;
    m.add_function(wrap_pyfunction!(normalization_constant, m)?)?;
    m.add_function(wrap_pyfunction!(local_profile, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_local, m)?)?;
    m.add_function(wrap_pyfunction!(critical_amplitude, m)?)?;
    m.add_function(wrap_pyfunction!(comparison_campaign, m)?)?;
    Ok(())
}
