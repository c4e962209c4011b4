//! Python bindings: the tree spec, the jet solver and the boundary
//! operations, with distributions exchanged as JSON strings.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use martinkern::boundary::{self, BoundaryDistribution, DistributionJson, HarmonicEvaluator};
use martinkern::error::Error;
use martinkern::forward::{self, ForwardSpec};
use martinkern::green;
use martinkern::isotropic::{self, IsotropicParams};
use martinkern::oracle::TruncatedBall;
use martinkern::poly;
use martinkern::tree;

fn to_py_err(err: Error) -> PyErr {
    match err {
        Error::NonConvergence { .. }
        | Error::DivisionBySingularJet { .. }
        | Error::SqrtOfSingularJet { .. }
        | Error::ZeroDenominator { .. }
        | Error::VanishingGreen { .. }
        | Error::DenominatorNearOne { .. }
        | Error::SpectralBound { .. } => PyRuntimeError::new_err(err.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn path(slots: Vec<u32>) -> tree::VertexPath {
    tree::VertexPath::from_slots(slots)
}

fn parse_distribution(spec: &tree::TreeSpec, json: &str) -> PyResult<BoundaryDistribution> {
    let parsed: DistributionJson =
        serde_json::from_str(json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    BoundaryDistribution::from_json_struct(spec, &parsed).map_err(to_py_err)
}

/// Cone-type tree specification.
#[pyclass(name = "TreeSpec", frozen)]
struct PyTreeSpec {
    inner: tree::TreeSpec,
}

#[pymethods]
impl PyTreeSpec {
    /// Parses the JSON wire format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = tree::TreeSpec::from_json(text).map_err(to_py_err)?;
        Ok(PyTreeSpec { inner })
    }

    /// Simple random walk on the homogeneous tree T_q.
    #[staticmethod]
    fn srw(q: u32) -> Self {
        PyTreeSpec {
            inner: tree::TreeSpec::homogeneous_srw(q),
        }
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    /// Invariant violations; empty means the spec is valid.
    fn validate(&self) -> Vec<String> {
        self.inner.validate()
    }

    fn type_of(&self, vertex: Vec<u32>) -> PyResult<String> {
        let t = self.inner.type_of(&path(vertex)).map_err(to_py_err)?;
        Ok(self.inner.type_name(t).to_string())
    }

    fn reversing_measure(&self, vertex: Vec<u32>) -> PyResult<f64> {
        self.inner
            .reversing_measure(&path(vertex))
            .map_err(to_py_err)
    }

    fn vertices_to_depth(&self, depth: usize) -> Vec<Vec<u32>> {
        self.inner
            .vertices_to_depth(depth)
            .into_iter()
            .map(|p| p.slots().to_vec())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("TreeSpec({} types)", self.inner.num_types())
    }
}

/// Solved first-passage jets at one base point, bound to their spec.
#[pyclass(name = "JetTable", frozen)]
struct PyJetTable {
    spec: tree::TreeSpec,
    table: green::JetTable,
}

#[pymethods]
impl PyJetTable {
    #[getter]
    fn lambda(&self) -> Complex64 {
        self.table.lambda()
    }

    #[getter]
    fn order(&self) -> usize {
        self.table.order()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.table.iterations()
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.table.residual()
    }

    /// Taylor coefficients of the upward first passage of a type.
    fn f_up(&self, type_name: &str) -> PyResult<Vec<Complex64>> {
        let t = self
            .spec
            .type_index(type_name)
            .ok_or_else(|| PyValueError::new_err(format!("unknown type {type_name:?}")))?;
        Ok(self.table.f_up(t).map_err(to_py_err)?.coeffs().to_vec())
    }

    /// Taylor coefficients of G(x, x | lambda).
    fn green_diag(&self, vertex: Vec<u32>) -> PyResult<Vec<Complex64>> {
        let jet = green::green_diag(&self.spec, &self.table, &path(vertex)).map_err(to_py_err)?;
        Ok(jet.coeffs().to_vec())
    }

    /// Taylor coefficients of the Martin kernel K(x, arc | lambda).
    fn martin_kernel(&self, vertex: Vec<u32>, arc: Vec<u32>) -> PyResult<Vec<Complex64>> {
        let jet = green::martin_kernel(&self.spec, &self.table, &path(vertex), &path(arc))
            .map_err(to_py_err)?;
        Ok(jet.coeffs().to_vec())
    }

    /// Poisson transform jet of a distribution (JSON) at a vertex.
    fn poisson(&self, dist_json: &str, vertex: Vec<u32>) -> PyResult<Vec<Complex64>> {
        let nu = parse_distribution(&self.spec, dist_json)?;
        let jet = boundary::poisson_transform(&self.spec, &self.table, &nu, &path(vertex))
            .map_err(to_py_err)?;
        Ok(jet.coeffs().to_vec())
    }

    /// Recovered arc mass of the harmonic function given by a distribution.
    fn recover(&self, dist_json: &str, vertex: Vec<u32>) -> PyResult<Complex64> {
        let nu = parse_distribution(&self.spec, dist_json)?;
        let h = HarmonicEvaluator::Poisson(nu);
        boundary::recover_distribution(&self.spec, &self.table, &h, &path(vertex))
            .map_err(to_py_err)
    }

    /// Signed derivative kernel value used in polyharmonic representations.
    fn derivative_kernel(&self, vertex: Vec<u32>, arc: Vec<u32>, r: usize) -> PyResult<Complex64> {
        poly::derivative_kernel(&self.spec, &self.table, &path(vertex), &path(arc), r)
            .map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "JetTable(lambda={}, order={}, residual={:.3e})",
            self.table.lambda(),
            self.table.order(),
            self.table.residual()
        )
    }
}

/// Solves the first-passage fixed point at `lambda` to the given jet order.
#[pyfunction]
#[pyo3(signature = (spec, lambda, order = 0))]
fn solve(spec: &PyTreeSpec, lambda: Complex64, order: usize) -> PyResult<PyJetTable> {
    let table = green::solve_f_up(&spec.inner, lambda, order).map_err(to_py_err)?;
    Ok(PyJetTable {
        spec: spec.inner.clone(),
        table,
    })
}

/// Brackets the spectral radius; returns `(lo, hi)`.
#[pyfunction]
fn estimate_rho(spec: &PyTreeSpec) -> PyResult<(f64, f64)> {
    let bracket = green::estimate_rho(&spec.inner).map_err(to_py_err)?;
    Ok((bracket.lo, bracket.hi))
}

/// Exact n-step probability p^(n)(x, y) on a truncated ball.
#[pyfunction]
fn n_step(spec: &PyTreeSpec, x: Vec<u32>, y: Vec<u32>, n: usize) -> PyResult<f64> {
    let ball = TruncatedBall::new(&spec.inner, &path(x), n).map_err(to_py_err)?;
    ball.n_step(&path(y), n).map_err(to_py_err)
}

/// Truncated Green series with tail bound; returns `(value, tail_bound)`.
#[pyfunction]
fn green_series(
    spec: &PyTreeSpec,
    x: Vec<u32>,
    y: Vec<u32>,
    lambda: Complex64,
    terms: usize,
    rho_hi: f64,
) -> PyResult<(Complex64, f64)> {
    let ball = TruncatedBall::new(&spec.inner, &path(x), terms).map_err(to_py_err)?;
    let series = ball
        .green_series(&path(y), lambda, terms, rho_hi)
        .map_err(to_py_err)?;
    Ok((series.value, series.tail_bound))
}

/// Closed-form first-passage jet for simple random walk on T_q.
#[pyfunction]
#[pyo3(signature = (q, lambda, order = 0))]
fn closed_f(q: u32, lambda: Complex64, order: usize) -> PyResult<Vec<Complex64>> {
    let params = IsotropicParams::new(q, lambda).map_err(to_py_err)?;
    let jet = isotropic::closed_f(&params, order).map_err(to_py_err)?;
    Ok(jet.coeffs().to_vec())
}

/// Horocycle index hor(x, arc).
#[pyfunction]
fn horocycle_index(x: Vec<u32>, arc: Vec<u32>) -> PyResult<i64> {
    isotropic::horocycle_index(&path(x), &path(arc)).map_err(to_py_err)
}

/// q^(|x|)(o, x) for a forward spec.
#[pyfunction]
fn forward_mass(spec: &PyTreeSpec, x: Vec<u32>) -> PyResult<f64> {
    let fwd = ForwardSpec::new(spec.inner.clone()).map_err(to_py_err)?;
    forward::forward_mass(&fwd, &path(x)).map_err(to_py_err)
}

/// Derivative kernel of a forward operator.
#[pyfunction]
fn forward_kernel(
    spec: &PyTreeSpec,
    x: Vec<u32>,
    arc: Vec<u32>,
    lambda: Complex64,
    r: usize,
) -> PyResult<Complex64> {
    let fwd = ForwardSpec::new(spec.inner.clone()).map_err(to_py_err)?;
    forward::forward_kernel(&fwd, &path(x), &path(arc), lambda, r).map_err(to_py_err)
}

/// Forward Poisson transform of a distribution (JSON) at a vertex.
#[pyfunction]
fn forward_poisson(
    spec: &PyTreeSpec,
    dist_json: &str,
    lambda: Complex64,
    x: Vec<u32>,
) -> PyResult<Complex64> {
    let fwd = ForwardSpec::new(spec.inner.clone()).map_err(to_py_err)?;
    let sigma = parse_distribution(fwd.tree(), dist_json)?;
    forward::forward_poisson(&fwd, &sigma, lambda, &path(x)).map_err(to_py_err)
}

#[pymodule]
fn martinkern_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTreeSpec>()?;
    m.add_class::<PyJetTable>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_rho, m)?)?;
    m.add_function(wrap_pyfunction!(n_step, m)?)?;
    m.add_function(wrap_pyfunction!(green_series, m)?)?;
    m.add_function(wrap_pyfunction!(closed_f, m)?)?;
    m.add_function(wrap_pyfunction!(horocycle_index, m)?)?;
    m.add_function(wrap_pyfunction!(forward_mass, m)?)?;
    m.add_function(wrap_pyfunction!(forward_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(forward_poisson, m)?)?;
    Ok(())
}
