//! Python module `qbl`: datum I/O, the finiteness conditions, the Gaussian
//! constant, sandwich bounds, and the ratio oracles. Reports come back as
//! plain dicts with rationals rendered as strings, so nothing here depends
//! on Python-side numeric types.

use nalgebra::DMatrix;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qbl_core::conditions::{check_dimension, ConditionReport, LatticeConfig, Variant};
use qbl_core::datum::QuiverDatum;
use qbl_core::error::Error;
use qbl_core::gaussian::{
    optimize_gaussian_constant, sandwich_bounds, subspace_bl_constant, ConstantEstimate, Method,
    OptimizerConfig,
};
use qbl_core::io::{parse_datum, parse_witness, serialize_datum, serialize_witness};
use qbl_core::numerics::exact::{parse_rational, rat_int, rational_to_string};
use qbl_core::numerics::spd::SpdMatrix;
use qbl_core::verifier::{
    counterexample_from_witness, cross_boxes, ratio_boxes_chain, ratio_gaussian,
    ratio_monte_carlo, ratio_powerlaw, ParamSweep, RatioReport, TestFunction,
};

fn value_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_variant(name: &str) -> PyResult<Variant> {
    match name {
        "per-arrow" => Ok(Variant::PerArrow),
        "cd" | "joint-image" => Ok(Variant::JointImage),
        other => Err(PyValueError::new_err(format!(
            "unknown variant {other:?}: use \"per-arrow\" or \"cd\""
        ))),
    }
}

fn optimizer_config(method: &str, seed: u64, restarts: usize, max_iters: usize) -> PyResult<OptimizerConfig> {
    let method = match method {
        "fp" => Method::FixedPoint,
        "grad" => Method::GradientAscent,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown method {other:?}: use \"fp\" or \"grad\""
            )))
        }
    };
    Ok(OptimizerConfig {
        method,
        seed,
        restarts,
        max_iters,
        ..OptimizerConfig::default()
    })
}

fn estimate_dict<'py>(py: Python<'py>, est: &ConstantEstimate) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("value", est.value)?;
    d.set_item("status", est.status.as_str())?;
    d.set_item("iterations", est.iterations)?;
    d.set_item("gradient_norm", est.final_gradient_norm)?;
    d.set_item("scaling_ok", est.scaling_ok)?;
    Ok(d)
}

fn ratio_dict<'py>(py: Python<'py>, report: &RatioReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("lhs", report.lhs)?;
    d.set_item("rhs", report.rhs)?;
    d.set_item("ratio", report.ratio)?;
    d.set_item("method", report.method.as_str())?;
    if let Some(se) = report.stderr {
        d.set_item("stderr", se)?;
    }
    Ok(d)
}

fn condition_dict<'py>(py: Python<'py>, report: &ConditionReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("scaling_ok", report.scaling_ok)?;
    d.set_item("scaling_lhs", rational_to_string(&report.scaling_lhs))?;
    d.set_item("scaling_rhs", rational_to_string(&report.scaling_rhs))?;
    d.set_item("status", report.dimension.as_str())?;
    d.set_item("families_checked", report.families_checked)?;
    d.set_item("truncated", report.truncated)?;
    if let Some(family) = &report.witness {
        let spaces: Vec<Vec<Vec<String>>> = family
            .subspaces
            .iter()
            .map(|s| {
                let b = s.basis();
                (0..b.rows())
                    .map(|r| (0..b.cols()).map(|c| rational_to_string(b.at(r, c))).collect())
                    .collect()
            })
            .collect();
        d.set_item("witness", spaces)?;
        d.set_item("witness_json", serialize_witness(family))?;
    } else {
        d.set_item("witness", py.None())?;
    }
    if let Some((lhs, rhs)) = &report.witness_sides {
        d.set_item("witness_lhs", rational_to_string(lhs))?;
        d.set_item("witness_rhs", rational_to_string(rhs))?;
    }
    Ok(d)
}

fn gaussian_forms(forms: Vec<Vec<Vec<f64>>>) -> PyResult<Vec<TestFunction>> {
    forms
        .into_iter()
        .enumerate()
        .map(|(a, rows)| {
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(PyValueError::new_err(format!("form {} is not square", a + 1)));
            }
            let flat: Vec<f64> = rows.into_iter().flatten().collect();
            let form = SpdMatrix::new(DMatrix::from_row_slice(n, n, &flat)).map_err(value_err)?;
            Ok(TestFunction::Gaussian { form })
        })
        .collect()
}

/// A bipartite quiver with one linear map per arrow and one inverse
/// exponent per target.
#[pyclass(frozen)]
struct Datum {
    inner: QuiverDatum,
}

#[pymethods]
impl Datum {
    /// Parses the JSON datum format (matrices row-major, entries as
    /// rational strings, exponents given as p with w = 1/p).
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        let inner = parse_datum(text).map_err(value_err)?;
        inner.ensure_valid().map_err(value_err)?;
        Ok(Datum { inner })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PyValueError::new_err(format!("{path}: {e}")))?;
        Datum::new(&text)
    }

    /// Canonical serialized form; parsing it back gives an equal datum.
    fn serialize(&self) -> String {
        serialize_datum(&self.inner)
    }

    #[getter]
    fn num_sources(&self) -> usize {
        self.inner.num_sources()
    }

    #[getter]
    fn num_targets(&self) -> usize {
        self.inner.num_targets()
    }

    #[getter]
    fn source_dims(&self) -> Vec<usize> {
        self.inner.source_dims().to_vec()
    }

    #[getter]
    fn target_dims(&self) -> Vec<usize> {
        self.inner.target_dims().to_vec()
    }

    #[getter]
    fn alphas(&self) -> Vec<usize> {
        self.inner.alphas()
    }

    /// Inverse exponents w_j as rational strings.
    #[getter]
    fn exponents(&self) -> Vec<String> {
        self.inner.inv_exponents().iter().map(rational_to_string).collect()
    }

    /// The exact dimension-count identity required for a finite constant.
    fn scaling<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let (ok, lhs, rhs) = qbl_core::conditions::check_scaling(&self.inner);
        let d = PyDict::new(py);
        d.set_item("ok", ok)?;
        d.set_item("lhs", rational_to_string(&lhs))?;
        d.set_item("rhs", rational_to_string(&rhs))?;
        Ok(d)
    }

    /// Searches a subspace lattice for a violating family. A "violated"
    /// status carries the witness, both as nested rational strings and as
    /// JSON ready for `counterexample`.
    #[pyo3(signature = (variant = "cd"))]
    fn check_dimension<'py>(&self, py: Python<'py>, variant: &str) -> PyResult<Bound<'py, PyDict>> {
        let report = check_dimension(&self.inner, parse_variant(variant)?, &LatticeConfig::default())
            .map_err(value_err)?;
        condition_dict(py, &report)
    }

    /// Supremum of the Gaussian determinant ratio; "diverging" means the
    /// constant is infinite.
    #[pyo3(signature = (method = "fp", seed = 0, restarts = 8, max_iters = 10_000))]
    fn gaussian_constant<'py>(
        &self,
        py: Python<'py>,
        method: &str,
        seed: u64,
        restarts: usize,
        max_iters: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let config = optimizer_config(method, seed, restarts, max_iters)?;
        let est = optimize_gaussian_constant(&self.inner, &config).map_err(value_err)?;
        estimate_dict(py, &est)
    }

    /// Full inequality constant for one-source data with one arrow per
    /// target, where the Gaussian supremum is the whole answer.
    #[pyo3(signature = (method = "fp", seed = 0, restarts = 8, max_iters = 10_000))]
    fn subspace_constant<'py>(
        &self,
        py: Python<'py>,
        method: &str,
        seed: u64,
        restarts: usize,
        max_iters: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let config = optimizer_config(method, seed, restarts, max_iters)?;
        let est = subspace_bl_constant(&self.inner, &config).map_err(value_err)?;
        estimate_dict(py, &est)
    }

    /// Two-sided bracket for the shared-function constant from the
    /// per-arrow one: [BL / prod alpha^alpha, BL].
    #[pyo3(signature = (method = "fp", seed = 0, restarts = 8, max_iters = 10_000))]
    fn sandwich<'py>(
        &self,
        py: Python<'py>,
        method: &str,
        seed: u64,
        restarts: usize,
        max_iters: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let config = optimizer_config(method, seed, restarts, max_iters)?;
        let report = sandwich_bounds(&self.inner, &config).map_err(value_err)?;
        let d = PyDict::new(py);
        d.set_item("bl", report.bl_value)?;
        d.set_item("status", report.status.as_str())?;
        d.set_item("alphas", report.alphas)?;
        d.set_item("alpha_power_product", report.alpha_power_product)?;
        d.set_item("lower", report.lower)?;
        d.set_item("upper", report.upper)?;
        let parts: Vec<(usize, f64, &str)> = report
            .parts
            .iter()
            .map(|p| (p.source + 1, p.estimate.value, p.estimate.status.as_str()))
            .collect();
        d.set_item("parts", parts)?;
        Ok(d)
    }

    /// One subspace quiver per source; the constant multiplies across parts.
    fn split(&self) -> PyResult<Vec<Datum>> {
        let parts = self.inner.split_sources().map_err(value_err)?;
        Ok(parts.into_iter().map(|p| Datum { inner: p.datum }).collect())
    }

    /// Sweeps the witness-driven family of indicator functions over outer
    /// radii and reports the growth exponent of the ratio; a positive
    /// expected slope certifies an infinite constant.
    #[pyo3(signature = (witness_json, radii, r_small = 1.0))]
    fn counterexample<'py>(
        &self,
        py: Python<'py>,
        witness_json: &str,
        radii: Vec<f64>,
        r_small: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let family = parse_witness(witness_json).map_err(value_err)?;
        let sweep = ParamSweep::OuterRadius { r_small, values: radii };
        let report = counterexample_from_witness(&self.inner, &family, &sweep).map_err(value_err)?;
        let d = PyDict::new(py);
        d.set_item("expected_slope", rational_to_string(&report.expected_slope))?;
        d.set_item("fitted_slope", report.fitted_slope)?;
        d.set_item("containment_verified", report.containment_verified)?;
        d.set_item("shrink", report.shrink)?;
        let points: Vec<(f64, f64, f64)> = report
            .points
            .iter()
            .map(|p| (p.param, p.log_lhs, p.log_rhs))
            .collect();
        d.set_item("points", points)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "Datum(sources={:?}, targets={:?}, arrows={})",
            self.inner.source_dims(),
            self.inner.target_dims(),
            self.inner.arrows().len()
        )
    }
}

/// Closed form for the three-function convolution constant on R^d, taking
/// the inverse exponents as rational strings.
#[pyfunction(name = "young_closed_form")]
fn young_closed_form_py(ws: Vec<String>, d: usize) -> PyResult<f64> {
    let ws: Vec<_> = ws
        .iter()
        .map(|s| parse_rational(s).map_err(value_err))
        .collect::<PyResult<_>>()?;
    qbl_core::gaussian::young_closed_form(&ws, d).map_err(value_err)
}

/// Ratio achieved by centered Gaussians exp(-pi <A_a x, x>), one symmetric
/// positive definite matrix per arrow, given as nested row lists.
#[pyfunction(name = "ratio_gaussian")]
fn ratio_gaussian_py<'py>(
    py: Python<'py>,
    datum: &Datum,
    forms: Vec<Vec<Vec<f64>>>,
) -> PyResult<Bound<'py, PyDict>> {
    let report = ratio_gaussian(&datum.inner, &gaussian_forms(forms)?).map_err(value_err)?;
    ratio_dict(py, &report)
}

/// The same ratio estimated by seeded Monte Carlo instead of determinants.
#[pyfunction(name = "ratio_monte_carlo_gaussian")]
fn ratio_monte_carlo_gaussian_py<'py>(
    py: Python<'py>,
    datum: &Datum,
    forms: Vec<Vec<Vec<f64>>>,
    budget: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let report = ratio_monte_carlo(&datum.inner, &gaussian_forms(forms)?, budget, seed)
        .map_err(value_err)?;
    ratio_dict(py, &report)
}

/// Power-law ratio for the pair of scalings (b1 x, b2 x) at exponent p > 1;
/// as p -> 1 it approaches 1/sqrt(|b1 b2|).
#[pyfunction(name = "ratio_powerlaw")]
fn ratio_powerlaw_py<'py>(py: Python<'py>, b1: f64, b2: f64, p: f64) -> PyResult<Bound<'py, PyDict>> {
    let report = ratio_powerlaw(b1, b2, p).map_err(value_err)?;
    ratio_dict(py, &report)
}

/// Exact slice integral for the cross of two breadth-n strips fed through
/// both projections of the coordinate chain; lhs, area, and rhs^2 come out
/// as exact integer strings next to the float ratio.
#[pyfunction(name = "ratio_boxes_chain")]
fn ratio_boxes_chain_py<'py>(py: Python<'py>, n: i64) -> PyResult<Bound<'py, PyDict>> {
    let chain = ratio_boxes_chain(&rat_int(n)).map_err(value_err)?;
    let d = ratio_dict(py, &chain.report)?;
    d.set_item("lhs_exact", rational_to_string(&chain.lhs_exact))?;
    d.set_item("area_exact", rational_to_string(&chain.area_exact))?;
    d.set_item("rhs_squared_exact", rational_to_string(&chain.rhs_squared_exact))?;
    Ok(d)
}

/// Monte Carlo cross-check of the chain oracle: the same cross-shaped
/// indicator goes on every arrow of the given datum.
#[pyfunction(name = "ratio_monte_carlo_cross")]
fn ratio_monte_carlo_cross_py<'py>(
    py: Python<'py>,
    datum: &Datum,
    n: i64,
    budget: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let boxes = cross_boxes(&rat_int(n));
    let funcs: Vec<TestFunction> = (0..datum.inner.arrows().len())
        .map(|_| TestFunction::BoxUnion { boxes: boxes.clone() })
        .collect();
    let report = ratio_monte_carlo(&datum.inner, &funcs, budget, seed).map_err(value_err)?;
    ratio_dict(py, &report)
}

#[pymodule]
fn qbl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Datum>()?;
    m.add_function(wrap_pyfunction!(young_closed_form_py, m)?)?;
    m.add_function(wrap_pyfunction!(ratio_gaussian_py, m)?)?;
    m.add_function(wrap_pyfunction!(ratio_monte_carlo_gaussian_py, m)?)?;
    m.add_function(wrap_pyfunction!(ratio_powerlaw_py, m)?)?;
    m.add_function(wrap_pyfunction!(ratio_boxes_chain_py, m)?)?;
    m.add_function(wrap_pyfunction!(ratio_monte_carlo_cross_py, m)?)?;
    Ok(())
}
