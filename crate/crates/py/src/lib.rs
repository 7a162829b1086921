//! Python module `josephus`.
//!
//! Distributions come back as `Distribution` objects, exact rationals as
//! `fractions.Fraction`, and the analysis reports as plain dicts with the same
//! field names as the Rust structs.

use josephus_core::analysis::{self, CltSampling};
use josephus_core::deterministic;
use josephus_core::montecarlo;
use josephus_core::oracle::{as_fractions, oracle_exact};
use josephus_core::rule::ratio;
use josephus_core::survival_dp;
use josephus_core::{Error, ExactRule, Method, Rule, SurvivalDistribution};
use num_bigint::BigInt;
use num_rational::BigRational;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyList;

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidState(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_dict<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// An elimination rule.
#[pyclass(name = "Rule", module = "josephus", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyRule(Rule);

#[pymethods]
impl PyRule {
    #[staticmethod]
    fn deterministic() -> Self {
        PyRule(Rule::Deterministic)
    }

    #[staticmethod]
    fn r1(p: f64) -> PyResult<Self> {
        Rule::r1(p).map(PyRule).map_err(err)
    }

    #[staticmethod]
    fn r2(p: f64) -> PyResult<Self> {
        Rule::r2(p).map(PyRule).map_err(err)
    }

    #[staticmethod]
    fn r3(p: f64, q: f64) -> PyResult<Self> {
        Rule::r3(p, q).map(PyRule).map_err(err)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.name()
    }

    #[getter]
    fn p(&self) -> Option<f64> {
        self.0.p()
    }

    #[getter]
    fn q(&self) -> Option<f64> {
        self.0.q()
    }

    fn __repr__(&self) -> String {
        format!("Rule({})", self.0)
    }
}

/// Survival probabilities of the labels `0..N`.
#[pyclass(name = "Distribution", module = "josephus", frozen, skip_from_py_object)]
struct PyDistribution(SurvivalDistribution);

#[pymethods]
impl PyDistribution {
    #[getter]
    fn probs(&self) -> Vec<f64> {
        self.0.probs.clone()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n_participants
    }

    #[getter]
    fn rule(&self) -> PyRule {
        PyRule(self.0.rule)
    }

    #[getter]
    fn method(&self) -> &'static str {
        match self.0.method {
            Method::ExactDp => "exact_dp",
            Method::ExactOracle => "exact_oracle",
            Method::MonteCarlo => "monte_carlo",
        }
    }

    #[getter]
    fn samples(&self) -> Option<u64> {
        self.0.mc_samples
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __getitem__(&self, n: i64) -> f64 {
        self.0.prob(n)
    }

    fn total(&self) -> f64 {
        self.0.total()
    }

    fn argmax(&self) -> usize {
        self.0.argmax()
    }

    /// Mass with `n / N` in `[lo, hi]`.
    fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        self.0.mass_between(lo, hi)
    }

    fn mirror_asymmetry(&self) -> f64 {
        self.0.mirror_asymmetry()
    }

    fn total_variation(&self, other: &PyDistribution) -> f64 {
        self.0.total_variation(&other.0)
    }

    fn max_abs_diff(&self, other: &PyDistribution) -> f64 {
        self.0.max_abs_diff(&other.0)
    }

    /// `E[phi(X_N)]` for a Python callable `phi`.
    fn expectation(&self, phi: &Bound<'_, PyAny>) -> PyResult<f64> {
        let n = self.0.n_participants as f64;
        let mut total = 0.0;
        for (k, g) in self.0.probs.iter().enumerate() {
            if *g != 0.0 {
                total += g * phi.call1((k as f64 / n,))?.extract::<f64>()?;
            }
        }
        Ok(total)
    }

    /// `E[phi_k(X_N)]` with `phi_k(x) = (1/2 - x)^k`, optionally of `|phi_k|`.
    #[pyo3(signature = (k, absolute = false))]
    fn moment(&self, k: u32, absolute: bool) -> PyResult<f64> {
        analysis::moment(&self.0, k, absolute).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Distribution({}, N={}, {})", self.0.rule, self.0.n_participants, self.method())
    }
}

/// `(a_N, b_N)`: zero- and one-based label of the deterministic survivor.
#[pyfunction]
#[pyo3(signature = (n, method = "recurrence"))]
fn survivor(n: u64, method: &str) -> PyResult<(u64, u64)> {
    let s = match method {
        "recurrence" => deterministic::survivor_recurrence(n),
        "closed_form" => deterministic::survivor_closed_form(n),
        "binary_rotation" => deterministic::survivor_binary_rotation(n),
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    }
    .map_err(err)?;
    Ok((s.survivor_zero_based, s.survivor_one_based))
}

/// Coefficients `0..=max_degree` of the generating series of `b_N`.
#[pyfunction]
fn generating_series(max_degree: usize) -> PyResult<Vec<BigInt>> {
    deterministic::generating_series_coefficients(max_degree).map_err(err)
}

#[pyfunction]
fn distribution(rule: &PyRule, n: usize) -> PyResult<PyDistribution> {
    survival_dp::distribution(&rule.0, n).map(PyDistribution).map_err(err)
}

fn exact_param(x: Option<&Bound<'_, PyAny>>, name: &str) -> PyResult<BigRational> {
    let Some(x) = x else {
        return Err(PyValueError::new_err(format!("{name} is required for this rule")));
    };
    let num: i64 = x.getattr("numerator")?.extract()?;
    let den: i64 = x.getattr("denominator")?.extract()?;
    ratio(num, den).map_err(err)
}

fn exact_rule(kind: &str, p: Option<&Bound<'_, PyAny>>, q: Option<&Bound<'_, PyAny>>) -> PyResult<ExactRule> {
    match kind {
        "deterministic" => Ok(ExactRule::Deterministic),
        "r1" => ExactRule::r1(exact_param(p, "p")?).map_err(err),
        "r2" => ExactRule::r2(exact_param(p, "p")?).map_err(err),
        "r3" => ExactRule::r3(exact_param(p, "p")?, exact_param(q, "q")?).map_err(err),
        other => Err(PyValueError::new_err(format!("unknown rule {other:?}"))),
    }
}

fn fractions<'py>(py: Python<'py>, probs: &[BigRational]) -> PyResult<Bound<'py, PyList>> {
    let fraction = py.import("fractions")?.getattr("Fraction")?;
    let items = as_fractions(probs)
        .into_iter()
        .map(|(num, den)| fraction.call1((num, den)))
        .collect::<PyResult<Vec<_>>>()?;
    PyList::new(py, items)
}

/// Exhaustive enumeration with exact rationals. `p` and `q` are anything with
/// `numerator` and `denominator` (`int`, `fractions.Fraction`).
#[pyfunction]
#[pyo3(signature = (kind, n, p = None, q = None))]
fn oracle<'py>(
    py: Python<'py>,
    kind: &str,
    n: usize,
    p: Option<&Bound<'py, PyAny>>,
    q: Option<&Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyList>> {
    let rule = exact_rule(kind, p, q)?;
    let probs = py.detach(|| oracle_exact(&rule, n)).map_err(err)?;
    fractions(py, &probs)
}

/// The dynamic programme run in exact rational arithmetic.
#[pyfunction]
#[pyo3(signature = (kind, n, p = None, q = None))]
fn exact_distribution<'py>(
    py: Python<'py>,
    kind: &str,
    n: usize,
    p: Option<&Bound<'py, PyAny>>,
    q: Option<&Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyList>> {
    let rule = exact_rule(kind, p, q)?;
    let probs = survival_dp::exact_dp_distribution(&rule, n).map_err(err)?;
    fractions(py, &probs)
}

/// Survivor of one simulated round, drawn from stream 0 of `seed`.
#[pyfunction]
fn sample_survivor(rule: &PyRule, n: usize, seed: u64) -> PyResult<usize> {
    montecarlo::sample_survivor(&rule.0, n, seed)
        .map(|s| s.survivor)
        .map_err(err)
}

/// Survivor counts over `samples` seeded replicates.
#[pyfunction]
fn simulate(py: Python<'_>, rule: &PyRule, n: usize, samples: u64, seed: u64) -> PyResult<Vec<u64>> {
    let rule = rule.0;
    py.detach(|| montecarlo::empirical_counts(&rule, n, samples, seed))
        .map_err(err)
}

#[pyfunction]
fn empirical_distribution(py: Python<'_>, rule: &PyRule, n: usize, samples: u64, seed: u64) -> PyResult<PyDistribution> {
    let rule = rule.0;
    py.detach(|| montecarlo::empirical_distribution(&rule, n, samples, seed))
        .map(PyDistribution)
        .map_err(err)
}

#[pyfunction]
fn moment_report<'py>(py: Python<'py>, rule: &PyRule, n_min: usize, n_max: usize) -> PyResult<Bound<'py, PyAny>> {
    let rule = rule.0;
    let report = py.detach(|| analysis::moment_report(&rule, n_min, n_max)).map_err(err)?;
    to_dict(py, &report)
}

/// `(beta, gamma)` for the middle-range decay bound, `1/3 < p < 2/3`.
#[pyfunction]
fn decay_params(p: f64) -> PyResult<(f64, f64)> {
    analysis::decay_params_feasible(p).map_err(err)
}

#[pyfunction]
fn decay_bound_check<'py>(py: Python<'py>, p: f64, n_max: usize) -> PyResult<Bound<'py, PyAny>> {
    let fit = py.detach(|| analysis::decay_bound_check(p, n_max)).map_err(err)?;
    to_dict(py, &fit)
}

#[pyfunction]
#[pyo3(signature = (n_max, epsilon = 0.05, alpha = 1.03))]
fn unbiased_decay_check<'py>(py: Python<'py>, n_max: usize, epsilon: f64, alpha: f64) -> PyResult<Bound<'py, PyAny>> {
    let fit = py
        .detach(|| analysis::unbiased_decay_check(n_max, epsilon, alpha))
        .map_err(err)?;
    to_dict(py, &fit)
}

#[pyfunction]
fn moment_scaling<'py>(py: Python<'py>, n_max: usize, k: u32) -> PyResult<Bound<'py, PyAny>> {
    let m = py.detach(|| analysis::moment_scaling_check(n_max, k)).map_err(err)?;
    to_dict(py, &m)
}

#[pyfunction]
fn second_moment_sums<'py>(py: Python<'py>, l_max: usize) -> PyResult<Bound<'py, PyAny>> {
    let s = py.detach(|| analysis::second_moment_sum_check(l_max)).map_err(err)?;
    to_dict(py, &s)
}

/// Normalized sums of independent survivors, `sampling` either
/// `"inverse_cdf"` or `"simulation"`.
#[pyfunction]
#[pyo3(signature = (l_max, trials, seed, sampling = "inverse_cdf"))]
fn clt<'py>(py: Python<'py>, l_max: usize, trials: usize, seed: u64, sampling: &str) -> PyResult<Bound<'py, PyAny>> {
    let sampling = match sampling {
        "inverse_cdf" => CltSampling::InverseCdf,
        "simulation" => CltSampling::Simulation,
        other => return Err(PyValueError::new_err(format!("unknown sampling {other:?}"))),
    };
    let report = py
        .detach(|| analysis::clt_experiment(l_max, trials, seed, sampling))
        .map_err(err)?;
    to_dict(py, &report)
}

#[pymodule]
fn josephus(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRule>()?;
    m.add_class::<PyDistribution>()?;
    m.add_function(wrap_pyfunction!(survivor, m)?)?;
    m.add_function(wrap_pyfunction!(generating_series, m)?)?;
    m.add_function(wrap_pyfunction!(distribution, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(exact_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(sample_survivor, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(moment_report, m)?)?;
    m.add_function(wrap_pyfunction!(decay_params, m)?)?;
    m.add_function(wrap_pyfunction!(decay_bound_check, m)?)?;
    m.add_function(wrap_pyfunction!(unbiased_decay_check, m)?)?;
    m.add_function(wrap_pyfunction!(moment_scaling, m)?)?;
    m.add_function(wrap_pyfunction!(second_moment_sums, m)?)?;
    m.add_function(wrap_pyfunction!(clt, m)?)?;
    Ok(())
}
