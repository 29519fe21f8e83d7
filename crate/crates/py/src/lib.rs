//! Python bindings. Matrices cross the boundary as lists of rows of complex
//! numbers; library errors surface as `BechainError` (a `ValueError`).

use bechain::appgen::{trotter_sequence, TrotterSpec};
use bechain::block_encoding::{self as be_mod, deviation, verify_encoding};
use bechain::linalg::{opnorm, CMatrix, C64};
use bechain::{mcm, oaa, qsp, uncompute};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(bechain_py, BechainError, PyValueError);

fn err(e: bechain::Error) -> PyErr {
    BechainError::new_err(e.to_string())
}

type Rows = Vec<Vec<C64>>;

fn to_matrix(rows: Rows) -> PyResult<CMatrix> {
    CMatrix::from_rows(&rows).map_err(err)
}

fn to_rows(m: &CMatrix) -> Rows {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

#[pyclass(name = "BlockEncoding", module = "bechain_py", from_py_object)]
#[derive(Clone)]
struct PyBlockEncoding {
    inner: bechain::BlockEncoding,
}

#[pymethods]
impl PyBlockEncoding {
    #[new]
    #[pyo3(signature = (unitary, ancillas, system, alpha = 1.0))]
    fn new(unitary: Rows, ancillas: usize, system: usize, alpha: f64) -> PyResult<Self> {
        let inner = bechain::BlockEncoding::new(to_matrix(unitary)?, ancillas, system)
            .and_then(|b| b.with_alpha(alpha))
            .map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn dilate_hermitian(h: Rows) -> PyResult<Self> {
        Ok(Self { inner: be_mod::dilate_hermitian(&to_matrix(h)?).map_err(err)? })
    }

    #[staticmethod]
    fn dilate_general(a: Rows) -> PyResult<Self> {
        Ok(Self { inner: be_mod::dilate_general(&to_matrix(a)?).map_err(err)? })
    }

    #[staticmethod]
    fn random(n: usize, a: usize, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: be_mod::random_block_encoding(n, a, seed).map_err(err)? })
    }

    #[staticmethod]
    fn random_near_identity(n: usize, a: usize, eta: f64, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: be_mod::random_near_identity(n, a, eta, seed).map_err(err)? })
    }

    #[getter]
    fn unitary(&self) -> Rows {
        to_rows(&self.inner.unitary)
    }

    #[getter]
    fn ancillas(&self) -> usize {
        self.inner.ancillas
    }

    #[getter]
    fn system(&self) -> usize {
        self.inner.system
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    /// The encoded block, without the `alpha` factor.
    fn block(&self) -> Rows {
        to_rows(&self.inner.block())
    }

    /// `‖target - alpha·block‖`.
    fn verify(&self, target: Rows) -> PyResult<f64> {
        verify_encoding(&self.inner, &to_matrix(target)?).map_err(err)
    }

    /// `‖U - I‖`.
    fn deviation(&self) -> f64 {
        deviation(&self.inner)
    }

    fn wrap(&self, ancillas: usize, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: be_mod::wrap_with_ancillas(&self.inner, ancillas, seed).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!(
            "BlockEncoding(ancillas={}, system={}, alpha={})",
            self.inner.ancillas, self.inner.system, self.inner.alpha
        )
    }
}

#[pyclass(name = "MCMCircuit", module = "bechain_py")]
struct PyMcmCircuit {
    inner: mcm::MCMCircuit,
}

#[pymethods]
impl PyMcmCircuit {
    #[new]
    fn new(encodings: Vec<PyBlockEncoding>, m: usize, v: Vec<Rows>, q: Rows) -> PyResult<Self> {
        let v = v.into_iter().map(to_matrix).collect::<PyResult<Vec<_>>>()?;
        let inner = mcm::MCMCircuit::new(unwrap_all(encodings), m, v, to_matrix(q)?).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    fn unitary(&self) -> Rows {
        to_rows(&mcm::mcm_unitary(&self.inner))
    }

    /// `⟨0^{m+a}| U |0^{m+a}⟩`.
    fn embe_block(&self) -> Rows {
        to_rows(&mcm::embe_block(&self.inner))
    }

    fn error(&self, target: Rows) -> PyResult<f64> {
        mcm::gadget_error_exact(&self.inner, &to_matrix(target)?).map_err(err)
    }

    /// Amplitude amplification on input `ψ`; returns a dict of the outcome.
    fn oaa<'py>(&self, py: Python<'py>, target: Rows, input: Vec<C64>) -> PyResult<Bound<'py, PyDict>> {
        let out = oaa::oaa_ambe(&self.inner, &to_matrix(target)?, &input).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("iterations", out.boost.k)?;
        d.set_item("alpha_before", out.boost.alpha_before)?;
        d.set_item("alpha_after", out.boost.alpha_after)?;
        d.set_item("probability", out.boost.probability)?;
        d.set_item("fidelity", out.fidelity)?;
        d.set_item("eps", out.eps)?;
        d.set_item("output", out.output)?;
        Ok(d)
    }
}

fn unwrap_all(encodings: Vec<PyBlockEncoding>) -> Vec<bechain::BlockEncoding> {
    encodings.into_iter().map(|e| e.inner).collect()
}

fn wrap_circuit(r: bechain::Result<mcm::MCMCircuit>) -> PyResult<PyMcmCircuit> {
    Ok(PyMcmCircuit { inner: r.map_err(err)? })
}

#[pyfunction]
fn opnorm_of(m: Rows) -> PyResult<f64> {
    opnorm(&to_matrix(m)?).map_err(err)
}

#[pyfunction]
fn block_product(encodings: Vec<PyBlockEncoding>) -> PyResult<Rows> {
    Ok(to_rows(&mcm::block_product(&unwrap_all(encodings)).map_err(err)?))
}

#[pyfunction]
fn gadget_naive(encodings: Vec<PyBlockEncoding>) -> PyResult<PyMcmCircuit> {
    wrap_circuit(mcm::gadget_naive(&unwrap_all(encodings)))
}

#[pyfunction]
fn gadget_lw19(encodings: Vec<PyBlockEncoding>) -> PyResult<PyMcmCircuit> {
    wrap_circuit(mcm::gadget_lw19(&unwrap_all(encodings)))
}

#[pyfunction]
fn gadget_pmacg(encodings: Vec<PyBlockEncoding>, p: usize) -> PyResult<PyMcmCircuit> {
    wrap_circuit(mcm::gadget_pmacg(&unwrap_all(encodings), p))
}

#[pyfunction]
fn sx_sum(encodings: Vec<PyBlockEncoding>, p: usize) -> PyResult<Rows> {
    Ok(to_rows(&mcm::sx_sum(&unwrap_all(encodings), p).map_err(err)?))
}

#[pyfunction]
fn macg_bound(k: usize, p: usize, c: f64) -> PyResult<f64> {
    mcm::macg_bound(k, p, c).map_err(err)
}

#[pyfunction]
fn min_k_for_eps(eps: f64, p: usize, c: f64) -> PyResult<usize> {
    mcm::min_k_for_eps(eps, p, c).map_err(err)
}

#[pyfunction]
fn lower_bound_probe(encodings: Vec<PyBlockEncoding>, m: usize, restarts: usize, seed: u64) -> PyResult<f64> {
    mcm::lower_bound_probe(&unwrap_all(encodings), m, restarts, seed).map_err(err)
}

/// Returns the `(1, 1, ε)` encoding and a dict report.
#[pyfunction]
#[pyo3(signature = (vh, delta, eps, general = false))]
fn uncompute_encoding<'py>(
    py: Python<'py>,
    vh: &PyBlockEncoding,
    delta: f64,
    eps: f64,
    general: bool,
) -> PyResult<(PyBlockEncoding, Bound<'py, PyDict>)> {
    let (out, rep) = if general {
        uncompute::uncompute_general(&vh.inner, delta, eps)
    } else {
        uncompute::uncompute_hermitian(&vh.inner, delta, eps)
    }
    .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("eps_measured", rep.eps_measured)?;
    d.set_item("queries", rep.queries)?;
    d.set_item("degree", rep.degree)?;
    d.set_item("ancillae_peak", rep.ancillae_peak)?;
    d.set_item("lcu_error", rep.lcu_error)?;
    d.set_item("dilation_error", rep.dilation_error)?;
    Ok((PyBlockEncoding { inner: out }, d))
}

/// Chebyshev coefficients of the even `½√x` approximation.
#[pyfunction]
fn approx_half_sqrt(delta: f64, eta: f64) -> PyResult<Vec<f64>> {
    Ok(qsp::approx_half_sqrt(delta, eta).map_err(err)?.coeffs)
}

#[pyfunction]
fn solve_phases(coeffs: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(qsp::solve_phases(&qsp::ChebPoly::new(coeffs)).map_err(err)?.phases)
}

#[pyfunction]
fn qsp_response(phases: Vec<f64>, x: f64) -> f64 {
    qsp::qsp_response(&phases, x)
}

#[pyfunction]
fn trotter_encodings(terms: Vec<Rows>, t: f64, k: usize) -> PyResult<(Vec<PyBlockEncoding>, f64)> {
    let terms = terms.into_iter().map(to_matrix).collect::<PyResult<Vec<_>>>()?;
    let seq = TrotterSpec::new(terms, t, k).and_then(|s| trotter_sequence(&s)).map_err(err)?;
    let c = seq.c;
    Ok((seq.encodings.into_iter().map(|inner| PyBlockEncoding { inner }).collect(), c))
}

#[pymodule]
fn bechain_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BechainError", m.py().get_type::<BechainError>())?;
    m.add_class::<PyBlockEncoding>()?;
    m.add_class::<PyMcmCircuit>()?;
    m.add_function(wrap_pyfunction!(opnorm_of, m)?)?;
    m.add_function(wrap_pyfunction!(block_product, m)?)?;
    m.add_function(wrap_pyfunction!(gadget_naive, m)?)?;
    m.add_function(wrap_pyfunction!(gadget_lw19, m)?)?;
    m.add_function(wrap_pyfunction!(gadget_pmacg, m)?)?;
    m.add_function(wrap_pyfunction!(sx_sum, m)?)?;
    m.add_function(wrap_pyfunction!(macg_bound, m)?)?;
    m.add_function(wrap_pyfunction!(min_k_for_eps, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound_probe, m)?)?;
    m.add_function(wrap_pyfunction!(uncompute_encoding, m)?)?;
    m.add_function(wrap_pyfunction!(approx_half_sqrt, m)?)?;
    m.add_function(wrap_pyfunction!(solve_phases, m)?)?;
    m.add_function(wrap_pyfunction!(qsp_response, m)?)?;
    m.add_function(wrap_pyfunction!(trotter_encodings, m)?)?;
    Ok(())
}
