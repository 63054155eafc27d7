//! Python module `shiftlab`: weights, certificates, recurrence solutions,
//! periodic points and quadrature, with decimal strings for high-precision values.

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyIndexError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rug::{Complex, Float};
use shiftlab::operators::periodic_point_hp as hp_point;
use shiftlab::precision::fmt_float;
use shiftlab::recurrence::{
    check_alt311, check_hyp1, check_hyp2, check_hyp3, solve_recurrence as solve, GammaChoice,
    JacobiWeights,
};
use shiftlab::spaces::{inner_product, BasisFunction, QuadratureRule};
use shiftlab::{make_weights, Error, Precision, RealParam, SpaceKind, SpaceSpec, Weight};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_)
        | Error::Config(_)
        | Error::Dimension(_)
        | Error::Precondition(_) => PyValueError::new_err(e.to_string()),
        Error::Range(_) => PyIndexError::new_err(e.to_string()),
        Error::Precision(_) | Error::NotConvergent(_) | Error::Truncation { .. } => {
            PyArithmeticError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn precision(digits: Option<u32>) -> PyResult<Precision> {
    match digits {
        Some(d) => Precision::from_digits(d),
        None => Precision::from_env(),
    }
    .map_err(py_err)
}

fn param(s: &str) -> PyResult<RealParam> {
    s.parse().map_err(py_err)
}

/// A function space with its shift order `p`.
#[pyclass(frozen, skip_from_py_object, module = "shiftlab")]
#[derive(Clone)]
pub struct Space {
    pub spec: SpaceSpec,
}

#[pymethods]
impl Space {
    #[staticmethod]
    #[pyo3(signature = (p = 0))]
    fn classic(p: u32) -> Self {
        Space {
            spec: SpaceSpec::classic(p),
        }
    }

    #[staticmethod]
    #[pyo3(signature = (beta, p = 0))]
    fn generalized(beta: &str, p: u32) -> PyResult<Self> {
        SpaceSpec::generalized(beta, p)
            .map(|spec| Space { spec })
            .map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (nu, alpha, p = 0))]
    fn theta(nu: &str, alpha: &str, p: u32) -> PyResult<Self> {
        SpaceSpec::theta(nu, alpha, p)
            .map(|spec| Space { spec })
            .map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (nu, p = 0))]
    fn disk(nu: &str, p: u32) -> PyResult<Self> {
        SpaceSpec::disk(nu, p)
            .map(|spec| Space { spec })
            .map_err(py_err)
    }

    #[getter]
    fn p(&self) -> u32 {
        self.spec.p
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.spec.kind_name()
    }

    fn with_p(&self, p: u32) -> Self {
        Space {
            spec: self.spec.with_p(p),
        }
    }

    /// `ω_{n,p}` as a decimal string; `None` below `p`.
    #[pyo3(signature = (n, digits = None))]
    fn weight(&self, n: u64, digits: Option<u32>) -> PyResult<Option<String>> {
        let prec = precision(digits)?;
        let seq = make_weights(&self.spec, prec).map_err(py_err)?;
        Ok(match seq.eval(n).map_err(py_err)? {
            Weight::Value(v) => Some(fmt_float(&v, prec.print_digits())),
            _ => None,
        })
    }

    /// `ω_{n,p}` for `lo <= n <= hi` as decimal strings.
    #[pyo3(signature = (lo, hi, digits = None))]
    fn weights(&self, lo: u64, hi: u64, digits: Option<u32>) -> PyResult<Vec<String>> {
        let prec = precision(digits)?;
        let seq = make_weights(&self.spec, prec).map_err(py_err)?;
        let t = seq.tabulate(lo, hi, prec.bits()).map_err(py_err)?;
        Ok(t.iter()
            .map(|v| fmt_float(v, prec.print_digits()))
            .collect())
    }

    fn __repr__(&self) -> String {
        format!("Space({})", self.spec)
    }
}

fn gamma_choice(name: &str, beta_prime: Option<&str>) -> PyResult<GammaChoice> {
    let bp = beta_prime.map(param).transpose()?;
    GammaChoice::from_name(name, bp).map_err(py_err)
}

/// Certificate JSON for one hypothesis: `"hyp1"`, `"hyp2"`, `"hyp3"` or `"alt311"`.
/// `lo` and `hi` are Jacobi indices.
#[pyfunction]
#[pyo3(signature = (space, hypothesis, lambda_abs = "1", gamma = "sqrt_n_log_n", beta_prime = None, lo = None, hi = None, digits = None))]
#[allow(clippy::too_many_arguments)]
fn certify(
    space: &Space,
    hypothesis: &str,
    lambda_abs: &str,
    gamma: &str,
    beta_prime: Option<&str>,
    lo: Option<u64>,
    hi: Option<u64>,
    digits: Option<u32>,
) -> PyResult<String> {
    let prec = precision(digits)?;
    let seq = make_weights(&space.spec, prec).map_err(py_err)?;
    let jw = JacobiWeights::from_sequence(&seq);
    let lam = param(lambda_abs)?.to_float(prec.bits());
    let cert = match hypothesis.to_ascii_lowercase().as_str() {
        "hyp1" => check_hyp1(&jw, hi.unwrap_or(10_000), None),
        "hyp2" => check_hyp2(&jw, lo.unwrap_or(2), hi.unwrap_or(10_000)),
        "hyp3" => check_hyp3(
            &jw,
            &gamma_choice(gamma, beta_prime)?,
            &lam,
            lo.unwrap_or(3),
            hi.unwrap_or(100_000),
        ),
        "alt311" => check_alt311(
            &jw,
            &gamma_choice(gamma, beta_prime)?,
            &lam,
            lo.unwrap_or(3),
            hi.unwrap_or(100_000),
        ),
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown hypothesis `{other}`"
            )))
        }
    }
    .map_err(py_err)?;
    Ok(cert.to_json())
}

/// `u_1..u_{n+1}` of `w_{k-1}u_{k-1} + w_k u_{k+1} = λ u_k`, `u_1 = 1`, rounded to complex doubles.
#[pyfunction]
#[pyo3(signature = (space, lam, n, digits = None))]
fn solve_recurrence(
    space: &Space,
    lam: Complex64,
    n: usize,
    digits: Option<u32>,
) -> PyResult<Vec<Complex64>> {
    let prec = precision(digits)?;
    let seq = make_weights(&space.spec, prec).map_err(py_err)?;
    let jw = JacobiWeights::from_sequence(&seq);
    let l = Complex::with_val(prec.bits(), (lam.re, lam.im));
    let sol = solve(&jw, &l, n).map_err(py_err)?;
    let c = |z: &Complex| Complex64::new(z.real().to_f64(), z.imag().to_f64());
    Ok(sol.u.iter().chain([&sol.u_next]).map(c).collect())
}

/// Periodic point `φ_{s,N}` of `H_p` truncated at `n_trunc`:
/// `(coefficients from P_p, max residual of H_p^N φ - φ on the window, exact check or None)`.
#[pyfunction]
fn periodic_point_hp(
    space: &Space,
    s: u64,
    period: u64,
    n_trunc: u64,
) -> PyResult<(Vec<Complex64>, f64, Option<bool>)> {
    let seq = make_weights(&space.spec, Precision::default()).map_err(py_err)?;
    let r = hp_point(&seq, s, period, n_trunc).map_err(py_err)?;
    let coeffs = r
        .state
        .coeffs
        .iter()
        .map(|z| Complex64::new(z.real().to_f64(), z.imag().to_f64()))
        .collect();
    Ok((coeffs, Float::to_f64(&r.residual), r.exact_periodic))
}

/// `⟨e_n, e_m⟩` by quadrature of the given order (polynomial spaces only).
#[pyfunction]
#[pyo3(signature = (space, n, m, order = None))]
fn basis_inner_product(space: &Space, n: u64, m: u64, order: Option<usize>) -> PyResult<Complex64> {
    let order = order.unwrap_or((n + m) as usize + 4);
    let rule = match &space.spec.kind {
        SpaceKind::ClassicBargmann => QuadratureRule::plane(2.0, order),
        SpaceKind::GeneralizedBargmann { beta } => QuadratureRule::plane(beta.to_f64(), order),
        SpaceKind::PoincareDisk { nu } => QuadratureRule::disk(nu.to_f64(), order),
        SpaceKind::ThetaFockBargmann { .. } => {
            return Err(PyValueError::new_err(
                "inner products on theta spaces are not implemented",
            ))
        }
    }
    .map_err(py_err)?;
    let f = BasisFunction::new(&space.spec, n);
    let g = BasisFunction::new(&space.spec, m);
    inner_product(&space.spec, &f, &g, &rule)
        .map(|i| i.value)
        .map_err(py_err)
}

#[pymodule]
#[pyo3(name = "shiftlab")]
pub fn shiftlab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Space>()?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(solve_recurrence, m)?)?;
    m.add_function(wrap_pyfunction!(periodic_point_hp, m)?)?;
    m.add_function(wrap_pyfunction!(basis_inner_product, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
