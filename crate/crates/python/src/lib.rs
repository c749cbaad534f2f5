//! Python bindings. Complex numbers cross the boundary as Python `complex`,
//! Laurent polynomials as `{degree: coefficient}` dicts.

use std::collections::BTreeMap;

use legendrian_core::contact::{self, kernel_basis};
use legendrian_core::flat::{flat_embedding, taylor_truncate, FlatPlaneSpec};
use legendrian_core::flows::{
    contact_hamiltonian_field, flow as run_flow, legendrian_path_approx, parse_poly, verify_contactomorphism,
    SampledPath,
};
use legendrian_core::geometry::embedding_check;
use legendrian_core::io::{curve_from_json, curve_to_json, Metadata};
use legendrian_core::period::{period as contour_period, Cycle};
use legendrian_core::rh::{rh_approximate, BoundaryFamily, RhOptions};
use legendrian_core::{Complex64, ContactPoint, CurveJet, Domain, Error, LaurentPoly};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(legendrian, LegendrianError, PyException, "A numerical precondition or convergence failure.");

fn py_err(e: Error) -> PyErr {
    use Error::*;
    match e {
        NonFinite { .. }
        | ZeroInPolarPart
        | IndexOutOfRange { .. }
        | DimensionMismatch { .. }
        | InvalidDomain(_)
        | InvalidArgument(_)
        | CycleOutsideDomain(_)
        | FamilyMismatch(_) => PyValueError::new_err(e.to_string()),
        e => LegendrianError::new_err(e.to_string()),
    }
}

type Terms = BTreeMap<i32, Complex64>;

fn poly(terms: Terms) -> PyResult<LaurentPoly> {
    LaurentPoly::from_terms(terms).map_err(py_err)
}

fn terms(p: &LaurentPoly) -> Terms {
    p.terms().collect()
}

fn domain(inner: Option<f64>, radius: f64) -> Domain {
    match inner {
        Some(inner) => Domain::Annulus { inner, outer: radius },
        None => Domain::Disk { radius },
    }
}

/// Finite Laurent polynomial in one complex variable.
#[pyclass(name = "LaurentPoly", module = "legendrian", frozen)]
#[derive(Clone)]
struct PyLaurent(LaurentPoly);

#[pymethods]
impl PyLaurent {
    #[new]
    #[pyo3(signature = (terms = Terms::new()))]
    fn new(terms: Terms) -> PyResult<Self> {
        poly(terms).map(Self)
    }

    fn terms(&self) -> Terms {
        terms(&self.0)
    }

    fn coeff(&self, degree: i32) -> Complex64 {
        self.0.coeff(degree)
    }

    fn __call__(&self, u: Complex64) -> PyResult<Complex64> {
        self.0.evaluate(u).map_err(py_err)
    }

    fn differentiate(&self) -> Self {
        Self(self.0.differentiate())
    }

    fn antiderivative(&self) -> PyResult<Self> {
        self.0.antiderivative().map(Self).map_err(py_err)
    }

    fn residue(&self) -> Complex64 {
        self.0.residue()
    }

    fn l1_norm(&self) -> f64 {
        self.0.l1_norm()
    }

    fn __add__(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    fn __sub__(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    fn __mul__(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("LaurentPoly({:?})", terms(&self.0))
    }
}

/// Curve `(x1, y1, ..., xn, yn, z)` over a disk (`inner=None`) or an annulus.
#[pyclass(name = "Curve", module = "legendrian", frozen)]
#[derive(Clone)]
struct PyCurve(CurveJet);

#[pymethods]
impl PyCurve {
    #[new]
    #[pyo3(signature = (components, radius = 1.0, inner = None))]
    fn new(components: Vec<Terms>, radius: f64, inner: Option<f64>) -> PyResult<Self> {
        if components.len() < 3 || components.len() % 2 == 0 {
            return Err(PyValueError::new_err(format!("need 2n + 1 >= 3 components, got {}", components.len())));
        }
        let n = components.len() / 2;
        let comps = components.into_iter().map(poly).collect::<PyResult<_>>()?;
        CurveJet::new(n, comps, domain(inner, radius)).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn from_json(src: &str) -> PyResult<Self> {
        curve_from_json(src).map(|(f, _)| Self(f)).map_err(py_err)
    }

    fn to_json(&self) -> String {
        curve_to_json(&self.0, &Metadata::default())
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    /// `("disk", radius)` or `("annulus", inner, outer)` flattened to a tuple.
    #[getter]
    fn domain(&self) -> (String, f64, f64) {
        match self.0.domain() {
            Domain::Disk { radius } => ("disk".into(), 0.0, radius),
            Domain::Annulus { inner, outer } => ("annulus".into(), inner, outer),
        }
    }

    fn components(&self) -> Vec<PyLaurent> {
        self.0.components().iter().cloned().map(PyLaurent).collect()
    }

    fn __call__(&self, u: Complex64) -> PyResult<Vec<Complex64>> {
        self.0.evaluate(u).map_err(py_err)
    }

    fn l1_norm(&self) -> f64 {
        self.0.l1_norm()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("Curve(n={}, max_degree={})", self.0.n(), self.0.max_degree())
    }
}

/// Same x, y; z replaced by the primitive making the curve Legendrian.
#[pyfunction]
fn legendrize(f: &PyCurve) -> PyResult<PyCurve> {
    contact::legendrize(&f.0).map(PyCurve).map_err(py_err)
}

/// Sup of `|f* eta|` sampled on the boundary circles.
#[pyfunction]
#[pyo3(signature = (f, samples = 256))]
fn legendrian_residual(f: &PyCurve, samples: usize) -> f64 {
    contact::legendrian_residual(&f.0, samples)
}

/// `∮ f* eta` over the circle of the given radius.
#[pyfunction]
fn period(f: &PyCurve, radius: f64) -> PyResult<Complex64> {
    contour_period(&f.0, &Cycle::circle(radius)).map_err(py_err)
}

/// Sampled injectivity and immersion margins.
#[pyfunction]
#[pyo3(name = "embedding_check", signature = (f, samples = 256))]
fn embedding_check_py<'py>(py: Python<'py>, f: &PyCurve, samples: usize) -> PyResult<Bound<'py, PyDict>> {
    let r = embedding_check(&f.0, f.0.domain(), samples, None).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("min_gap", r.min_gap)?;
    d.set_item("min_domain_gap", r.min_domain_gap)?;
    d.set_item("min_speed", r.min_speed)?;
    d.set_item("worst_pair", (r.worst_pair.0, r.worst_pair.1))?;
    d.set_item("flagged", r.flagged)?;
    Ok(d)
}

/// Taylor truncation of the flat Legendrian embedding in the complex
/// hyperplane `(z - z0) + sum a_j (x_j - x0j) + b_j (y_j - y0j) = 0` through
/// `point`. Returns the curve and the tail bound on the given radius.
#[pyfunction]
#[pyo3(signature = (a, b, point = None, degree = 20, radius = 1.0))]
fn flat_disk(
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    point: Option<Vec<Complex64>>,
    degree: usize,
    radius: f64,
) -> PyResult<(PyCurve, f64)> {
    let p0 = match point {
        Some(p) => ContactPoint::new(p).map_err(py_err)?,
        None => ContactPoint::origin(a.len()),
    };
    let spec = FlatPlaneSpec::new(a, b, p0).map_err(py_err)?;
    let (jet, bound) = taylor_truncate(&flat_embedding(&spec), degree, radius);
    Ok((PyCurve(jet), bound))
}

/// Legendrian disk approximating the boundary family
/// `x_i + sum_k a_i[k] v^(k+1)`, `y_i + sum_k b_i[k] v^(k+1)` around `center`.
#[pyfunction]
#[pyo3(signature = (center, a, b, eps = 0.05, rho0 = 0.8, max_n = 4096))]
fn rh_solve<'py>(
    py: Python<'py>,
    center: &PyCurve,
    a: Vec<Vec<Terms>>,
    b: Vec<Vec<Terms>>,
    eps: f64,
    rho0: f64,
    max_n: usize,
) -> PyResult<(PyCurve, Bound<'py, PyDict>)> {
    let conv = |l: Vec<Vec<Terms>>| -> PyResult<Vec<Vec<LaurentPoly>>> {
        l.into_iter().map(|row| row.into_iter().map(poly).collect()).collect()
    };
    let fam = BoundaryFamily::from_center(&center.0, conv(a)?, conv(b)?).map_err(py_err)?;
    let opts = RhOptions { eps, rho0, n_max: max_n, ..RhOptions::default() };
    let sol = rh_approximate(&center.0, &fam, &opts).map_err(py_err)?;
    let r = &sol.report;
    let d = PyDict::new(py);
    d.set_item("n", r.n)?;
    d.set_item("rho_prime", r.rho_prime)?;
    d.set_item("defect_bound", r.defect_bound)?;
    d.set_item("sup_i", r.sup_i)?;
    d.set_item("sup_ii", r.sup_ii)?;
    d.set_item("sup_iii", r.sup_iii)?;
    d.set_item("sup_c1", r.sup_c1)?;
    d.set_item("residual", r.residual)?;
    Ok((PyCurve(sol.g), d))
}

/// RK4 flow of the contact Hamiltonian field of polynomial `h` for time `tau`.
/// Returns `(point, error_estimate, contact_residual)`; the last entry is the
/// measured contact defect along `ker eta` when `check` is set.
#[pyfunction]
#[pyo3(signature = (h, n, point, tau, steps = 64, check = false))]
fn hamiltonian_flow(
    h: &str,
    n: usize,
    point: Vec<Complex64>,
    tau: Complex64,
    steps: usize,
    check: bool,
) -> PyResult<(Vec<Complex64>, f64, Option<f64>)> {
    let h = parse_poly(h, n).map_err(py_err)?;
    let v = contact_hamiltonian_field(&h);
    let p0 = ContactPoint::new(point).map_err(py_err)?;
    let r = run_flow(&v, &p0, tau, steps).map_err(py_err)?;
    let residual = if check {
        Some(verify_contactomorphism(&v, &p0, tau, &kernel_basis(p0.coords()), steps).map_err(py_err)?.residual)
    } else {
        None
    };
    Ok((r.point.into_coords(), r.error_estimate, residual))
}

/// Legendrian path within `eps` of the sampled path `(t, points)`.
#[pyfunction]
#[pyo3(signature = (t, points, eps = 0.05, match_ends = false, seed = 0))]
fn path_approx<'py>(
    py: Python<'py>,
    t: Vec<f64>,
    points: Vec<Vec<Complex64>>,
    eps: f64,
    match_ends: bool,
    seed: u64,
) -> PyResult<(Vec<f64>, Vec<Vec<Complex64>>, Bound<'py, PyDict>)> {
    let gamma = SampledPath::new(t, points, None).map_err(py_err)?;
    let (lam, r) = legendrian_path_approx(&gamma, eps, match_ends, seed).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("pieces", r.pieces)?;
    d.set_item("attempts", r.attempts)?;
    d.set_item("max_turns", r.max_turns)?;
    d.set_item("deviation", r.deviation)?;
    d.set_item("xy_deviation", r.xy_deviation)?;
    d.set_item("residual", r.residual)?;
    d.set_item("min_gap", r.min_gap)?;
    d.set_item("injective", r.injective)?;
    Ok((lam.t().to_vec(), lam.points().to_vec(), d))
}

#[pymodule]
fn legendrian(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("LegendrianError", m.py().get_type::<LegendrianError>())?;
    m.add_class::<PyLaurent>()?;
    m.add_class::<PyCurve>()?;
    m.add_function(wrap_pyfunction!(legendrize, m)?)?;
    m.add_function(wrap_pyfunction!(legendrian_residual, m)?)?;
    m.add_function(wrap_pyfunction!(period, m)?)?;
    m.add_function(wrap_pyfunction!(embedding_check_py, m)?)?;
    m.add_function(wrap_pyfunction!(flat_disk, m)?)?;
    m.add_function(wrap_pyfunction!(rh_solve, m)?)?;
    m.add_function(wrap_pyfunction!(hamiltonian_flow, m)?)?;
    m.add_function(wrap_pyfunction!(path_approx, m)?)?;
    Ok(())
}
