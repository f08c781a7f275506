//! Python bindings for `pnc_marc`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use pnc_marc::channel::ChannelRealization;
use pnc_marc::destination::{
    fast_decode_counted, min_euclidean_decode, novel_decode_exhaustive_counted, Branch, DecodeInput,
    DecodeOutput, EvalCounter,
};
use pnc_marc::experiments::config::parse_config;
use pnc_marc::experiments::equiv::check_equivalence;
use pnc_marc::experiments::report::{curve_to_csv, metadata};
use pnc_marc::experiments::scenario::{reproduce as run_reproduce, Scenario};
use pnc_marc::experiments::{run_sweep, run_sweep_with_threads, DecoderKind, SepCurve, SweepSpec};
use pnc_marc::netcode::{self, MapKind};
use pnc_marc::numerics::{self, CMatrix, Complex};
use pnc_marc::relay::relay_ml_decode;
use pnc_marc::scheme::{self, fast_route, FastRoute, FULL_RANK_TOL, HR_TOL};
use pnc_marc::signal;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr<Err = String>>(s: &str) -> PyResult<T> {
    s.parse().map_err(PyValueError::new_err)
}

#[pyclass(name = "SignalSet", frozen, from_py_object)]
#[derive(Clone)]
struct PySignalSet {
    inner: signal::SignalSet,
}

#[pymethods]
impl PySignalSet {
    /// M-PSK with the first point at angle 0.
    #[new]
    fn new(m: usize) -> PyResult<Self> {
        Ok(Self {
            inner: signal::SignalSet::psk(m).map_err(err)?,
        })
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    fn points(&self) -> Vec<Complex> {
        self.inner.points().to_vec()
    }

    fn map_bits(&self, bits: Vec<u8>) -> PyResult<Complex> {
        self.inner.map_bits(&bits).map_err(err)
    }

    fn difference_set(&self) -> Vec<Complex> {
        self.inner.difference_set()
    }

    fn __repr__(&self) -> String {
        format!("SignalSet({}-PSK)", self.inner.m())
    }
}

#[pyclass(name = "LatinSquare", frozen, from_py_object)]
#[derive(Clone)]
struct PyLatinSquare {
    inner: netcode::LatinSquare,
}

#[pymethods]
impl PyLatinSquare {
    #[staticmethod]
    fn modulo(m: usize) -> PyResult<Self> {
        Ok(Self {
            inner: MapKind::Modulo.build(m).map_err(err)?,
        })
    }

    #[staticmethod]
    fn xor(m: usize) -> PyResult<Self> {
        Ok(Self {
            inner: MapKind::Xor.build(m).map_err(err)?,
        })
    }

    /// Validates an arbitrary grid.
    #[staticmethod]
    fn from_rows(rows: Vec<Vec<usize>>) -> PyResult<Self> {
        Ok(Self {
            inner: netcode::LatinSquare::from_rows(&rows).map_err(err)?,
        })
    }

    #[staticmethod]
    fn parse_text(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: netcode::LatinSquare::parse_text(text).map_err(err)?,
        })
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    fn cell(&self, a: usize, b: usize) -> PyResult<usize> {
        self.inner.get(a, b).map_err(err)
    }

    fn rows(&self) -> Vec<Vec<usize>> {
        self.inner.rows()
    }

    fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __str__(&self) -> String {
        self.inner.to_text()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

#[pyclass(name = "SchemeConstants", frozen, from_py_object)]
#[derive(Clone)]
struct PyConstants {
    inner: scheme::SchemeConstants,
}

#[pymethods]
impl PyConstants {
    #[new]
    #[pyo3(signature = (a, b, c, d, es = 1.0))]
    fn new(a: Complex, b: Complex, c: Complex, d: Complex, es: f64) -> PyResult<Self> {
        Ok(Self {
            inner: scheme::SchemeConstants::new(a, b, c, d, es).map_err(err)?,
        })
    }

    /// `a = 1, b = d = 1/sqrt(2), c = 0`.
    #[staticmethod]
    #[pyo3(signature = (es = 1.0))]
    fn example1(es: f64) -> PyResult<Self> {
        Ok(Self {
            inner: scheme::SchemeConstants::example1(es).map_err(err)?,
        })
    }

    #[getter]
    fn a(&self) -> Complex {
        self.inner.a()
    }
    #[getter]
    fn b(&self) -> Complex {
        self.inner.b()
    }
    #[getter]
    fn c(&self) -> Complex {
        self.inner.c()
    }
    #[getter]
    fn d(&self) -> Complex {
        self.inner.d()
    }
    #[getter]
    fn es(&self) -> f64 {
        self.inner.es()
    }

    fn with_es(&self, es: f64) -> PyResult<Self> {
        Ok(Self {
            inner: self.inner.with_es(es).map_err(err)?,
        })
    }

    fn full_rank(&self, signal: &PySignalSet) -> bool {
        scheme::check_full_rank_condition(&self.inner, &signal.inner, FULL_RANK_TOL)
    }

    /// `(W_A, W_R)` and `(W_B, W_R)` Hurwitz-Radon orthogonality.
    fn hr_orthogonal(&self) -> PyResult<(bool, bool)> {
        let w = scheme::weight_matrices(&self.inner);
        Ok((
            scheme::check_hr_orthogonal(&w.w_a, &w.w_r, HR_TOL).map_err(err)?,
            scheme::check_hr_orthogonal(&w.w_b, &w.w_r, HR_TOL).map_err(err)?,
        ))
    }

    /// `"direct"`, `"swapped"` or None.
    fn fast_route(&self) -> Option<&'static str> {
        fast_route(&self.inner).map(|r| match r {
            FastRoute::Direct => "direct",
            FastRoute::Swapped => "swapped",
        })
    }

    fn __repr__(&self) -> String {
        let k = &self.inner;
        format!("SchemeConstants(a={}, b={}, c={}, d={}, es={})", k.a(), k.b(), k.c(), k.d(), k.es())
    }
}

#[pyfunction]
fn check_exclusive_law(rows: Vec<Vec<usize>>) -> bool {
    netcode::check_exclusive_law(&rows)
}

fn to_rows(m: &CMatrix) -> Vec<Vec<Complex>> {
    (0..m.rows()).map(|r| (0..m.cols()).map(|c| m[(r, c)]).collect()).collect()
}

/// QR of a 2x3 complex matrix given as rows; returns `(Q, R)` as rows.
#[pyfunction]
fn qr_2x3(rows: Vec<Vec<Complex>>) -> PyResult<(Vec<Vec<Complex>>, Vec<Vec<Complex>>)> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != n_cols) {
        return Err(PyValueError::new_err("ragged rows"));
    }
    let h = CMatrix::new(n_rows, n_cols, rows.into_iter().flatten().collect()).map_err(err)?;
    let (q, r) = numerics::qr_2x3(&h).map_err(err)?;
    Ok((to_rows(&q), to_rows(&r)))
}

/// Joint ML relay decision `(xa, xb)` from the relay observation.
#[pyfunction]
fn relay_decode(
    y_r: Complex,
    h_ar: Complex,
    h_br: Complex,
    constants: &PyConstants,
    signal: &PySignalSet,
) -> (usize, usize) {
    let h = ChannelRealization {
        h_ar,
        h_br,
        ..ChannelRealization::ones()
    };
    relay_ml_decode(y_r, &h, &constants.inner, &signal.inner)
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::RelayCorrect => "relay-correct",
        Branch::RelayError => "relay-error",
    }
}

/// Destination decision `(xa, xb, branch, evaluations)`.
///
/// `decoder` is one of `fast`, `novel-exhaustive` or `min-euclid`.
#[pyfunction]
#[pyo3(signature = (decoder, y_d1, y_d2, h_ad, h_bd, h_rd, constants, signal, square, log_weight = 1.0))]
#[allow(clippy::too_many_arguments)]
fn decode(
    decoder: &str,
    y_d1: Complex,
    y_d2: Complex,
    h_ad: Complex,
    h_bd: Complex,
    h_rd: Complex,
    constants: &PyConstants,
    signal: &PySignalSet,
    square: &PyLatinSquare,
    log_weight: f64,
) -> PyResult<(usize, usize, &'static str, u64)> {
    let input = DecodeInput::new(
        y_d1,
        y_d2,
        h_ad,
        h_bd,
        h_rd,
        constants.inner,
        &signal.inner,
        &square.inner,
    )
    .map_err(err)?
    .with_log_weight(log_weight);
    let mut counter = EvalCounter::default();
    let out: DecodeOutput = match parse::<DecoderKind>(decoder)? {
        DecoderKind::Fast => fast_decode_counted(&input, &mut counter).map_err(err)?,
        DecoderKind::NovelExhaustive => novel_decode_exhaustive_counted(&input, &mut counter).map_err(err)?,
        DecoderKind::MinEuclid => min_euclidean_decode(&input),
        DecoderKind::Cfnc => return Err(PyValueError::new_err("cfnc decodes whole frames; use sweep()")),
    };
    Ok((out.xa_idx, out.xb_idx, branch_name(out.branch), counter.evaluations))
}

#[allow(clippy::too_many_arguments)]
fn build_spec(
    config: Option<&str>,
    snr_db: Option<Vec<f64>>,
    trials: Option<u64>,
    decoder: Option<&str>,
    m: Option<usize>,
    map: Option<&str>,
    profile: Option<&str>,
    seed: Option<u64>,
    max_errors: Option<u64>,
    theta: Option<Complex>,
) -> PyResult<SweepSpec> {
    let mut spec = SweepSpec::example_default();
    if let Some(text) = config {
        spec = parse_config(text, spec).map_err(err)?;
    }
    if let Some(v) = snr_db {
        spec.snr_points_db = v;
    }
    if let Some(v) = trials {
        spec.trials_per_point = v;
    }
    if let Some(v) = decoder {
        spec.decoder = parse(v)?;
    }
    if let Some(v) = m {
        spec.m = v;
    }
    if let Some(v) = map {
        spec.map = parse(v)?;
    }
    if let Some(v) = profile {
        spec.profile = parse::<Scenario>(v)?.profile();
    }
    if let Some(v) = seed {
        spec.seed = v;
    }
    if let Some(v) = max_errors {
        spec.max_errors = (v > 0).then_some(v);
    }
    if let Some(v) = theta {
        spec.theta = v;
    }
    spec.validate().map_err(err)?;
    Ok(spec)
}

fn curve_rows<'py>(py: Python<'py>, curve: &SepCurve) -> PyResult<Vec<Bound<'py, PyDict>>> {
    curve
        .points
        .iter()
        .map(|p| {
            let d = PyDict::new(py);
            d.set_item("snr_db", p.snr_db)?;
            d.set_item("sep_joint", p.sep_joint())?;
            d.set_item("sep_a", p.sep_a())?;
            d.set_item("sep_b", p.sep_b())?;
            d.set_item("p_relay_err", p.p_relay_nc_error())?;
            d.set_item("p_err_rc", p.p_err_given_relay_correct())?;
            d.set_item("p_err_rw", p.p_err_given_relay_wrong())?;
            d.set_item("trials", p.counts.trials)?;
            d.set_item("joint_errors", p.counts.joint_errors)?;
            Ok(d)
        })
        .collect()
}

/// Runs an SEP sweep. Returns `(rows, csv_text)`; each row is a dict keyed by
/// the CSV columns plus `joint_errors`.
#[pyfunction]
#[pyo3(signature = (
    snr_db = None, trials = None, decoder = None, m = None, map = None, profile = None,
    seed = None, max_errors = None, theta = None, config = None, threads = None
))]
#[allow(clippy::too_many_arguments)]
fn sweep<'py>(
    py: Python<'py>,
    snr_db: Option<Vec<f64>>,
    trials: Option<u64>,
    decoder: Option<&str>,
    m: Option<usize>,
    map: Option<&str>,
    profile: Option<&str>,
    seed: Option<u64>,
    max_errors: Option<u64>,
    theta: Option<Complex>,
    config: Option<&str>,
    threads: Option<usize>,
) -> PyResult<(Vec<Bound<'py, PyDict>>, String)> {
    let spec = build_spec(config, snr_db, trials, decoder, m, map, profile, seed, max_errors, theta)?;
    let curve = py
        .detach(|| match threads {
            Some(n) => run_sweep_with_threads(&spec, n),
            None => run_sweep(&spec),
        })
        .map_err(err)?;
    let csv = curve_to_csv(&curve, &metadata(&spec));
    Ok((curve_rows(py, &curve)?, csv))
}

/// Fast against exhaustive decoder on the frames a sweep would draw.
#[pyfunction]
#[pyo3(signature = (frames, snr_db = None, m = None, map = None, profile = None, seed = None))]
fn equivalence<'py>(
    py: Python<'py>,
    frames: u64,
    snr_db: Option<Vec<f64>>,
    m: Option<usize>,
    map: Option<&str>,
    profile: Option<&str>,
    seed: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let spec = build_spec(None, snr_db, None, Some("fast"), m, map, profile, seed, None, None)?;
    let r = py.detach(|| check_equivalence(&spec, frames)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("frames", r.frames)?;
    d.set_item("pair_mismatches", r.pair_mismatches)?;
    d.set_item("branch_mismatches", r.branch_mismatches)?;
    d.set_item("fast_evaluations", r.fast_evaluations)?;
    d.set_item("exhaustive_evaluations", r.exhaustive_evaluations)?;
    d.set_item("identical", r.identical())?;
    Ok(d)
}

/// PNC against the CFNC baseline for one preset. Returns a dict with the
/// three curves, the measured gap and a printable summary.
#[pyfunction]
#[pyo3(signature = (scenario, snr_db = None, trials = None, seed = None, max_errors = None))]
fn reproduce<'py>(
    py: Python<'py>,
    scenario: &str,
    snr_db: Option<Vec<f64>>,
    trials: Option<u64>,
    seed: Option<u64>,
    max_errors: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let s: Scenario = parse(scenario)?;
    let spec = build_spec(None, snr_db, trials, None, None, None, None, seed, max_errors, None)?;
    let report = py.detach(|| run_reproduce(s, &spec, None)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("scenario", s.name())?;
    d.set_item("pnc", curve_rows(py, &report.pnc)?)?;
    d.set_item("naive", curve_rows(py, &report.naive)?)?;
    d.set_item("cfnc", curve_rows(py, &report.cfnc)?)?;
    d.set_item("gap_db", report.gap.map(|g| g.1))?;
    d.set_item("gap_reference_sep", report.gap.map(|g| g.0))?;
    d.set_item("reported_gain_db", s.reported_gain_db())?;
    d.set_item("summary", report.summary())?;
    Ok(d)
}

#[pymodule]
pub fn pnc_marc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySignalSet>()?;
    m.add_class::<PyLatinSquare>()?;
    m.add_class::<PyConstants>()?;
    m.add_function(wrap_pyfunction!(check_exclusive_law, m)?)?;
    m.add_function(wrap_pyfunction!(qr_2x3, m)?)?;
    m.add_function(wrap_pyfunction!(relay_decode, m)?)?;
    m.add_function(wrap_pyfunction!(decode, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(equivalence, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
