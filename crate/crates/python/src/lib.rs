//! Python bindings: the model, Abelian integrals, identities, dynamics and
//! the verification suite.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use gkdv_waves::abelian::{self, AnnulusEnd};
use gkdv_waves::dynamics::{self, CycleOptions, IntegrationOptions, Recording, ReturnMapOptions};
use gkdv_waves::identities;
use gkdv_waves::ode::OdeOptions;
use gkdv_waves::quadrature::DEFAULT_REL_TOL;
use gkdv_waves::verify::{self, VerifyConfig};
use gkdv_waves::{Error, FixedPointKind};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidExponent(_)
        | Error::EnergyOutsideAnnulus { .. }
        | Error::OutsideInvolutionDomain { .. }
        | Error::OutsideCertificateDomain { .. }
        | Error::InvalidArgument(_)
        | Error::RatioOutOfRange { .. }
        | Error::NoFixedPointInBracket { .. }
        | Error::SingularPerturbation => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn ode(rtol: f64, atol: f64) -> OdeOptions {
    OdeOptions { rtol, atol, ..Default::default() }
}

#[pyclass(name = "ModelParams", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyModelParams(gkdv_waves::ModelParams);

#[pymethods]
impl PyModelParams {
    #[new]
    fn new(n: u32) -> PyResult<Self> {
        gkdv_waves::ModelParams::new(n).map(Self).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> u32 {
        self.0.n()
    }

    #[getter]
    fn center_u(&self) -> f64 {
        self.0.center_u()
    }

    #[getter]
    fn p1(&self) -> f64 {
        self.0.p1()
    }

    #[getter]
    fn p2(&self) -> f64 {
        self.0.p2()
    }

    #[getter]
    fn right_extent(&self) -> f64 {
        self.0.right_extent()
    }

    fn potential(&self, u: f64) -> f64 {
        self.0.potential(u)
    }

    fn potential_deriv(&self, u: f64) -> f64 {
        self.0.potential_deriv(u)
    }

    fn hamiltonian(&self, u: f64, y: f64) -> f64 {
        self.0.hamiltonian(u, y)
    }

    /// List of `(u, y, kind)` with kind `"saddle"` or `"center"`.
    fn fixed_points(&self) -> Vec<(f64, f64, &'static str)> {
        self.0
            .fixed_points()
            .into_iter()
            .map(|fp| {
                let kind = match fp.kind {
                    FixedPointKind::Saddle => "saddle",
                    FixedPointKind::Center => "center",
                };
                (fp.u, fp.y, kind)
            })
            .collect()
    }

    fn turning_points(&self, h: f64) -> PyResult<LevelCurveGeometry> {
        let g = self.0.turning_points(h).map_err(to_py)?;
        Ok(LevelCurveGeometry { h: g.h, alpha: g.alpha, beta: g.beta, degenerate: g.degenerate })
    }

    fn involution(&self, u: f64) -> PyResult<f64> {
        self.0.involution(u).map_err(to_py)
    }

    #[pyo3(signature = (h, points = 200))]
    fn level_curve(&self, h: f64, points: usize) -> PyResult<Vec<(f64, f64)>> {
        self.0.level_curve(h, points).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("ModelParams(n={})", self.0.n())
    }
}

#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct LevelCurveGeometry {
    h: f64,
    alpha: f64,
    beta: f64,
    degenerate: bool,
}

#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct AbelianResult {
    h: f64,
    a0: f64,
    an: f64,
    ratio: f64,
    limit_speed_c0: f64,
    quadrature_error_estimate: f64,
    degenerate: bool,
}

impl From<abelian::AbelianResult> for AbelianResult {
    fn from(r: abelian::AbelianResult) -> Self {
        Self {
            h: r.h,
            a0: r.a0,
            an: r.an,
            ratio: r.ratio,
            limit_speed_c0: r.limit_speed_c0,
            quadrature_error_estimate: r.quadrature_error_estimate,
            degenerate: r.degenerate,
        }
    }
}

#[pymethods]
impl AbelianResult {
    fn __repr__(&self) -> String {
        format!("AbelianResult(h={}, ratio={}, c0={})", self.h, self.ratio, self.limit_speed_c0)
    }
}

#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct HomoclinicValues {
    j0: f64,
    jn: f64,
    ratio_at_zero: f64,
    ratio_at_p1: f64,
}

#[pyfunction]
#[pyo3(signature = (params, k, h, rel_tol = DEFAULT_REL_TOL))]
fn abelian_integral(params: &PyModelParams, k: u32, h: f64, rel_tol: f64) -> PyResult<f64> {
    Ok(abelian::abelian_integral(&params.0, k, h, rel_tol).map_err(to_py)?.value)
}

#[pyfunction]
#[pyo3(signature = (params, h, rel_tol = DEFAULT_REL_TOL))]
fn ratio_f(params: &PyModelParams, h: f64, rel_tol: f64) -> PyResult<AbelianResult> {
    abelian::ratio_f(&params.0, h, rel_tol).map(Into::into).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (params, h, rel_tol = DEFAULT_REL_TOL))]
fn speed_for_level(params: &PyModelParams, h: f64, rel_tol: f64) -> PyResult<f64> {
    abelian::speed_for_level(&params.0, h, rel_tol).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (params, c, rel_tol = DEFAULT_REL_TOL))]
fn level_for_speed(params: &PyModelParams, c: f64, rel_tol: f64) -> PyResult<f64> {
    abelian::level_for_speed(&params.0, c, rel_tol).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (params, grid_size, rel_tol = DEFAULT_REL_TOL))]
fn c0_curve(py: Python<'_>, params: &PyModelParams, grid_size: usize, rel_tol: f64) -> PyResult<Vec<AbelianResult>> {
    let p = params.0;
    let rows = py.detach(|| abelian::c0_curve(&p, grid_size, rel_tol)).map_err(to_py)?;
    Ok(rows.into_iter().map(Into::into).collect())
}

#[pyfunction]
fn homoclinic_values(params: &PyModelParams) -> HomoclinicValues {
    let v = abelian::homoclinic_values(&params.0);
    HomoclinicValues { j0: v.j0, jn: v.jn, ratio_at_zero: v.ratio_at_zero, ratio_at_p1: v.ratio_at_p1 }
}

#[pyfunction]
#[pyo3(signature = (params, k, rel_tol = DEFAULT_REL_TOL))]
fn homoclinic_integral(params: &PyModelParams, k: u32, rel_tol: f64) -> PyResult<f64> {
    abelian::homoclinic_integral(&params.0, k, rel_tol).map_err(to_py)
}

/// `end` is `"center"` or `"homoclinic"`.
#[pyfunction]
#[pyo3(signature = (params, end, rel_tol = DEFAULT_REL_TOL))]
fn ratio_limit(params: &PyModelParams, end: &str, rel_tol: f64) -> PyResult<f64> {
    let end = match end {
        "center" => AnnulusEnd::Center,
        "homoclinic" => AnnulusEnd::Homoclinic,
        other => return Err(PyValueError::new_err(format!("end must be 'center' or 'homoclinic', got {other:?}"))),
    };
    abelian::ratio_limit(&params.0, end, rel_tol).map_err(to_py)
}

#[pyfunction]
fn identity_residual(n: u32, u: f64, v: f64) -> PyResult<f64> {
    if n == 0 {
        return Err(to_py(Error::InvalidExponent(n)));
    }
    Ok(identities::identity_residual(n, u, v))
}

#[pyfunction]
fn f_poly(n: u32, u: f64, v: f64) -> f64 {
    identities::f_poly(n, u, v)
}

#[pyfunction]
fn positivity_certificate(params: &PyModelParams, u: f64) -> PyResult<f64> {
    identities::positivity_certificate(&params.0, u).map_err(to_py)
}

#[pyfunction]
fn positivity_closed_form(params: &PyModelParams, u: f64) -> PyResult<f64> {
    identities::positivity_closed_form(&params.0, u).map_err(to_py)
}

#[pyfunction]
fn t_n(params: &PyModelParams, u: f64) -> PyResult<f64> {
    identities::t_n(&params.0, u).map_err(to_py)
}

#[pyclass(name = "PerturbedParams", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyPerturbedParams(dynamics::PerturbedParams);

#[pymethods]
impl PyPerturbedParams {
    #[new]
    fn new(model: &PyModelParams, epsilon: f64, c: f64) -> PyResult<Self> {
        dynamics::PerturbedParams::new(model.0, epsilon, c).map(Self).map_err(to_py)
    }

    #[getter]
    fn model(&self) -> PyModelParams {
        PyModelParams(self.0.model)
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.0.epsilon
    }

    #[getter]
    fn c(&self) -> f64 {
        self.0.c
    }

    fn vector_field(&self, u: f64, y: f64) -> (f64, f64) {
        dynamics::vector_field_reduced(&self.0, u, y)
    }

    fn __repr__(&self) -> String {
        format!("PerturbedParams(n={}, epsilon={}, c={})", self.0.model.n(), self.0.epsilon, self.0.c)
    }
}

#[pyclass(frozen, get_all, skip_from_py_object)]
struct Trajectory {
    /// `(eta, u, y)` tuples.
    states: Vec<(f64, f64, f64)>,
    /// `(eta, u)` section crossings.
    crossings: Vec<(f64, f64)>,
    accepted_steps: usize,
    rejected_steps: usize,
}

#[pyfunction]
#[pyo3(signature = (p, u0, y0, eta_span, sample_dt = None, max_crossings = None, rtol = 1e-10, atol = 1e-12))]
#[allow(clippy::too_many_arguments)]
fn integrate(
    py: Python<'_>,
    p: &PyPerturbedParams,
    u0: f64,
    y0: f64,
    eta_span: f64,
    sample_dt: Option<f64>,
    max_crossings: Option<usize>,
    rtol: f64,
    atol: f64,
) -> PyResult<Trajectory> {
    let opts = IntegrationOptions {
        ode: ode(rtol, atol),
        recording: sample_dt.map_or(Recording::Steps, Recording::Uniform),
        max_crossings,
        ..Default::default()
    };
    let pp = p.0;
    let t = py.detach(|| dynamics::integrate(&pp, (u0, y0), eta_span, &opts)).map_err(to_py)?;
    Ok(Trajectory {
        states: t.states.iter().map(|s| (s.eta, s.u, s.y)).collect(),
        crossings: t.crossings.iter().map(|c| (c.eta, c.u)).collect(),
        accepted_steps: t.step_stats.accepted,
        rejected_steps: t.step_stats.rejected,
    })
}

#[pyfunction]
#[pyo3(signature = (p, u0, horizon = 1e4))]
fn return_map(p: &PyPerturbedParams, u0: f64, horizon: f64) -> PyResult<f64> {
    dynamics::return_map(&p.0, u0, &ReturnMapOptions { horizon, ..Default::default() }).map_err(to_py)
}

#[pyclass(frozen, get_all, skip_from_py_object)]
struct LimitCycleReport {
    section_fixed_point_u: f64,
    energy_estimate_h: f64,
    stability_multiplier: f64,
    displacement: f64,
    period: f64,
    cycle: Vec<(f64, f64)>,
    converged: bool,
}

#[pymethods]
impl LimitCycleReport {
    #[getter]
    fn stable(&self) -> bool {
        self.stability_multiplier < 1.0
    }

    fn __repr__(&self) -> String {
        format!(
            "LimitCycleReport(u={}, h={}, multiplier={})",
            self.section_fixed_point_u, self.energy_estimate_h, self.stability_multiplier
        )
    }
}

#[pyfunction]
#[pyo3(signature = (p, lo = 0.1, hi = 0.9, fd_step = 1e-5))]
fn find_limit_cycle(py: Python<'_>, p: &PyPerturbedParams, lo: f64, hi: f64, fd_step: f64) -> PyResult<LimitCycleReport> {
    let pp = p.0;
    let opts = CycleOptions { fd_step, ..Default::default() };
    let r = py.detach(|| dynamics::find_limit_cycle(&pp, (lo, hi), &opts)).map_err(to_py)?;
    Ok(LimitCycleReport {
        section_fixed_point_u: r.section_fixed_point_u,
        energy_estimate_h: r.energy_estimate_h,
        stability_multiplier: r.stability_multiplier,
        displacement: r.displacement,
        period: r.period,
        cycle: r.cycle,
        converged: r.converged,
    })
}

#[pyfunction]
#[pyo3(signature = (p, u0, y0, eta_span))]
fn validate_reduction(py: Python<'_>, p: &PyPerturbedParams, u0: f64, y0: f64, eta_span: f64) -> PyResult<f64> {
    let pp = p.0;
    py.detach(|| dynamics::validate_reduction(&pp, (u0, y0), eta_span, &OdeOptions::default())).map_err(to_py)
}

/// Runs the property suite; returns `(name, passed, worst, threshold)` tuples.
#[pyfunction]
#[pyo3(signature = (n_min = 1, n_max = 10, grid = 64, samples = 1000, seed = 0x5eed))]
fn run_suite(
    py: Python<'_>,
    n_min: u32,
    n_max: u32,
    grid: usize,
    samples: usize,
    seed: u64,
) -> PyResult<Vec<(String, bool, f64, f64)>> {
    let cfg = VerifyConfig { n_min, n_max, grid, samples, seed, ..Default::default() };
    let checks = py.detach(|| verify::run_suite(&cfg)).map_err(to_py)?;
    Ok(checks.into_iter().map(|c| (c.name, c.passed, c.worst, c.threshold)).collect())
}

#[pymodule]
fn gkdv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<LevelCurveGeometry>()?;
    m.add_class::<AbelianResult>()?;
    m.add_class::<HomoclinicValues>()?;
    m.add_class::<PyPerturbedParams>()?;
    m.add_class::<Trajectory>()?;
    m.add_class::<LimitCycleReport>()?;
    for f in [
        wrap_pyfunction!(abelian_integral, m)?,
        wrap_pyfunction!(ratio_f, m)?,
        wrap_pyfunction!(speed_for_level, m)?,
        wrap_pyfunction!(level_for_speed, m)?,
        wrap_pyfunction!(c0_curve, m)?,
        wrap_pyfunction!(homoclinic_values, m)?,
        wrap_pyfunction!(homoclinic_integral, m)?,
        wrap_pyfunction!(ratio_limit, m)?,
        wrap_pyfunction!(identity_residual, m)?,
        wrap_pyfunction!(f_poly, m)?,
        wrap_pyfunction!(positivity_certificate, m)?,
        wrap_pyfunction!(positivity_closed_form, m)?,
        wrap_pyfunction!(t_n, m)?,
        wrap_pyfunction!(integrate, m)?,
        wrap_pyfunction!(return_map, m)?,
        wrap_pyfunction!(find_limit_cycle, m)?,
        wrap_pyfunction!(validate_reduction, m)?,
        wrap_pyfunction!(run_suite, m)?,
    ] {
        m.add_function(f)?;
    }
    Ok(())
}
