//! Direct simulation of the reduced perturbed system
//!
//! ```text
//! u' = y,   y' = u - u^(n+1)/(n+1) + ε√c (u^n y - (1 + 1/c) y)
//! ```
//!
//! and of the slow–fast system it is reduced from, with Poincaré-section
//! crossings on `{y = 0, 0 < u < u_c}` taken in the direction `y: - → +`.

use std::ops::ControlFlow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::ModelParams;
use crate::ode::{solve, DenseStep, OdeOptions, StepStats};
use crate::roots::bisect_then_secant;

/// `ε` above which the first-order theory is not expected to hold.
pub const LARGE_EPSILON: f64 = 0.5;

/// Perturbation strength `ε` and wave speed `c` on top of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbedParams {
    pub model: ModelParams,
    pub epsilon: f64,
    pub c: f64,
}

impl PerturbedParams {
    /// `epsilon = 0` is accepted and gives the conservative system.
    pub fn new(model: ModelParams, epsilon: f64, c: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("epsilon must be finite and >= 0, got {epsilon}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("wave speed must be positive, got {c}")));
        }
        Ok(Self { model, epsilon, c })
    }

    pub fn is_large_epsilon(&self) -> bool {
        self.epsilon > LARGE_EPSILON
    }

    fn damping(&self) -> f64 {
        self.epsilon * self.c.sqrt()
    }
}

/// Right-hand side of the reduced planar system.
pub fn vector_field_reduced(p: &PerturbedParams, u: f64, y: f64) -> (f64, f64) {
    let n = p.model.n() as i32;
    let restoring = u - u.powi(n + 1) / (f64::from(p.model.n()) + 1.0);
    let friction = p.damping() * (u.powi(n) * y - (1.0 + 1.0 / p.c) * y);
    (y, restoring + friction)
}

/// Right-hand side of the slow–fast system
/// `u' = y, y' = z, ε√c z' = u - u^(n+1)/(n+1) - z - (ε/√c) y`.
pub fn vector_field_full3d(p: &PerturbedParams, u: f64, y: f64, z: f64) -> Result<(f64, f64, f64)> {
    if p.epsilon == 0.0 {
        return Err(Error::SingularPerturbation);
    }
    Ok(full3d_unchecked(p, u, y, z))
}

fn full3d_unchecked(p: &PerturbedParams, u: f64, y: f64, z: f64) -> (f64, f64, f64) {
    let sc = p.c.sqrt();
    let n = p.model.n() as i32;
    let slow = u - u.powi(n + 1) / (f64::from(p.model.n()) + 1.0) - z - p.epsilon / sc * y;
    (y, z, slow / (p.epsilon * sc))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub eta: f64,
    pub u: f64,
    pub y: f64,
}

/// A crossing of the section `{y = 0, 0 < u < u_c}` with `y` increasing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub eta: f64,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<State>,
    pub crossings: Vec<Crossing>,
    pub step_stats: StepStats,
}

/// Which states [`integrate`] keeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Recording {
    /// Endpoints of accepted steps.
    Steps,
    /// Dense-output samples every `dt`, starting at `eta = 0`.
    Uniform(f64),
    /// Initial and final state only.
    EndpointsOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationOptions {
    pub ode: OdeOptions,
    pub recording: Recording,
    /// Stop after this many section crossings.
    pub max_crossings: Option<usize>,
    /// Escape radius in units of the homoclinic intercept `B`.
    pub escape_factor: f64,
    /// Absolute tolerance in `eta` for locating crossings.
    pub event_tol: f64,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            ode: OdeOptions::default(),
            recording: Recording::Steps,
            max_crossings: None,
            escape_factor: 10.0,
            event_tol: 1e-12,
        }
    }
}

/// Collects states and section crossings from the dense output of the
/// planar integration.
struct Recorder {
    recording: Recording,
    next_sample: f64,
    states: Vec<State>,
    crossings: Vec<Crossing>,
    center_u: f64,
    escape_radius: f64,
    event_tol: f64,
    max_crossings: Option<usize>,
}

impl Recorder {
    fn observe(&mut self, step: &DenseStep<2>) -> Result<ControlFlow<()>> {
        let [u1, y1] = step.y1;
        if !(u1.abs() <= self.escape_radius) {
            return Err(Error::UnboundedOrbit { eta: step.t1(), u: u1 });
        }

        let mut stop_at = None;
        let [_, y0] = step.y0;
        if y0 < 0.0 && y1 >= 0.0 {
            let tol = self.event_tol / (1.0 + step.t1().abs());
            let eta = bisect_then_secant(|t| Ok(step.eval_component(t, 1)), step.t0, step.t1(), 0.0, tol)?;
            let u = step.eval_component(eta, 0);
            if u > 0.0 && u < self.center_u {
                self.crossings.push(Crossing { eta, u });
                if self.max_crossings.is_some_and(|m| self.crossings.len() >= m) {
                    stop_at = Some(eta);
                }
            }
        }

        let end = stop_at.unwrap_or(step.t1());
        match self.recording {
            Recording::Steps => {
                if stop_at.is_none() {
                    self.states.push(State { eta: end, u: u1, y: y1 });
                }
            }
            Recording::Uniform(dt) => {
                while self.next_sample <= end {
                    let [u, y] = step.eval(self.next_sample);
                    self.states.push(State { eta: self.next_sample, u, y });
                    self.next_sample += dt;
                }
            }
            Recording::EndpointsOnly => {}
        }
        if let Some(eta) = stop_at {
            if !matches!(self.recording, Recording::Uniform(_)) {
                let [u, y] = step.eval(eta);
                self.states.push(State { eta, u, y });
            }
            return Ok(ControlFlow::Break(()));
        }
        Ok(ControlFlow::Continue(()))
    }
}

/// Integrates the reduced system from `initial = (u, y)` over `[0, eta_span]`.
pub fn integrate(
    p: &PerturbedParams,
    initial: (f64, f64),
    eta_span: f64,
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    if !(eta_span > 0.0) {
        return Err(Error::InvalidArgument(format!("eta span must be positive, got {eta_span}")));
    }
    if let Recording::Uniform(dt) = opts.recording {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("sample step must be positive, got {dt}")));
        }
    }
    let (u0, y0) = initial;
    let mut rec = Recorder {
        recording: opts.recording,
        next_sample: 0.0,
        states: vec![],
        crossings: vec![],
        center_u: p.model.center_u(),
        escape_radius: opts.escape_factor * p.model.right_extent(),
        event_tol: opts.event_tol,
        max_crossings: opts.max_crossings,
    };
    if !matches!(opts.recording, Recording::Uniform(_)) {
        rec.states.push(State { eta: 0.0, u: u0, y: y0 });
    }
    let field = |_t: f64, s: &[f64; 2]| {
        let (du, dy) = vector_field_reduced(p, s[0], s[1]);
        [du, dy]
    };
    let out = solve(field, 0.0, [u0, y0], eta_span, &opts.ode, |step| rec.observe(step))?;
    if matches!(opts.recording, Recording::EndpointsOnly) && !out.stopped {
        rec.states.push(State { eta: out.t, u: out.y[0], y: out.y[1] });
    }
    Ok(Trajectory { states: rec.states, crossings: rec.crossings, step_stats: out.stats })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnMapOptions {
    pub ode: OdeOptions,
    /// Give up if no crossing occurs within this span.
    pub horizon: f64,
}

impl Default for ReturnMapOptions {
    fn default() -> Self {
        Self { ode: OdeOptions::default(), horizon: 1e4 }
    }
}

/// Poincaré return map on the section: integrates from `(u0, 0)` to the next
/// crossing and returns its `u`.
pub fn return_map(p: &PerturbedParams, u0: f64, opts: &ReturnMapOptions) -> Result<f64> {
    Ok(return_crossing(p, u0, opts)?.u)
}

fn return_crossing(p: &PerturbedParams, u0: f64, opts: &ReturnMapOptions) -> Result<Crossing> {
    let c = p.model.center_u();
    if !(u0 > 0.0 && u0 < c) {
        return Err(Error::InvalidArgument(format!("section point must lie in (0, {c}), got {u0}")));
    }
    let traj = integrate(
        p,
        (u0, 0.0),
        opts.horizon,
        &IntegrationOptions {
            ode: opts.ode,
            recording: Recording::EndpointsOnly,
            max_crossings: Some(1),
            ..Default::default()
        },
    )?;
    traj.crossings.first().copied().ok_or(Error::NoReturn { horizon: opts.horizon })
}

/// `P(u) - u` at each of `us`, evaluated in parallel.
pub fn displacement_scan(p: &PerturbedParams, us: &[f64], opts: &ReturnMapOptions) -> Result<Vec<(f64, f64)>> {
    us.par_iter().map(|&u| Ok((u, return_map(p, u, opts)? - u))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleOptions {
    pub return_map: ReturnMapOptions,
    /// Tolerance on `|P(u*) - u*|` for declaring convergence.
    pub tol: f64,
    /// Central-difference step for the multiplier `P'(u*)`.
    pub fd_step: f64,
    /// Bracket width below which bisection hands over to the secant polish.
    pub bisect_width: f64,
}

impl Default for CycleOptions {
    fn default() -> Self {
        Self { return_map: ReturnMapOptions::default(), tol: 1e-8, fd_step: 1e-5, bisect_width: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCycleReport {
    pub section_fixed_point_u: f64,
    /// `H(u*, 0)`.
    pub energy_estimate_h: f64,
    /// `|P'(u*)|`; below one for a stable cycle.
    pub stability_multiplier: f64,
    pub displacement: f64,
    pub period: f64,
    pub cycle: Vec<(f64, f64)>,
    pub converged: bool,
}

impl LimitCycleReport {
    pub fn is_stable(&self) -> bool {
        self.stability_multiplier < 1.0
    }
}

/// Locates the fixed point of the return map inside `bracket` by bisection
/// followed by a secant polish.
///
/// A bracket end whose orbit escapes counts as an outward (negative)
/// displacement.
pub fn find_limit_cycle(p: &PerturbedParams, bracket: (f64, f64), opts: &CycleOptions) -> Result<LimitCycleReport> {
    let (lo, hi) = bracket;
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!("bracket must satisfy lo < hi, got ({lo}, {hi})")));
    }
    let rm = &opts.return_map;
    let displacement = |u: f64| Ok(return_map(p, u, rm)? - u);
    // an orbit that leaves the annulus has moved outward without bound
    let end_displacement = |u: f64| match displacement(u) {
        Err(Error::UnboundedOrbit { .. }) => Ok(f64::NEG_INFINITY),
        other => other,
    };
    let d_lo = end_displacement(lo)?;
    let d_hi = end_displacement(hi)?;
    if d_lo.signum() == d_hi.signum() {
        return Err(Error::NoFixedPointInBracket { lo, hi, d_lo, d_hi });
    }
    let u_star = bisect_then_secant(displacement, lo, hi, opts.bisect_width, 1e-13)?;

    let crossing = return_crossing(p, u_star, rm)?;
    let d_star = crossing.u - u_star;
    let step = opts.fd_step;
    let slope = (return_map(p, u_star + step, rm)? - return_map(p, u_star - step, rm)?) / (2.0 * step);

    let traj = integrate(
        p,
        (u_star, 0.0),
        rm.horizon,
        &IntegrationOptions {
            ode: rm.ode,
            recording: Recording::Steps,
            max_crossings: Some(1),
            ..Default::default()
        },
    )?;
    Ok(LimitCycleReport {
        section_fixed_point_u: u_star,
        energy_estimate_h: p.model.hamiltonian(u_star, 0.0),
        stability_multiplier: slope.abs(),
        displacement: d_star,
        period: crossing.eta,
        cycle: traj.states.iter().map(|s| (s.u, s.y)).collect(),
        converged: d_star.abs() <= opts.tol,
    })
}

/// Maximum `(u, y)` distance between the slow–fast system, started on the
/// first-order slow manifold, and the reduced system over `[0, eta_span]`.
pub fn validate_reduction(
    p: &PerturbedParams,
    initial: (f64, f64),
    eta_span: f64,
    ode: &OdeOptions,
) -> Result<f64> {
    if !(p.epsilon > 0.0 && p.epsilon <= 0.2) {
        return Err(Error::InvalidArgument(format!(
            "reduction check needs epsilon in (0, 0.2], got {}",
            p.epsilon
        )));
    }
    let dt = 0.01;
    let planar = integrate(
        p,
        initial,
        eta_span,
        &IntegrationOptions { ode: *ode, recording: Recording::Uniform(dt), ..Default::default() },
    )?;

    let (u0, y0) = initial;
    // leading-order slow manifold: z equals the reduced y'
    let z0 = vector_field_reduced(p, u0, y0).1;
    let escape = 10.0 * p.model.right_extent();
    let mut samples = Vec::with_capacity(planar.states.len());
    let mut next = 0.0;
    solve(
        |_t, s: &[f64; 3]| {
            let (a, b, c) = full3d_unchecked(p, s[0], s[1], s[2]);
            [a, b, c]
        },
        0.0,
        [u0, y0, z0],
        eta_span,
        ode,
        |step| {
            if !(step.y1[0].abs() <= escape) {
                return Err(Error::UnboundedOrbit { eta: step.t1(), u: step.y1[0] });
            }
            while next <= step.t1() {
                let s = step.eval(next);
                samples.push((s[0], s[1]));
                next += dt;
            }
            Ok(ControlFlow::Continue(()))
        },
    )?;

    Ok(planar
        .states
        .iter()
        .zip(&samples)
        .map(|(a, b)| (a.u - b.0).hypot(a.y - b.1))
        .fold(0.0, f64::max))
}

/// Least-squares slope of `ln(deviation)` against `ln(epsilon)`.
pub fn fit_order(epsilons: &[f64], deviations: &[f64]) -> f64 {
    assert_eq!(epsilons.len(), deviations.len());
    let xs: Vec<f64> = epsilons.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = deviations.iter().map(|d| d.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
