use serde::Serialize;

use gkdv_waves::abelian::{self, AnnulusEnd, GRID_MARGIN};
use gkdv_waves::dynamics::{
    find_limit_cycle, integrate, CycleOptions, IntegrationOptions, PerturbedParams, Recording, ReturnMapOptions,
};
use gkdv_waves::ode::OdeOptions;
use gkdv_waves::verify::{run_suite, VerifyConfig};
use gkdv_waves::{Error, FixedPointKind, ModelParams};

use crate::args::{Common, Format, SystemArgs};
use crate::error::CliError;
use crate::output::{emit, json, sidecar_path, Csv};

/// Tolerance on the extrapolated endpoint limits reported by `curve`.
const ENDPOINT_TOL: f64 = 1e-3;

fn ode_options(common: &Common) -> OdeOptions {
    OdeOptions { rtol: common.tol_ode, atol: 1e-2 * common.tol_ode, ..Default::default() }
}

fn check_tolerances(common: &Common) -> Result<(), CliError> {
    for (name, v) in [("--tol-quad", common.tol_quad), ("--tol-ode", common.tol_ode)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(CliError::Usage(format!("{name} must lie in (0, 1), got {v}")));
        }
    }
    Ok(())
}

/// Printed to stderr before any work and embedded in JSON reports.
fn header<T: Serialize>(command: &str, settings: &T) -> Result<(), CliError> {
    eprintln!("# gkdv {command} {}", serde_json::to_string(settings)?);
    Ok(())
}

fn perturbed(system: &SystemArgs) -> Result<PerturbedParams, CliError> {
    let p = PerturbedParams::new(ModelParams::new(system.n)?, system.epsilon, system.c)?;
    if p.is_large_epsilon() {
        eprintln!("warning: eps = {} is large; first-order predictions may not apply", p.epsilon);
    }
    Ok(p)
}

#[derive(Serialize)]
struct CurveSettings {
    n: u32,
    grid: usize,
    tol_quad: f64,
    margin_rel_p1: f64,
    p1: f64,
}

#[derive(Clone, Copy, Serialize)]
struct EndpointCheck {
    extrapolated: f64,
    expected: f64,
    passed: bool,
}

#[derive(Serialize)]
struct CurveRow {
    h: f64,
    a0: f64,
    an: f64,
    ratio: f64,
    c0: f64,
    err: f64,
}

#[derive(Serialize)]
struct CurveReport {
    command: &'static str,
    settings: CurveSettings,
    rows: Vec<CurveRow>,
    endpoint_center: EndpointCheck,
    endpoint_homoclinic: EndpointCheck,
    monotone: bool,
}

pub fn curve(common: &Common, n: u32, grid: usize) -> Result<(), CliError> {
    check_tolerances(common)?;
    let p = ModelParams::new(n)?;
    let settings = CurveSettings { n, grid, tol_quad: common.tol_quad, margin_rel_p1: GRID_MARGIN, p1: p.p1() };
    header("curve", &settings)?;

    let rows = abelian::c0_curve(&p, grid, common.tol_quad)?;
    let monotone = rows
        .windows(2)
        .all(|w| w[1].ratio < w[0].ratio && w[1].limit_speed_c0 > w[0].limit_speed_c0);
    let hv = abelian::homoclinic_values(&p);
    let endpoint = |end, expected: f64| -> Result<EndpointCheck, CliError> {
        let extrapolated = abelian::ratio_limit(&p, end, common.tol_quad)?;
        Ok(EndpointCheck { extrapolated, expected, passed: (extrapolated - expected).abs() <= ENDPOINT_TOL })
    };
    let at_center = endpoint(AnnulusEnd::Center, hv.ratio_at_p1)?;
    let at_loop = endpoint(AnnulusEnd::Homoclinic, hv.ratio_at_zero)?;

    eprintln!(
        "ratio -> {:.8} at p1 (expected {}), -> {:.8} at 0 (expected {:.8}); c0 from {:.6} to {:.6}",
        at_center.extrapolated,
        at_center.expected,
        at_loop.extrapolated,
        at_loop.expected,
        rows[0].limit_speed_c0,
        rows[rows.len() - 1].limit_speed_c0,
    );
    eprintln!(
        "monotonicity: {}",
        if monotone { "F_n strictly decreasing, c0 strictly increasing" } else { "VIOLATED" }
    );

    let verdicts = [monotone, at_center.passed, at_loop.passed];
    let text = match common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut csv = Csv::new(&["h", "A0", "An", "ratio", "c0", "err"]);
            for r in &rows {
                csv.row(&[r.h, r.a0, r.an, r.ratio, r.limit_speed_c0, r.quadrature_error_estimate]);
            }
            csv.into_string()
        }
        Format::Json => json(&CurveReport {
            command: "curve",
            settings,
            rows: rows
                .iter()
                .map(|r| CurveRow {
                    h: r.h,
                    a0: r.a0,
                    an: r.an,
                    ratio: r.ratio,
                    c0: r.limit_speed_c0,
                    err: r.quadrature_error_estimate,
                })
                .collect(),
            endpoint_center: at_center,
            endpoint_homoclinic: at_loop,
            monotone,
        })?,
    };
    emit(common.out.as_deref(), &text)?;
    match verdicts.iter().filter(|ok| !**ok).count() {
        0 => Ok(()),
        failed => Err(CliError::ChecksFailed { failed }),
    }
}

#[derive(Serialize)]
struct CycleSettings {
    n: u32,
    epsilon: f64,
    c: f64,
    bracket: [f64; 2],
    tol_ode: f64,
    tol_quad: f64,
    fd_step: f64,
    fixed_point_tol: f64,
    horizon: f64,
}

#[derive(Serialize)]
struct CycleReport {
    command: &'static str,
    settings: CycleSettings,
    section_fixed_point_u: f64,
    energy_estimate_h: f64,
    stability_multiplier: f64,
    stable: bool,
    converged: bool,
    displacement: f64,
    period: f64,
    predicted_h: Option<f64>,
    delta_h: Option<f64>,
    cycle: Vec<[f64; 2]>,
}

pub fn cycle(common: &Common, system: &SystemArgs, bracket: (f64, f64), fd_step: f64) -> Result<(), CliError> {
    check_tolerances(common)?;
    if !(fd_step > 0.0) {
        return Err(CliError::Usage(format!("--fd-step must be positive, got {fd_step}")));
    }
    let p = perturbed(system)?;
    let opts = CycleOptions {
        return_map: ReturnMapOptions { ode: ode_options(common), ..Default::default() },
        fd_step,
        ..Default::default()
    };
    let settings = CycleSettings {
        n: system.n,
        epsilon: p.epsilon,
        c: p.c,
        bracket: [bracket.0, bracket.1],
        tol_ode: common.tol_ode,
        tol_quad: common.tol_quad,
        fd_step,
        fixed_point_tol: opts.tol,
        horizon: opts.return_map.horizon,
    };
    header("cycle", &settings)?;

    let rep = match find_limit_cycle(&p, bracket, &opts) {
        Ok(r) => r,
        Err(e @ Error::NoFixedPointInBracket { .. }) => return Err(CliError::NoCycle(e)),
        Err(e) => return Err(e.into()),
    };
    let predicted_h = match abelian::level_for_speed(&p.model, p.c, common.tol_quad) {
        Ok(h) => Some(h),
        Err(Error::RatioOutOfRange { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let delta_h = predicted_h.map(|h| rep.energy_estimate_h - h);
    eprintln!(
        "u* = {:.8}, H(u*) = {:.8}, |P'(u*)| = {:.6} ({}), predicted h = {}",
        rep.section_fixed_point_u,
        rep.energy_estimate_h,
        rep.stability_multiplier,
        if rep.is_stable() { "stable" } else { "unstable" },
        predicted_h.map_or("none".to_owned(), |h| format!("{h:.8}")),
    );

    let text = match common.format.unwrap_or(Format::Json) {
        Format::Csv => {
            let mut csv = Csv::new(&["u", "y"]);
            for &(u, y) in &rep.cycle {
                csv.row(&[u, y]);
            }
            csv.into_string()
        }
        Format::Json => json(&CycleReport {
            command: "cycle",
            settings,
            section_fixed_point_u: rep.section_fixed_point_u,
            energy_estimate_h: rep.energy_estimate_h,
            stability_multiplier: rep.stability_multiplier,
            stable: rep.is_stable(),
            converged: rep.converged,
            displacement: rep.displacement,
            period: rep.period,
            predicted_h,
            delta_h,
            cycle: rep.cycle.iter().map(|&(u, y)| [u, y]).collect(),
        })?,
    };
    emit(common.out.as_deref(), &text)?;
    if rep.converged {
        Ok(())
    } else {
        Err(CliError::ChecksFailed { failed: 1 })
    }
}

#[derive(Serialize)]
struct SimulateSettings {
    n: u32,
    epsilon: f64,
    c: f64,
    start: [f64; 2],
    span: f64,
    sample_dt: Option<f64>,
    tol_ode: f64,
    escape_radius: f64,
}

#[derive(Serialize)]
struct SimulateReport {
    command: &'static str,
    settings: SimulateSettings,
    states: Vec<[f64; 3]>,
    crossings: Vec<[f64; 2]>,
    accepted_steps: usize,
    rejected_steps: usize,
}

pub fn simulate(
    common: &Common,
    system: &SystemArgs,
    start: (f64, f64),
    span: f64,
    dt: Option<f64>,
) -> Result<(), CliError> {
    check_tolerances(common)?;
    if !(span > 0.0) {
        return Err(CliError::Usage(format!("--span must be positive, got {span}")));
    }
    if dt.is_some_and(|d| !(d > 0.0)) {
        return Err(CliError::Usage("--dt must be positive".to_owned()));
    }
    let p = perturbed(system)?;
    let opts = IntegrationOptions {
        ode: ode_options(common),
        recording: dt.map_or(Recording::Steps, Recording::Uniform),
        ..Default::default()
    };
    let settings = SimulateSettings {
        n: system.n,
        epsilon: p.epsilon,
        c: p.c,
        start: [start.0, start.1],
        span,
        sample_dt: dt,
        tol_ode: common.tol_ode,
        escape_radius: opts.escape_factor * p.model.right_extent(),
    };
    header("simulate", &settings)?;

    let traj = integrate(&p, start, span, &opts)?;
    eprintln!(
        "{} states, {} section crossings, {} accepted / {} rejected steps",
        traj.states.len(),
        traj.crossings.len(),
        traj.step_stats.accepted,
        traj.step_stats.rejected
    );
    match common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut csv = Csv::new(&["eta", "u", "y"]);
            for s in &traj.states {
                csv.row(&[s.eta, s.u, s.y]);
            }
            let mut crossings = Csv::new(&["eta", "u"]);
            for c in &traj.crossings {
                crossings.row(&[c.eta, c.u]);
            }
            emit(common.out.as_deref(), &csv.into_string())?;
            match &common.out {
                Some(path) => {
                    let side = sidecar_path(path, "crossings");
                    emit(Some(&side), &crossings.into_string())?;
                    eprintln!("crossings written to {}", side.display());
                }
                None => eprint!("{}", crossings.into_string()),
            }
        }
        Format::Json => {
            let report = SimulateReport {
                command: "simulate",
                settings,
                states: traj.states.iter().map(|s| [s.eta, s.u, s.y]).collect(),
                crossings: traj.crossings.iter().map(|c| [c.eta, c.u]).collect(),
                accepted_steps: traj.step_stats.accepted,
                rejected_steps: traj.step_stats.rejected,
            };
            emit(common.out.as_deref(), &json(&report)?)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport {
    command: &'static str,
    settings: VerifyConfig,
    passed: bool,
    checks: Vec<gkdv_waves::verify::CheckOutcome>,
}

pub fn verify(common: &Common, n_min: u32, n_max: u32, grid: usize, samples: usize) -> Result<(), CliError> {
    check_tolerances(common)?;
    if n_min > n_max {
        return Err(CliError::Usage(format!("empty exponent range {n_min}..={n_max}")));
    }
    let cfg = VerifyConfig { n_min, n_max, grid, samples, seed: common.seed, rel_tol_quad: common.tol_quad, ode: ode_options(common) };
    header("verify", &cfg)?;

    let checks = run_suite(&cfg)?;
    for c in &checks {
        eprintln!(
            "[{}] {}: worst {:.3e} (n = {}, threshold {:.1e}){}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.worst,
            c.worst_n,
            c.threshold,
            c.note.as_ref().map_or(String::new(), |s| format!(" {s}")),
        );
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let text = match common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = String::from("check,passed,worst,threshold,worst_n\n");
            for c in &checks {
                out.push_str(&format!(
                    "\"{}\",{},{},{},{}\n",
                    c.name,
                    c.passed,
                    crate::output::num(c.worst),
                    crate::output::num(c.threshold),
                    c.worst_n
                ));
            }
            out
        }
        Format::Json => json(&VerifyReport { command: "verify", settings: cfg, passed: failed == 0, checks })?,
    };
    emit(common.out.as_deref(), &text)?;
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::ChecksFailed { failed })
    }
}

#[derive(Serialize)]
struct PortraitSettings {
    n: u32,
    levels: Vec<f64>,
    points: usize,
    p1: f64,
    right_extent: f64,
}

#[derive(Serialize)]
struct PortraitCurve {
    h: f64,
    /// Closed polylines, one per annulus (two for even `n`).
    branches: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize)]
struct PortraitPoint {
    u: f64,
    y: f64,
    kind: &'static str,
    h: f64,
}

#[derive(Serialize)]
struct PortraitReport {
    command: &'static str,
    settings: PortraitSettings,
    curves: Vec<PortraitCurve>,
    fixed_points: Vec<PortraitPoint>,
}

/// Upper half traversed left to right, then the lower half back, so the
/// polyline closes on itself.
fn closed_branch(upper: &[(f64, f64)], mirror_u: bool) -> Vec<[f64; 2]> {
    // 0 - x keeps zeros positive
    let flip = |u: f64| if mirror_u { 0.0 - u } else { u };
    upper
        .iter()
        .map(|&(u, y)| [flip(u), y])
        .chain(upper.iter().rev().skip(1).map(|&(u, y)| [flip(u), 0.0 - y]))
        .collect()
}

pub fn portrait(common: &Common, n: u32, levels: &[f64], points: usize) -> Result<(), CliError> {
    if levels.is_empty() {
        return Err(CliError::Usage("--levels needs at least one value".to_owned()));
    }
    let p = ModelParams::new(n)?;
    let settings = PortraitSettings { n, levels: levels.to_vec(), points, p1: p.p1(), right_extent: p.right_extent() };
    header("portrait", &settings)?;
    for &h in levels {
        if !(h >= p.p1() && h <= 0.0) {
            return Err(Error::EnergyOutsideAnnulus { h, p1: p.p1() }.into());
        }
    }

    let mirror = n % 2 == 0;
    let curves = levels
        .iter()
        .map(|&h| {
            let upper = p.level_curve(h, points)?;
            let mut branches = vec![closed_branch(&upper, false)];
            if mirror {
                branches.push(closed_branch(&upper, true));
            }
            Ok(PortraitCurve { h, branches })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let fixed_points: Vec<PortraitPoint> = p
        .fixed_points()
        .into_iter()
        .map(|fp| PortraitPoint {
            u: fp.u,
            y: fp.y,
            kind: match fp.kind {
                FixedPointKind::Saddle => "saddle",
                FixedPointKind::Center => "center",
            },
            h: p.hamiltonian(fp.u, fp.y),
        })
        .collect();
    eprintln!("{} level sets, {} fixed points", curves.len(), fixed_points.len());

    let text = match common.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut csv = Csv::new(&["kind", "branch", "h", "u", "y"]);
            for curve in &curves {
                for (b, branch) in curve.branches.iter().enumerate() {
                    let label = b.to_string();
                    for &[u, y] in branch {
                        csv.labeled_row(&["level", &label], &[curve.h, u, y]);
                    }
                }
            }
            for fp in &fixed_points {
                csv.labeled_row(&[fp.kind, "-"], &[fp.h, fp.u, fp.y]);
            }
            csv.into_string()
        }
        Format::Json => json(&PortraitReport { command: "portrait", settings, curves, fixed_points })?,
    };
    emit(common.out.as_deref(), &text)
}
