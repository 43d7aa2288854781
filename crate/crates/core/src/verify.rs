//! Numerical property suite over a range of exponents `n`.
//!
//! Each check reports its worst-case residual against a fixed threshold.
//! Randomized samples come from a seeded generator so runs are reproducible.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abelian::{self, AnnulusEnd};
use crate::dynamics::{integrate, IntegrationOptions, PerturbedParams, Recording};
use crate::error::{Error, Result};
use crate::hamiltonian::{FixedPointKind, ModelParams};
use crate::identities;
use crate::ode::OdeOptions;
use crate::quadrature::DEFAULT_REL_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub n_min: u32,
    pub n_max: u32,
    /// Energies per ratio grid.
    pub grid: usize,
    /// Random `(u, v)` pairs per `n` for the polynomial identity.
    pub samples: usize,
    pub seed: u64,
    pub rel_tol_quad: f64,
    pub ode: OdeOptions,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n_min: 1,
            n_max: 10,
            grid: 64,
            samples: 1000,
            seed: 0x5eed,
            rel_tol_quad: DEFAULT_REL_TOL,
            ode: OdeOptions::default(),
        }
    }
}

/// Outcome of one property across all exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Largest residual seen (or the smallest margin, for sign checks).
    pub worst: f64,
    pub threshold: f64,
    /// Exponent at which `worst` occurred.
    pub worst_n: u32,
    pub note: Option<String>,
}

/// Per-exponent contribution to a check: residual and whether it is within bounds.
#[derive(Debug, Clone, Copy)]
struct Sample {
    residual: f64,
    ok: bool,
}

impl Sample {
    fn at_most(residual: f64, threshold: f64) -> Self {
        Self { residual, ok: residual <= threshold }
    }
}

fn combine(name: &str, threshold: f64, per_n: Vec<(u32, Result<Sample>)>) -> CheckOutcome {
    let mut out = CheckOutcome {
        name: name.to_owned(),
        passed: true,
        worst: 0.0,
        threshold,
        worst_n: per_n.first().map_or(0, |p| p.0),
        note: None,
    };
    for (n, res) in per_n {
        match res {
            Ok(s) => {
                out.passed &= s.ok;
                if s.residual > out.worst || s.residual.is_nan() {
                    out.worst = s.residual;
                    out.worst_n = n;
                }
            }
            Err(e) => {
                out.passed = false;
                out.worst_n = n;
                out.note = Some(e.to_string());
            }
        }
    }
    out
}

fn for_each_n<F>(cfg: &VerifyConfig, f: F) -> Vec<(u32, Result<Sample>)>
where
    F: Fn(&ModelParams) -> Result<Sample> + Sync,
{
    (cfg.n_min..=cfg.n_max)
        .into_par_iter()
        .map(|n| (n, ModelParams::new(n).and_then(|p| f(&p))))
        .collect()
}

fn open_grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (points + 1) as f64;
    (1..=points).map(move |i| lo + step * i as f64)
}

/// Polynomial identity residual, relative to the size of its terms.
pub fn check_identity(cfg: &VerifyConfig) -> CheckOutcome {
    const TOL: f64 = 1e-9;
    let per_n = (cfg.n_min..=cfg.n_max)
        .map(|n| {
            let mut rng = StdRng::seed_from_u64(cfg.seed ^ u64::from(n));
            let worst = (0..cfg.samples)
                .map(|_| {
                    let u = rng.random_range(0.0..3.0);
                    let v = rng.random_range(0.0..3.0);
                    identities::identity_residual(n, u, v).abs() / (1.0 + identities::identity_scale(n, u, v))
                })
                .fold(0.0, f64::max);
            (n, Ok(Sample::at_most(worst, TOL)))
        })
        .collect();
    combine("identity residual (relative)", TOL, per_n)
}

/// `|Φ(δ(u)) - Φ(u)|` and `|δ(δ(u)) - u|` on a grid over `(0, B)`.
pub fn check_involution(cfg: &VerifyConfig) -> [CheckOutcome; 2] {
    const LEVEL_TOL: f64 = 1e-10;
    const IDEMPOTENCE_TOL: f64 = 1e-8;
    let level = for_each_n(cfg, |p| {
        let mut worst: f64 = 0.0;
        for u in open_grid(0.0, p.right_extent(), 200) {
            let v = p.involution(u)?;
            worst = worst.max((p.potential(v) - p.potential(u)).abs());
        }
        Ok(Sample::at_most(worst, LEVEL_TOL))
    });
    let idem = for_each_n(cfg, |p| {
        let mut worst: f64 = 0.0;
        for u in open_grid(0.0, p.right_extent(), 200) {
            let v = p.involution(u)?;
            worst = worst.max((p.involution(v)? - u).abs());
        }
        Ok(Sample::at_most(worst, IDEMPOTENCE_TOL))
    });
    [
        combine("involution level match", LEVEL_TOL, level),
        combine("involution idempotence", IDEMPOTENCE_TOL, idem),
    ]
}

/// Sign of `Φ'` on 1000-point grids either side of the center, the fixed-point
/// classification and the nesting of turning points.
pub fn check_geometry(cfg: &VerifyConfig) -> CheckOutcome {
    let per_n = for_each_n(cfg, |p| {
        let c = p.center_u();
        let mut bad = 0usize;
        bad += open_grid(0.0, c, 1000).filter(|&u| p.potential_deriv(u) >= 0.0).count();
        bad += open_grid(c, p.right_extent(), 1000).filter(|&u| p.potential_deriv(u) <= 0.0).count();
        for fp in p.fixed_points() {
            let expect = if p.hessian_det(fp.u) < 0.0 { FixedPointKind::Saddle } else { FixedPointKind::Center };
            bad += usize::from(fp.kind != expect || fp.y != 0.0);
        }
        let (lo, hi) = abelian::grid_bounds(p);
        let geoms = open_grid(lo, hi, 64).map(|h| p.turning_points(h)).collect::<Result<Vec<_>>>()?;
        bad += geoms
            .windows(2)
            .filter(|w| !(w[1].alpha < w[0].alpha && w[1].beta > w[0].beta))
            .count();
        Ok(Sample::at_most(bad as f64, 0.0))
    });
    combine("potential monotonicity, classification, oval nesting (violations)", 0.0, per_n)
}

/// Strict monotonicity of `F_n` and `c0` on the grid, with the ratio and speed
/// bounds at every point.
pub fn check_monotonicity(cfg: &VerifyConfig) -> CheckOutcome {
    let grid = cfg.grid;
    let tol = cfg.rel_tol_quad;
    let per_n = (cfg.n_min..=cfg.n_max)
        .map(|n| (n, ModelParams::new(n).and_then(|p| monotonicity_violations(&p, grid, tol))))
        .collect();
    combine("F_n decreasing, c0 increasing, bounds (violations)", 0.0, per_n)
}

fn monotonicity_violations(p: &ModelParams, grid: usize, rel_tol: f64) -> Result<Sample> {
    let rows = abelian::c0_curve(p, grid, rel_tol)?;
    let nf = f64::from(p.n());
    let low = abelian::homoclinic_values(p).ratio_at_zero;
    let high = nf + 1.0;
    let c_low = 1.0 / nf;
    let c_high = (3.0 * nf + 4.0) / (2.0 * nf * nf + 3.0 * nf);
    let mut bad = rows
        .windows(2)
        .filter(|w| !(w[1].ratio < w[0].ratio && w[1].limit_speed_c0 > w[0].limit_speed_c0))
        .count();
    bad += rows
        .iter()
        .filter(|r| !(r.ratio > low && r.ratio < high && r.limit_speed_c0 > c_low && r.limit_speed_c0 < c_high))
        .count();
    Ok(Sample::at_most(bad as f64, 0.0))
}

/// Extrapolated limits of `F_n` at both ends of the annulus.
pub fn check_endpoints(cfg: &VerifyConfig) -> CheckOutcome {
    const TOL: f64 = 1e-3;
    let tol = cfg.rel_tol_quad;
    let per_n = for_each_n(cfg, |p| {
        let hv = abelian::homoclinic_values(p);
        let at_center = abelian::ratio_limit(p, AnnulusEnd::Center, tol)?;
        let at_loop = abelian::ratio_limit(p, AnnulusEnd::Homoclinic, tol)?;
        let worst = (at_center - hv.ratio_at_p1).abs().max((at_loop - hv.ratio_at_zero).abs());
        Ok(Sample::at_most(worst, TOL))
    });
    combine("extrapolated F_n endpoint limits", TOL, per_n)
}

/// The Beta closed forms against their stated ratio and against quadrature.
pub fn check_beta(cfg: &VerifyConfig) -> [CheckOutcome; 2] {
    const RATIO_TOL: f64 = 1e-10;
    const QUAD_TOL: f64 = 1e-8;
    let ratio = for_each_n(cfg, |p| {
        let hv = abelian::homoclinic_values(p);
        Ok(Sample::at_most((hv.jn / hv.j0 - hv.ratio_at_zero).abs(), RATIO_TOL))
    });
    let tol = cfg.rel_tol_quad.min(1e-10);
    let quad = for_each_n(cfg, |p| {
        let hv = abelian::homoclinic_values(p);
        let e0 = (abelian::homoclinic_integral(p, 0, tol)? / hv.j0 - 1.0).abs();
        let en = (abelian::homoclinic_integral(p, p.n(), tol)? / hv.jn - 1.0).abs();
        Ok(Sample::at_most(e0.max(en), QUAD_TOL))
    });
    [
        combine("Beta closed-form ratio J_n/J_0", RATIO_TOL, ratio),
        combine("homoclinic quadrature vs Beta closed form (relative)", QUAD_TOL, quad),
    ]
}

/// Positivity of the certificate, its closed form, and the decrease of `T_n`.
pub fn check_certificate(cfg: &VerifyConfig) -> CheckOutcome {
    const TOL: f64 = 1e-8;
    let per_n = for_each_n(cfg, |p| {
        let mut worst: f64 = 0.0;
        let mut ok = true;
        let mut prev_t = f64::INFINITY;
        for u in open_grid(p.center_u(), p.right_extent(), 200) {
            let direct = identities::positivity_certificate(p, u)?;
            let closed = identities::positivity_closed_form(p, u)?;
            let slope = identities::t_n_slope(p, u)?;
            let t = identities::t_n(p, u)?;
            ok &= direct > 0.0 && slope < 0.0 && t < prev_t;
            prev_t = t;
            worst = worst.max((direct - closed).abs() / closed.abs());
        }
        Ok(Sample { residual: worst, ok: ok && worst <= TOL })
    });
    combine("positivity certificate and T_n decrease", TOL, per_n)
}

/// `A_0(h)` against the shoelace area of the traced unperturbed orbit, at the
/// middle of the annulus.
pub fn check_green_area(cfg: &VerifyConfig) -> CheckOutcome {
    const TOL: f64 = 1e-4;
    let per_n = for_each_n(cfg, |p| {
        let h = 0.5 * p.p1();
        let a0 = abelian::abelian_integral(p, 0, h, cfg.rel_tol_quad)?.value;
        let area = traced_area(p, h, &cfg.ode)?;
        Ok(Sample::at_most((area / a0 - 1.0).abs(), TOL))
    });
    combine("A_0 vs traced orbit area (relative)", TOL, per_n)
}

/// Area enclosed by the unperturbed orbit through `(α(h), 0)`, traced with
/// the integrator and closed at the first return to the section.
pub fn traced_area(p: &ModelParams, h: f64, ode: &OdeOptions) -> Result<f64> {
    let geom = p.turning_points(h)?;
    let pp = PerturbedParams::new(*p, 0.0, 1.0)?;
    let opts = IntegrationOptions {
        ode: *ode,
        recording: Recording::Uniform(1e-3),
        max_crossings: Some(1),
        ..Default::default()
    };
    // start just past the section so the return is the first crossing
    let traj = integrate(&pp, (geom.alpha, 0.0), 1e4, &opts)?;
    let first = traj.crossings.first().ok_or(Error::NoReturn { horizon: 1e4 })?;
    let mut pts: Vec<(f64, f64)> = traj.states.iter().map(|s| (s.u, s.y)).collect();
    pts.push((first.u, 0.0));
    Ok(shoelace(&pts).abs())
}

/// Signed area of a closed polygon.
pub fn shoelace(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len();
    0.5 * (0..m)
        .map(|i| {
            let (x0, y0) = pts[i];
            let (x1, y1) = pts[(i + 1) % m];
            x0 * y1 - x1 * y0
        })
        .sum::<f64>()
}

/// For `n = 1` the involution solves `v² + (u - 3)v + (u² - 3u) = 0`.
pub fn check_n1_closed_form() -> CheckOutcome {
    const TOL: f64 = 1e-10;
    let res = ModelParams::new(1).and_then(|p| {
        let mut worst: f64 = 0.0;
        for u in open_grid(0.0, 3.0, 200) {
            let b = u - 3.0;
            let disc = (b * b - 4.0 * (u * u - 3.0 * u)).sqrt();
            // the roots have product u² - 3u < 0; the partner is the positive one
            let v = (-b + disc) / 2.0;
            worst = worst.max((p.involution(u)? - v).abs());
        }
        Ok(Sample::at_most(worst, TOL))
    });
    combine("n = 1 involution vs quadratic formula", TOL, vec![(1, res)])
}

/// Runs every check; the `n = 1` closed form only when the range includes 1.
pub fn run_suite(cfg: &VerifyConfig) -> Result<Vec<CheckOutcome>> {
    if cfg.n_min == 0 || cfg.n_min > cfg.n_max {
        return Err(Error::InvalidArgument(format!("invalid exponent range {}..={}", cfg.n_min, cfg.n_max)));
    }
    if cfg.grid < 2 {
        return Err(Error::InvalidArgument(format!("grid needs at least 2 points, got {}", cfg.grid)));
    }
    let mut out = vec![check_identity(cfg)];
    out.extend(check_involution(cfg));
    out.push(check_geometry(cfg));
    out.push(check_monotonicity(cfg));
    out.push(check_endpoints(cfg));
    out.extend(check_beta(cfg));
    out.push(check_certificate(cfg));
    out.push(check_green_area(cfg));
    if cfg.n_min == 1 {
        out.push(check_n1_closed_form());
    }
    Ok(out)
}
