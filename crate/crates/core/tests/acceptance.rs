//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints its verdict even when it passes.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use gkdv_waves::abelian::{
    abelian_integral, c0_curve, homoclinic_values, ratio_f, ratio_limit, speed_for_level, AnnulusEnd,
};
use gkdv_waves::dynamics::{
    find_limit_cycle, fit_order, integrate, return_map, validate_reduction, CycleOptions, IntegrationOptions,
    PerturbedParams, Recording, ReturnMapOptions,
};
use gkdv_waves::identities::{identity_residual, identity_scale, positivity_certificate, positivity_closed_form};
use gkdv_waves::ode::OdeOptions;
use gkdv_waves::quadrature::DEFAULT_REL_TOL;
use gkdv_waves::verify::traced_area;
use gkdv_waves::ModelParams;

const H_STAR: f64 = -671.0 / 5376.0;
const C_STAR: f64 = 100000.0 / 388851.0;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn timed(limit: Duration, f: impl FnOnce() -> Verdict) -> (Verdict, Duration, bool) {
    let start = Instant::now();
    let v = f();
    let took = start.elapsed();
    (v, took, took <= limit)
}

fn model(n: u32) -> ModelParams {
    ModelParams::new(n).unwrap()
}

fn section_four(eps: f64) -> PerturbedParams {
    PerturbedParams::new(model(5), eps, C_STAR).unwrap()
}

fn ratio_reproduction() -> Verdict {
    let r = ratio_f(&model(5), H_STAR, DEFAULT_REL_TOL).unwrap();
    let err = (r.ratio - 4.88851).abs();
    verdict(err <= 5e-4, format!("A5/A0 = {:.8}, |diff| = {err:.2e} (tol 5e-4)", r.ratio))
}

fn speed_reproduction() -> Verdict {
    let c = speed_for_level(&model(5), H_STAR, DEFAULT_REL_TOL).unwrap();
    let rel = ((c - C_STAR) / C_STAR).abs();
    verdict(rel <= 1e-3, format!("c = {c:.8}, rel diff = {rel:.2e} (tol 1e-3)"))
}

fn limit_cycle() -> Verdict {
    let p = section_four(0.1);
    let rm = ReturnMapOptions::default();
    let d_lo = return_map(&p, 0.1, &rm).unwrap() - 0.1;
    let d_hi = return_map(&p, 0.9, &rm).unwrap() - 0.9;
    let rep = find_limit_cycle(&p, (0.1, 0.9), &CycleOptions::default()).unwrap();
    let u_ok = (rep.section_fixed_point_u - 0.49885).abs() <= 0.02;
    let passed = u_ok && rep.stability_multiplier < 1.0 && d_lo > 0.0 && d_hi < 0.0 && rep.converged;
    verdict(
        passed,
        format!(
            "u* = {:.6} (0.49885 ± 0.02), |P'| = {:.4}, d(0.1) = {d_lo:+.4}, d(0.9) = {d_hi:+.4}, H(u*) = {:.5}",
            rep.section_fixed_point_u, rep.stability_multiplier, rep.energy_estimate_h
        ),
    )
}

fn endpoint_limits() -> Verdict {
    let mut worst_limit: f64 = 0.0;
    let mut worst_beta: f64 = 0.0;
    for n in 1..=10 {
        let p = model(n);
        let hv = homoclinic_values(&p);
        let nf = f64::from(n);
        let at_zero = 2.0 * (nf + 1.0) * (nf + 2.0) / (3.0 * nf + 4.0);
        let c = ratio_limit(&p, AnnulusEnd::Center, DEFAULT_REL_TOL).unwrap();
        let z = ratio_limit(&p, AnnulusEnd::Homoclinic, DEFAULT_REL_TOL).unwrap();
        worst_limit = worst_limit.max((c - (nf + 1.0)).abs()).max((z - at_zero).abs());
        worst_beta = worst_beta.max((hv.jn / hv.j0 - at_zero).abs());
    }
    verdict(
        worst_limit <= 1e-3 && worst_beta <= 1e-10,
        format!("worst limit error {worst_limit:.2e} (tol 1e-3), worst Beta ratio error {worst_beta:.2e} (tol 1e-10)"),
    )
}

fn monotonicity() -> Verdict {
    let mut violations = 0;
    for n in 1..=10 {
        let p = model(n);
        let nf = f64::from(n);
        let rows = c0_curve(&p, 64, DEFAULT_REL_TOL).unwrap();
        violations += rows
            .windows(2)
            .filter(|w| !(w[1].ratio < w[0].ratio && w[1].limit_speed_c0 > w[0].limit_speed_c0))
            .count();
        let (r_lo, r_hi) = (2.0 * (nf + 1.0) * (nf + 2.0) / (3.0 * nf + 4.0), nf + 1.0);
        let (c_lo, c_hi) = (1.0 / nf, (3.0 * nf + 4.0) / (2.0 * nf * nf + 3.0 * nf));
        violations += rows
            .iter()
            .filter(|r| !(r.ratio > r_lo && r.ratio < r_hi && r.limit_speed_c0 > c_lo && r.limit_speed_c0 < c_hi))
            .count();
    }
    verdict(violations == 0, format!("{violations} violations over n = 1..10, 64 points each"))
}

fn identities_suite() -> Verdict {
    let mut rng = StdRng::seed_from_u64(20240601);
    let mut worst_identity: f64 = 0.0;
    for n in 1..=12 {
        for _ in 0..1000 {
            let u = rng.random_range(0.0..3.0);
            let v = rng.random_range(0.0..3.0);
            let rel = identity_residual(n, u, v).abs() / (1.0 + identity_scale(n, u, v));
            worst_identity = worst_identity.max(rel);
        }
    }
    let mut worst_cert: f64 = 0.0;
    let mut all_positive = true;
    for n in 1..=12 {
        let p = model(n);
        let (lo, hi) = (p.center_u(), p.right_extent());
        for i in 1..=200 {
            let u = lo + (hi - lo) * f64::from(i) / 201.0;
            let direct = positivity_certificate(&p, u).unwrap();
            let closed = positivity_closed_form(&p, u).unwrap();
            all_positive &= direct > 0.0;
            worst_cert = worst_cert.max(((direct - closed) / closed).abs());
        }
    }
    verdict(
        worst_identity <= 1e-9 && worst_cert <= 1e-8 && all_positive,
        format!(
            "identity rel residual {worst_identity:.2e} (tol 1e-9), certificate rel diff {worst_cert:.2e} (tol 1e-8), positive: {all_positive}"
        ),
    )
}

/// Plain bisection on `Φ(u) = h` over a monotone branch.
fn bisect_level(p: &ModelParams, h: f64, mut lo: f64, mut hi: f64) -> f64 {
    let f = |u: f64| -0.5 * u * u + u.powi(p.n() as i32 + 2) / f64::from((p.n() + 1) * (p.n() + 2)) - h;
    let f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (f_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `2∫_α^β u^k √(2(h - Φ(u))) du` by the composite trapezoid rule on a million
/// panels, clipping negative radicands at the endpoints.
fn trapezoid_oracle(p: &ModelParams, k: u32, h: f64) -> f64 {
    let c = p.center_u();
    let alpha = bisect_level(p, h, 0.0, c);
    let beta = bisect_level(p, h, c, p.right_extent());
    let panels = 1_000_000;
    let dx = (beta - alpha) / f64::from(panels);
    let denom = f64::from((p.n() + 1) * (p.n() + 2));
    let f = |u: f64| {
        let phi = -0.5 * u * u + u.powi(p.n() as i32 + 2) / denom;
        u.powi(k as i32) * (2.0 * (h - phi)).max(0.0).sqrt()
    };
    let inner: f64 = (1..panels).map(|i| f(alpha + dx * f64::from(i))).sum();
    2.0 * dx * (inner + 0.5 * (f(alpha) + f(beta)))
}

fn oracle_equivalence() -> Verdict {
    let cases = [(1, -0.3), (2, -0.4), (3, -0.5), (5, H_STAR), (8, 0.3 * model(8).p1())];
    let mut worst_trap: f64 = 0.0;
    for &(n, h) in &cases {
        let p = model(n);
        for k in [0, n] {
            let a = abelian_integral(&p, k, h, DEFAULT_REL_TOL).unwrap().value;
            let b = trapezoid_oracle(&p, k, h);
            worst_trap = worst_trap.max((a / b - 1.0).abs());
        }
    }
    let mut worst_area: f64 = 0.0;
    for &(n, h) in &cases {
        let p = model(n);
        let a0 = abelian_integral(&p, 0, h, DEFAULT_REL_TOL).unwrap().value;
        let area = traced_area(&p, h, &OdeOptions::default()).unwrap();
        worst_area = worst_area.max((area / a0 - 1.0).abs());
    }
    verdict(
        worst_trap <= 1e-6 && worst_area <= 1e-4,
        format!("trapezoid rel diff {worst_trap:.2e} (tol 1e-6), traced area rel diff {worst_area:.2e} (tol 1e-4)"),
    )
}

fn conservative_limit() -> Verdict {
    let p = PerturbedParams::new(model(5), 0.0, C_STAR).unwrap();
    let opts = IntegrationOptions { recording: Recording::Steps, max_crossings: Some(10), ..Default::default() };
    let traj = integrate(&p, (0.5, 0.0), 1e4, &opts).unwrap();
    let h0 = p.model.hamiltonian(0.5, 0.0);
    let drift = traj
        .states
        .iter()
        .map(|s| (p.model.hamiltonian(s.u, s.y) - h0).abs())
        .fold(0.0, f64::max);
    let periods = traj.crossings.len();

    let rm = ReturnMapOptions::default();
    let mut worst_return: f64 = 0.0;
    for u0 in [0.05, 0.2, 0.5, 0.9, 1.2] {
        worst_return = worst_return.max((return_map(&p, u0, &rm).unwrap() - u0).abs());
    }
    verdict(
        drift <= 1e-7 && periods == 10 && worst_return <= 1e-7,
        format!("H drift over {periods} periods {drift:.2e} (tol 1e-7), |P(u) - u| {worst_return:.2e} (tol 1e-7)"),
    )
}

fn reduction_validation() -> Verdict {
    let eps = [0.04, 0.02, 0.01];
    let devs: Vec<f64> = eps
        .iter()
        .map(|&e| validate_reduction(&section_four(e), (0.1, 0.0), 50.0, &OdeOptions::default()).unwrap())
        .collect();
    let order = fit_order(&eps, &devs);
    verdict(
        order >= 1.7,
        format!("deviations {:.3e} / {:.3e} / {:.3e}, fitted order {order:.3} (min 1.7)", devs[0], devs[1], devs[2]),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, Option<u64>, fn() -> Verdict);
    let criteria: [Criterion; 9] = [
        ("1 ratio at h* for n = 5", Some(1), ratio_reproduction),
        ("2 speed at h* for n = 5", Some(1), speed_reproduction),
        ("3 limit cycle for n = 5, eps = 0.1", Some(30), limit_cycle),
        ("4 endpoint limits and Beta ratio", Some(60), endpoint_limits),
        ("5 monotonicity and bounds", Some(60), monotonicity),
        ("6 algebraic identities", Some(10), identities_suite),
        ("7 oracle equivalence", Some(120), oracle_equivalence),
        ("8 conservative limit", None, conservative_limit),
        ("9 reduction order", None, reduction_validation),
    ];
    let mut failures = 0;
    for (name, limit, f) in criteria {
        let budget = limit.map_or(Duration::MAX, Duration::from_secs);
        let (v, took, in_time) = timed(budget, f);
        let ok = v.passed && in_time;
        failures += usize::from(!ok);
        let time_note = match limit {
            Some(s) => format!("{:.2}s of {s}s", took.as_secs_f64()),
            None => format!("{:.2}s", took.as_secs_f64()),
        };
        println!("[{}] criterion {name}: {} ({time_note})", if ok { "PASS" } else { "FAIL" }, v.detail);
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
