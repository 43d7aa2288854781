//! Abelian integrals `A_k(h) = ∮_{Γ_h} u^k y du` over the ovals of the
//! periodic annulus, their ratio `F_n(h) = A_n(h)/A_0(h)` and the limit wave
//! speed `c0(h) = 1/(F_n(h) - 1)`.
//!
//! The first-order displacement of the perturbed system is
//! `A(h) = -√c·A_0(h)·((1 + 1/c) - F_n(h))`, so a limit cycle sits where
//! `F_n(h) = 1 + 1/c`.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;

use crate::error::{Error, Result};
use crate::hamiltonian::ModelParams;
use crate::quadrature;
use crate::roots::bisect_then_secant;

/// Relative distance from either end of the annulus kept by grids and
/// searches over `h`.
pub const GRID_MARGIN: f64 = 1e-6;

/// A single Abelian integral with its quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureValue {
    pub value: f64,
    pub error: f64,
    /// The oval collapsed onto the center; `value` is then 0.
    pub degenerate: bool,
}

/// `A_0`, `A_n`, their ratio and the limit wave speed at one energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbelianResult {
    pub h: f64,
    pub a0: f64,
    pub an: f64,
    pub ratio: f64,
    pub limit_speed_c0: f64,
    /// Propagated absolute error estimate of `ratio`.
    pub quadrature_error_estimate: f64,
    pub degenerate: bool,
}

impl AbelianResult {
    /// Full Abelian integral `A(h)` for the wave speed `c`.
    pub fn melnikov(&self, c: f64) -> f64 {
        let sc = c.sqrt();
        -sc * (1.0 + 1.0 / c) * self.a0 + sc * self.an
    }
}

/// Closed-form values on the homoclinic loop `h = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomoclinicValues {
    pub j0: f64,
    pub jn: f64,
    /// `2(n+1)(n+2)/(3n+4)`
    pub ratio_at_zero: f64,
    /// `n + 1`
    pub ratio_at_p1: f64,
}

/// End of the annulus approached by [`ratio_limit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnnulusEnd {
    /// `h → p1⁺`, the oval shrinks to the center.
    Center,
    /// `h → 0⁻`, the oval approaches the homoclinic loop.
    Homoclinic,
}

fn check_exponent(params: &ModelParams, k: u32) -> Result<()> {
    if k == 0 || k == params.n() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "Abelian integrals are defined for k in {{0, {}}}, got {k}",
            params.n()
        )))
    }
}

/// `A_k(h) = 2∫_α^β u^k √(2(h - Φ(u))) du` for `k ∈ {0, n}`.
///
/// With `u = α + (β - α)sin²θ` and `2(h - Φ(u)) = (u - α)(β - u)·g(u)`,
/// the integrand becomes `4(β - α)² u^k s(1 - s)√g(u)` on `[0, π/2]`,
/// `s = sin²θ`, which is smooth. `g = 2Φ[α, β, u]` is evaluated as a
/// polynomial, so it needs no special handling at the endpoints.
pub fn abelian_integral(params: &ModelParams, k: u32, h: f64, rel_tol: f64) -> Result<QuadratureValue> {
    check_exponent(params, k)?;
    let geom = params.turning_points(h)?;
    if geom.degenerate {
        return Ok(QuadratureValue { value: 0.0, error: 0.0, degenerate: true });
    }
    let (alpha, beta) = (geom.alpha, geom.beta);
    let width = beta - alpha;
    let kk = k as i32;
    let est = quadrature::integrate(
        |theta| {
            let sn = theta.sin();
            let s = sn * sn;
            let u = alpha + width * s;
            let g = 2.0 * params.second_divided_difference(alpha, beta, u).0;
            u.powi(kk) * s * (1.0 - s) * g.max(0.0).sqrt()
        },
        0.0,
        FRAC_PI_2,
        rel_tol,
    )?;
    let scale = 4.0 * width * width;
    Ok(QuadratureValue { value: scale * est.value, error: scale * est.error, degenerate: false })
}

/// `F_n(h)` together with both integrals and `c0(h)`.
///
/// For a degenerate oval the ratio takes its limit `n + 1`.
pub fn ratio_f(params: &ModelParams, h: f64, rel_tol: f64) -> Result<AbelianResult> {
    let n = params.n();
    let a0 = abelian_integral(params, 0, h, rel_tol)?;
    let an = abelian_integral(params, n, h, rel_tol)?;
    if a0.degenerate {
        let ratio = f64::from(n) + 1.0;
        return Ok(AbelianResult {
            h,
            a0: 0.0,
            an: 0.0,
            ratio,
            limit_speed_c0: 1.0 / (ratio - 1.0),
            quadrature_error_estimate: 0.0,
            degenerate: true,
        });
    }
    let ratio = an.value / a0.value;
    let err = ratio.abs() * (a0.error / a0.value.abs() + an.error / an.value.abs());
    Ok(AbelianResult {
        h,
        a0: a0.value,
        an: an.value,
        ratio,
        limit_speed_c0: 1.0 / (ratio - 1.0),
        quadrature_error_estimate: err,
        degenerate: false,
    })
}

/// The wave speed `c > 0` that makes `A(h) = 0`, i.e. `1/(F_n(h) - 1)`.
pub fn speed_for_level(params: &ModelParams, h: f64, rel_tol: f64) -> Result<f64> {
    Ok(ratio_f(params, h, rel_tol)?.limit_speed_c0)
}

/// Energy `h` at which `F_n(h) = 1 + 1/c`, found by bisection on the
/// decreasing ratio.
pub fn level_for_speed(params: &ModelParams, c: f64, rel_tol: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!("wave speed must be positive, got {c}")));
    }
    let target = 1.0 + 1.0 / c;
    let (lo, hi) = grid_bounds(params);
    let low = homoclinic_values(params).ratio_at_zero;
    let high = f64::from(params.n()) + 1.0;
    let displacement = |h: f64| Ok(ratio_f(params, h, rel_tol)?.ratio - target);
    let d_lo = displacement(lo)?;
    let d_hi = displacement(hi)?;
    if d_lo.signum() == d_hi.signum() {
        return Err(Error::RatioOutOfRange { target, low, high });
    }
    bisect_then_secant(displacement, lo, hi, 1e-3 * (hi - lo), 1e-13)
}

/// Interval `(p1 + m, -m)` with `m = GRID_MARGIN·|p1|`.
pub fn grid_bounds(params: &ModelParams) -> (f64, f64) {
    let margin = GRID_MARGIN * params.p1().abs();
    (params.p1() + margin, -margin)
}

/// `ratio_f` on a uniform grid of `grid_size` energies spanning
/// [`grid_bounds`]. Points are evaluated in parallel and returned in
/// increasing `h`.
pub fn c0_curve(params: &ModelParams, grid_size: usize, rel_tol: f64) -> Result<Vec<AbelianResult>> {
    if grid_size < 2 {
        return Err(Error::InvalidArgument(format!("grid needs at least 2 points, got {grid_size}")));
    }
    let (lo, hi) = grid_bounds(params);
    let step = (hi - lo) / (grid_size - 1) as f64;
    (0..grid_size)
        .into_par_iter()
        .map(|i| {
            let h = if i + 1 == grid_size { hi } else { lo + step * i as f64 };
            ratio_f(params, h, rel_tol)
        })
        .collect()
}

/// Beta-function closed forms
/// `J_k(0) = (1/n)·K^((k+2)/n)·B((k+2)/n, 3/2)`, `K = (n+1)(n+2)/2`,
/// for `k = 0` and `k = n`.
pub fn homoclinic_values(params: &ModelParams) -> HomoclinicValues {
    let nf = f64::from(params.n());
    let k_const = (nf + 1.0) * (nf + 2.0) / 2.0;
    let closed = |k: f64| {
        let p = (k + 2.0) / nf;
        (p * k_const.ln() + ln_beta(p, 1.5)).exp() / nf
    };
    HomoclinicValues {
        j0: closed(0.0),
        jn: closed(nf),
        ratio_at_zero: 2.0 * (nf + 1.0) * (nf + 2.0) / (3.0 * nf + 4.0),
        ratio_at_p1: nf + 1.0,
    }
}

/// `J_k(0) = ∫_0^B u^(k+1) √(1 - 2u^n/((n+1)(n+2))) du` by quadrature.
///
/// With `u = B sin²φ` the root factor becomes
/// `cos φ·√(Σ_{j<n} sin^(2j) φ)`, so the square-root zero at `B` is
/// removed exactly; the double root at the saddle needs no treatment.
pub fn homoclinic_integral(params: &ModelParams, k: u32, rel_tol: f64) -> Result<f64> {
    check_exponent(params, k)?;
    let n = params.n();
    let b = params.right_extent();
    let est = quadrature::integrate(
        |phi| {
            let (sn, cs) = phi.sin_cos();
            let s = sn * sn;
            let mut sum = 0.0;
            let mut pow = 1.0;
            for _ in 0..n {
                sum += pow;
                pow *= s;
            }
            sn.powi(2 * k as i32 + 3) * cs * cs * sum.sqrt()
        },
        0.0,
        FRAC_PI_2,
        rel_tol,
    )?;
    Ok(2.0 * b.powi(k as i32 + 2) * est.value)
}

/// Offsets (relative to `|p1|`) from the annulus end used by [`ratio_limit`].
fn limit_offsets(end: AnnulusEnd) -> [f64; 4] {
    let first = match end {
        AnnulusEnd::Center => 1e-3,
        AnnulusEnd::Homoclinic => 8e-6,
    };
    [first, first / 2.0, first / 4.0, first / 8.0]
}

/// Limit of `F_n(h)` at one end of the annulus, by polynomial (Neville)
/// extrapolation to zero offset from four energies approaching that end.
pub fn ratio_limit(params: &ModelParams, end: AnnulusEnd, rel_tol: f64) -> Result<f64> {
    let scale = params.p1().abs();
    let offsets = limit_offsets(end);
    let mut values = [0.0; 4];
    for (slot, &d) in values.iter_mut().zip(&offsets) {
        let h = match end {
            AnnulusEnd::Center => params.p1() + d * scale,
            AnnulusEnd::Homoclinic => -d * scale,
        };
        *slot = ratio_f(params, h, rel_tol)?.ratio;
    }
    Ok(neville_at_zero(&offsets, &values))
}

/// Value at `x = 0` of the interpolating polynomial through `(xs, ys)`.
pub fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let mut p = ys.to_vec();
    let m = xs.len();
    for level in 1..m {
        for i in 0..m - level {
            let (xi, xj) = (xs[i], xs[i + level]);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::DEFAULT_REL_TOL;
    use approx::assert_relative_eq;

    const H_STAR: f64 = -671.0 / 5376.0;

    #[test]
    fn section_four_ratio() {
        let p = ModelParams::new(5).unwrap();
        let r = ratio_f(&p, H_STAR, DEFAULT_REL_TOL).unwrap();
        assert!((r.ratio - 4.88851).abs() < 5e-4, "ratio {}", r.ratio);
        assert!(r.a0 > 0.0);
        assert!(((r.limit_speed_c0 - 100000.0 / 388851.0) / r.limit_speed_c0).abs() < 1e-3);
    }

    #[test]
    fn degenerate_oval_gives_zero() {
        let p = ModelParams::new(1).unwrap();
        let v = abelian_integral(&p, 0, p.p1() + 1e-12, DEFAULT_REL_TOL).unwrap();
        assert!(v.degenerate);
        assert_eq!(v.value, 0.0);
        let r = ratio_f(&p, p.p1() + 1e-12, DEFAULT_REL_TOL).unwrap();
        assert_eq!(r.ratio, 2.0);
    }

    #[test]
    fn rejects_other_exponents_and_energies() {
        let p = ModelParams::new(3).unwrap();
        assert!(matches!(abelian_integral(&p, 2, -0.1, 1e-9), Err(Error::InvalidArgument(_))));
        assert!(matches!(abelian_integral(&p, 0, 0.0, 1e-9), Err(Error::EnergyOutsideAnnulus { .. })));
        assert!(matches!(abelian_integral(&p, 3, -1.0, 1e-9), Err(Error::EnergyOutsideAnnulus { .. })));
    }

    #[test]
    fn homoclinic_ratios() {
        for (n, expected) in [(1, 12.0 / 7.0), (2, 2.4), (5, 84.0 / 19.0)] {
            let hv = homoclinic_values(&ModelParams::new(n).unwrap());
            assert_relative_eq!(hv.jn / hv.j0, expected, max_relative = 1e-12);
            assert_relative_eq!(hv.ratio_at_zero, expected, max_relative = 1e-15);
        }
    }

    #[test]
    fn homoclinic_closed_form_n1() {
        // n = 1: J_0(0) = 3²·B(2, 3/2) = 9·4/15
        let hv = homoclinic_values(&ModelParams::new(1).unwrap());
        assert_relative_eq!(hv.j0, 2.4, max_relative = 1e-13);
    }

    #[test]
    fn homoclinic_quadrature_matches_closed_form() {
        for n in 1..=8 {
            let p = ModelParams::new(n).unwrap();
            let hv = homoclinic_values(&p);
            let j0 = homoclinic_integral(&p, 0, 1e-12).unwrap();
            let jn = homoclinic_integral(&p, n, 1e-12).unwrap();
            assert_relative_eq!(j0, hv.j0, max_relative = 1e-10);
            assert_relative_eq!(jn, hv.jn, max_relative = 1e-10);
        }
    }

    #[test]
    fn curve_minimal_grid() {
        let p = ModelParams::new(3).unwrap();
        let rows = c0_curve(&p, 2, DEFAULT_REL_TOL).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[1].limit_speed_c0 > rows[0].limit_speed_c0);
        assert!(c0_curve(&p, 1, DEFAULT_REL_TOL).is_err());
    }

    #[test]
    fn level_for_speed_inverts_speed_for_level() {
        let p = ModelParams::new(5).unwrap();
        let h = level_for_speed(&p, 100000.0 / 388851.0, DEFAULT_REL_TOL).unwrap();
        assert!((h - H_STAR).abs() < 1e-4, "h = {h}");
        assert!(matches!(level_for_speed(&p, 5.0, DEFAULT_REL_TOL), Err(Error::RatioOutOfRange { .. })));
    }

    #[test]
    fn neville_recovers_polynomial() {
        let xs = [1.0, 0.5, 0.25, 0.125];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x + x * x * x).collect();
        assert_relative_eq!(neville_at_zero(&xs, &ys), 3.0, max_relative = 1e-14);
    }
}
