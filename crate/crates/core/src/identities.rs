//! Polynomial identities behind the monotonicity of `F_n`.
//!
//! With `v = δ(u)` on the right branch `u_c < u < B`, the function
//! `T_n(u) = u^n + u^(n-1)v + … + v^n` satisfies
//! `T_n'(u) = (f_n(u,v)Φ'(u) + f_n(v,u)Φ'(v)) / Φ'(v)`, and the numerator
//! equals `n/((n+1)(n+2))·Σ_i (u^(n-2i) - v^(n-2i))² (uv)^(2i) > 0`.
//! Since `Φ'(v) < 0`, `T_n` is strictly decreasing.

use crate::error::{Error, Result};
use crate::hamiltonian::{homogeneous2, ModelParams};

/// `Σ_{i=0}^{⌊(n-1)/2⌋} (u^(n-2i) - v^(n-2i))² (uv)^(2i)`
pub fn squared_sum(n: u32, u: f64, v: f64) -> f64 {
    let uv2 = (u * v).powi(2);
    let mut weight = 1.0;
    let mut total = 0.0;
    for i in 0..=(n - 1) / 2 {
        let e = (n - 2 * i) as i32;
        let d = u.powi(e) - v.powi(e);
        total += d * d * weight;
        weight *= uv2;
    }
    total
}

/// Left side minus right side of
/// `(u² - v²)·Σ_i (u^(n-2i) - v^(n-2i))²(uv)^(2i)
///   = (u^(2(n+1)) - v^(2(n+1))) - (n+1)u^n v^n (u² - v²)`.
pub fn identity_residual(n: u32, u: f64, v: f64) -> f64 {
    assert!(n >= 1, "identity needs n >= 1");
    let lhs = (u * u - v * v) * squared_sum(n, u, v);
    lhs - identity_rhs(n, u, v)
}

/// Right side of the identity checked by [`identity_residual`].
pub fn identity_rhs(n: u32, u: f64, v: f64) -> f64 {
    let e = 2 * (n as i32 + 1);
    (u.powi(e) - v.powi(e)) - f64::from(n + 1) * (u * v).powi(n as i32) * (u * u - v * v)
}

/// Sum of the magnitudes of the terms entering the identity, the natural
/// scale for its floating-point residual.
pub fn identity_scale(n: u32, u: f64, v: f64) -> f64 {
    let e = 2 * (n as i32 + 1);
    u.abs().powi(e) + v.abs().powi(e) + f64::from(n + 1) * (u * v).abs().powi(n as i32) * (u * u - v * v).abs()
}

/// Exact integer residual of the same identity; zero for every input that
/// does not overflow.
pub fn identity_residual_exact(n: u32, u: i64, v: i64) -> Option<i128> {
    let (u, v) = (i128::from(u), i128::from(v));
    let uv2 = (u * v).checked_pow(2)?;
    let mut sum: i128 = 0;
    for i in 0..=(n - 1) / 2 {
        let e = n - 2 * i;
        let d = u.checked_pow(e)? - v.checked_pow(e)?;
        sum = sum.checked_add(d.checked_mul(d)?.checked_mul(uv2.checked_pow(i)?)?)?;
    }
    let diff2 = u * u - v * v;
    let lhs = diff2.checked_mul(sum)?;
    let e = 2 * (n + 1);
    let rhs = (u.checked_pow(e)? - v.checked_pow(e)?)
        - i128::from(n + 1).checked_mul((u * v).checked_pow(n)?)?.checked_mul(diff2)?;
    Some(lhs - rhs)
}

/// `f_n(u, v) = Σ_{k=1}^{n} k v^(k-1) u^(n-k)`, the partial derivative of
/// `T_n` in its second argument.
pub fn f_poly(n: u32, u: f64, v: f64) -> f64 {
    let mut acc = 0.0;
    let mut u_pow = 1.0;
    for k in (1..=n).rev() {
        acc = acc * v + f64::from(k) * u_pow;
        u_pow *= u;
    }
    acc
}

fn right_branch_partner(params: &ModelParams, u: f64) -> Result<f64> {
    let (lower, upper) = (params.center_u(), params.right_extent());
    if !(u > lower && u < upper) {
        return Err(Error::OutsideCertificateDomain { u, lower, upper });
    }
    params.involution(u)
}

/// `f_n(u,v)Φ'(u) + f_n(v,u)Φ'(v)` with `v = δ(u)`, for `u_c < u < B`.
pub fn positivity_certificate(params: &ModelParams, u: f64) -> Result<f64> {
    let v = right_branch_partner(params, u)?;
    let n = params.n();
    Ok(f_poly(n, u, v) * params.potential_deriv(u) + f_poly(n, v, u) * params.potential_deriv(v))
}

/// Closed form `n/((n+1)(n+2))·Σ_i (u^(n-2i) - v^(n-2i))²(uv)^(2i)` of
/// [`positivity_certificate`].
pub fn positivity_closed_form(params: &ModelParams, u: f64) -> Result<f64> {
    let v = right_branch_partner(params, u)?;
    let n = params.n();
    let nf = f64::from(n);
    Ok(nf / ((nf + 1.0) * (nf + 2.0)) * squared_sum(n, u, v))
}

/// `T_n(u) = Σ_{k=0}^{n} u^(n-k) v^k` with `v = δ(u)`, for `u_c < u < B`.
pub fn t_n(params: &ModelParams, u: f64) -> Result<f64> {
    let v = right_branch_partner(params, u)?;
    Ok(homogeneous2(params.n(), u, v).0)
}

/// `T_n'(u)` from the certificate: `(f_n(u,v)Φ'(u) + f_n(v,u)Φ'(v)) / Φ'(v)`.
pub fn t_n_slope(params: &ModelParams, u: f64) -> Result<f64> {
    let v = right_branch_partner(params, u)?;
    Ok(positivity_certificate(params, u)? / params.potential_deriv(v))
}
