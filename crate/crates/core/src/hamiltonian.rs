//! The unperturbed Hamiltonian system `u' = y, y' = u - u^(n+1)/(n+1)`.
//!
//! Its Hamiltonian is `H(u, y) = y²/2 + Φ(u)` with potential
//! `Φ(u) = -u²/2 + u^(n+2)/((n+1)(n+2))`. The center sits at
//! `u_c = (n+1)^(1/n)` and the level sets `H = h`, `h ∈ (p1, 0)`, form the
//! periodic annulus bounded by the homoclinic loop through the origin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::newton_bisect;

/// Absolute tolerance in `u` for turning points and the involution.
pub const TOL_ROOT: f64 = 1e-12;

/// Energies closer than this to the center energy `p1` give a degenerate oval.
pub const DEGENERACY_MARGIN: f64 = 1e-10;

/// Exponent `n` of the nonlinearity together with the derived annulus geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    n: u32,
    center_u: f64,
    p1: f64,
    right_extent: f64,
    /// `(n+1)(n+2)`, the denominator of the potential.
    denom: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FixedPointKind {
    Saddle,
    Center,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub u: f64,
    pub y: f64,
    pub kind: FixedPointKind,
}

/// Turning points `alpha < u_c < beta` of the oval `H(u, y) = h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelCurveGeometry {
    pub h: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Set when `h` is within [`DEGENERACY_MARGIN`] of `p1`; then
    /// `alpha == beta == u_c`.
    pub degenerate: bool,
}

impl LevelCurveGeometry {
    pub fn width(&self) -> f64 {
        self.beta - self.alpha
    }
}

impl ModelParams {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidExponent(n));
        }
        let nf = f64::from(n);
        let ln_np1 = (nf + 1.0).ln();
        let center_u = (ln_np1 / nf).exp();
        let p1 = -nf * (2.0 * ln_np1 / nf).exp() / (2.0 * (nf + 2.0));
        let right_extent = (((nf + 1.0) * (nf + 2.0) / 2.0).ln() / nf).exp();
        Ok(Self {
            n,
            center_u,
            p1,
            right_extent,
            denom: (nf + 1.0) * (nf + 2.0),
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Abscissa of the center, `(n+1)^(1/n)`.
    pub fn center_u(&self) -> f64 {
        self.center_u
    }

    /// Energy of the center, the lower end of the annulus.
    pub fn p1(&self) -> f64 {
        self.p1
    }

    /// Energy of the homoclinic loop, the upper end of the annulus.
    pub fn p2(&self) -> f64 {
        0.0
    }

    /// Right intercept `B = ((n+1)(n+2)/2)^(1/n)` of the homoclinic loop.
    pub fn right_extent(&self) -> f64 {
        self.right_extent
    }

    pub fn potential(&self, u: f64) -> f64 {
        -0.5 * u * u + u.powi(self.n as i32 + 2) / self.denom
    }

    pub fn potential_deriv(&self, u: f64) -> f64 {
        -u + u.powi(self.n as i32 + 1) / (f64::from(self.n) + 1.0)
    }

    pub fn hamiltonian(&self, u: f64, y: f64) -> f64 {
        0.5 * y * y + self.potential(u)
    }

    /// Hessian determinant `H_uu H_yy - H_uy² = u^n - 1`.
    pub fn hessian_det(&self, u: f64) -> f64 {
        u.powi(self.n as i32) - 1.0
    }

    pub fn classify(&self, u: f64) -> FixedPointKind {
        if self.hessian_det(u) < 0.0 {
            FixedPointKind::Saddle
        } else {
            FixedPointKind::Center
        }
    }

    /// Equilibria of the unperturbed field: two for odd `n`, three for even `n`.
    pub fn fixed_points(&self) -> Vec<FixedPoint> {
        let mut us = vec![0.0, self.center_u];
        if self.n % 2 == 0 {
            us.push(-self.center_u);
        }
        us.into_iter()
            .map(|u| FixedPoint { u, y: 0.0, kind: self.classify(u) })
            .collect()
    }

    /// First divided difference `Φ[a, b]` and its derivative in `b`.
    pub(crate) fn divided_difference(&self, a: f64, b: f64) -> (f64, f64) {
        let (h, dh) = homogeneous2(self.n + 1, a, b);
        (-0.5 * (a + b) + h / self.denom, -0.5 + dh / self.denom)
    }

    /// Second divided difference `Φ[a, b, x]` and its derivative in `x`.
    ///
    /// When `Φ(a) = Φ(b) = h` this gives `2(h - Φ(x)) = (x - a)(b - x) · 2Φ[a, b, x]`
    /// without cancellation.
    pub(crate) fn second_divided_difference(&self, a: f64, b: f64, x: f64) -> (f64, f64) {
        let (h, dh) = homogeneous3(self.n, a, b, x);
        (-0.5 + h / self.denom, dh / self.denom)
    }

    /// Signed distance-like coordinate `r(u) = (u - u_c)·sqrt(Φ[u_c, u_c, u])`,
    /// with `r(u)² = Φ(u) - p1`. Strictly increasing on `(0, B)`.
    fn normal_coordinate(&self, u: f64) -> (f64, f64) {
        let c = self.center_u;
        let (d2, dd2) = self.second_divided_difference(c, c, u);
        let root = d2.max(0.0).sqrt();
        let value = (u - c) * root;
        let deriv = if root > 0.0 { root + (u - c) * dd2 / (2.0 * root) } else { 0.0 };
        (value, deriv)
    }

    /// Turning points of the oval at energy `h`, `p1 < h < 0`.
    pub fn turning_points(&self, h: f64) -> Result<LevelCurveGeometry> {
        if !(h > self.p1 && h < 0.0) {
            return Err(Error::EnergyOutsideAnnulus { h, p1: self.p1 });
        }
        let excess = h - self.p1;
        if excess <= DEGENERACY_MARGIN {
            return Ok(LevelCurveGeometry {
                h,
                alpha: self.center_u,
                beta: self.center_u,
                degenerate: true,
            });
        }
        let s = excess.sqrt();
        let c = self.center_u;
        let alpha = newton_bisect(
            |u| {
                let (r, dr) = self.normal_coordinate(u);
                (r + s, dr)
            },
            0.0,
            c,
            TOL_ROOT,
        )?;
        let beta = newton_bisect(
            |u| {
                let (r, dr) = self.normal_coordinate(u);
                (r - s, dr)
            },
            c,
            self.right_extent,
            TOL_ROOT,
        )?;
        Ok(LevelCurveGeometry { h, alpha, beta, degenerate: false })
    }

    /// The involution `δ` pairing the two points of equal potential on
    /// either side of the center. `δ(u_c) = u_c`.
    pub fn involution(&self, u: f64) -> Result<f64> {
        let b = self.right_extent;
        if !(u > 0.0 && u < b) {
            return Err(Error::OutsideInvolutionDomain { u, upper: b });
        }
        let c = self.center_u;
        if u == c {
            return Ok(c);
        }
        // Φ(u) - Φ(v) = (u - v) Φ[u, v]; the partner is the root of Φ[u, ·]
        // on the opposite monotone branch, which is simple even at the center.
        let (lo, hi) = if u < c { (c, b) } else { (0.0, c) };
        newton_bisect(|v| self.divided_difference(u, v), lo, hi, TOL_ROOT)
    }

    /// Upper half `y ≥ 0` of the level set `H = h` through the right-hand
    /// annulus, sampled at `points` abscissae from the left to the right end.
    ///
    /// `h = p1` gives the center alone and `h = 0` the upper half of the
    /// homoclinic loop on `[0, B]`. Mirror in `y` to close the curve, and in
    /// `u` for the second annulus when `n` is even.
    pub fn level_curve(&self, h: f64, points: usize) -> Result<Vec<(f64, f64)>> {
        if points < 2 {
            return Err(Error::InvalidArgument(format!("level curve needs at least 2 points, got {points}")));
        }
        let theta = |i: usize| std::f64::consts::FRAC_PI_2 * i as f64 / (points - 1) as f64;
        if h == 0.0 {
            let b = self.right_extent;
            return Ok((0..points)
                .map(|i| {
                    // with u = B·t, 1 - 2u^n/((n+1)(n+2)) = 1 - t^n
                    let t = theta(i).sin().powi(2);
                    let u = b * t;
                    (u, u * (1.0 - t.powi(self.n as i32)).max(0.0).sqrt())
                })
                .collect());
        }
        if h == self.p1 {
            return Ok(vec![(self.center_u, 0.0)]);
        }
        let geom = self.turning_points(h)?;
        if geom.degenerate {
            return Ok(vec![(self.center_u, 0.0)]);
        }
        let (alpha, beta) = (geom.alpha, geom.beta);
        Ok((0..points)
            .map(|i| {
                let s = theta(i).sin().powi(2);
                let u = alpha + (beta - alpha) * s;
                let g = 2.0 * self.second_divided_difference(alpha, beta, u).0;
                (u, ((u - alpha) * (beta - u) * g).max(0.0).sqrt())
            })
            .collect())
    }
}

/// `h_m(a, x) = Σ_{j=0}^{m} a^(m-j) x^j` and its derivative in `x`.
pub(crate) fn homogeneous2(m: u32, a: f64, x: f64) -> (f64, f64) {
    let mut value = 0.0;
    let mut deriv = 0.0;
    let mut a_pow = 1.0;
    // Horner in x; the coefficient of x^(m-k) is a^k
    for _ in 0..=m {
        deriv = deriv * x + value;
        value = value * x + a_pow;
        a_pow *= a;
    }
    (value, deriv)
}

/// Complete homogeneous symmetric polynomial `h_m(a, b, x)` of degree `m`
/// and its derivative in `x`.
fn homogeneous3(m: u32, a: f64, b: f64, x: f64) -> (f64, f64) {
    // h_m(a, b, x) = Σ_k x^k h_{m-k}(a, b), with h_j(a, b) = b h_{j-1}(a, b) + a^j
    let mut pair = Vec::with_capacity(m as usize + 1);
    let mut a_pow = 1.0;
    let mut prev = 0.0;
    for _ in 0..=m {
        prev = b * prev + a_pow;
        pair.push(prev);
        a_pow *= a;
    }
    let mut value = 0.0;
    let mut deriv = 0.0;
    // Horner from the x^m coefficient (pair[0]) down to x^0 (pair[m])
    for &coef in &pair {
        deriv = deriv * x + value;
        value = value * x + coef;
    }
    (value, deriv)
}
