//! Gauss–Legendre quadrature with node doubling.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Smallest rule used by [`integrate`].
pub const MIN_NODES: usize = 16;
/// Largest rule used by [`integrate`].
pub const MAX_NODES: usize = 4096;
/// Default relative change between successive rules accepted as converged.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

const LEVELS: usize = 10; // 8, 16, ..., 4096

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule by Newton iteration on the Legendre polynomial.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule to `f` on `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum();
        half * sum
    }
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached rule with `8 · 2^level` nodes.
fn cached_rule(level: usize) -> &'static GaussLegendre {
    static RULES: [OnceLock<GaussLegendre>; LEVELS] = [const { OnceLock::new() }; LEVELS];
    RULES[level].get_or_init(|| GaussLegendre::new(8 << level))
}

/// Value of an integral together with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub nodes: usize,
}

/// Integrates a smooth `f` over `[a, b]`, doubling the Gauss–Legendre node
/// count from [`MIN_NODES`] until two successive rules agree to `rel_tol`.
///
/// The reported error is the last change between rules, floored at a few
/// ulps of the value.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64) -> Result<Estimate> {
    let first = MIN_NODES.trailing_zeros() as usize - 3;
    let mut prev = cached_rule(first).integrate(&mut f, a, b);
    let mut change = f64::INFINITY;
    for level in first + 1..LEVELS {
        let rule = cached_rule(level);
        let value = rule.integrate(&mut f, a, b);
        change = (value - prev).abs();
        let floor = 16.0 * f64::EPSILON * value.abs();
        if change <= rel_tol * value.abs() || change <= floor {
            return Ok(Estimate { value, error: change.max(floor), nodes: rule.len() });
        }
        prev = value;
    }
    Err(Error::QuadratureNotConverged { nodes: MAX_NODES, change })
}
