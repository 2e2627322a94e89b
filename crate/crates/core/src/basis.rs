//! Gauss-Legendre quadrature and the Legendre modal basis on the reference
//! element `[-1, 1]`.
//!
//! Every cell of a mesh is mapped affinely onto the reference element, so
//! the local space `P^k(I_j)` is spanned by `P_0, ..., P_k`. The basis is
//! orthogonal but not normalized: `∫ P_m P_n = 2/(2m+1) δ_mn`.

use crate::error::{invalid, Result};

/// Largest supported number of quadrature points.
pub const MAX_QUAD_POINTS: usize = 32;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// A Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of points `q`; the rule is exact for polynomials of degree `2q - 1`.
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integrates `f` over `[-1, 1]`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Integrates `f` over `[a, b]` through the affine map.
    pub fn integrate_on(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self.integrate(|xi| f(mid + half * xi))
    }
}

/// Returns the `q`-point Gauss-Legendre rule.
///
/// Nodes are the roots of `P_q`, found by Newton iteration from Chebyshev
/// initial guesses; only the non-negative half is iterated and the rest is
/// mirrored, so the rule is symmetric to the last bit.
pub fn gauss_legendre(q: usize) -> Result<QuadRule> {
    if !(1..=MAX_QUAD_POINTS).contains(&q) {
        return invalid(format!(
            "quadrature point count must lie in 1..={MAX_QUAD_POINTS}, got {q}"
        ));
    }
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let qf = q as f64;
    for i in 0..q / 2 {
        // i-th largest root
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (qf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, d) = legendre_with_derivative(q, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= NEWTON_TOL {
                dp = legendre_with_derivative(q, x).1;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[q - 1 - i] = x;
        nodes[i] = -x;
        weights[q - 1 - i] = w;
        weights[i] = w;
    }
    if q % 2 == 1 {
        let (_, d) = legendre_with_derivative(q, 0.0);
        nodes[q / 2] = 0.0;
        weights[q / 2] = 2.0 / (d * d);
    }
    Ok(QuadRule { nodes, weights })
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for m in 1..n {
        let mf = m as f64;
        let p2 = ((2.0 * mf + 1.0) * x * p1 - mf * p0) / (mf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    // derivative from (1 - x^2) P_n' = n (P_{n-1} - x P_n); fine away from ±1
    let d = n as f64 * (p0 - x * p1) / (1.0 - x * x);
    (p1, d)
}

/// Evaluates `P_0..=P_k` and their derivatives at `xi`.
///
/// Values use the Bonnet recurrence and derivatives the companion recurrence
/// `P'_{m+1} = P'_{m-1} + (2m+1) P_m`, which stays exact at the endpoints.
pub fn legendre_eval(k: usize, xi: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(-1.0..=1.0).contains(&xi) {
        return invalid(format!("reference coordinate {xi} outside [-1, 1]"));
    }
    let mut values = vec![0.0; k + 1];
    let mut derivs = vec![0.0; k + 1];
    fill_legendre(xi, &mut values, &mut derivs);
    Ok((values, derivs))
}

/// Unchecked kernel behind [`legendre_eval`]; slices set the degree.
pub(crate) fn fill_legendre(xi: f64, values: &mut [f64], derivs: &mut [f64]) {
    let n = values.len();
    if n == 0 {
        return;
    }
    values[0] = 1.0;
    derivs[0] = 0.0;
    if n > 1 {
        values[1] = xi;
        derivs[1] = 1.0;
    }
    for m in 1..n.saturating_sub(1) {
        let mf = m as f64;
        values[m + 1] = ((2.0 * mf + 1.0) * xi * values[m] - mf * values[m - 1]) / (mf + 1.0);
        derivs[m + 1] = derivs[m - 1] + (2.0 * mf + 1.0) * values[m];
    }
}

/// Legendre values only, written into `values` (length `k + 1`).
pub(crate) fn fill_legendre_values(xi: f64, values: &mut [f64]) {
    let n = values.len();
    if n == 0 {
        return;
    }
    values[0] = 1.0;
    if n > 1 {
        values[1] = xi;
    }
    for m in 1..n.saturating_sub(1) {
        let mf = m as f64;
        values[m + 1] = ((2.0 * mf + 1.0) * xi * values[m] - mf * values[m - 1]) / (mf + 1.0);
    }
}

/// Modal basis of degree `k` with values tabulated at a quadrature rule.
#[derive(Debug, Clone)]
pub struct LegendreBasis {
    degree: usize,
    rule: QuadRule,
    /// `values[i][m] = P_m(node_i)`
    values: Vec<Vec<f64>>,
    derivs: Vec<Vec<f64>>,
}

impl LegendreBasis {
    pub fn new(degree: usize, rule: QuadRule) -> Self {
        let (values, derivs) = rule
            .nodes()
            .iter()
            .map(|&x| {
                let mut v = vec![0.0; degree + 1];
                let mut d = vec![0.0; degree + 1];
                fill_legendre(x, &mut v, &mut d);
                (v, d)
            })
            .unzip();
        LegendreBasis {
            degree,
            rule,
            values,
            derivs,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn rule(&self) -> &QuadRule {
        &self.rule
    }

    pub fn values_at_node(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn derivs_at_node(&self, i: usize) -> &[f64] {
        &self.derivs[i]
    }

    /// `∫_{-1}^{1} P_m P_n dξ` by the stored rule.
    pub fn inner(&self, m: usize, n: usize) -> f64 {
        self.rule
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v[m] * v[n])
            .sum()
    }

    /// `∫_{-1}^{1} P_m P_n' dξ` by the stored rule.
    pub fn inner_with_derivative(&self, m: usize, n: usize) -> f64 {
        self.rule
            .weights()
            .iter()
            .zip(self.values.iter().zip(&self.derivs))
            .map(|(w, (v, d))| w * v[m] * d[n])
            .sum()
    }
}

/// Default number of volume quadrature points for degree `k`.
pub fn default_quad_order(k: usize) -> usize {
    (k + 2).max(6)
}
