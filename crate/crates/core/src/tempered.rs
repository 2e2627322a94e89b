//! Tempered L1 discretization of the Caputo derivative
//! `D_t^{α,γ} u = e^{-γt} D_t^α [e^{γt} u]`.
//!
//! With `w = e^{γt} u` the classical L1 rule is applied to `w` on the uniform
//! grid `t_n = nτ`, which gives
//!
//! ```text
//! Φ^n = μ (u^n + Σ_{i=1}^{n-1} (b_i - b_{i-1}) e^{-iγτ} u^{n-i} - b_{n-1} e^{-nγτ} u^0)
//! ```
//!
//! with `b_i = (i+1)^{1-α} - i^{1-α}` and `μ = τ^{-α} / Γ(2-α)`.

use crate::error::{invalid, Result};

/// Lanczos coefficients for `g = 7`, nine terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function by the Lanczos approximation (`g = 7`, 9 coefficients),
/// with the reflection formula below `1/2`.
pub fn gamma(x: f64) -> f64 {
    use std::f64::consts::PI;
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
}

/// L1 weights, tempering factors and the scaling `μ` for one `(α, γ, τ, M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperedWeights {
    alpha: f64,
    gamma: f64,
    tau: f64,
    steps: usize,
    /// `b_0..b_{M-1}`
    b: Vec<f64>,
    /// `e^{-iγτ}` for `i = 0..=M`
    damp: Vec<f64>,
    mu: f64,
}

impl TemperedWeights {
    pub fn new(alpha: f64, gamma: f64, tau: f64, steps: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return invalid(format!("alpha must lie in (0, 1), got {alpha}"));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return invalid(format!("gamma must be finite and >= 0, got {gamma}"));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return invalid(format!("tau must be positive, got {tau}"));
        }
        if steps == 0 {
            return invalid("number of time steps M must be >= 1");
        }
        let e = 1.0 - alpha;
        let b = (0..steps)
            .map(|i| {
                let i = i as f64;
                (i + 1.0).powf(e) - i.powf(e)
            })
            .collect();
        let damp = (0..=steps).map(|i| (-(i as f64) * gamma * tau).exp()).collect();
        let mu = tau.powf(-alpha) / gamma_fn_2_minus(alpha);
        Ok(TemperedWeights {
            alpha,
            gamma,
            tau,
            steps,
            b,
            damp,
            mu,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn damp(&self) -> &[f64] {
        &self.damp
    }

    /// `τ^{-α} / Γ(2-α)`
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Coefficients `c_0..c_{n-1}` such that the history term at step `n` is
    /// `Σ_l c_l u^l`.
    fn history_coefficient(&self, n: usize, l: usize) -> f64 {
        if l == 0 {
            self.b[n - 1] * self.damp[n]
        } else {
            let i = n - l;
            (self.b[i - 1] - self.b[i]) * self.damp[i]
        }
    }

    /// Writes `Σ_{i=1}^{n-1} (b_{i-1} - b_i) e^{-iγτ} u^{n-i} + b_{n-1} e^{-nγτ} u^0`
    /// into `out`. `history` must hold exactly `u^0..u^{n-1}`.
    pub fn history_combination_into<V: AsRef<[f64]>>(
        &self,
        n: usize,
        history: &[V],
        out: &mut [f64],
    ) -> Result<()> {
        if n == 0 || n > self.steps {
            return invalid(format!("step index {n} outside 1..={}", self.steps));
        }
        if history.len() != n {
            return invalid(format!(
                "history for step {n} must hold {n} vectors, got {}",
                history.len()
            ));
        }
        if let Some(bad) = history.iter().find(|v| v.as_ref().len() != out.len()) {
            return invalid(format!(
                "history vector length {} differs from {}",
                bad.as_ref().len(),
                out.len()
            ));
        }
        out.fill(0.0);
        for (l, v) in history.iter().enumerate() {
            let c = self.history_coefficient(n, l);
            for (o, x) in out.iter_mut().zip(v.as_ref()) {
                *o += c * x;
            }
        }
        Ok(())
    }

    /// Allocating form of [`history_combination_into`](Self::history_combination_into).
    pub fn history_combination<V: AsRef<[f64]>>(&self, n: usize, history: &[V]) -> Result<Vec<f64>> {
        let len = history.first().map_or(0, |v| v.as_ref().len());
        let mut out = vec![0.0; len];
        self.history_combination_into(n, history, &mut out)?;
        Ok(out)
    }

    /// Discrete tempered derivative `Φ^n` of a scalar sampled at
    /// `t_0, ..., t_n` (`samples.len() = n + 1`).
    pub fn tempered_derivative_scalar(&self, samples: &[f64]) -> Result<f64> {
        if samples.len() < 2 || samples.len() > self.steps + 1 {
            return invalid(format!(
                "need between 2 and {} samples, got {}",
                self.steps + 1,
                samples.len()
            ));
        }
        let n = samples.len() - 1;
        let mut acc = samples[n];
        for i in 1..n {
            acc += (self.b[i] - self.b[i - 1]) * self.damp[i] * samples[n - i];
        }
        acc -= self.b[n - 1] * self.damp[n] * samples[0];
        Ok(self.mu * acc)
    }
}

fn gamma_fn_2_minus(alpha: f64) -> f64 {
    gamma(2.0 - alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, SQRT_2};

    #[test]
    fn gamma_known_values() {
        let cases = [
            (1.0, 1.0),
            (2.0, 1.0),
            (1.5, PI.sqrt() / 2.0),
            (2.5, 3.0 * PI.sqrt() / 4.0),
            (0.5, PI.sqrt()),
            (5.0, 24.0),
            (10.0, 362_880.0),
        ];
        for (x, g) in cases {
            let rel = (gamma(x) - g).abs() / g;
            assert!(rel < 1e-13, "Γ({x}) rel err {rel}");
        }
    }

    #[test]
    fn gamma_recurrence_on_unit_interval() {
        // Γ(x+1) = xΓ(x) ties (1,2) to (2,3) through an independent evaluation path
        for i in 1..100 {
            let x = 1.0 + i as f64 / 100.0;
            let rel = (gamma(x + 1.0) - x * gamma(x)).abs() / gamma(x + 1.0);
            assert!(rel < 1e-13, "x={x} rel={rel}");
        }
    }

    #[test]
    fn weights_closed_forms() {
        let w = TemperedWeights::new(0.5, 0.0, 0.1, 10).unwrap();
        assert!((w.b()[0] - 1.0).abs() < 1e-15);
        assert!((w.b()[1] - (SQRT_2 - 1.0)).abs() < 1e-15);
        assert!((w.mu() - 3.568_248_232_305_542).abs() < 1e-12);
        assert!(w.damp().iter().all(|&d| d == 1.0));
        assert_eq!(w.damp().len(), 11);
    }

    #[test]
    fn invalid_parameters() {
        assert!(TemperedWeights::new(0.0, 0.0, 0.1, 10).is_err());
        assert!(TemperedWeights::new(1.0, 0.0, 0.1, 10).is_err());
        assert!(TemperedWeights::new(0.5, -1.0, 0.1, 10).is_err());
        assert!(TemperedWeights::new(0.5, 0.0, 0.0, 10).is_err());
        assert!(TemperedWeights::new(0.5, 0.0, 0.1, 0).is_err());
    }

    #[test]
    fn weights_monotone_and_telescoping() {
        for alpha in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let w = TemperedWeights::new(alpha, 2.0, 0.01, 500).unwrap();
            let b = w.b();
            assert!(b.windows(2).all(|p| p[0] > p[1] && p[1] > 0.0));
            for n in 1..=500 {
                let s: f64 = (1..n).map(|i| b[i - 1] - b[i]).sum::<f64>() + b[n - 1];
                assert!((s - 1.0).abs() < 1e-13);
            }
            let d = w.damp();
            assert!(d.windows(2).all(|p| p[0] >= p[1]));
            assert!(d.iter().all(|&x| x > 0.0 && x <= 1.0));
        }
    }

    #[test]
    fn history_first_steps() {
        let w = TemperedWeights::new(0.5, 2.0, 0.1, 5).unwrap();
        let u0 = vec![1.0, -2.0, 3.0];
        let h = w.history_combination(1, std::slice::from_ref(&u0)).unwrap();
        let e = (-0.2f64).exp();
        for (x, y) in h.iter().zip(&u0) {
            assert!((x - e * y).abs() < 1e-15);
        }

        let w = TemperedWeights::new(0.5, 0.0, 0.1, 5).unwrap();
        let u1 = vec![0.5, 0.25, -1.0];
        let h = w.history_combination(2, &[u0.clone(), u1.clone()]).unwrap();
        for i in 0..3 {
            let expect = (2.0 - SQRT_2) * u1[i] + (SQRT_2 - 1.0) * u0[i];
            assert!((h[i] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_history_is_preserved() {
        let w = TemperedWeights::new(0.37, 0.0, 0.05, 40).unwrap();
        let hist: Vec<Vec<f64>> = (0..40).map(|_| vec![2.5, -1.0]).collect();
        for n in 1..=40 {
            let h = w.history_combination(n, &hist[..n]).unwrap();
            assert!((h[0] - 2.5).abs() < 1e-13);
            assert!((h[1] + 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn history_length_checks() {
        let w = TemperedWeights::new(0.5, 0.0, 0.1, 5).unwrap();
        assert!(w.history_combination(2, &[vec![1.0]]).is_err());
        assert!(w.history_combination(2, &[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(w.history_combination(6, &vec![vec![1.0]; 6]).is_err());
        assert!(w.tempered_derivative_scalar(&[1.0]).is_err());
    }

    #[test]
    fn scalar_derivative_of_constant_vanishes() {
        let w = TemperedWeights::new(0.6, 0.0, 0.1, 10).unwrap();
        for n in 1..=10 {
            let d = w.tempered_derivative_scalar(&vec![3.0; n + 1]).unwrap();
            assert!(d.abs() < 1e-12);
        }
    }

    /// Classical L1 sum `μ Σ_{j=0}^{n-1} b_j (g_{n-j} - g_{n-j-1})`, written
    /// directly from the Caputo quadrature.
    fn l1_direct(alpha: f64, tau: f64, g: &[f64]) -> f64 {
        let n = g.len() - 1;
        let mut s = 0.0;
        for j in 0..n {
            let bj = ((j + 1) as f64).powf(1.0 - alpha) - (j as f64).powf(1.0 - alpha);
            s += bj * (g[n - j] - g[n - j - 1]);
        }
        s * tau.powf(-alpha) / gamma(2.0 - alpha)
    }

    #[test]
    fn untempered_matches_classical_l1() {
        for alpha in [0.2, 0.5, 0.9] {
            let tau = 0.02;
            let w = TemperedWeights::new(alpha, 0.0, tau, 50).unwrap();
            let g: Vec<f64> = (0..=50).map(|i| (i as f64 * tau).sin() + 0.3).collect();
            for n in 1..=50 {
                let a = w.tempered_derivative_scalar(&g[..=n]).unwrap();
                let b = l1_direct(alpha, tau, &g[..=n]);
                assert!((a - b).abs() < 1e-13 * b.abs().max(1.0), "n={n}");
            }
        }
    }
}
