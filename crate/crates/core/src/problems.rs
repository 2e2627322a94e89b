//! Manufactured and demonstration problems for
//! `D_t^{α,γ} u + ρ u − u_xx = f` on a periodic interval.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::tempered::gamma as gamma_fn;

pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type SpaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Boundary values of the initial data above this trip a periodicity warning.
pub const BOUNDARY_WARN_LEVEL: f64 = 1e-8;

/// One problem instance: PDE coefficients, data and (optionally) the exact
/// solution.
#[derive(Clone)]
pub struct Problem {
    label: String,
    domain: (f64, f64),
    alpha: f64,
    gamma: f64,
    rho: f64,
    exact: Option<SpaceTimeFn>,
    forcing: Option<SpaceTimeFn>,
    initial: SpaceFn,
    warnings: Vec<String>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("alpha", &self.alpha)
            .field("gamma", &self.gamma)
            .field("rho", &self.rho)
            .field("has_exact", &self.exact.is_some())
            .field("has_forcing", &self.forcing.is_some())
            .finish()
    }
}

impl Problem {
    /// Problem with zero forcing and no exact solution.
    pub fn new(
        label: impl Into<String>,
        domain: (f64, f64),
        alpha: f64,
        gamma: f64,
        rho: f64,
        initial: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(domain.0 < domain.1) {
            return invalid(format!("domain requires a < b, got {domain:?}"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return invalid(format!("alpha must lie in (0, 1), got {alpha}"));
        }
        if !(gamma >= 0.0) {
            return invalid(format!("gamma must be >= 0, got {gamma}"));
        }
        if !(rho >= 0.0) {
            return invalid(format!("rho must be >= 0, got {rho}"));
        }
        Ok(Problem {
            label: label.into(),
            domain,
            alpha,
            gamma,
            rho,
            exact: None,
            forcing: None,
            initial: Arc::new(initial),
            warnings: Vec::new(),
        })
    }

    pub fn with_exact(mut self, u: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.exact = Some(Arc::new(u));
        self
    }

    pub fn with_forcing(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.forcing = Some(Arc::new(f));
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn exact(&self) -> Option<&SpaceTimeFn> {
        self.exact.as_ref()
    }

    /// `None` means `f ≡ 0`.
    pub fn forcing(&self) -> Option<&SpaceTimeFn> {
        self.forcing.as_ref()
    }

    pub fn initial(&self) -> &SpaceFn {
        &self.initial
    }

    /// Diagnostics collected at construction (e.g. a pulse touching the
    /// periodic boundary).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Looks up `ex4.1`, `ex4.2` or `ex4.3`. `domain` only applies to `ex4.3`.
    pub fn by_label(label: &str, gamma: f64, alpha: f64, domain: Option<(f64, f64)>) -> Result<Self> {
        match label {
            "ex4.1" => example_4_1(gamma, alpha),
            "ex4.2" => example_4_2(gamma, alpha),
            "ex4.3" => example_4_3(gamma, alpha, domain.unwrap_or(EXAMPLE_4_3_DOMAIN)),
            other => invalid(format!(
                "unknown problem '{other}' (expected ex4.1, ex4.2 or ex4.3)"
            )),
        }
    }
}

/// `u = e^{-γt} t² sin(2πx)` on `[0, 1]`, `ρ = 0`.
pub fn example_4_1(gamma: f64, alpha: f64) -> Result<Problem> {
    let g3 = gamma_fn(3.0 - alpha);
    Ok(Problem::new("ex4.1", (0.0, 1.0), alpha, gamma, 0.0, |_| 0.0)?
        .with_exact(move |x, t| (-gamma * t).exp() * t * t * (2.0 * PI * x).sin())
        .with_forcing(move |x, t| {
            let damp = (-gamma * t).exp();
            let s = (2.0 * PI * x).sin();
            2.0 * damp * t.powf(2.0 - alpha) / g3 * s + 4.0 * PI * PI * t * t * damp * s
        }))
}

/// `u = e^{-γt} t² x²(1−x)²` on `[0, 1]`, `ρ = 1`.
pub fn example_4_2(gamma: f64, alpha: f64) -> Result<Problem> {
    let rho = 1.0;
    let g3 = gamma_fn(3.0 - alpha);
    Ok(Problem::new("ex4.2", (0.0, 1.0), alpha, gamma, rho, |_| 0.0)?
        .with_exact(move |x, t| (-gamma * t).exp() * t * t * bump(x))
        .with_forcing(move |x, t| {
            let damp = (-gamma * t).exp();
            damp * ((2.0 * t.powf(2.0 - alpha) / g3 + rho * t * t) * bump(x) - t * t * bump_xx(x))
        }))
}

/// `x²(1−x)²`
fn bump(x: f64) -> f64 {
    x * x * (1.0 - x) * (1.0 - x)
}

/// Second derivative of [`bump`].
fn bump_xx(x: f64) -> f64 {
    2.0 - 12.0 * x + 12.0 * x * x
}

pub const EXAMPLE_4_3_DOMAIN: (f64, f64) = (0.0, 6.0);

/// Gaussian pulse `e^{-5(x-3)²}`, no forcing, `ρ = 0`.
pub fn example_4_3(gamma: f64, alpha: f64, domain: (f64, f64)) -> Result<Problem> {
    let u0 = |x: f64| (-5.0 * (x - 3.0) * (x - 3.0)).exp();
    let mut p = Problem::new("ex4.3", domain, alpha, gamma, 0.0, u0)?;
    let (a, b) = domain;
    if !(a < 3.0 && 3.0 < b) {
        return invalid(format!("ex4.3 domain must contain x = 3, got [{a}, {b}]"));
    }
    for x in [a, b] {
        if u0(x) > BOUNDARY_WARN_LEVEL {
            p.warnings.push(format!(
                "initial pulse is {:.3e} at the boundary x = {x}; periodic wrap will distort it",
                u0(x)
            ));
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_4_1_values() {
        let p = example_4_1(2.0, 0.5).unwrap();
        let u = p.exact().unwrap();
        let f = p.forcing().unwrap();
        for i in 0..11 {
            assert_eq!(u(i as f64 / 10.0, 0.0), 0.0);
        }
        let expect = (-2f64).exp() * (2.0 / (3.0 * PI.sqrt() / 4.0) + 4.0 * PI * PI);
        assert!((f(0.25, 1.0) - expect).abs() < 1e-12);
        assert!((f(0.25, 1.0) - 5.5464).abs() < 1e-3);
        assert!((u(0.25, 1.0) - 0.135_335_283_236_612_7).abs() < 1e-15);
        assert_eq!(p.rho(), 0.0);
    }

    #[test]
    fn example_4_2_values() {
        assert_eq!(bump_xx(0.0), 2.0);
        let h = 1e-5;
        for x in [0.0, 0.2, 0.5, 0.9] {
            let fd = (bump(x + h) - 2.0 * bump(x) + bump(x - h)) / (h * h);
            assert!((fd - bump_xx(x)).abs() < 1e-4);
        }
        let p = example_4_2(2.0, 0.3).unwrap();
        let u = p.exact().unwrap();
        assert!((u(0.5, 1.0) - (-2f64).exp() * 0.0625).abs() < 1e-15);
        assert!((u(0.5, 1.0) - 8.4585e-3).abs() < 1e-6);
        assert_eq!(p.rho(), 1.0);
    }

    #[test]
    fn example_4_3_values() {
        let p = example_4_3(2.0, 0.3, EXAMPLE_4_3_DOMAIN).unwrap();
        let u0 = p.initial();
        assert_eq!(u0(3.0), 1.0);
        assert!((u0(1.0) - (-20f64).exp()).abs() < 1e-20);
        assert!((u0(5.0) - 2.06e-9).abs() < 1e-11);
        assert!(u0(0.0) < 1e-19 && u0(6.0) < 1e-19);
        assert!(p.warnings().is_empty());
        assert!(p.forcing().is_none() && p.exact().is_none());

        let tight = example_4_3(2.0, 0.3, (1.5, 4.5)).unwrap();
        assert_eq!(tight.warnings().len(), 2);
        assert!(example_4_3(2.0, 0.3, (4.0, 6.0)).is_err());
    }

    #[test]
    fn lookup_by_label() {
        assert_eq!(
            Problem::by_label("ex4.2", 1.0, 0.4, None).unwrap().label(),
            "ex4.2"
        );
        assert_eq!(
            Problem::by_label("ex4.3", 1.0, 0.4, None).unwrap().domain(),
            (0.0, 6.0)
        );
        assert!(Problem::by_label("ex9", 1.0, 0.4, None).is_err());
        assert!(Problem::by_label("ex4.1", 1.0, 1.4, None).is_err());
    }
}
