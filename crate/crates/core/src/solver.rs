//! Fully discrete LDG time stepping.
//!
//! Each step solves
//!
//! ```text
//! (ρ + μ) M u^n + A_{1−δ} p^n = μ M h^n + F^n
//!            A_δ u^n + M p^n = 0
//! ```
//!
//! where `h^n` is the tempered L1 history combination. `M` is diagonal, so
//! `p^n = −M⁻¹ A_δ u^n` and, using `A_{1−δ} = −A_δᵀ`, the step reduces to
//! the SPD system `S u^n = μ M h^n + F^n` with
//! `S = (ρ + μ) M + A_δᵀ M⁻¹ A_δ`. `S` does not depend on `n` and is factored
//! once.

use crate::timing::Stopwatch;
use std::sync::Arc;

use crate::basis::{default_quad_order, gauss_legendre, LegendreBasis, MAX_QUAD_POINTS};
use crate::dg::{check_delta, gauss_radau_project, l2_project, DgFunction, FluxOperator, MassMatrix};
use crate::error::{invalid, Error, Result};
use crate::linalg::{norm_max, Cholesky, SkylineMatrix};
use crate::mesh::Mesh1D;
use crate::problems::Problem;
use crate::tempered::TemperedWeights;

/// Systems at most this large are stored and factored densely.
pub const DENSE_LIMIT: usize = 64;

/// Normwise backward error `‖S u − b‖∞ / (‖S‖∞ ‖u‖∞ + ‖b‖∞)` accepted
/// for each linear solve.
pub const SOLVE_TOL: f64 = 1e-12;

/// Slack allowed in the runtime stability check `‖u^n‖ ≤ ‖u^0‖`.
pub const STABILITY_SLACK: f64 = 1e-12;

const MAX_REFINEMENTS: usize = 4;

/// How `u^0` is obtained from the initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialProjection {
    #[default]
    GaussRadau,
    L2,
}

impl std::str::FromStr for InitialProjection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss-radau" | "gauss_radau" => Ok(Self::GaussRadau),
            "l2" => Ok(Self::L2),
            other => invalid(format!(
                "unknown initial projection '{other}' (expected gauss-radau or l2)"
            )),
        }
    }
}

impl std::fmt::Display for InitialProjection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::GaussRadau => "gauss-radau",
            Self::L2 => "l2",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SchemeConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub rho: f64,
    pub delta: f64,
    pub degree: usize,
    pub mesh: Arc<Mesh1D>,
    /// Number of time steps `M`.
    pub steps: usize,
    /// Final time `T`; `τ = T / M`.
    pub final_time: f64,
    pub initial_projection: InitialProjection,
    /// Points of the volume quadrature used for forcing and projections.
    pub quad_order: usize,
    /// Fail a step when `‖u^n‖` exceeds `‖u^0‖` on an unforced step.
    pub check_stability: bool,
}

impl SchemeConfig {
    /// Configuration with coefficients taken from `problem`.
    pub fn for_problem(
        problem: &Problem,
        delta: f64,
        degree: usize,
        mesh: Arc<Mesh1D>,
        steps: usize,
        final_time: f64,
    ) -> Self {
        SchemeConfig {
            alpha: problem.alpha(),
            gamma: problem.gamma(),
            rho: problem.rho(),
            delta,
            degree,
            mesh,
            steps,
            final_time,
            initial_projection: InitialProjection::default(),
            quad_order: default_quad_order(degree),
            check_stability: false,
        }
    }

    pub fn tau(&self) -> f64 {
        self.final_time / self.steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        check_delta(self.delta)?;
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return invalid(format!("rho must be finite and >= 0, got {}", self.rho));
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return invalid(format!("final time must be positive, got {}", self.final_time));
        }
        if !(1..=MAX_QUAD_POINTS).contains(&self.quad_order) {
            return invalid(format!(
                "quad_order must lie in 1..={MAX_QUAD_POINTS}, got {}",
                self.quad_order
            ));
        }
        if self.quad_order < self.degree + 1 {
            return invalid(format!(
                "quad_order {} cannot integrate degree-{} products",
                self.quad_order, self.degree
            ));
        }
        TemperedWeights::new(self.alpha, self.gamma, self.tau(), self.steps)?;
        Ok(())
    }
}

/// Initial data for [`Solver::setup`].
pub enum InitialData<'a> {
    /// Projected with the configured [`InitialProjection`].
    Function(&'a dyn Fn(f64) -> f64),
    /// Coefficients of `u^0`, used as given.
    Coefficients(Vec<f64>),
}

/// Running statistics of a solve.
#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    /// `‖u^n‖` for `n = 0..=current step`.
    pub norms: Vec<f64>,
    pub min_pivot: f64,
    pub max_pivot: f64,
    /// Largest normwise backward error of the step solves.
    pub max_residual: f64,
    pub refinements: usize,
    pub wall_time_s: f64,
}

/// Time-stepping state: assembled operators, factored system and history.
#[derive(Debug)]
pub struct Solver {
    config: SchemeConfig,
    weights: TemperedWeights,
    mass: MassMatrix,
    flux_u: FluxOperator,
    flux_p: FluxOperator,
    system: SkylineMatrix,
    system_norm: f64,
    factor: Cholesky,
    basis: LegendreBasis,
    history: Vec<Vec<f64>>,
    p: Vec<f64>,
    diagnostics: Diagnostics,
    scratch: Vec<f64>,
}

impl Solver {
    pub fn setup(config: SchemeConfig, initial: InitialData<'_>) -> Result<Self> {
        let started = Stopwatch::start();
        config.validate()?;
        let mesh = config.mesh.clone();
        let k = config.degree;
        let weights = TemperedWeights::new(config.alpha, config.gamma, config.tau(), config.steps)?;
        let mass = MassMatrix::new(&mesh, k);
        let flux_u = FluxOperator::assemble(&mesh, k, config.delta)?;
        let flux_p = FluxOperator::assemble(&mesh, k, 1.0 - config.delta)?;
        check_antisymmetry(&flux_u, &flux_p, mesh.num_cells())?;
        let system = assemble_system(&mass, &flux_u, config.rho + weights.mu(), mesh.num_cells());
        let factor = system.cholesky().map_err(|e| {
            Error::Config(format!(
                "system matrix could not be factored (delta = {}, N = {}): {e}",
                config.delta,
                mesh.num_cells()
            ))
        })?;
        let basis = LegendreBasis::new(k, gauss_legendre(config.quad_order)?);

        let u0 = match initial {
            InitialData::Function(f) => match config.initial_projection {
                InitialProjection::GaussRadau => {
                    gauss_radau_project(f, mesh.clone(), k, config.delta, config.quad_order)?
                }
                InitialProjection::L2 => l2_project(f, mesh.clone(), k, config.quad_order)?,
            }
            .into_coeffs(),
            InitialData::Coefficients(c) => DgFunction::new(mesh.clone(), k, c)?.into_coeffs(),
        };
        let dim = u0.len();
        let mut p = vec![0.0; dim];
        eliminate_p(&mass, &flux_u, &u0, &mut p, &mut vec![0.0; dim]);

        let diagnostics = Diagnostics {
            norms: vec![mass.norm(&u0)],
            min_pivot: factor.min_pivot(),
            max_pivot: factor.max_pivot(),
            max_residual: 0.0,
            refinements: 0,
            wall_time_s: started.seconds(),
        };
        let mut history = Vec::with_capacity(config.steps + 1);
        history.push(u0);
        Ok(Solver {
            config,
            weights,
            mass,
            flux_u,
            flux_p,
            system_norm: system.norm_inf(),
            system,
            factor,
            basis,
            history,
            p,
            diagnostics,
            scratch: vec![0.0; dim],
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn weights(&self) -> &TemperedWeights {
        &self.weights
    }

    pub fn mass(&self) -> &MassMatrix {
        &self.mass
    }

    /// `A_δ`, the operator carrying the `u` flux.
    pub fn flux_u(&self) -> &FluxOperator {
        &self.flux_u
    }

    /// `A_{1−δ}`, the operator carrying the `p` flux.
    pub fn flux_p(&self) -> &FluxOperator {
        &self.flux_p
    }

    pub fn system(&self) -> &SkylineMatrix {
        &self.system
    }

    pub fn factor(&self) -> &Cholesky {
        &self.factor
    }

    /// Index `n` of the latest computed level.
    pub fn step_index(&self) -> usize {
        self.history.len() - 1
    }

    pub fn time(&self) -> f64 {
        self.step_index() as f64 * self.config.tau()
    }

    pub fn is_finished(&self) -> bool {
        self.step_index() >= self.config.steps
    }

    /// `u^0..u^n`
    pub fn history(&self) -> &[Vec<f64>] {
        &self.history
    }

    pub fn u_coeffs(&self) -> &[f64] {
        self.history.last().unwrap()
    }

    pub fn p_coeffs(&self) -> &[f64] {
        &self.p
    }

    pub fn u(&self) -> DgFunction {
        DgFunction::new(
            self.config.mesh.clone(),
            self.config.degree,
            self.u_coeffs().to_vec(),
        )
        .expect("solver keeps consistent lengths")
    }

    pub fn p(&self) -> DgFunction {
        DgFunction::new(self.config.mesh.clone(), self.config.degree, self.p.clone())
            .expect("solver keeps consistent lengths")
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }

    /// Right-hand side `μ M h^n + F^n` for the next level.
    pub fn right_hand_side(&self, forcing: Option<&dyn Fn(f64, f64) -> f64>) -> Result<Vec<f64>> {
        let n = self.step_index() + 1;
        let mut comb = vec![0.0; self.scratch.len()];
        self.weights
            .history_combination_into(n, &self.history, &mut comb)?;
        let mut rhs = vec![0.0; comb.len()];
        self.mass.apply(&comb, &mut rhs);
        let mu = self.weights.mu();
        rhs.iter_mut().for_each(|r| *r *= mu);
        if let Some(f) = forcing {
            let t = n as f64 * self.config.tau();
            self.add_forcing(f, t, &mut rhs);
        }
        Ok(rhs)
    }

    /// `F[j][m] += ∫_{I_j} f(x, t) P_m dx`
    fn add_forcing(&self, f: &dyn Fn(f64, f64) -> f64, t: f64, rhs: &mut [f64]) {
        let mesh = &self.config.mesh;
        let w = self.config.degree + 1;
        let rule = self.basis.rule();
        for (j, &h) in mesh.cell_lengths().iter().enumerate() {
            for (q, (&xi, &wt)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
                let fx = 0.5 * h * wt * f(mesh.to_physical(j, xi), t);
                for (r, p) in rhs[j * w..(j + 1) * w]
                    .iter_mut()
                    .zip(self.basis.values_at_node(q))
                {
                    *r += fx * p;
                }
            }
        }
    }

    /// Advances one level; `forcing = None` means `f ≡ 0`.
    pub fn step(&mut self, forcing: Option<&dyn Fn(f64, f64) -> f64>) -> Result<()> {
        if self.is_finished() {
            return invalid(format!("all {} steps already taken", self.config.steps));
        }
        let started = Stopwatch::start();
        let rhs = self.right_hand_side(forcing)?;
        let (u, residual) = self.solve_system(&rhs)?;
        eliminate_p(&self.mass, &self.flux_u, &u, &mut self.p, &mut self.scratch);

        let norm = self.mass.norm(&u);
        let n = self.step_index() + 1;
        if self.config.check_stability && forcing.is_none() {
            let bound = self.diagnostics.norms[0] * (1.0 + STABILITY_SLACK);
            if norm > bound {
                return Err(Error::Numerical(format!(
                    "stability bound violated at step {n}: ‖u^n‖ = {norm:e} > ‖u^0‖ = {:e}",
                    self.diagnostics.norms[0]
                )));
            }
        }
        self.history.push(u);
        self.diagnostics.norms.push(norm);
        self.diagnostics.max_residual = self.diagnostics.max_residual.max(residual);
        self.diagnostics.wall_time_s += started.seconds();
        Ok(())
    }

    /// Cholesky solve with fixed-precision iterative refinement until the
    /// backward error is below [`SOLVE_TOL`].
    fn solve_system(&mut self, rhs: &[f64]) -> Result<(Vec<f64>, f64)> {
        let rhs_norm = norm_max(rhs);
        let mut u = rhs.to_vec();
        self.factor.solve_in_place(&mut u);
        let mut r = vec![0.0; u.len()];
        for pass in 0..=MAX_REFINEMENTS {
            self.system.mul_vec(&u, &mut r);
            r.iter_mut().zip(rhs).for_each(|(r, b)| *r = b - *r);
            let scale = self.system_norm * norm_max(&u) + rhs_norm;
            let rel = if scale > 0.0 { norm_max(&r) / scale } else { 0.0 };
            if rel <= SOLVE_TOL {
                return Ok((u, rel));
            }
            if pass == MAX_REFINEMENTS {
                return Err(Error::Numerical(format!(
                    "linear solve at step {} left backward error {rel:e} > {SOLVE_TOL:e} \
                     (min pivot {:e}, max pivot {:e})",
                    self.step_index() + 1,
                    self.factor.min_pivot(),
                    self.factor.max_pivot()
                )));
            }
            self.factor.solve_in_place(&mut r);
            u.iter_mut().zip(&r).for_each(|(u, d)| *u += d);
            self.diagnostics.refinements += 1;
        }
        unreachable!()
    }

    /// Takes every remaining step.
    pub fn run(&mut self, forcing: Option<&dyn Fn(f64, f64) -> f64>) -> Result<()> {
        while !self.is_finished() {
            self.step(forcing)?;
        }
        Ok(())
    }
}

/// `p = −M⁻¹ A_δ u`
fn eliminate_p(mass: &MassMatrix, flux_u: &FluxOperator, u: &[f64], p: &mut [f64], tmp: &mut [f64]) {
    flux_u.apply(u, tmp);
    mass.apply_inverse(tmp, p);
    p.iter_mut().for_each(|x| *x = -*x);
}

fn check_antisymmetry(a: &FluxOperator, b: &FluxOperator, n: usize) -> Result<()> {
    use crate::dg::BlockOffset::*;
    let w = a.degree() + 1;
    let mut worst = 0.0f64;
    for j in 0..n {
        let prev = (j + n - 1) % n;
        let pairs = [
            (a.block(j, Diag), b.block(j, Diag)),
            (a.block(j, Lower), b.block(prev, Upper)),
        ];
        for (x, y) in pairs {
            for r in 0..w {
                for c in 0..w {
                    worst = worst.max((x[r * w + c] + y[c * w + r]).abs());
                }
            }
        }
    }
    if worst > 1e-13 {
        return Err(Error::Config(format!(
            "flux operators are not antisymmetric partners (max defect {worst:e})"
        )));
    }
    Ok(())
}

/// Block columns coupled to block row `j` in `AᵀM⁻¹A` (offsets −2..=2, mod N).
fn neighbour_blocks(j: usize, n: usize) -> impl Iterator<Item = usize> {
    (0..5).map(move |o| (j + n + o - 2) % n)
}

/// `S = shift · M + A_δᵀ M⁻¹ A_δ` in envelope storage.
fn assemble_system(mass: &MassMatrix, flux: &FluxOperator, shift: f64, n: usize) -> SkylineMatrix {
    let w = flux.degree() + 1;
    let dim = n * w;
    let mut s = if dim <= DENSE_LIMIT {
        SkylineMatrix::dense(dim)
    } else {
        let first = (0..dim)
            .map(|row| {
                let j = row / w;
                neighbour_blocks(j, n).filter(|&c| c <= j).min().unwrap() * w
            })
            .collect();
        SkylineMatrix::zeros(first)
    };
    let m = mass.entries();
    for (i, &d) in m.iter().enumerate() {
        s.add_lower(i, i, shift * d);
    }
    for i in 0..n {
        let blocks = flux.row_blocks(i);
        for &(c1, b1) in &blocks {
            for &(c2, b2) in &blocks {
                for a in 0..w {
                    let row = c1 * w + a;
                    for b in 0..w {
                        let col = c2 * w + b;
                        if col > row {
                            continue;
                        }
                        let mut v = 0.0;
                        for t in 0..w {
                            v += b1[t * w + a] * b2[t * w + b] / m[i * w + t];
                        }
                        s.add_lower(row, col, v);
                    }
                }
            }
        }
    }
    s
}

/// Final state of a complete run.
#[derive(Debug, Clone)]
pub struct Solution {
    pub u: DgFunction,
    pub p: DgFunction,
    pub diagnostics: Diagnostics,
}

/// Sets up from the problem's initial data and takes all `M` steps.
pub fn solve_to_final(config: &SchemeConfig, problem: &Problem) -> Result<Solution> {
    let mesh = &config.mesh;
    let (a, b) = problem.domain();
    let scale = (b - a).abs().max(1.0);
    if (mesh.left() - a).abs() > 1e-12 * scale || (mesh.right() - b).abs() > 1e-12 * scale {
        return invalid(format!(
            "mesh spans [{}, {}] but problem '{}' lives on [{a}, {b}]",
            mesh.left(),
            mesh.right(),
            problem.label()
        ));
    }
    if config.alpha != problem.alpha() || config.gamma != problem.gamma() || config.rho != problem.rho() {
        return invalid(format!(
            "config (alpha, gamma, rho) = ({}, {}, {}) disagrees with problem '{}' ({}, {}, {})",
            config.alpha,
            config.gamma,
            config.rho,
            problem.label(),
            problem.alpha(),
            problem.gamma(),
            problem.rho()
        ));
    }
    let started = Stopwatch::start();
    let u0 = problem.initial().clone();
    let mut solver = Solver::setup(config.clone(), InitialData::Function(&*u0))?;
    let forcing = problem.forcing().cloned();
    let f_ref: Option<&dyn Fn(f64, f64) -> f64> = forcing.as_deref().map(|f| f as _);
    solver.run(f_ref)?;
    let mut diagnostics = solver.diagnostics().clone();
    diagnostics.wall_time_s = started.seconds();
    Ok(Solution {
        u: solver.u(),
        p: solver.p(),
        diagnostics,
    })
}
