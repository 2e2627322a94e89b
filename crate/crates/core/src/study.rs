//! Convergence and stability studies.
//!
//! Each row of a study is an independent solve, so rows may run on a
//! thread pool; results are always reported in refinement order.

use crate::timing::Stopwatch;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::default_quad_order;
use crate::dg::{error_norms, DEFAULT_LINF_SAMPLES};
use crate::error::{invalid, Error, Result};
use crate::mesh::{perturbed_mesh, uniform_mesh, Mesh1D};
use crate::problems::Problem;
use crate::solver::{solve_to_final, InitialData, InitialProjection, SchemeConfig, Solver};

/// Environment variable capping study parallelism (`0` = sequential).
pub const THREADS_ENV: &str = "TEMPERED_LDG_THREADS";

/// CSV header of a refinement study.
pub const STUDY_HEADER: &str = "param,l2_error,l2_order,linf_error,linf_order,wall_time_s";

/// CSV header of a stability report.
pub const STABILITY_HEADER: &str = "alpha,gamma,delta,tau,k,steps,max_ratio,pass";

/// Ratio bound `max_n ‖u^n‖/‖u^0‖` accepted by the stability sweep.
pub const STABILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    Uniform,
    /// Interior nodes shifted randomly by up to ±5% of the spacing.
    Perturbed {
        seed: u64,
    },
}

impl MeshKind {
    pub fn build(&self, a: f64, b: f64, n: usize) -> Result<Mesh1D> {
        match *self {
            MeshKind::Uniform => uniform_mesh(a, b, n),
            MeshKind::Perturbed { seed } => perturbed_mesh(a, b, n, seed),
        }
    }

    fn describe(&self) -> String {
        match self {
            MeshKind::Uniform => "uniform".into(),
            MeshKind::Perturbed { seed } => format!("perturbed(seed={seed})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOptions {
    /// `None` uses the global pool, `Some(0)` runs sequentially.
    pub threads: Option<usize>,
    pub initial_projection: InitialProjection,
    /// Defaults to `max(k + 2, 6)` when unset.
    pub quad_order: Option<usize>,
    pub linf_samples: usize,
    /// When false the `wall_time_s` column is left empty so output is
    /// byte-reproducible.
    pub record_timing: bool,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            threads: None,
            initial_projection: InitialProjection::GaussRadau,
            quad_order: None,
            linf_samples: DEFAULT_LINF_SAMPLES,
            record_timing: true,
        }
    }
}

/// Reads [`THREADS_ENV`]; unset or unparsable means "no cap".
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    Spatial,
    Temporal,
}

impl StudyKind {
    fn as_str(&self) -> &'static str {
        match self {
            StudyKind::Spatial => "spatial",
            StudyKind::Temporal => "temporal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    /// `N` for spatial studies, `τ` for temporal ones.
    pub param: f64,
    /// Quantity the orders are taken against: `h_max` or `τ`.
    pub scale: f64,
    pub l2_error: f64,
    pub l2_order: Option<f64>,
    pub linf_error: f64,
    pub linf_order: Option<f64>,
    pub wall_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub kind: StudyKind,
    pub rows: Vec<StudyRow>,
    /// Ordered `key=value` pairs written as `#` comments.
    pub metadata: Vec<(String, String)>,
    /// Set when a solve failed; `rows` then holds the rows before it.
    pub failure: Option<String>,
}

impl StudyResult {
    /// True when every error vanished, so no order can be computed.
    pub fn is_degenerate(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.l2_error == 0.0 && r.linf_error == 0.0)
    }

    pub fn l2_orders(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.l2_order).collect()
    }

    pub fn linf_orders(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.linf_order).collect()
    }

    pub fn last_l2_order(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.l2_order)
    }

    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}={v}")?;
        }
        if let Some(f) = &self.failure {
            writeln!(out, "# failure={}", f.replace('\n', " "))?;
        }
        writeln!(out, "{STUDY_HEADER}")?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        for r in &self.rows {
            writeln!(
                out,
                "{},{:.16e},{},{:.16e},{},{}",
                r.param,
                r.l2_error,
                opt(r.l2_order),
                r.linf_error,
                opt(r.linf_order),
                r.wall_time_s.map(|t| format!("{t:.6}")).unwrap_or_default()
            )?;
        }
        Ok(())
    }

    /// Parses a file written by [`write_csv`](Self::write_csv). Row `scale`
    /// is not stored and comes back equal to `param`.
    pub fn read_csv<R: Read>(mut input: R) -> Result<Self> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        let mut metadata = Vec::new();
        let mut failure = None;
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            let body = line.trim_start_matches('#').trim();
            if let Some((k, v)) = body.split_once('=') {
                if k == "failure" {
                    failure = Some(v.to_string());
                } else {
                    metadata.push((k.to_string(), v.to_string()));
                }
            }
        }
        let kind = match metadata
            .iter()
            .find(|(k, _)| k == "study")
            .map(|(_, v)| v.as_str())
        {
            Some("temporal") => StudyKind::Temporal,
            _ => StudyKind::Spatial,
        };
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let headers = reader.headers()?.iter().collect::<Vec<_>>().join(",");
        if headers != STUDY_HEADER {
            return invalid(format!("unexpected CSV header '{headers}'"));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::InvalidArgument(format!("bad number '{s}' in study CSV")))
        };
        let parse_opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                parse(s).map(Some)
            }
        };
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            let param = parse(&rec[0])?;
            rows.push(StudyRow {
                param,
                scale: param,
                l2_error: parse(&rec[1])?,
                l2_order: parse_opt(&rec[2])?,
                linf_error: parse(&rec[3])?,
                linf_order: parse_opt(&rec[4])?,
                wall_time_s: parse_opt(&rec[5])?,
            });
        }
        Ok(StudyResult {
            kind,
            rows,
            metadata,
            failure,
        })
    }

    /// Human-readable table with 15 significant digits.
    pub fn format_table(&self) -> String {
        let mut s = String::new();
        let head = match self.kind {
            StudyKind::Spatial => "N",
            StudyKind::Temporal => "tau",
        };
        let _ = writeln!(
            s,
            "{head:>8}  {:>22}  {:>6}  {:>22}  {:>6}",
            "L2-error", "order", "Linf-error", "order"
        );
        let ord = |o: Option<f64>| o.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into());
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>8}  {:>22.14E}  {:>6}  {:>22.14E}  {:>6}",
                r.param,
                r.l2_error,
                ord(r.l2_order),
                r.linf_error,
                ord(r.linf_order)
            );
        }
        s
    }
}

/// Writes `result` to `path`.
pub fn emit_csv(result: &StudyResult, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    result.write_csv(&mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

/// `log(e_{i-1}/e_i) / log(r_{i-1}/r_i)`; `None` for the first entry or
/// when an error is zero or not finite.
pub fn observed_orders(scales: &[f64], errors: &[f64]) -> Vec<Option<f64>> {
    let mut out = vec![None; errors.len()];
    for i in 1..errors.len() {
        let (e0, e1) = (errors[i - 1], errors[i]);
        let (r0, r1) = (scales[i - 1], scales[i]);
        if e0 > 0.0 && e1 > 0.0 && e0.is_finite() && e1.is_finite() && r0 != r1 {
            out[i] = Some((e0 / e1).ln() / (r0 / r1).ln());
        }
    }
    out
}

struct RowOutcome {
    param: f64,
    scale: f64,
    l2: f64,
    linf: f64,
    wall: f64,
}

/// Runs `job` for every index, in parallel when allowed, keeping order.
fn run_rows<T: Send>(
    count: usize,
    threads: Option<usize>,
    job: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Vec<Result<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        match threads {
            Some(0) | Some(1) => {}
            Some(n) => {
                if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                    return pool.install(|| (0..count).into_par_iter().map(&job).collect());
                }
            }
            None => return (0..count).into_par_iter().map(&job).collect(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    (0..count).map(job).collect()
}

fn assemble_result(
    kind: StudyKind,
    outcomes: Vec<Result<RowOutcome>>,
    metadata: Vec<(String, String)>,
    record_timing: bool,
) -> StudyResult {
    let mut done = Vec::new();
    let mut failure = None;
    for o in outcomes {
        match o {
            Ok(r) => done.push(r),
            Err(e) => {
                failure = Some(e.to_string());
                break;
            }
        }
    }
    let scales: Vec<f64> = done.iter().map(|r| r.scale).collect();
    let l2: Vec<f64> = done.iter().map(|r| r.l2).collect();
    let linf: Vec<f64> = done.iter().map(|r| r.linf).collect();
    let l2_orders = observed_orders(&scales, &l2);
    let linf_orders = observed_orders(&scales, &linf);
    let rows = done
        .iter()
        .enumerate()
        .map(|(i, r)| StudyRow {
            param: r.param,
            scale: r.scale,
            l2_error: r.l2,
            l2_order: l2_orders[i],
            linf_error: r.linf,
            linf_order: linf_orders[i],
            wall_time_s: record_timing.then_some(r.wall),
        })
        .collect();
    StudyResult {
        kind,
        rows,
        metadata,
        failure,
    }
}

fn base_metadata(
    kind: StudyKind,
    problem: &Problem,
    delta: f64,
    k: usize,
    quad_order: usize,
    opts: &StudyOptions,
) -> Vec<(String, String)> {
    vec![
        ("study".into(), kind.as_str().into()),
        ("problem".into(), problem.label().into()),
        ("alpha".into(), problem.alpha().to_string()),
        ("gamma".into(), problem.gamma().to_string()),
        ("rho".into(), problem.rho().to_string()),
        ("delta".into(), delta.to_string()),
        ("k".into(), k.to_string()),
        ("init".into(), opts.initial_projection.to_string()),
        ("quad_order".into(), quad_order.to_string()),
    ]
}

fn solve_and_measure(
    problem: &Problem,
    mut config: SchemeConfig,
    opts: &StudyOptions,
) -> Result<(f64, f64, f64)> {
    let exact = problem
        .exact()
        .ok_or_else(|| {
            Error::InvalidArgument(format!("problem '{}' has no exact solution", problem.label()))
        })?
        .clone();
    config.initial_projection = opts.initial_projection;
    let started = Stopwatch::start();
    let sol = solve_to_final(&config, problem)?;
    let t = config.final_time;
    let e = error_norms(&sol.u, |x| exact(x, t), config.quad_order, opts.linf_samples)?;
    Ok((e.l2, e.linf, started.seconds()))
}

/// Spatial refinement at fixed `M`; orders use `h_max`.
#[allow(clippy::too_many_arguments)]
pub fn spatial_study(
    problem: &Problem,
    delta: f64,
    k: usize,
    n_list: &[usize],
    steps: usize,
    final_time: f64,
    mesh_kind: MeshKind,
    opts: &StudyOptions,
) -> Result<StudyResult> {
    if problem.exact().is_none() {
        return invalid(format!("problem '{}' has no exact solution", problem.label()));
    }
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("N list must be non-empty and strictly increasing");
    }
    let quad_order = opts.quad_order.unwrap_or_else(|| default_quad_order(k));
    let (a, b) = problem.domain();
    let meshes = n_list
        .iter()
        .map(|&n| mesh_kind.build(a, b, n).map(Arc::new))
        .collect::<Result<Vec<_>>>()?;
    let outcomes = run_rows(n_list.len(), opts.threads, |i| {
        let mut cfg = SchemeConfig::for_problem(problem, delta, k, meshes[i].clone(), steps, final_time);
        cfg.quad_order = quad_order;
        let (l2, linf, wall) = solve_and_measure(problem, cfg, opts)?;
        Ok(RowOutcome {
            param: n_list[i] as f64,
            scale: meshes[i].h_max(),
            l2,
            linf,
            wall,
        })
    });
    let mut meta = base_metadata(StudyKind::Spatial, problem, delta, k, quad_order, opts);
    meta.push(("mesh".into(), mesh_kind.describe()));
    meta.push(("M".into(), steps.to_string()));
    meta.push(("T".into(), final_time.to_string()));
    meta.push(("order_basis".into(), "h_max".into()));
    Ok(assemble_result(
        StudyKind::Spatial,
        outcomes,
        meta,
        opts.record_timing,
    ))
}

/// `T/τ` as an integer step count, or an error when it is not integral.
pub fn steps_for(final_time: f64, tau: f64) -> Result<usize> {
    if !(tau > 0.0 && final_time > 0.0) {
        return invalid(format!(
            "need tau > 0 and T > 0, got tau = {tau}, T = {final_time}"
        ));
    }
    let m = (final_time / tau).round();
    if m < 1.0 || (m * tau - final_time).abs() > 1e-9 * final_time {
        return invalid(format!("T/tau = {final_time}/{tau} is not a positive integer"));
    }
    Ok(m as usize)
}

/// Temporal refinement on a uniform mesh of `n` cells; orders use `τ`.
pub fn temporal_study(
    problem: &Problem,
    delta: f64,
    k: usize,
    n: usize,
    tau_list: &[f64],
    final_time: f64,
    opts: &StudyOptions,
) -> Result<StudyResult> {
    if problem.exact().is_none() {
        return invalid(format!("problem '{}' has no exact solution", problem.label()));
    }
    if tau_list.is_empty() || tau_list.windows(2).any(|w| w[0] <= w[1]) {
        return invalid("tau list must be non-empty and strictly decreasing");
    }
    let steps = tau_list
        .iter()
        .map(|&t| steps_for(final_time, t))
        .collect::<Result<Vec<_>>>()?;
    let quad_order = opts.quad_order.unwrap_or_else(|| default_quad_order(k));
    let (a, b) = problem.domain();
    let mesh = Arc::new(uniform_mesh(a, b, n)?);
    let outcomes = run_rows(tau_list.len(), opts.threads, |i| {
        let mut cfg = SchemeConfig::for_problem(problem, delta, k, mesh.clone(), steps[i], final_time);
        cfg.quad_order = quad_order;
        let (l2, linf, wall) = solve_and_measure(problem, cfg, opts)?;
        Ok(RowOutcome {
            param: tau_list[i],
            scale: tau_list[i],
            l2,
            linf,
            wall,
        })
    });
    let mut meta = base_metadata(StudyKind::Temporal, problem, delta, k, quad_order, opts);
    meta.push(("mesh".into(), "uniform".into()));
    meta.push(("N".into(), n.to_string()));
    meta.push(("T".into(), final_time.to_string()));
    meta.push(("order_basis".into(), "tau".into()));
    Ok(assemble_result(
        StudyKind::Temporal,
        outcomes,
        meta,
        opts.record_timing,
    ))
}

/// Parameter grid of an unforced stability sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySweep {
    pub alphas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub deltas: Vec<f64>,
    pub taus: Vec<f64>,
    pub degrees: Vec<usize>,
    pub n_cells: usize,
    pub seed: u64,
    pub rho: f64,
    /// Nominal horizon; each run takes `max(round(T/τ), min_steps)` steps.
    pub final_time: f64,
    pub min_steps: usize,
    /// Start from `u^0 = 0` instead of random coefficients.
    pub zero_initial: bool,
    pub threads: Option<usize>,
}

impl Default for StabilitySweep {
    fn default() -> Self {
        StabilitySweep {
            alphas: vec![0.1, 0.5, 0.9],
            gammas: vec![0.0, 2.0, 10.0],
            deltas: vec![0.0, 0.1, 0.3, 0.9, 1.0],
            taus: vec![0.001, 0.1, 10.0],
            degrees: vec![0, 1, 2],
            n_cells: 16,
            seed: 1,
            rho: 0.0,
            final_time: 1.0,
            min_steps: 10,
            zero_initial: false,
            threads: None,
        }
    }
}

impl StabilitySweep {
    pub fn steps_for_tau(&self, tau: f64) -> usize {
        ((self.final_time / tau).round() as usize)
            .max(self.min_steps)
            .max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityEntry {
    pub alpha: f64,
    pub gamma: f64,
    pub delta: f64,
    pub tau: f64,
    pub k: usize,
    pub steps: usize,
    /// `max_n ‖u^n‖ / ‖u^0‖` (0 when `u^0 = 0`).
    pub max_ratio: f64,
}

impl StabilityEntry {
    pub fn passed(&self) -> bool {
        self.max_ratio <= 1.0 + STABILITY_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub entries: Vec<StabilityEntry>,
    pub n_cells: usize,
    pub seed: u64,
    pub failure: Option<String>,
}

impl StabilityReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.entries.iter().all(StabilityEntry::passed)
    }

    pub fn worst_ratio(&self) -> f64 {
        self.entries.iter().map(|e| e.max_ratio).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# study=stability")?;
        writeln!(out, "# N={}", self.n_cells)?;
        writeln!(out, "# seed={}", self.seed)?;
        writeln!(out, "# tolerance={STABILITY_TOL:e}")?;
        if let Some(f) = &self.failure {
            writeln!(out, "# failure={}", f.replace('\n', " "))?;
        }
        writeln!(out, "{STABILITY_HEADER}")?;
        for e in &self.entries {
            writeln!(
                out,
                "{},{},{},{},{},{},{:.16e},{}",
                e.alpha,
                e.gamma,
                e.delta,
                e.tau,
                e.k,
                e.steps,
                e.max_ratio,
                e.passed()
            )?;
        }
        Ok(())
    }
}

/// Random initial coefficients in `[-1, 1]`, one ChaCha stream per run.
pub fn random_coefficients(seed: u64, stream: u64, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Runs `f ≡ 0` from seeded random data for every grid combination and
/// records the largest norm ratio.
pub fn stability_study(sweep: &StabilitySweep) -> Result<StabilityReport> {
    let mesh = Arc::new(uniform_mesh(0.0, 1.0, sweep.n_cells)?);
    let mut combos = Vec::new();
    for &alpha in &sweep.alphas {
        for &gamma in &sweep.gammas {
            for &delta in &sweep.deltas {
                for &tau in &sweep.taus {
                    for &k in &sweep.degrees {
                        combos.push((alpha, gamma, delta, tau, k));
                    }
                }
            }
        }
    }
    let outcomes = run_rows(combos.len(), sweep.threads, |i| {
        let (alpha, gamma, delta, tau, k) = combos[i];
        let steps = sweep.steps_for_tau(tau);
        let config = SchemeConfig {
            alpha,
            gamma,
            rho: sweep.rho,
            delta,
            degree: k,
            mesh: mesh.clone(),
            steps,
            final_time: tau * steps as f64,
            initial_projection: InitialProjection::GaussRadau,
            quad_order: default_quad_order(k),
            check_stability: false,
        };
        let len = sweep.n_cells * (k + 1);
        let u0 = if sweep.zero_initial {
            vec![0.0; len]
        } else {
            random_coefficients(sweep.seed, i as u64, len)
        };
        let mut solver = Solver::setup(config, InitialData::Coefficients(u0))?;
        solver.run(None)?;
        let norms = &solver.diagnostics().norms;
        let max_ratio = if norms[0] > 0.0 {
            norms.iter().skip(1).fold(0.0f64, |m, &x| m.max(x / norms[0]))
        } else {
            norms.iter().cloned().fold(0.0, f64::max)
        };
        Ok(StabilityEntry {
            alpha,
            gamma,
            delta,
            tau,
            k,
            steps,
            max_ratio,
        })
    });
    let mut entries = Vec::new();
    let mut failure = None;
    for o in outcomes {
        match o {
            Ok(e) => entries.push(e),
            Err(e) => {
                failure = Some(e.to_string());
                break;
            }
        }
    }
    Ok(StabilityReport {
        entries,
        n_cells: sweep.n_cells,
        seed: sweep.seed,
        failure,
    })
}
