//! Command-line front end.
//!
//! Settings come from three layers: built-in defaults, an optional flat
//! `key = value` file (`--config path`), then command-line flags. File keys
//! use the flag names without the leading dashes; list-valued keys take
//! comma-separated values.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::basis::default_quad_order;
use crate::dg::{check_delta, error_norms, DEFAULT_LINF_SAMPLES};
use crate::mesh::Mesh1D;
use crate::problems::Problem;
use crate::solver::{InitialData, InitialProjection, SchemeConfig, Solver};
use crate::study::{
    spatial_study, stability_study, steps_for, temporal_study, threads_from_env, MeshKind, StabilitySweep,
    StudyOptions,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "tempered-ldg",
    version,
    about = "LDG solver and convergence studies for the tempered fractional diffusion equation",
    arg_required_else_help = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Solve one configuration and write u_h samples.
    Solve(Opts),
    /// Spatial refinement study.
    SpaceOrder(Opts),
    /// Temporal refinement study.
    TimeOrder(Opts),
    /// Unforced stability sweep from random initial data.
    Stability(Opts),
    /// Write solution snapshots for plotting.
    Demo(Opts),
}

impl Command {
    fn opts(&self) -> &Opts {
        match self {
            Command::Solve(o)
            | Command::SpaceOrder(o)
            | Command::TimeOrder(o)
            | Command::Stability(o)
            | Command::Demo(o) => o,
        }
    }

    pub fn kind(&self) -> CommandKind {
        match self {
            Command::Solve(_) => CommandKind::Solve,
            Command::SpaceOrder(_) => CommandKind::SpaceOrder,
            Command::TimeOrder(_) => CommandKind::TimeOrder,
            Command::Stability(_) => CommandKind::Stability,
            Command::Demo(_) => CommandKind::Demo,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Solve,
    SpaceOrder,
    TimeOrder,
    Stability,
    Demo,
}

/// Every flag; also the set of keys a config file may use.
#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// Flat key = value settings file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// ex4.1, ex4.2 or ex4.3.
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub gamma: Option<Vec<f64>>,
    /// Flux weight; 1/2 is not allowed.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub delta: Option<Vec<f64>>,
    /// Reaction rate for the stability sweep (problems fix their own).
    #[arg(long)]
    pub rho: Option<f64>,
    /// Polynomial degree(s).
    #[arg(long = "k", value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    /// Cell count(s).
    #[arg(long = "N", value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Number of time steps.
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Final time.
    #[arg(long = "T")]
    pub t: Option<f64>,
    /// Time step(s).
    #[arg(long, value_delimiter = ',')]
    pub tau: Option<Vec<f64>>,
    /// Uniform cell size; sets N = (b - a)/h.
    #[arg(long)]
    pub h: Option<f64>,
    /// uniform or perturbed.
    #[arg(long)]
    pub mesh: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Initial projection: gauss-radau or l2.
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long = "quad-order")]
    pub quad_order: Option<usize>,
    /// Sample points per cell in solution output.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Snapshot times for demo.
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    /// Domain left end (ex4.3 only).
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Domain right end (ex4.3 only).
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Output file (directory for demo).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the mesh interfaces to this file.
    #[arg(long = "mesh-out")]
    pub mesh_out: Option<PathBuf>,
    /// Record wall times in study CSVs.
    #[arg(long)]
    pub timing: Option<bool>,
}

/// Keys accepted in a config file.
pub const CONFIG_KEYS: &[&str] = &[
    "problem",
    "alpha",
    "gamma",
    "delta",
    "rho",
    "k",
    "N",
    "M",
    "T",
    "tau",
    "h",
    "mesh",
    "seed",
    "init",
    "quad-order",
    "samples",
    "times",
    "a",
    "b",
    "out",
    "mesh-out",
    "timing",
];

impl Opts {
    /// Field-wise `self` over `base`.
    fn over(self, base: Opts) -> Opts {
        Opts {
            config: self.config.or(base.config),
            problem: self.problem.or(base.problem),
            alpha: self.alpha.or(base.alpha),
            gamma: self.gamma.or(base.gamma),
            delta: self.delta.or(base.delta),
            rho: self.rho.or(base.rho),
            k: self.k.or(base.k),
            n: self.n.or(base.n),
            m: self.m.or(base.m),
            t: self.t.or(base.t),
            tau: self.tau.or(base.tau),
            h: self.h.or(base.h),
            mesh: self.mesh.or(base.mesh),
            seed: self.seed.or(base.seed),
            init: self.init.or(base.init),
            quad_order: self.quad_order.or(base.quad_order),
            samples: self.samples.or(base.samples),
            times: self.times.or(base.times),
            a: self.a.or(base.a),
            b: self.b.or(base.b),
            out: self.out.or(base.out),
            mesh_out: self.mesh_out.or(base.mesh_out),
            timing: self.timing.or(base.timing),
        }
    }
}

#[derive(Debug, Parser)]
#[command(no_binary_name = true)]
struct FileOpts {
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad input; exit status 2.
    Usage(String),
    /// Solver or I/O failure; exit status 1.
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Failure(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

/// Parses a flat `key = value` file into options.
pub fn parse_config_text(text: &str, origin: &str) -> Result<Opts, CliError> {
    let mut argv = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return usage(format!(
                "{origin}:{}: expected 'key = value', got '{line}'",
                lineno + 1
            ));
        };
        let key = key.trim();
        let value = value.trim();
        if !CONFIG_KEYS.contains(&key) {
            return usage(format!("{origin}:{}: unknown key '{key}'", lineno + 1));
        }
        argv.push(format!("--{key}"));
        argv.push(value.replace(' ', ""));
    }
    FileOpts::try_parse_from(argv)
        .map(|f| f.opts)
        .map_err(|e| CliError::Usage(format!("{origin}: {}", e.kind_message())))
}

trait KindMessage {
    fn kind_message(&self) -> String;
}

impl KindMessage for clap::Error {
    fn kind_message(&self) -> String {
        self.to_string().lines().next().unwrap_or_default().to_string()
    }
}

/// Fully resolved and validated settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub problem: String,
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
    pub delta: Vec<f64>,
    pub rho: f64,
    pub k: Vec<usize>,
    pub n: Vec<usize>,
    pub steps: Option<usize>,
    pub final_time: f64,
    pub tau: Vec<f64>,
    pub mesh: MeshKind,
    /// Mesh perturbation seed, and the initial-data seed for `stability`.
    pub seed: u64,
    pub init: InitialProjection,
    pub quad_order: Option<usize>,
    pub samples: usize,
    pub times: Vec<f64>,
    pub domain: Option<(f64, f64)>,
    pub out: PathBuf,
    pub mesh_out: Option<PathBuf>,
    pub timing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub command: CommandKind,
    pub settings: Settings,
}

/// Parses `argv` (including the program name), merges the config file and
/// validates everything. Help and version requests surface as usage errors
/// carrying clap's rendered text; use [`main_with_args`] for process
/// behaviour.
pub fn parse_args<I, S>(argv: I) -> Result<CliConfig, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    resolve(cli.command)
}

fn resolve(command: Command) -> Result<CliConfig, CliError> {
    let kind = command.kind();
    let flags = command.opts().clone();
    let merged = match flags.config.clone() {
        Some(path) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| CliError::Usage(format!("cannot read config '{}': {e}", path.display())))?;
            flags.over(parse_config_text(&text, &path.display().to_string())?)
        }
        None => flags,
    };
    let settings = settings_for(kind, merged)?;
    Ok(CliConfig {
        command: kind,
        settings,
    })
}

fn settings_for(kind: CommandKind, o: Opts) -> Result<Settings, CliError> {
    use CommandKind::*;
    let problem = o
        .problem
        .unwrap_or_else(|| if kind == Demo { "ex4.3" } else { "ex4.1" }.into());
    if !["ex4.1", "ex4.2", "ex4.3"].contains(&problem.as_str()) {
        return usage(format!(
            "key 'problem': unknown problem '{problem}' (expected ex4.1, ex4.2 or ex4.3)"
        ));
    }
    let sweep = StabilitySweep::default();
    let (alpha, gamma, delta, k, n, tau) = match kind {
        Solve => (vec![0.5], vec![2.0], vec![0.3], vec![1], vec![20], vec![]),
        SpaceOrder => (
            vec![0.6],
            vec![2.0],
            vec![0.3],
            vec![2],
            vec![5, 10, 20, 40],
            vec![],
        ),
        TimeOrder => (
            vec![0.5],
            vec![2.0],
            vec![0.1],
            vec![2],
            vec![100],
            vec![0.04, 0.02, 0.01, 0.005],
        ),
        Stability => (
            sweep.alphas,
            sweep.gammas,
            sweep.deltas,
            sweep.degrees,
            vec![sweep.n_cells],
            sweep.taus,
        ),
        Demo => (vec![0.3], vec![2.0], vec![0.3], vec![2], vec![], vec![0.001]),
    };
    let alpha = o.alpha.unwrap_or(alpha);
    let gamma = o.gamma.unwrap_or(gamma);
    let delta = o.delta.unwrap_or(delta);
    let k = o.k.unwrap_or(k);
    let tau_given = o.tau.is_some();
    let tau = o.tau.unwrap_or(tau);
    let final_time = o.t.unwrap_or(1.0);

    for (key, list) in [("alpha", &alpha), ("gamma", &gamma), ("delta", &delta)] {
        if list.is_empty() {
            return usage(format!("key '{key}' needs at least one value"));
        }
    }
    if let Some(a) = alpha.iter().find(|&&a| !(a > 0.0 && a < 1.0)) {
        return usage(format!("key 'alpha': {a} outside (0, 1)"));
    }
    if let Some(g) = gamma.iter().find(|&&g| !(g >= 0.0 && g.is_finite())) {
        return usage(format!("key 'gamma': {g} must be finite and >= 0"));
    }
    for &d in &delta {
        if let Err(e) = check_delta(d) {
            return usage(format!("key 'delta': {e}"));
        }
    }
    if !(final_time > 0.0 && final_time.is_finite()) {
        return usage(format!("key 'T': {final_time} must be positive"));
    }
    if let Some(t) = tau.iter().find(|&&t| !(t > 0.0 && t.is_finite())) {
        return usage(format!("key 'tau': {t} must be positive"));
    }
    let rho = o.rho.unwrap_or(0.0);
    if !(rho >= 0.0 && rho.is_finite()) {
        return usage(format!("key 'rho': {rho} must be >= 0"));
    }
    if kind != Stability {
        for (key, len) in [
            ("alpha", alpha.len()),
            ("gamma", gamma.len()),
            ("delta", delta.len()),
            ("k", k.len()),
        ] {
            if len != 1 {
                return usage(format!("key '{key}' takes a single value for this subcommand"));
            }
        }
    }
    if k.is_empty() || k.iter().any(|&k| k > 10) {
        return usage("key 'k': degrees must lie in 0..=10");
    }

    let domain = match (o.a, o.b) {
        (None, None) => None,
        (Some(a), Some(b)) if a < b => Some((a, b)),
        (Some(a), Some(b)) => return usage(format!("keys 'a', 'b': need a < b, got [{a}, {b}]")),
        _ => return usage("keys 'a' and 'b' must be given together"),
    };
    if domain.is_some() && problem != "ex4.3" {
        return usage("keys 'a'/'b' only apply to problem ex4.3");
    }
    let (lo, hi) = domain.unwrap_or(match problem.as_str() {
        "ex4.3" => crate::problems::EXAMPLE_4_3_DOMAIN,
        _ => (0.0, 1.0),
    });

    let n = match (o.n, o.h) {
        (Some(_), Some(_)) => return usage("keys 'N' and 'h' are mutually exclusive"),
        (Some(n), None) => n,
        (None, Some(h)) => {
            if !(h > 0.0) {
                return usage(format!("key 'h': {h} must be positive"));
            }
            let cells = ((hi - lo) / h).round();
            if cells < 2.0 || ((hi - lo) / cells - h).abs() > 1e-9 * h {
                return usage(format!(
                    "key 'h': {h} does not divide [{lo}, {hi}] into an integer number (>= 2) of cells"
                ));
            }
            vec![cells as usize]
        }
        (None, None) if kind == Demo => vec![((hi - lo) / 0.01).round() as usize],
        (None, None) => n,
    };
    if n.is_empty() || n.iter().any(|&c| c < 2) {
        return usage("key 'N': cell counts must be >= 2");
    }
    match kind {
        SpaceOrder => {
            if n.windows(2).any(|w| w[0] >= w[1]) {
                return usage("key 'N': list must be strictly increasing");
            }
        }
        _ => {
            if n.len() != 1 {
                return usage("key 'N' takes a single value for this subcommand");
            }
        }
    }

    // time steps
    let steps = match kind {
        Solve | SpaceOrder | Demo => {
            let m = match (o.m, kind) {
                (Some(m), _) => m,
                (None, SpaceOrder) | (None, Solve) if !tau_given => 1000,
                (None, _) => {
                    if tau.len() != 1 {
                        return usage("key 'tau' takes a single value for this subcommand");
                    }
                    steps_for(final_time, tau[0]).map_err(|e| CliError::Usage(format!("key 'tau': {e}")))?
                }
            };
            if m == 0 {
                return usage("key 'M' must be >= 1");
            }
            Some(m)
        }
        TimeOrder => {
            if tau.windows(2).any(|w| w[0] <= w[1]) || tau.is_empty() {
                return usage("key 'tau': list must be non-empty and strictly decreasing");
            }
            for &t in &tau {
                steps_for(final_time, t).map_err(|e| CliError::Usage(format!("key 'tau': {e}")))?;
            }
            None
        }
        Stability => None,
    };

    let mesh = match o.mesh.as_deref().unwrap_or("uniform") {
        "uniform" => MeshKind::Uniform,
        "perturbed" => MeshKind::Perturbed {
            seed: o.seed.unwrap_or(1),
        },
        other => {
            return usage(format!(
                "key 'mesh': unknown mesh '{other}' (expected uniform or perturbed)"
            ))
        }
    };
    if kind == Stability && mesh != MeshKind::Uniform {
        return usage("key 'mesh': the stability sweep runs on a uniform mesh");
    }
    let init = match o.init.as_deref() {
        None => InitialProjection::GaussRadau,
        Some(s) => s
            .parse()
            .map_err(|e: crate::Error| CliError::Usage(format!("key 'init': {e}")))?,
    };
    if let Some(q) = o.quad_order {
        let kmax = *k.iter().max().unwrap();
        if !(kmax + 1..=crate::basis::MAX_QUAD_POINTS).contains(&q) {
            return usage(format!(
                "key 'quad-order': {q} outside {}..={}",
                kmax + 1,
                crate::basis::MAX_QUAD_POINTS
            ));
        }
    }
    let times = o.times.unwrap_or_else(|| vec![0.0, 0.1, 0.5, 1.0]);
    if let Some(t) = times.iter().find(|&&t| !(0.0..=final_time + 1e-12).contains(&t)) {
        return usage(format!("key 'times': {t} outside [0, T = {final_time}]"));
    }
    let out = o.out.unwrap_or_else(|| {
        PathBuf::from(match kind {
            Solve => "solution.csv",
            SpaceOrder => "space_order.csv",
            TimeOrder => "time_order.csv",
            Stability => "stability.csv",
            Demo => "demo_out",
        })
    });
    Ok(Settings {
        problem,
        alpha,
        gamma,
        delta,
        rho,
        k,
        n,
        steps,
        final_time,
        tau,
        mesh,
        seed: o.seed.unwrap_or(1),
        init,
        quad_order: o.quad_order,
        samples: o.samples.unwrap_or(DEFAULT_LINF_SAMPLES).max(2),
        times,
        domain,
        out,
        mesh_out: o.mesh_out,
        timing: o.timing.unwrap_or(true),
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Failure(format!("cannot write '{}': {e}", path.display())))
}

fn problem_for(s: &Settings) -> Result<Problem, CliError> {
    Problem::by_label(&s.problem, s.gamma[0], s.alpha[0], s.domain)
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn study_options(s: &Settings) -> StudyOptions {
    StudyOptions {
        threads: threads_from_env(),
        initial_projection: s.init,
        quad_order: s.quad_order,
        linf_samples: DEFAULT_LINF_SAMPLES,
        record_timing: s.timing,
    }
}

/// Executes a validated configuration. Returns the process exit status.
pub fn run(config: &CliConfig) -> Result<(), CliError> {
    let s = &config.settings;
    match config.command {
        CommandKind::Solve => run_solve(s),
        CommandKind::SpaceOrder => {
            let p = problem_for(s)?;
            let r = spatial_study(
                &p,
                s.delta[0],
                s.k[0],
                &s.n,
                s.steps.unwrap(),
                s.final_time,
                s.mesh,
                &study_options(s),
            )?;
            let mut buf = Vec::new();
            r.write_csv(&mut buf)?;
            write_file(&s.out, &buf)?;
            print!("{}", r.format_table());
            match r.failure {
                Some(f) => Err(CliError::Failure(f)),
                None => Ok(()),
            }
        }
        CommandKind::TimeOrder => {
            let p = problem_for(s)?;
            let r = temporal_study(
                &p,
                s.delta[0],
                s.k[0],
                s.n[0],
                &s.tau,
                s.final_time,
                &study_options(s),
            )?;
            let mut buf = Vec::new();
            r.write_csv(&mut buf)?;
            write_file(&s.out, &buf)?;
            print!("{}", r.format_table());
            match r.failure {
                Some(f) => Err(CliError::Failure(f)),
                None => Ok(()),
            }
        }
        CommandKind::Stability => {
            let sweep = StabilitySweep {
                alphas: s.alpha.clone(),
                gammas: s.gamma.clone(),
                deltas: s.delta.clone(),
                taus: s.tau.clone(),
                degrees: s.k.clone(),
                n_cells: s.n[0],
                seed: s.seed,
                rho: s.rho,
                final_time: s.final_time,
                threads: threads_from_env(),
                ..StabilitySweep::default()
            };
            let report = stability_study(&sweep)?;
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            write_file(&s.out, &buf)?;
            println!(
                "{} runs, worst max_n ||u^n||/||u^0|| = {:.16e}: {}",
                report.entries.len(),
                report.worst_ratio(),
                if report.passed() { "stable" } else { "UNSTABLE" }
            );
            if let Some(f) = report.failure {
                return Err(CliError::Failure(f));
            }
            if report.passed() {
                Ok(())
            } else {
                Err(CliError::Failure("stability bound violated".into()))
            }
        }
        CommandKind::Demo => run_demo(s),
    }
}

fn scheme_config(s: &Settings, p: &Problem, mesh: Arc<Mesh1D>) -> SchemeConfig {
    let mut cfg = SchemeConfig::for_problem(p, s.delta[0], s.k[0], mesh, s.steps.unwrap(), s.final_time);
    cfg.initial_projection = s.init;
    cfg.quad_order = s.quad_order.unwrap_or_else(|| default_quad_order(s.k[0]));
    cfg
}

fn build_mesh(s: &Settings, p: &Problem) -> Result<Arc<Mesh1D>, CliError> {
    let (a, b) = p.domain();
    let mesh = Arc::new(s.mesh.build(a, b, s.n[0])?);
    if let Some(path) = &s.mesh_out {
        let mut buf = Vec::new();
        mesh.write_csv(&mut buf)?;
        write_file(path, &buf)?;
    }
    Ok(mesh)
}

fn run_solve(s: &Settings) -> Result<(), CliError> {
    let p = problem_for(s)?;
    for w in p.warnings() {
        eprintln!("warning: {w}");
    }
    let mesh = build_mesh(s, &p)?;
    let cfg = scheme_config(s, &p, mesh);
    let sol = crate::solver::solve_to_final(&cfg, &p)?;
    let mut buf = Vec::new();
    sol.u.write_csv(&mut buf, s.samples)?;
    write_file(&s.out, &buf)?;
    println!(
        "{}: N={} k={} M={} T={} alpha={} gamma={} delta={}",
        p.label(),
        s.n[0],
        s.k[0],
        cfg.steps,
        cfg.final_time,
        cfg.alpha,
        cfg.gamma,
        cfg.delta
    );
    println!("||u_h(T)|| = {:.15e}", sol.u.l2_norm());
    if let Some(exact) = p.exact() {
        let t = cfg.final_time;
        let e = error_norms(&sol.u, |x| exact(x, t), cfg.quad_order, DEFAULT_LINF_SAMPLES)?;
        println!("L2 error = {:.15e}, Linf error = {:.15e}", e.l2, e.linf);
    }
    println!("wall time {:.3} s", sol.diagnostics.wall_time_s);
    Ok(())
}

/// Snapshot file name for time `t`.
pub fn snapshot_name(t: f64) -> String {
    format!("snapshot_t{t}.csv")
}

fn run_demo(s: &Settings) -> Result<(), CliError> {
    let p = problem_for(s)?;
    for w in p.warnings() {
        eprintln!("warning: {w}");
    }
    let mesh = build_mesh(s, &p)?;
    let cfg = scheme_config(s, &p, mesh);
    let tau = cfg.tau();
    let mut wanted: Vec<(usize, f64)> = s
        .times
        .iter()
        .map(|&t| (((t / tau).round() as usize).min(cfg.steps), t))
        .collect();
    wanted.sort_by_key(|w| w.0);
    fs::create_dir_all(&s.out)
        .map_err(|e| CliError::Failure(format!("cannot create '{}': {e}", s.out.display())))?;
    let u0 = p.initial().clone();
    let mut solver = Solver::setup(cfg, InitialData::Function(&*u0))?;
    let forcing = p.forcing().cloned();
    let f_ref: Option<&dyn Fn(f64, f64) -> f64> = forcing.as_deref().map(|f| f as _);
    for (step, t) in wanted {
        while solver.step_index() < step {
            solver.step(f_ref)?;
        }
        let u = solver.u();
        let mut buf = format!("# t={}\n# requested_t={t}\n", solver.time()).into_bytes();
        u.write_csv(&mut buf, s.samples)?;
        let path = s.out.join(snapshot_name(t));
        write_file(&path, &buf)?;
        println!(
            "t = {:<8} ||u_h|| = {:.15e}  -> {}",
            solver.time(),
            u.l2_norm(),
            path.display()
        );
    }
    Ok(())
}

/// Entry point used by the binary: parse, run, map to an exit status.
pub fn main_with_args<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let config = match resolve(cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    match run(&config) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
