//! Command-line driver.
//!
//! Settings come from flags, the `TF_CORNER_JOBS` environment variable and an
//! optional flat `key = value` config file; flags win over the file.

use crate::error::{Error, Result};
use crate::gpsolve::{
    solve_2d, solve_radial, solve_radial_ladder, Flow2dOptions, GroundState, RadialOptions,
};
use crate::io::{
    emit_plots, read_csv, read_state, svg_plot, write_csv, write_state, write_text, Axes, Table,
};
use crate::layers::{build_u_ap, predict, LayerParams};
use crate::painleve::{hastings_mcleod, Orientation, ProfileProblem};
use crate::trap::{boundary_and_beta, compute_lambda0, Trap};
use crate::verify::{
    report_from_states, residual_bounds, solve_ladder, VerificationReport, VerifyOptions,
};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "tf-corner",
    version,
    about = "Painlevé-II corner layers of Thomas–Fermi ground states"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Solve the profile equation v'' = v(|v|^p ± x) and write hm.csv.
    Painleve(Flags),
    /// Thomas–Fermi data of a trap: λ₀, boundary, β, curvature.
    Trap(Flags),
    /// Ground states for each ε.
    Ground(Flags),
    /// Matched approximation u_ap: normal sections, residuals, predictions.
    Approx(Flags),
    /// Full verification report over an ε ladder.
    Verify(Flags),
    /// Parallel (trap, ε) sweep, one subdirectory per job.
    Sweep(Flags),
    /// Render SVG plots from CSV files.
    Plot(PlotFlags),
}

#[derive(Debug, Clone, Default, Args)]
struct Flags {
    /// harmonic | gaussian | table
    #[arg(long)]
    trap: Option<String>,
    /// Anisotropy Λ (a comma list for sweep).
    #[arg(long)]
    aniso: Option<String>,
    /// Gaussian bump height `a` in `W = r² + a e^{−b r²}`.
    #[arg(long = "bump-a")]
    bump_a: Option<String>,
    /// Gaussian bump width parameter `b`.
    #[arg(long = "bump-b")]
    bump_b: Option<String>,
    /// CSV with columns r,w for the table trap.
    #[arg(long)]
    table: Option<String>,
    /// Comma-separated ε list.
    #[arg(long)]
    eps: Option<String>,
    /// Grid size: profile nodes, radial nodes, or 2-D nodes per axis.
    #[arg(long)]
    n: Option<String>,
    /// Outer radius of the radial grid.
    #[arg(long)]
    rmax: Option<String>,
    /// Half-width of the 2-D box.
    #[arg(long = "box")]
    box_half: Option<String>,
    /// Power `p` of the profile equation.
    #[arg(long)]
    p: Option<String>,
    /// Left end of the profile domain.
    #[arg(long, allow_hyphen_values = true)]
    xmin: Option<String>,
    /// Right end of the profile domain.
    #[arg(long, allow_hyphen_values = true)]
    xmax: Option<String>,
    /// full | dirichlet | neumann
    #[arg(long)]
    orientation: Option<String>,
    /// auto | radial | flow2d
    #[arg(long)]
    solver: Option<String>,
    /// Boundary samples for the Thomas–Fermi curve.
    #[arg(long = "n-theta")]
    n_theta: Option<String>,
    /// Gradient-flow stop: relative energy change per step.
    #[arg(long = "energy-tol")]
    energy_tol: Option<String>,
    /// Gradient-flow stop: discrete Euler–Lagrange residual.
    #[arg(long = "residual-tol")]
    residual_tol: Option<String>,
    /// Rebuild the verification report from states persisted in this directory.
    #[arg(long)]
    from: Option<String>,
    /// Output directory (default `out`).
    #[arg(long)]
    out: Option<String>,
    /// Flat key=value file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "TF_CORNER_JOBS")]
    jobs: Option<String>,
}

#[derive(Debug, Args)]
struct PlotFlags {
    /// CSV files to plot.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Output directory for the SVG files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

const KEYS: [&str; 20] = [
    "trap",
    "aniso",
    "bump-a",
    "bump-b",
    "table",
    "eps",
    "n",
    "rmax",
    "box",
    "p",
    "xmin",
    "xmax",
    "orientation",
    "solver",
    "n-theta",
    "energy-tol",
    "residual-tol",
    "from",
    "out",
    "jobs",
];

/// Parses a flat `key = value` file; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("config line {}: expected key = value", k + 1)))?;
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("unknown config key `{key}`")));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

/// Solver family for ground states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Auto,
    Radial,
    Flow2d,
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub traps: Vec<Trap>,
    pub eps: Vec<f64>,
    pub n: Option<usize>,
    pub rmax: Option<f64>,
    pub box_half: Option<f64>,
    pub p: f64,
    pub xmin: f64,
    pub xmax: f64,
    pub orientation: String,
    pub solver: Solver,
    pub n_theta: usize,
    pub energy_tol: f64,
    pub residual_tol: f64,
    pub from: Option<PathBuf>,
    pub out: PathBuf,
    #[serde(skip)]
    pub jobs: Option<usize>,
}

struct Settings(BTreeMap<String, String>);

impl Settings {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| Error::Config(format!("key `{key}`: cannot parse `{v}`")))
            })
            .transpose()
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Config(format!("key `{key}`: cannot parse `{s}`")))
                    })
                    .collect()
            })
            .transpose()
    }
}

impl RunConfig {
    fn resolve(command: &str, flags: &Flags) -> Result<Self> {
        let mut map = match &flags.config {
            Some(path) => parse_config(
                &fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("config {}: {e}", path.display())))?,
            )?,
            None => BTreeMap::new(),
        };
        let given = [
            ("trap", &flags.trap),
            ("aniso", &flags.aniso),
            ("bump-a", &flags.bump_a),
            ("bump-b", &flags.bump_b),
            ("table", &flags.table),
            ("eps", &flags.eps),
            ("n", &flags.n),
            ("rmax", &flags.rmax),
            ("box", &flags.box_half),
            ("p", &flags.p),
            ("xmin", &flags.xmin),
            ("xmax", &flags.xmax),
            ("orientation", &flags.orientation),
            ("solver", &flags.solver),
            ("n-theta", &flags.n_theta),
            ("energy-tol", &flags.energy_tol),
            ("residual-tol", &flags.residual_tol),
            ("from", &flags.from),
            ("out", &flags.out),
            ("jobs", &flags.jobs),
        ];
        for (key, value) in given {
            if let Some(v) = value {
                map.insert(key.to_string(), v.clone());
            }
        }
        let s = Settings(map);

        let mut eps = s
            .list("eps")?
            .unwrap_or_else(|| vec![0.05, 0.03, 0.02, 0.01]);
        if let Some(bad) = eps.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::Config(format!(
                "key `eps`: {bad} is not strictly positive"
            )));
        }
        eps.sort_by(|a, b| b.total_cmp(a));
        eps.dedup();

        let traps = if command == "painleve" {
            Vec::new()
        } else {
            build_traps(&s, command == "sweep")?
        };
        let solver = match s.raw("solver").unwrap_or("auto") {
            "auto" => Solver::Auto,
            "radial" => Solver::Radial,
            "flow2d" => Solver::Flow2d,
            other => {
                return Err(Error::Config(format!(
                    "key `solver`: unknown value `{other}`"
                )))
            }
        };
        let orientation = s.raw("orientation").unwrap_or("full").to_string();
        if !["full", "dirichlet", "neumann"].contains(&orientation.as_str()) {
            return Err(Error::Config(format!(
                "key `orientation`: unknown value `{orientation}`"
            )));
        }
        let jobs = s.parse::<usize>("jobs")?;
        if jobs == Some(0) {
            return Err(Error::Config("key `jobs`: must be at least 1".into()));
        }
        Ok(Self {
            command: command.to_string(),
            traps,
            eps,
            n: s.parse("n")?,
            rmax: s.parse("rmax")?,
            box_half: s.parse("box")?,
            p: s.parse("p")?.unwrap_or(2.0),
            xmin: s.parse("xmin")?.unwrap_or(-30.0),
            xmax: s.parse("xmax")?.unwrap_or(15.0),
            orientation,
            solver,
            n_theta: s.parse("n-theta")?.unwrap_or(256),
            energy_tol: s.parse("energy-tol")?.unwrap_or(1e-12),
            residual_tol: s.parse("residual-tol")?.unwrap_or(1e-6),
            from: s.raw("from").map(PathBuf::from),
            out: PathBuf::from(s.raw("out").unwrap_or("out")),
            jobs,
        })
    }

    fn trap(&self) -> &Trap {
        &self.traps[0]
    }

    fn radial_options(&self) -> RadialOptions {
        RadialOptions {
            n: self.n.unwrap_or(RadialOptions::default().n),
            r_max: self.rmax,
        }
    }

    fn flow_options(&self) -> Flow2dOptions {
        Flow2dOptions {
            n: self.n.unwrap_or(Flow2dOptions::default().n),
            box_half: self.box_half,
            energy_tol: self.energy_tol,
            residual_tol: self.residual_tol,
            ..Flow2dOptions::default()
        }
    }

    fn use_radial(&self, trap: &Trap) -> Result<bool> {
        match self.solver {
            Solver::Auto => Ok(trap.is_radial()),
            Solver::Radial if !trap.is_radial() => Err(Error::Config(
                "key `solver`: radial solver needs a radial trap".into(),
            )),
            Solver::Radial => Ok(true),
            Solver::Flow2d => Ok(false),
        }
    }

    fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            radial: self.radial_options(),
            flow: self.flow_options(),
            n_theta: self.n_theta,
        }
    }
}

fn build_traps(s: &Settings, allow_list: bool) -> Result<Vec<Trap>> {
    let kind = s.raw("trap").unwrap_or("harmonic");
    let bad = |e: Error, key: &str| match e {
        Error::Domain(m) => Error::Config(format!("key `{key}`: {m}")),
        other => other,
    };
    match kind {
        "harmonic" => {
            let anisos = s.list("aniso")?.unwrap_or_else(|| vec![1.0]);
            if anisos.len() > 1 && !allow_list {
                return Err(Error::Config(
                    "key `aniso`: a list is only accepted by sweep".into(),
                ));
            }
            anisos
                .into_iter()
                .map(|a| Trap::harmonic(a).map_err(|e| bad(e, "aniso")))
                .collect()
        }
        "gaussian" => {
            let need = |key: &str| {
                s.parse::<f64>(key)?.ok_or_else(|| {
                    Error::Config(format!("key `{key}` is required for the gaussian trap"))
                })
            };
            Ok(vec![Trap::gaussian_bump(need("bump-a")?, need("bump-b")?)
                .map_err(|e| bad(e, "bump-a"))?])
        }
        "table" => {
            let path = s.raw("table").ok_or_else(|| {
                Error::Config("key `table` is required for the table trap".into())
            })?;
            let t = read_csv(Path::new(path))
                .map_err(|e| Error::Config(format!("key `table`: {e}")))?;
            let col = |c: &str| {
                t.column(c)
                    .ok_or_else(|| Error::Config(format!("key `table`: column `{c}` missing")))
            };
            Ok(vec![
                Trap::radial_table(col("r")?, col("w")?).map_err(|e| bad(e, "table"))?
            ])
        }
        other => Err(Error::Config(format!(
            "key `trap`: unknown trap kind `{other}`"
        ))),
    }
}

/// Exit status of a failed run: 2 for configuration problems, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parameter(_) | Error::Domain(_) => 2,
        _ => 1,
    }
}

/// Entry point: parses `argv`, runs the subcommand and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let (name, flags) = match &cli.command {
        Sub::Plot(p) => {
            let written = emit_plots(&p.files, &p.out)?;
            println!(
                "plot: wrote {} SVG file(s) to {}",
                written.len(),
                p.out.display()
            );
            return Ok(());
        }
        Sub::Painleve(f) => ("painleve", f),
        Sub::Trap(f) => ("trap", f),
        Sub::Ground(f) => ("ground", f),
        Sub::Approx(f) => ("approx", f),
        Sub::Verify(f) => ("verify", f),
        Sub::Sweep(f) => ("sweep", f),
    };
    let cfg = RunConfig::resolve(name, flags)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| match name {
        "painleve" => cmd_painleve(&cfg),
        "trap" => cmd_trap(&cfg),
        "ground" => cmd_ground(&cfg),
        "approx" => cmd_approx(&cfg),
        "verify" => cmd_verify(&cfg),
        _ => cmd_sweep(&cfg),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("serialisation: {e}")))?;
    write_text(path, &(json + "\n"))
}

fn plot(out: &Path, stem: &str, table: &Table, axes: Axes) -> Result<()> {
    let svg = svg_plot(table, stem, axes, &format!("{stem}.csv"))?;
    write_text(&out.join(format!("{stem}.svg")), &svg)
}

fn eps_stem(prefix: &str, eps: f64) -> String {
    format!("{prefix}_eps{eps}")
}

#[derive(Serialize)]
struct PainleveSummary {
    p: f64,
    orientation: String,
    x_min: f64,
    x_max: f64,
    n: usize,
    v_at_zero: f64,
    vx_at_zero: f64,
    residual_sup: f64,
    newton_iters: usize,
    closure_defect: f64,
    identity_defect: Option<f64>,
    connection_ratio: Option<f64>,
    potential_min: Option<f64>,
    mu1: Option<f64>,
}

fn cmd_painleve(cfg: &RunConfig) -> Result<()> {
    let n = cfg.n.unwrap_or(4000);
    let problem = match cfg.orientation.as_str() {
        "full" => ProfileProblem::full_line(cfg.p, cfg.xmin, cfg.xmax, n)?,
        "dirichlet" => ProfileProblem::half_line_dirichlet(cfg.p, cfg.xmax, n)?,
        _ => ProfileProblem::half_line_neumann(cfg.p, cfg.xmax, n)?,
    };
    let sol = problem.solve()?;
    let table = Table::with_rows(
        &["x", "v", "vx"],
        sol.x
            .iter()
            .zip(&sol.v)
            .zip(&sol.vx)
            .map(|((&x, &v), &d)| [x, v, d]),
    );
    write_csv(&cfg.out.join("hm.csv"), &table)?;
    plot(&cfg.out, "hm", &table, Axes::Linear)?;
    let full = sol.orientation == Orientation::FullLine;
    let lin = sol.linearization().ok();
    let summary = PainleveSummary {
        p: sol.p,
        orientation: cfg.orientation.clone(),
        x_min: sol.x[0],
        x_max: sol.x[sol.x.len() - 1],
        n: sol.x.len(),
        v_at_zero: sol.eval(0.0).0,
        vx_at_zero: sol.eval(0.0).1,
        residual_sup: sol.residual_sup,
        newton_iters: sol.newton_iters,
        closure_defect: sol.closure_defect,
        identity_defect: if full && sol.p == 2.0 {
            sol.identity_defect().ok()
        } else {
            None
        },
        connection_ratio: if full {
            sol.connection_ratio().ok().map(|c| c.value)
        } else {
            None
        },
        potential_min: lin.as_ref().map(|l| l.potential_min),
        mu1: lin.as_ref().map(|l| l.mu1),
    };
    write_json(&cfg.out.join("painleve.json"), &summary)?;
    println!(
        "painleve: p = {}, {} nodes, V(0) = {:.12}, residual {:.2e}, {} Newton steps",
        sol.p,
        sol.x.len(),
        summary.v_at_zero,
        sol.residual_sup,
        sol.newton_iters
    );
    Ok(())
}

#[derive(Serialize)]
struct TrapSummary<'a> {
    trap: &'a Trap,
    lambda0: f64,
    mass: f64,
    perimeter: f64,
    radius: Option<f64>,
    beta_cubed_integral: f64,
    c_minus2: f64,
    c_log: f64,
}

fn cmd_trap(cfg: &RunConfig) -> Result<()> {
    let trap = cfg.trap();
    let lambda0 = compute_lambda0(trap, 1e-12)?;
    let tf = boundary_and_beta(trap, lambda0, cfg.n_theta)?;
    let table = Table::with_rows(&["theta", "y1", "y2", "beta", "curvature"], tf.rows());
    write_csv(&cfg.out.join("tfdata.csv"), &table)?;
    plot(&cfg.out, "tfdata", &table, Axes::Linear)?;
    let bundle = predict(&tf, hastings_mcleod(), cfg.eps[0])?;
    let summary = TrapSummary {
        trap,
        lambda0,
        mass: trap.mass(lambda0)?,
        perimeter: tf.ell0,
        radius: tf.radius(),
        beta_cubed_integral: tf.beta_cubed_integral(),
        c_minus2: bundle.c_minus2,
        c_log: bundle.c_log,
    };
    write_json(&cfg.out.join("trap.json"), &summary)?;
    println!(
        "trap: λ₀ = {lambda0:.12}, perimeter {:.6}, c₋₂ = {:.6}, c_log = {:.6}",
        tf.ell0, bundle.c_minus2, bundle.c_log
    );
    Ok(())
}

fn solve_states(cfg: &RunConfig, trap: &Trap) -> Result<Vec<GroundState>> {
    if cfg.use_radial(trap)? {
        solve_radial_ladder(trap, &cfg.eps, cfg.radial_options())
    } else {
        cfg.eps
            .iter()
            .map(|&e| solve_2d(trap, e, cfg.flow_options()))
            .collect()
    }
}

const GROUND_HEADER: [&str; 10] = [
    "eps",
    "lambda_eps",
    "lambda_gap",
    "energy",
    "g1",
    "tested",
    "remainder",
    "mass",
    "iterations",
    "residual",
];

fn ground_rows(trap: &Trap, states: &[GroundState], n_theta: usize) -> Result<Vec<[f64; 10]>> {
    let lambda0 = compute_lambda0(trap, 1e-12)?;
    let tf0 = boundary_and_beta(trap, lambda0, n_theta)?;
    states
        .iter()
        .map(|s| {
            let e = s.energy(&tf0);
            let c2 = predict(&tf0, hastings_mcleod(), s.epsilon)?.c_minus2;
            Ok([
                s.epsilon,
                s.lambda_eps,
                s.lambda_eps - lambda0,
                e.total,
                e.g1,
                e.tested,
                e.total - c2 / (s.epsilon * s.epsilon),
                s.mass,
                s.iterations as f64,
                s.residual,
            ])
        })
        .collect()
}

fn cmd_ground(cfg: &RunConfig) -> Result<()> {
    let trap = cfg.trap();
    let states = solve_states(cfg, trap)?;
    for s in &states {
        write_state(&cfg.out, &eps_stem("ground", s.epsilon), s)?;
        println!(
            "ground: ε = {}, λ_ε = {:.12}, {} iterations, residual {:.2e}",
            s.epsilon, s.lambda_eps, s.iterations, s.residual
        );
    }
    let rows = ground_rows(trap, &states, cfg.n_theta)?;
    write_csv(
        &cfg.out.join("ground.csv"),
        &Table::with_rows(&GROUND_HEADER, &rows),
    )?;
    let rate = Table::with_rows(&["eps", "lambda_gap"], rows.iter().map(|r| [r[0], r[2]]));
    write_csv(&cfg.out.join("rate_lambda.csv"), &rate)?;
    plot(&cfg.out, "rate_lambda", &rate, Axes::LogLogFit)?;
    Ok(())
}

#[derive(Serialize)]
struct ApproxSummary {
    epsilon: f64,
    lambda_source: &'static str,
    lambda: f64,
    params: LayerParams,
    c_minus2: f64,
    c_log: f64,
    f_boundary: Option<f64>,
    glue: f64,
    outer_closeness: f64,
    linearization_min: f64,
    residual_band: f64,
    residual_interior: f64,
    value_on_boundary: f64,
}

fn cmd_approx(cfg: &RunConfig) -> Result<()> {
    let trap = cfg.trap();
    let lambda0 = compute_lambda0(trap, 1e-12)?;
    let tf = boundary_and_beta(trap, lambda0, cfg.n_theta)?;
    let hm = hastings_mcleod();
    let mut summaries = Vec::new();
    for &eps in &cfg.eps {
        let params = LayerParams::default_for(&tf, eps);
        let approx = build_u_ap(&tf, hm, eps, params)?;
        let bundle = predict(&tf, hm, eps)?;
        let theta = tf.theta[0];
        let ts: Vec<f64> = (0..=600)
            .map(|k| params.delta * (-2.0 + 6.0 * k as f64 / 600.0))
            .collect();
        let table = Table::with_rows(
            &["t", "theta", "u_ap", "inner", "sqrt_a"],
            approx.normal_section(theta, &ts),
        );
        let stem = eps_stem("section", eps);
        write_csv(&cfg.out.join(format!("{stem}.csv")), &table)?;
        plot(&cfg.out, &stem, &table, Axes::Linear)?;
        let band = approx.band_diagnostics(400);
        let res = residual_bounds(&approx)?;
        println!(
            "approx: ε = {eps}, δ = {:.4}, L = {}, band residual {:.4}, interior residual {:.4}",
            params.delta, params.l, res.band, res.interior
        );
        summaries.push(ApproxSummary {
            epsilon: eps,
            lambda_source: "lambda0",
            lambda: lambda0,
            params,
            c_minus2: bundle.c_minus2,
            c_log: bundle.c_log,
            f_boundary: bundle.f_boundary,
            glue: band.glue,
            outer_closeness: band.outer,
            linearization_min: band.linearization_min,
            residual_band: res.band,
            residual_interior: res.interior,
            value_on_boundary: approx.value(approx.fermi_inverse(0.0, theta)),
        });
    }
    write_json(&cfg.out.join("approx.json"), &summaries)
}

fn write_report(out: &Path, report: &VerificationReport) -> Result<()> {
    write_text(&out.join("report.json"), &(report.to_json()? + "\n"))?;
    write_text(&out.join("report.csv"), &report.to_csv())?;
    let rate = Table::with_rows(
        &["eps", "lambda_gap"],
        report.records.iter().map(|r| [r.epsilon, r.lambda_gap]),
    );
    write_csv(&out.join("rate_lambda.csv"), &rate)?;
    plot(out, "rate_lambda", &rate, Axes::LogLogFit)?;
    let energy = Table::with_rows(
        &["abs_ln_eps", "remainder"],
        report
            .records
            .iter()
            .map(|r| [-r.epsilon.ln(), r.remainder]),
    );
    write_csv(&out.join("energy.csv"), &energy)?;
    plot(out, "energy", &energy, Axes::Linear)
}

fn cmd_verify(cfg: &RunConfig) -> Result<()> {
    let trap = cfg.trap();
    let states = match &cfg.from {
        Some(dir) => cfg
            .eps
            .iter()
            .map(|&e| read_state(dir, &eps_stem("ground", e)))
            .collect::<Result<Vec<_>>>()?,
        None => {
            let opts = cfg.verify_options();
            let states = if cfg.use_radial(trap)? {
                solve_ladder(trap, &cfg.eps, &opts)?
            } else {
                cfg.eps
                    .iter()
                    .map(|&e| solve_2d(trap, e, opts.flow))
                    .collect::<Result<Vec<_>>>()?
            };
            for s in &states {
                write_state(&cfg.out.join("states"), &eps_stem("ground", s.epsilon), s)?;
            }
            states
        }
    };
    if let Some(s) = states.iter().find(|s| &s.trap != trap) {
        return Err(Error::Config(format!(
            "persisted state at ε = {} belongs to a different trap",
            s.epsilon
        )));
    }
    println!("verify: {} ground states ready", states.len());
    let report = report_from_states(trap, &states, cfg.n_theta)?;
    write_report(&cfg.out, &report)?;
    let passed = report.checks.iter().filter(|c| c.pass).count();
    println!(
        "verify: {passed}/{} checks pass; report written to {}",
        report.checks.len(),
        cfg.out.join("report.json").display()
    );
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct Job {
    trap: Trap,
    epsilon: f64,
    solver: &'static str,
    n: Option<usize>,
    rmax: Option<f64>,
    box_half: Option<f64>,
    energy_tol: f64,
    residual_tol: f64,
}

impl Job {
    /// First 16 hex digits of the SHA-256 of the job's JSON form.
    fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("job serialises");
        Sha256::digest(json.as_bytes())
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[derive(Serialize)]
struct JobRecord {
    dir: String,
    job: Job,
    lambda_eps: f64,
    energy: f64,
    iterations: usize,
    residual: f64,
}

fn cmd_sweep(cfg: &RunConfig) -> Result<()> {
    let mut jobs = Vec::new();
    for trap in &cfg.traps {
        let radial = cfg.use_radial(trap)?;
        for &epsilon in &cfg.eps {
            jobs.push(Job {
                trap: trap.clone(),
                epsilon,
                solver: if radial { "radial" } else { "flow2d" },
                n: cfg.n,
                rmax: cfg.rmax,
                box_half: cfg.box_half,
                energy_tol: cfg.energy_tol,
                residual_tol: cfg.residual_tol,
            });
        }
    }
    let results: Vec<(Job, GroundState, f64)> = jobs
        .into_par_iter()
        .map(|job| {
            let state = if job.solver == "radial" {
                solve_radial(&job.trap, job.epsilon, cfg.radial_options())?
            } else {
                solve_2d(&job.trap, job.epsilon, cfg.flow_options())?
            };
            let dir = cfg.out.join("jobs").join(job.hash());
            write_state(&dir, "ground", &state)?;
            write_json(&dir.join("job.json"), &job)?;
            let lambda0 = compute_lambda0(&job.trap, 1e-12)?;
            let tf0 = boundary_and_beta(&job.trap, lambda0, cfg.n_theta)?;
            let energy = state.energy(&tf0).total;
            Ok((job, state, energy))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&[
        "job",
        "eps",
        "lambda_eps",
        "energy",
        "mass",
        "iterations",
        "residual",
    ]);
    let mut records = Vec::new();
    for (k, (job, state, energy)) in results.into_iter().enumerate() {
        table.push(vec![
            k as f64,
            state.epsilon,
            state.lambda_eps,
            energy,
            state.mass,
            state.iterations as f64,
            state.residual,
        ]);
        println!(
            "sweep: job {k} ({}) ε = {}, λ_ε = {:.12}",
            job.hash(),
            state.epsilon,
            state.lambda_eps
        );
        records.push(JobRecord {
            dir: format!("jobs/{}", job.hash()),
            job,
            lambda_eps: state.lambda_eps,
            energy,
            iterations: state.iterations,
            residual: state.residual,
        });
    }
    write_csv(&cfg.out.join("sweep.csv"), &table)?;
    write_json(&cfg.out.join("sweep.json"), &records)?;
    println!(
        "sweep: {} jobs merged into {}",
        records.len(),
        cfg.out.join("sweep.csv").display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(parse_config("trap = harmonic\nnosuch = 1\n").is_err());
        let m = parse_config(
            "# comment\ntrap = harmonic  # inline\neps=0.05,0.02\n\nenergy_tol = 1e-10\n",
        )
        .unwrap();
        assert_eq!(m["trap"], "harmonic");
        assert_eq!(m["eps"], "0.05,0.02");
        assert_eq!(m["energy-tol"], "1e-10");
    }

    #[test]
    fn flags_override_config_and_eps_are_sorted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "aniso = 0.5\neps = 0.01,0.05\n").unwrap();
        let flags = Flags {
            config: Some(path),
            aniso: Some("0.8".into()),
            ..Flags::default()
        };
        let cfg = RunConfig::resolve("ground", &flags).unwrap();
        assert_eq!(cfg.traps, vec![Trap::harmonic(0.8).unwrap()]);
        assert_eq!(cfg.eps, vec![0.05, 0.01]);
    }

    #[test]
    fn unknown_trap_names_the_key() {
        let flags = Flags {
            trap: Some("nosuch".into()),
            ..Flags::default()
        };
        let err = RunConfig::resolve("ground", &flags).unwrap_err();
        assert_eq!(exit_code(&err), 2);
        assert!(err.to_string().contains("`trap`"));
    }
}
