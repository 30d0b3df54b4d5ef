//! Command-line front end for the `nhim-otoc` binary.
//!
//! Settings resolve in order: built-in defaults, `--preset`, the flat
//! `key = value` file given by `--config`, then command-line flags.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::error::{OtocError, Result};
use crate::normal_form::{
    eckart_morse_synthetic, read_action_polynomial, read_coefficient_table, write_action_polynomial,
    ActionPolynomial,
};
use crate::oracle::run_suite;
use crate::otoc_trace::{assemble_trace, fit_growth_exponent, linspace, TraceConfig, TraceMode, TraceSeries};
use crate::reaction_trace::Window;
use crate::resonance::SolverConfig;
use crate::stability::ButterflyMode;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "nhim-otoc", version, about = "Semiclassical orbit-sum OTOC near an index-1 saddle")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads for the orbit sweep (output does not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a complex monomial table (*.nf) into an action polynomial (*.ap).
    Convert {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = crate::normal_form::DEFAULT_CONVERSION_TOL)]
        tol: f64,
    },
    /// Evaluate C_E(t); writes <output>_series.csv and <output>_orbits.csv.
    Eval(RunArgs),
    /// Convergence residuals per winding depth; writes <output>_residuals.csv.
    Residuals(RunArgs),
    /// Fitted growth exponent of C_E; writes <output>_slope.csv.
    Slope(RunArgs),
    /// Run the oracle suite and print a pass/fail table.
    Check {
        /// Skip the quantum grid oracle.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Flat `key = value` file; keys as the long flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output path prefix.
    #[arg(short, long, default_value = "nhim_otoc")]
    pub output: PathBuf,
    #[arg(long)]
    pub preset: Option<String>,
    /// Coefficient table (*.nf) or action polynomial (*.ap).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// `resonant` or `general`.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub energy: Option<f64>,
    #[arg(long)]
    pub hbar: Option<f64>,
    #[arg(long)]
    pub m_max: Option<usize>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub t_points: Option<usize>,
    #[arg(long)]
    pub log_space: Option<bool>,
    /// `asymptotic` or `exact`.
    #[arg(long)]
    pub butterfly: Option<String>,
    #[arg(long)]
    pub q_max: Option<f64>,
    /// Reaction-trace edge window: `hard`, `taper` or `taper:<fraction>`.
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long)]
    pub solver_tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub j_cap: Option<f64>,
    #[arg(long)]
    pub fit_min: Option<f64>,
    #[arg(long)]
    pub fit_max: Option<f64>,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v));
            }
        };
        push("preset", self.preset.clone());
        push("input", self.input.as_ref().map(|p| p.display().to_string()));
        push("mode", self.mode.clone());
        push("energy", self.energy.map(|v| v.to_string()));
        push("hbar", self.hbar.map(|v| v.to_string()));
        push("m-max", self.m_max.map(|v| v.to_string()));
        push("t-min", self.t_min.map(|v| v.to_string()));
        push("t-max", self.t_max.map(|v| v.to_string()));
        push("t-points", self.t_points.map(|v| v.to_string()));
        push("log-space", self.log_space.map(|v| v.to_string()));
        push("butterfly", self.butterfly.clone());
        push("q-max", self.q_max.map(|v| v.to_string()));
        push("window", self.window.clone());
        push("solver-tol", self.solver_tol.map(|v| v.to_string()));
        push("max-iter", self.max_iter.map(|v| v.to_string()));
        push("j-cap", self.j_cap.map(|v| v.to_string()));
        push("fit-min", self.fit_min.map(|v| v.to_string()));
        push("fit-max", self.fit_max.map(|v| v.to_string()));
        out
    }
}

/// Fully resolved settings of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: String,
    pub input: Option<PathBuf>,
    pub mode: TraceMode,
    pub energy: f64,
    pub hbar: f64,
    pub m_max: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    pub log_space: bool,
    pub butterfly: ButterflyMode,
    pub q_max: f64,
    pub window: Window,
    pub solver_tol: f64,
    pub max_iter: usize,
    pub j_cap: f64,
    pub fit_min: Option<f64>,
    pub fit_max: Option<f64>,
}

pub const PRESET_ECKART_MORSE: &str = "eckart-morse";

impl Default for RunConfig {
    fn default() -> Self {
        let solver = SolverConfig::default();
        RunConfig {
            preset: PRESET_ECKART_MORSE.into(),
            input: None,
            mode: TraceMode::Resonant,
            energy: -0.5,
            hbar: 0.05,
            m_max: 5,
            t_min: 2.0,
            t_max: 6.0,
            t_points: 81,
            log_space: false,
            butterfly: ButterflyMode::Asymptotic,
            q_max: 1.5,
            window: Window::default(),
            solver_tol: solver.tol,
            max_iter: solver.max_iter,
            j_cap: solver.j_cap,
            fit_min: None,
            fit_max: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| OtocError::InvalidConfig(format!("bad value `{value}` for `{key}`")))
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| OtocError::Parse {
            line: n + 1,
            message: format!("expected `key = value`, found `{line}`"),
        })?;
        out.push((k.trim().replace('_', "-"), v.trim().to_string()));
    }
    Ok(out)
}

impl RunConfig {
    /// Pins the preset's physical parameters.
    pub fn apply_preset(&mut self, name: &str) -> Result<()> {
        match name {
            PRESET_ECKART_MORSE => {
                let d = RunConfig::default();
                self.preset = d.preset;
                self.energy = d.energy;
                self.hbar = d.hbar;
                self.m_max = d.m_max;
                self.t_min = d.t_min;
                self.t_max = d.t_max;
                self.q_max = d.q_max;
                Ok(())
            }
            other => Err(OtocError::InvalidConfig(format!("unknown preset `{other}`"))),
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "preset" => self.apply_preset(value)?,
            "input" => self.input = Some(PathBuf::from(value)),
            "mode" => self.mode = value.parse()?,
            "energy" => self.energy = parse(key, value)?,
            "hbar" => self.hbar = parse(key, value)?,
            "m-max" => self.m_max = parse(key, value)?,
            "t-min" => self.t_min = parse(key, value)?,
            "t-max" => self.t_max = parse(key, value)?,
            "t-points" => self.t_points = parse(key, value)?,
            "log-space" => self.log_space = parse(key, value)?,
            "butterfly" => self.butterfly = value.parse()?,
            "q-max" => self.q_max = parse(key, value)?,
            "window" => self.window = value.parse()?,
            "solver-tol" => self.solver_tol = parse(key, value)?,
            "max-iter" => self.max_iter = parse(key, value)?,
            "j-cap" => self.j_cap = parse(key, value)?,
            "fit-min" => self.fit_min = Some(parse(key, value)?),
            "fit-max" => self.fit_max = Some(parse(key, value)?),
            other => return Err(OtocError::InvalidConfig(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Defaults, then any `preset` entry, then the remaining entries in order.
    pub fn resolve(entries: &[(String, String)]) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (k, v) in entries.iter().filter(|(k, _)| k == "preset") {
            cfg.set(k, v)?;
        }
        for (k, v) in entries.iter().filter(|(k, _)| k != "preset") {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn from_args(args: &RunArgs) -> Result<Self> {
        let mut entries = match &args.config {
            Some(path) => parse_config_file(&std::fs::read_to_string(path)?)?,
            None => Vec::new(),
        };
        entries.extend(args.overrides());
        Self::resolve(&entries)
    }

    pub fn fit_window(&self) -> (f64, f64) {
        (self.fit_min.unwrap_or(self.t_min), self.fit_max.unwrap_or(self.t_max))
    }

    pub fn trace_config(&self) -> TraceConfig {
        TraceConfig {
            energy: self.energy,
            hbar: self.hbar,
            m_max: self.m_max,
            t_grid: linspace(self.t_min, self.t_max, self.t_points),
            mode: self.mode,
            log_space: self.log_space,
            butterfly: self.butterfly,
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            tol: self.solver_tol,
            max_iter: self.max_iter,
            j_cap: self.j_cap,
            ..SolverConfig::default()
        }
    }

    pub fn polynomial(&self) -> Result<ActionPolynomial> {
        match &self.input {
            Some(path) => load_polynomial(path),
            None => Ok(eckart_morse_synthetic()),
        }
    }

    /// `key = value` lines of the resolved configuration.
    pub fn echo(&self) -> Vec<String> {
        let (fa, fb) = self.fit_window();
        vec![
            format!("preset = {}", self.preset),
            format!(
                "input = {}",
                self.input.as_ref().map_or("<built-in eckart-morse>".into(), |p| p.display().to_string())
            ),
            format!("mode = {}", self.mode),
            format!("energy = {}", self.energy),
            format!("hbar = {}", self.hbar),
            format!("m-max = {}", self.m_max),
            format!("t-min = {}", self.t_min),
            format!("t-max = {}", self.t_max),
            format!("t-points = {}", self.t_points),
            format!("log-space = {}", self.log_space),
            format!("butterfly = {}", self.butterfly),
            format!("q-max = {}", self.q_max),
            format!("window = {}", self.window),
            format!("solver-tol = {}", self.solver_tol),
            format!("max-iter = {}", self.max_iter),
            format!("j-cap = {}", self.j_cap),
            format!("fit-min = {fa}"),
            format!("fit-max = {fb}"),
        ]
    }
}

/// `*.nf` tables are converted; anything else is read as `*.ap`.
pub fn load_polynomial(path: &Path) -> Result<ActionPolynomial> {
    if path.extension().is_some_and(|e| e == "nf") {
        read_coefficient_table(path)?.to_action_polynomial(crate::normal_form::DEFAULT_CONVERSION_TOL)
    } else {
        read_action_polynomial(path)
    }
}

fn header(command: &str, cfg: &RunConfig) -> String {
    let mut out = format!("# nhim-otoc {VERSION}\n# command = {command}\n");
    for line in cfg.echo() {
        let _ = writeln!(out, "# {line}");
    }
    out
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn join_nums(v: impl IntoIterator<Item = f64>) -> String {
    v.into_iter().map(num).collect::<Vec<_>>().join(";")
}

pub fn series_csv(cfg: &RunConfig, s: &TraceSeries) -> String {
    let mut out = header("eval", cfg);
    out.push_str("t,C_E");
    for k in 1..=s.m_max {
        let _ = write!(out, ",residual_{k}");
    }
    out.push('\n');
    for (i, t) in s.t.iter().enumerate() {
        let _ = write!(out, "{},{}", num(*t), num(s.c_e[i]));
        for r in &s.residuals {
            let _ = write!(out, ",{}", num(r[i]));
        }
        out.push('\n');
    }
    out
}

pub fn orbits_csv(cfg: &RunConfig, s: &TraceSeries) -> String {
    let mut out = header("eval", cfg);
    out.push_str("t,m,J,tau,Lambda,S,mu,sigma_H,A,stability_factor,weight\n");
    for r in &s.contributions {
        let c = &r.contribution;
        let m: Vec<String> = c.torus.winding.0.iter().map(i64::to_string).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            num(r.t),
            m.join(";"),
            join_nums(c.torus.j.iter().copied()),
            num(c.torus.tau),
            num(c.torus.lambda),
            num(c.action),
            c.maslov,
            c.signature,
            num(c.amplitude),
            num(c.stability_factor),
            num(r.weight)
        );
    }
    out
}

pub fn residuals_csv(cfg: &RunConfig, s: &TraceSeries) -> String {
    let mut out = header("residuals", cfg);
    out.push('t');
    for k in 1..=s.m_max {
        let _ = write!(out, ",residual_{k}");
    }
    out.push('\n');
    for (i, t) in s.t.iter().enumerate() {
        out.push_str(&num(*t));
        for r in &s.residuals {
            let _ = write!(out, ",{}", num(r[i]));
        }
        out.push('\n');
    }
    out
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn compute(cfg: &RunConfig, threads: Option<usize>) -> Result<TraceSeries> {
    let poly = cfg.polynomial()?;
    let trace = cfg.trace_config();
    let solver = cfg.solver_config();
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| OtocError::InvalidConfig(e.to_string()))?;
            pool.install(|| assemble_trace(&poly, &trace, &solver))
        }
        None => assemble_trace(&poly, &trace, &solver),
    }
}

/// Outcome of a subcommand.
#[derive(Debug)]
pub enum Outcome {
    Done,
    EmptySum,
    OracleFailure,
}

fn run_eval(args: &RunArgs, threads: Option<usize>) -> Result<Outcome> {
    let cfg = RunConfig::from_args(args)?;
    let s = compute(&cfg, threads)?;
    let series = with_suffix(&args.output, "_series.csv");
    let orbits = with_suffix(&args.output, "_orbits.csv");
    write_file(&series, &series_csv(&cfg, &s))?;
    write_file(&orbits, &orbits_csv(&cfg, &s))?;
    println!(
        "{} grid points, {} orbit terms, {} skipped, {} empty -> {}, {}",
        s.t.len(),
        s.orbit_count,
        s.skips.len(),
        s.empty_times.len(),
        series.display(),
        orbits.display()
    );
    Ok(if s.is_empty_everywhere() {
        Outcome::EmptySum
    } else {
        Outcome::Done
    })
}

fn run_residuals(args: &RunArgs, threads: Option<usize>) -> Result<Outcome> {
    let cfg = RunConfig::from_args(args)?;
    let s = compute(&cfg, threads)?;
    let path = with_suffix(&args.output, "_residuals.csv");
    write_file(&path, &residuals_csv(&cfg, &s))?;
    for (k, r) in s.residuals.iter().enumerate() {
        println!("depth {}: max residual {:.6e}", k + 1, r.iter().fold(0.0f64, |m, v| m.max(*v)));
    }
    Ok(if s.is_empty_everywhere() {
        Outcome::EmptySum
    } else {
        Outcome::Done
    })
}

fn run_slope(args: &RunArgs, threads: Option<usize>) -> Result<Outcome> {
    let cfg = RunConfig::from_args(args)?;
    let s = compute(&cfg, threads)?;
    if s.is_empty_everywhere() {
        return Ok(Outcome::EmptySum);
    }
    let fit = fit_growth_exponent(&s.t, &s.c_e, cfg.fit_window())?;
    let lambda0 = cfg.polynomial()?.linear_rate();
    let mut out = header("slope", &cfg);
    out.push_str("quantity,value\n");
    let _ = writeln!(out, "slope,{}", num(fit.slope));
    let _ = writeln!(out, "intercept,{}", num(fit.intercept));
    let _ = writeln!(out, "window_min,{}", num(fit.window.0));
    let _ = writeln!(out, "window_max,{}", num(fit.window.1));
    let _ = writeln!(out, "points,{}", fit.points);
    let _ = writeln!(out, "method,{}", fit.method);
    let _ = writeln!(out, "reference_1.5_lambda0,{}", num(1.5 * lambda0));
    let path = with_suffix(&args.output, "_slope.csv");
    write_file(&path, &out)?;
    println!(
        "slope {:.6} ({} fit over [{}, {}], {} points); 1.5 lambda(0) = {:.6}",
        fit.slope, fit.method, fit.window.0, fit.window.1, fit.points, 1.5 * lambda0
    );
    Ok(Outcome::Done)
}

fn run_check(quick: bool) -> Result<Outcome> {
    let rows = run_suite(quick)?;
    println!("{:<44} {:>12} {:>10}  result", "oracle", "measured", "tolerance");
    for r in &rows {
        println!("{r}");
    }
    Ok(if rows.iter().all(|r| r.passed()) {
        Outcome::Done
    } else {
        Outcome::OracleFailure
    })
}

fn run_convert(input: &Path, output: &Path, tol: f64) -> Result<Outcome> {
    let table = read_coefficient_table(input)?;
    let poly = table.to_action_polynomial(tol)?;
    let head = vec![
        format!("nhim-otoc {VERSION}"),
        "command = convert".into(),
        format!("input = {}", input.display()),
        format!("tol = {tol}"),
        format!("bath-modes = {}", poly.bath_modes()),
    ];
    write_file(output, &write_action_polynomial(&poly, &head))?;
    println!("{} terms -> {}", poly.term_count(), output.display());
    Ok(Outcome::Done)
}

/// Process exit status: 0 success, 1 I/O, parse or configuration error,
/// 2 empty orbit sum, 3 oracle failure.
pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(Outcome::Done) => 0,
        Ok(Outcome::EmptySum) | Err(OtocError::EmptySum) => 2,
        Ok(Outcome::OracleFailure) => 3,
        Err(_) => 1,
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Convert { input, output, tol } => run_convert(input, output, *tol),
        Command::Eval(a) => run_eval(a, cli.threads),
        Command::Residuals(a) => run_residuals(a, cli.threads),
        Command::Slope(a) => run_slope(a, cli.threads),
        Command::Check { quick } => run_check(*quick),
    }
}

/// Parses `args`, runs, reports errors on stderr and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = run(&cli);
    match &result {
        Err(e) => eprintln!("error: {e}"),
        Ok(Outcome::EmptySum) => eprintln!("error: no orbit contributed at any observation time"),
        Ok(Outcome::OracleFailure) => eprintln!("error: at least one oracle failed"),
        Ok(Outcome::Done) => {}
    }
    exit_code(&result)
}
