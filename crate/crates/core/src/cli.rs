//! Command-line front end.
//!
//! Every subcommand accepts `--config FILE` with `key = value` lines whose
//! keys are the long flag names (`H`, `M`, `m`, `max_steps`, ...). Flags
//! given on the command line win over the file.
//!
//! Exit codes: 0 success, 1 negative verdict (`NON_CMC`), 2 usage or I/O
//! error, 3 numeric failure. Failures print the error name on stderr.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{PI, TAU};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::conservation::{check_constancy, flux_conormal, flux_shaving, conserved_quantity};
use crate::curve::{BaseCurve, C64};
use crate::error::{Error, Result};
use crate::io::{self as fio, DEFAULT_CURVE_SAMPLES};
use crate::solver::{self, SolverConfig};
use crate::spaceform::{SpaceForm, SpaceFormKind};
use crate::treadmill::{self, equivalence_check, perdomo_coords, perdomo_level};
use crate::twizzler::Twizzler;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "helicoidal", version, about = "Helicoidal constant mean curvature surfaces in R^3, S^3 and H^3")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a CMC base curve from (H, C) or (H, M).
    Solve(SolveArgs),
    /// Test a base curve for constant mean curvature via its conserved flux.
    Check(CheckArgs),
    /// Sample the twizzler as an OBJ mesh.
    Mesh(MeshArgs),
    /// Compute the l-treadmill of a curve or reconstruct a curve from a path.
    Treadmill(TreadmillArgs),
    /// Dump the raw flux quadratures per sample.
    Flux(FluxArgs),
    /// Tabulate C against -pi M along an R^3 curve.
    Equiv(EquivArgs),
}

/// Keys read from a config file, remembering which were consumed.
struct Config {
    map: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
}

impl Config {
    fn load(path: Option<&Path>) -> Result<Self> {
        let map = match path {
            Some(p) => fio::parse_config(&std::fs::read_to_string(p)?)?,
            None => BTreeMap::new(),
        };
        Ok(Config { map, used: RefCell::new(BTreeSet::new()) })
    }

    /// Fills `slot` from the file when the flag was not given.
    fn fill<T: FromStr>(&self, slot: &mut Option<T>, key: &str) -> Result<()>
    where
        T::Err: std::fmt::Display,
    {
        self.used.borrow_mut().insert(key.to_string());
        if slot.is_some() {
            return Ok(());
        }
        if let Some(v) = self.map.get(key) {
            let parsed = v
                .parse::<T>()
                .map_err(|e| Error::InvalidInput(format!("config key `{key}` = `{v}`: {e}")))?;
            *slot = Some(parsed);
        }
        Ok(())
    }

    fn warn_unused(&self) {
        let used = self.used.borrow();
        for k in self.map.keys().filter(|k| !used.contains(*k)) {
            eprintln!("warning: config key `{k}` is not used by this command");
        }
    }
}

fn require<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::InvalidInput(format!("missing required parameter --{name}")))
}

fn parse_pair(s: &str, name: &str) -> Result<(f64, f64)> {
    let bad = || Error::InvalidInput(format!("--{name} expects `a,b`, got `{s}`"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn parse_space(s: &Option<String>) -> Result<SpaceFormKind> {
    match s {
        None => Ok(SpaceFormKind::Euclidean3),
        Some(t) => SpaceFormKind::from_tag(t).ok_or_else(|| Error::InvalidInput(format!("unknown space `{t}` (use r3, s3 or h3)"))),
    }
}

/// Exactly one of `C` and `M` (tied by `C = -pi M`).
fn flux_pair(c: Option<f64>, m_level: Option<f64>) -> Result<(f64, f64)> {
    match (c, m_level) {
        (Some(_), Some(_)) => Err(Error::InvalidInput("give either --C or --M, not both".into())),
        (Some(c), None) => Ok((c, -c / PI)),
        (None, Some(ml)) => Ok((-PI * ml, ml)),
        (None, None) => Err(Error::InvalidInput("missing required parameter --C or --M".into())),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Runs `f` against the file at `path`, or stdout when there is none.
fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Where the base curve comes from: a CSV file or a built-in circle.
#[derive(Debug, Clone, Default, Args)]
pub struct SourceArgs {
    /// `key = value` file of defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// r3, s3 or h3.
    #[arg(long)]
    pub space: Option<String>,
    /// Curve CSV `u,gx,gy,dgx,dgy[,ddgx,ddgy]`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Use the circle of this radius about the axis (cylinder or torus).
    #[arg(long)]
    pub radius: Option<f64>,
    /// S^3 torus angle: the circle of radius cos(xi).
    #[arg(long)]
    pub xi: Option<f64>,
    /// Screw pitch.
    #[arg(long = "m")]
    pub m: Option<f64>,
}

struct Source {
    kind: SpaceFormKind,
    curve: BaseCurve,
    m: f64,
}

impl SourceArgs {
    fn merge(&mut self, cfg: &Config) -> Result<()> {
        cfg.fill(&mut self.space, "space")?;
        cfg.fill(&mut self.input, "input")?;
        cfg.fill(&mut self.radius, "radius")?;
        cfg.fill(&mut self.xi, "xi")?;
        cfg.fill(&mut self.m, "m")
    }

    fn load(&self) -> Result<Source> {
        let kind = parse_space(&self.space)?;
        let m = require(&self.m, "m")?;
        let given = [self.input.is_some(), self.radius.is_some(), self.xi.is_some()];
        if given.iter().filter(|g| **g).count() != 1 {
            return Err(Error::InvalidInput("give exactly one of --input, --radius, --xi".into()));
        }
        let curve = if let Some(p) = &self.input {
            fio::read_curve(BufReader::new(File::open(p)?))?
        } else if let Some(r) = self.radius {
            if !(r > 0.0) {
                return Err(Error::InvalidInput(format!("--radius must be positive, got {r}")));
            }
            BaseCurve::circle(r, C64::new(0.0, 0.0))
        } else {
            if kind != SpaceFormKind::Sphere3 {
                return Err(Error::InvalidInput("--xi describes S^3 tori; use --space s3".into()));
            }
            let xi = self.xi.unwrap_or_default();
            BaseCurve::circle(xi.cos(), C64::new(0.0, 0.0))
        };
        Ok(Source { kind, curve, m })
    }
}

impl Source {
    fn twizzler(&self) -> Result<Twizzler> {
        Twizzler::new(SpaceForm::new(self.kind), self.curve.clone(), self.m)
    }
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct SolveArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub space: Option<String>,
    /// Mean curvature.
    #[arg(long = "H")]
    pub h: Option<f64>,
    /// Conserved flux.
    #[arg(long = "C")]
    pub c: Option<f64>,
    /// Level of the R^3 sled function (`C = -pi M`).
    #[arg(long = "M")]
    pub m_level: Option<f64>,
    #[arg(long = "m")]
    pub m: Option<f64>,
    /// Start point for S^3/H^3: `x` or `x,y`.
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub tol_root: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// +1 or -1.
    #[arg(long)]
    pub branch: Option<f64>,
    #[arg(long)]
    pub turning_eps: Option<f64>,
    /// Arclength to trace.
    #[arg(long)]
    pub length: Option<f64>,
    /// Curve CSV (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON sidecar (defaults to the output path with a .json extension).
    #[arg(long)]
    pub meta: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct CheckArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long = "H")]
    pub h: Option<f64>,
    /// Number of u samples.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Constancy tolerance, relative to max(1, |H| pi max|gamma|^2).
    #[arg(long)]
    pub tol: Option<f64>,
    /// FluxReport CSV.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct MeshArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub nu: Option<usize>,
    #[arg(long)]
    pub nv: Option<usize>,
    /// `a,b` (defaults to the curve's domain).
    #[arg(long)]
    pub u_range: Option<String>,
    /// `a,b` (defaults to `0,2pi`).
    #[arg(long)]
    pub v_range: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Raw ambient vertex CSV (curved cases; defaults to the OBJ path with .csv).
    #[arg(long)]
    pub raw: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct TreadmillArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Curve CSV, or a `t,x,y` path with --reconstruct.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Use the circle of this radius instead of --input.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub ell: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Rebuild a curve from a treadmill sled path.
    #[arg(long)]
    pub reconstruct: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct FluxArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long = "H")]
    pub h: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct EquivArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long = "H")]
    pub h: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Maps an error to its exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_)
        | Error::Parse { .. }
        | Error::InvalidInput(_)
        | Error::InvalidPitch(_)
        | Error::DimensionMismatch { .. }
        | Error::KindMismatch { .. }
        | Error::OffConstraint { .. } => EXIT_USAGE,
        _ => EXIT_NUMERIC,
    }
}

/// Parses arguments and runs a subcommand, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Check(a) => cmd_check(a),
        Command::Mesh(a) => cmd_mesh(a),
        Command::Treadmill(a) => cmd_treadmill(a),
        Command::Flux(a) => cmd_flux(a),
        Command::Equiv(a) => cmd_equiv(a),
    };
    match result {
        Ok(code) => code,
        // the reader went away (e.g. `| head`); nothing left to report
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            exit_code(&e)
        }
    }
}

fn parse_start(s: &str) -> Result<C64> {
    if s.contains(',') {
        let (x, y) = parse_pair(s, "start")?;
        Ok(C64::new(x, y))
    } else {
        s.trim()
            .parse::<f64>()
            .map(|x| C64::new(x, 0.0))
            .map_err(|_| Error::InvalidInput(format!("--start expects `x` or `x,y`, got `{s}`")))
    }
}

pub fn cmd_solve(mut a: SolveArgs) -> Result<i32> {
    let cfg = Config::load(a.config.as_deref())?;
    cfg.fill(&mut a.space, "space")?;
    cfg.fill(&mut a.h, "H")?;
    cfg.fill(&mut a.c, "C")?;
    cfg.fill(&mut a.m_level, "M")?;
    cfg.fill(&mut a.m, "m")?;
    cfg.fill(&mut a.start, "start")?;
    cfg.fill(&mut a.step, "step")?;
    cfg.fill(&mut a.tol_root, "tol_root")?;
    cfg.fill(&mut a.max_steps, "max_steps")?;
    cfg.fill(&mut a.branch, "branch")?;
    cfg.fill(&mut a.turning_eps, "turning_eps")?;
    cfg.fill(&mut a.length, "length")?;
    cfg.fill(&mut a.out, "out")?;
    cfg.fill(&mut a.meta, "meta")?;
    cfg.warn_unused();

    let kind = parse_space(&a.space)?;
    let h = require(&a.h, "H")?;
    let m = require(&a.m, "m")?;
    let (c, m_level) = flux_pair(a.c, a.m_level)?;
    let d = SolverConfig::default();
    let scfg = SolverConfig {
        step: a.step.unwrap_or(d.step),
        tol_root: a.tol_root.unwrap_or(d.tol_root),
        max_steps: a.max_steps.unwrap_or(d.max_steps),
        branch: a.branch.unwrap_or(d.branch),
        turning_eps: a.turning_eps.unwrap_or(d.turning_eps),
        length: a.length,
    };
    let result = match kind {
        SpaceFormKind::Euclidean3 => {
            if a.start.is_some() {
                eprintln!("warning: --start is ignored in r3; the trace starts on the sled level set");
            }
            solver::solve_r3(h, m_level, m, &scfg)
        }
        _ => {
            let start = parse_start(&require(&a.start, "start")?)?;
            if kind == SpaceFormKind::Sphere3 {
                solver::solve_s3(h, c, m, start, &scfg)
            } else {
                solver::solve_h3(h, c, m, start, &scfg)
            }
        }
    };
    let sol = match result {
        Ok(s) => s,
        Err(Error::AxisTouch { s, partial: Some(curve) }) => {
            // keep what was traced before the axis
            if let Some(out) = &a.out {
                let mut w = create(out)?;
                fio::write_curve(&mut w, &curve, DEFAULT_CURVE_SAMPLES)?;
                w.flush()?;
                eprintln!("partial curve up to s = {s} written to {}", out.display());
            }
            return Err(Error::AxisTouch { s, partial: None });
        }
        Err(e) => return Err(e),
    };
    with_output(a.out.as_deref(), |w| fio::write_curve(w, &sol.curve, DEFAULT_CURVE_SAMPLES))?;
    let meta_path = a.meta.clone().or_else(|| a.out.as_ref().map(|p| p.with_extension("json")));
    if let Some(p) = &meta_path {
        fio::write_json(create(p)?, &sol.meta())?;
    }
    let (lo, hi) = sol.curve.domain();
    let summary = format!(
        "solved {} H={} C={} m={} domain=[{lo}, {hi}] termination={:?} steps={} max_residual={:.3e}",
        kind.tag(),
        h,
        sol.c,
        m,
        sol.diagnostics.termination,
        sol.diagnostics.steps,
        sol.diagnostics.max_residual
    );
    if a.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(EXIT_OK)
}

/// Size of the terms that cancel in `C`; constancy is judged relative to it.
fn flux_scale(t: &Twizzler, h: f64, u: &[f64]) -> Result<f64> {
    let mut r2: f64 = 0.0;
    for &ui in u {
        r2 = r2.max(t.base().eval(ui)?.pos.norm_sqr());
    }
    Ok(1f64.max(h.abs() * PI * r2))
}

pub fn cmd_check(mut a: CheckArgs) -> Result<i32> {
    let cfg = Config::load(a.source.config.as_deref())?;
    a.source.merge(&cfg)?;
    cfg.fill(&mut a.h, "H")?;
    cfg.fill(&mut a.samples, "samples")?;
    cfg.fill(&mut a.tol, "tol")?;
    cfg.fill(&mut a.report, "report")?;
    cfg.warn_unused();

    let src = a.source.load()?;
    let h = require(&a.h, "H")?;
    let samples = a.samples.unwrap_or(200);
    let tol = a.tol.unwrap_or(1e-7);
    if samples < 2 {
        return Err(Error::InvalidInput("--samples must be at least 2".into()));
    }
    let t = src.twizzler()?;
    let u = src.curve.grid(samples);
    let report = check_constancy(&t, h, &u)?;
    let scale = flux_scale(&t, h, &u)?;
    if let Some(p) = &a.report {
        let mut w = create(p)?;
        report.write_csv(&mut w)?;
        w.flush()?;
    }
    let mut ok = report.is_constant(tol * scale);
    println!(
        "median_C={:.15e} max_dev={:.3e} max_dev_omega={:.3e} max_discrepancy={:.3e} tol={:.3e}",
        report.median_c,
        report.max_dev,
        report.max_dev_omega,
        report.max_discrepancy,
        tol * scale
    );
    if src.kind == SpaceFormKind::Euclidean3 {
        let eq = equivalence_check(&src.curve, src.m, h, samples)?;
        let link = eq.link_residual.unwrap_or(0.0);
        println!(
            "M={:.15e} max_dev_M={:.3e} max_link={:.3e}",
            eq.m_level.unwrap_or(f64::NAN),
            eq.m_deviation.unwrap_or(0.0),
            link
        );
        ok &= !eq.non_constant(tol * scale) && link <= tol * scale;
    }
    if ok {
        println!("verdict=CMC");
        Ok(EXIT_OK)
    } else {
        println!("verdict=NON_CMC");
        Ok(EXIT_VERDICT)
    }
}

pub fn cmd_mesh(mut a: MeshArgs) -> Result<i32> {
    let cfg = Config::load(a.source.config.as_deref())?;
    a.source.merge(&cfg)?;
    cfg.fill(&mut a.nu, "nu")?;
    cfg.fill(&mut a.nv, "nv")?;
    cfg.fill(&mut a.u_range, "u_range")?;
    cfg.fill(&mut a.v_range, "v_range")?;
    cfg.fill(&mut a.out, "out")?;
    cfg.fill(&mut a.raw, "raw")?;
    cfg.warn_unused();

    let src = a.source.load()?;
    let out = require(&a.out, "out")?;
    let u_range = match &a.u_range {
        Some(s) => parse_pair(s, "u_range")?,
        None => src.curve.domain(),
    };
    let v_range = match &a.v_range {
        Some(s) => parse_pair(s, "v_range")?,
        None => (0.0, TAU),
    };
    let (nu, nv) = (a.nu.unwrap_or(64), a.nv.unwrap_or(64));
    let t = src.twizzler()?;
    let mesh = t.sample_mesh(u_range, v_range, nu, nv)?;
    let mut w = create(&out)?;
    mesh.write_obj(&mut w)?;
    w.flush()?;
    let mut raw_path = a.raw.clone();
    if raw_path.is_none() && src.kind != SpaceFormKind::Euclidean3 {
        raw_path = Some(out.with_extension("csv"));
    }
    if let Some(p) = &raw_path {
        let mut w = create(p)?;
        mesh.write_raw_csv(&mut w)?;
        w.flush()?;
    }
    println!("wrote {} vertices and {} faces to {}", mesh.vertices.len(), mesh.faces.len(), out.display());
    Ok(EXIT_OK)
}

pub fn cmd_treadmill(mut a: TreadmillArgs) -> Result<i32> {
    let cfg = Config::load(a.config.as_deref())?;
    cfg.fill(&mut a.input, "input")?;
    cfg.fill(&mut a.radius, "radius")?;
    cfg.fill(&mut a.ell, "ell")?;
    cfg.fill(&mut a.samples, "samples")?;
    cfg.fill(&mut a.out, "out")?;
    let mut reconstruct = None::<bool>;
    cfg.fill(&mut reconstruct, "reconstruct")?;
    cfg.warn_unused();
    let reconstruct = a.reconstruct || reconstruct.unwrap_or(false);
    let ell = a.ell.unwrap_or(1.0);
    if !(0.0..=1.0).contains(&ell) {
        eprintln!("warning: ell = {ell} lies outside [0, 1]; computing the treadmill anyway");
    }

    if reconstruct {
        let input = require(&a.input, "input")?;
        let path = fio::read_path(BufReader::new(File::open(&input)?), ell)?;
        let curve = match treadmill::reconstruct(&path) {
            Ok(c) => c,
            Err(Error::SingularDenominator { at, arcs }) => {
                // emit the first smooth arc so the caller has something to inspect
                if let (Some(first), Some(out)) = (arcs.first(), &a.out) {
                    let mut w = create(out)?;
                    fio::write_curve(&mut w, first, DEFAULT_CURVE_SAMPLES)?;
                    w.flush()?;
                }
                return Err(Error::SingularDenominator { at, arcs });
            }
            Err(e) => return Err(e),
        };
        with_output(a.out.as_deref(), |w| fio::write_curve(w, &curve, DEFAULT_CURVE_SAMPLES))?;
        return Ok(EXIT_OK);
    }

    let curve = match (&a.input, a.radius) {
        (Some(p), None) => fio::read_curve(BufReader::new(File::open(p)?))?,
        (None, Some(r)) if r > 0.0 => BaseCurve::circle(r, C64::new(0.0, 0.0)),
        (None, Some(r)) => return Err(Error::InvalidInput(format!("--radius must be positive, got {r}"))),
        _ => return Err(Error::InvalidInput("give exactly one of --input, --radius".into())),
    };
    let params = match (a.samples, curve.nodes()) {
        (Some(n), _) => curve.grid(n),
        (None, Some(nodes)) => nodes.to_vec(),
        (None, None) => curve.grid(DEFAULT_CURVE_SAMPLES),
    };
    let path = treadmill::treadmill(&curve, ell, &params)?;
    with_output(a.out.as_deref(), |w| fio::write_path(w, &path))?;
    Ok(EXIT_OK)
}

pub fn cmd_flux(mut a: FluxArgs) -> Result<i32> {
    let cfg = Config::load(a.source.config.as_deref())?;
    a.source.merge(&cfg)?;
    cfg.fill(&mut a.h, "H")?;
    cfg.fill(&mut a.samples, "samples")?;
    cfg.fill(&mut a.out, "out")?;
    cfg.warn_unused();

    let src = a.source.load()?;
    let h = require(&a.h, "H")?;
    let t = src.twizzler()?;
    let u = src.curve.grid(a.samples.unwrap_or(32));
    with_output(a.out.as_deref(), |w| {
        writeln!(w, "u,conormal,shaving,omega,closed_form")?;
        for &ui in &u {
            let (cn, sh) = (flux_conormal(&t, ui)?, flux_shaving(&t, ui)?);
            let c = conserved_quantity(&t, ui, h)?;
            writeln!(w, "{ui:.16e},{cn:.16e},{sh:.16e},{:.16e},{c:.16e}", cn - h * sh)?;
        }
        Ok(())
    })?;
    Ok(EXIT_OK)
}

pub fn cmd_equiv(mut a: EquivArgs) -> Result<i32> {
    let cfg = Config::load(a.source.config.as_deref())?;
    a.source.merge(&cfg)?;
    cfg.fill(&mut a.h, "H")?;
    cfg.fill(&mut a.samples, "samples")?;
    cfg.fill(&mut a.tol, "tol")?;
    cfg.fill(&mut a.out, "out")?;
    cfg.warn_unused();

    let src = a.source.load()?;
    if src.kind != SpaceFormKind::Euclidean3 {
        return Err(Error::InvalidInput("the C = -pi M equivalence is an R^3 statement; use --space r3".into()));
    }
    let h = require(&a.h, "H")?;
    let tol = a.tol.unwrap_or(1e-7);
    let t = src.twizzler()?;
    let u = src.curve.grid(a.samples.unwrap_or(200));
    let path = treadmill::treadmill(&src.curve, 1.0, &u)?;
    let mut worst: f64 = 0.0;
    let mut rows = Vec::with_capacity(u.len());
    for (i, &ui) in u.iter().enumerate() {
        let c = conserved_quantity(&t, ui, h)?;
        let p = perdomo_coords(path.point(i));
        let ml = perdomo_level(p.re, p.im, h, src.m);
        worst = worst.max((c + PI * ml).abs());
        rows.push((ui, c, ml));
    }
    with_output(a.out.as_deref(), |w| {
        writeln!(w, "u,C,M,minus_pi_M,abs_diff")?;
        for &(ui, c, ml) in &rows {
            writeln!(w, "{ui:.16e},{c:.16e},{ml:.16e},{:.16e},{:.3e}", -PI * ml, (c + PI * ml).abs())?;
        }
        Ok(())
    })?;
    eprintln!("max |C + pi M| = {worst:.3e}");
    Ok(if worst <= tol { EXIT_OK } else { EXIT_VERDICT })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flux_pair_fills_the_other_value() {
        let (c, ml) = flux_pair(Some(-PI), None).unwrap();
        assert_eq!((c, ml), (-PI, 1.0));
        let (c, ml) = flux_pair(None, Some(0.5)).unwrap();
        assert_eq!((c, ml), (-0.5 * PI, 0.5));
        assert!(flux_pair(Some(1.0), Some(1.0)).is_err());
        assert!(flux_pair(None, None).is_err());
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(exit_code(&Error::InvalidInput("x".into())), EXIT_USAGE);
        assert_eq!(exit_code(&Error::Parse { line: 1, msg: "x".into() }), EXIT_USAGE);
        assert_eq!(exit_code(&Error::NoRoot { radius: 1.0, ratio: 2.0 }), EXIT_NUMERIC);
        assert_eq!(exit_code(&Error::EmptyLevelSet { h: 1.0, m_level: 0.0, pitch: 1.0 }), EXIT_NUMERIC);
    }

    #[test]
    fn negative_numbers_parse_as_values() {
        let cli = Cli::try_parse_from(["helicoidal", "solve", "--H", "-0.5", "--M", "1", "--m", "1"]).unwrap();
        let Command::Solve(a) = cli.command else { panic!() };
        assert_eq!(a.h, Some(-0.5));
    }

    #[test]
    fn missing_required_value_is_a_usage_error() {
        assert_eq!(run(["helicoidal", "solve", "--H", "0", "--M", "0"]), EXIT_USAGE);
        assert_eq!(run(["helicoidal", "bogus"]), EXIT_USAGE);
    }

    #[test]
    fn start_parsing() {
        assert_eq!(parse_start("0.5").unwrap(), C64::new(0.5, 0.0));
        assert_eq!(parse_start("0.5, -0.25").unwrap(), C64::new(0.5, -0.25));
        assert!(parse_start("a").is_err());
    }
}
