//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io;
use crate::selftest::{format_report, run_selftest, SelfTestProviders};
use crate::states::{
    amplitude_grid, bg_core_radius, count_phase_jumps, derive_scales, ring_radius, Axis,
    OpticalConfig, StateFamily, VortexSpec,
};
use crate::wigner::{
    negativity_scan, wigner_slice, DefinitionQuad, Method, NegativitySettings, Plane, SliceRequest,
    SCAN_MAX_CHARGE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Quad,
    Phase,
    Wigner,
    Negvol,
    Selftest,
}

impl CommandKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommandKind::Quad => "quad",
            CommandKind::Phase => "phase",
            CommandKind::Wigner => "wigner",
            CommandKind::Negvol => "negvol",
            CommandKind::Selftest => "selftest",
        }
    }
}

/// Fully resolved and validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub state: StateFamily,
    pub q: u32,
    pub alpha: f64,
    pub lambda_nm: f64,
    pub focal_cm: f64,
    pub grid: usize,
    /// Half widths of axis1 and axis2 (for negvol: x and p_y).
    pub extent: [f64; 2],
    pub plane: Plane,
    pub fixed: [f64; 2],
    pub method: Method,
    pub q_min: u32,
    pub q_max: u32,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn optical(&self) -> Result<OpticalConfig> {
        OpticalConfig::new(self.lambda_nm / 1e9, self.focal_cm / 100.0)
    }

    /// Arguments that reproduce this run, excluding `--out` and `--threads`
    /// (neither affects file contents).
    pub fn canonical_args(&self) -> Vec<String> {
        let mut a = vec![self.command.as_str().to_string()];
        let mut push = |k: &str, v: String| {
            a.push(format!("--{k}"));
            a.push(v);
        };
        let pair = |v: [f64; 2]| format!("{},{}", v[0], v[1]);
        match self.command {
            CommandKind::Quad | CommandKind::Phase => {
                push("state", self.state.as_str().into());
                push("q", self.q.to_string());
                push("alpha", self.alpha.to_string());
                push("lambda-nm", self.lambda_nm.to_string());
                push("focal-cm", self.focal_cm.to_string());
                push("grid", self.grid.to_string());
                push("extent", self.extent[0].to_string());
            }
            CommandKind::Wigner => {
                push("q", self.q.to_string());
                push("alpha", self.alpha.to_string());
                push("lambda-nm", self.lambda_nm.to_string());
                push("focal-cm", self.focal_cm.to_string());
                push("plane", self.plane.as_str().into());
                push("fixed", pair(self.fixed));
                push("grid", self.grid.to_string());
                push("extent", pair(self.extent));
                push("method", self.method.as_str().into());
            }
            CommandKind::Negvol => {
                push("alpha", self.alpha.to_string());
                push("lambda-nm", self.lambda_nm.to_string());
                push("focal-cm", self.focal_cm.to_string());
                push("q-min", self.q_min.to_string());
                push("q-max", self.q_max.to_string());
                push("grid", self.grid.to_string());
                push("extent", pair(self.extent));
                push("method", self.method.as_str().into());
            }
            CommandKind::Selftest => {}
        }
        a
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "pqovs",
    version,
    about = "Perfect quantum optical vortex states"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Complex quadrature amplitude on an (x, y) grid.
    Quad(FieldArgs),
    /// Phase of the amplitude on an (x, y) grid, with the winding count.
    Phase(FieldArgs),
    /// A 2-D slice of the Wigner function.
    Wigner(WignerArgs),
    /// Negativity volume on the x-p_y slice over a range of charges.
    Negvol(NegvolArgs),
    /// Reduced-size cross-module checks.
    Selftest(SelftestArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum StateArg {
    Bg,
    Perfect,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MethodArg {
    Analytic,
    Definition,
}

#[derive(Args, Debug)]
struct Optics {
    /// Coherent amplitude |zeta|.
    #[arg(long, allow_hyphen_values = true, default_value_t = 15.0)]
    alpha: f64,
    #[arg(
        long = "lambda-nm",
        allow_hyphen_values = true,
        default_value_t = 810.0
    )]
    lambda_nm: f64,
    #[arg(long = "focal-cm", allow_hyphen_values = true, default_value_t = 70.0)]
    focal_cm: f64,
}

#[derive(Args, Debug)]
struct Common {
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FieldArgs {
    #[arg(long, value_enum, default_value = "perfect")]
    state: StateArg,
    /// Topological charge.
    #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
    q: u32,
    #[command(flatten)]
    optics: Optics,
    #[arg(long, allow_hyphen_values = true, default_value_t = 256)]
    grid: usize,
    /// Half width of both axes in sigma units [default: alpha+10 for
    /// perfect, 6 for bg].
    #[arg(long, allow_hyphen_values = true)]
    extent: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct WignerArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = 2)]
    q: u32,
    #[command(flatten)]
    optics: Optics,
    /// One of xy, x_px, x_py, y_py, y_px, px_py.
    #[arg(long, default_value = "x_py")]
    plane: String,
    /// Held coordinates as "a,b" in (x, y, px, py) order.
    #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
    fixed: String,
    #[arg(long, allow_hyphen_values = true, default_value_t = 129)]
    grid: usize,
    /// Half widths "e" or "e1,e2" [default: alpha+6 for positions, 10 for
    /// momenta].
    #[arg(long, allow_hyphen_values = true)]
    extent: Option<String>,
    #[arg(long, value_enum, default_value = "definition")]
    method: MethodArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct NegvolArgs {
    #[command(flatten)]
    optics: Optics,
    #[arg(long = "q-min", allow_hyphen_values = true, default_value_t = 0)]
    q_min: u32,
    #[arg(long = "q-max", allow_hyphen_values = true, default_value_t = 8)]
    q_max: u32,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1025)]
    grid: usize,
    /// Half widths "x,p" [default: alpha+6,10].
    #[arg(long, allow_hyphen_values = true)]
    extent: Option<String>,
    #[arg(long, value_enum, default_value = "definition")]
    method: MethodArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    #[arg(long)]
    threads: Option<usize>,
}

/// Result of argument parsing that does not yield a run.
#[derive(Debug)]
pub enum ParseFailure {
    /// `--help` or `--version`: print and exit 0.
    Display(String),
    Usage(String),
}

impl ParseFailure {
    pub fn exit_code(&self) -> i32 {
        match self {
            ParseFailure::Display(_) => 0,
            ParseFailure::Usage(_) => 1,
        }
    }
}

fn usage(flag: &str, msg: impl std::fmt::Display) -> ParseFailure {
    ParseFailure::Usage(format!("error: invalid value for '--{flag}': {msg}"))
}

fn parse_pair(flag: &str, s: &str) -> std::result::Result<Vec<f64>, ParseFailure> {
    let v: std::result::Result<Vec<f64>, _> =
        s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match v {
        Ok(v) if !v.is_empty() && v.len() <= 2 && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(usage(
            flag,
            format!("expected one or two comma-separated numbers, got {s:?}"),
        )),
    }
}

fn positive(flag: &str, v: f64) -> std::result::Result<f64, ParseFailure> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(usage(flag, format!("must be positive and finite, got {v}")))
    }
}

fn axis_default(alpha: f64, axis: usize) -> f64 {
    if axis < 2 {
        alpha + 6.0
    } else {
        10.0
    }
}

pub fn parse_args<I, T>(argv: I) -> std::result::Result<RunConfig, ParseFailure>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind;
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                ParseFailure::Display(e.render().to_string())
            }
            _ => ParseFailure::Usage(e.render().to_string()),
        }
    })?;

    let mut cfg = RunConfig {
        command: CommandKind::Selftest,
        state: StateFamily::Perfect,
        q: 0,
        alpha: 15.0,
        lambda_nm: 810.0,
        focal_cm: 70.0,
        grid: 0,
        extent: [0.0, 0.0],
        plane: Plane::XPy,
        fixed: [0.0, 0.0],
        method: Method::Definition,
        q_min: 0,
        q_max: 0,
        threads: None,
        out: None,
    };
    let set_optics = |cfg: &mut RunConfig, o: &Optics| -> std::result::Result<(), ParseFailure> {
        cfg.alpha = positive("alpha", o.alpha)?;
        cfg.lambda_nm = positive("lambda-nm", o.lambda_nm)?;
        cfg.focal_cm = positive("focal-cm", o.focal_cm)?;
        Ok(())
    };
    let set_common = |cfg: &mut RunConfig, c: &Common| {
        cfg.threads = c.threads;
        cfg.out = Some(c.out.clone());
    };
    let method = |m: MethodArg| match m {
        MethodArg::Analytic => Method::Analytic,
        MethodArg::Definition => Method::Definition,
    };

    match cli.command {
        Cmd::Quad(a) => {
            cfg.command = CommandKind::Quad;
            field_args(&mut cfg, a, set_optics, set_common)?;
        }
        Cmd::Phase(a) => {
            cfg.command = CommandKind::Phase;
            field_args(&mut cfg, a, set_optics, set_common)?;
        }
        Cmd::Wigner(a) => {
            cfg.command = CommandKind::Wigner;
            set_optics(&mut cfg, &a.optics)?;
            set_common(&mut cfg, &a.common);
            cfg.q = a.q;
            cfg.plane = a.plane.parse().map_err(|e: Error| usage("plane", e))?;
            let f = parse_pair("fixed", &a.fixed)?;
            if f.len() != 2 {
                return Err(usage("fixed", "expected two comma-separated numbers"));
            }
            cfg.fixed = [f[0], f[1]];
            cfg.grid = a.grid;
            let (i1, i2) = cfg.plane.varying();
            cfg.extent = match &a.extent {
                None => [axis_default(cfg.alpha, i1), axis_default(cfg.alpha, i2)],
                Some(s) => {
                    let v = parse_pair("extent", s)?;
                    [v[0], *v.get(1).unwrap_or(&v[0])]
                }
            };
            cfg.method = method(a.method);
        }
        Cmd::Negvol(a) => {
            cfg.command = CommandKind::Negvol;
            set_optics(&mut cfg, &a.optics)?;
            set_common(&mut cfg, &a.common);
            cfg.q_min = a.q_min;
            cfg.q_max = a.q_max;
            cfg.grid = a.grid;
            cfg.extent = match &a.extent {
                None => [cfg.alpha + 6.0, 10.0],
                Some(s) => {
                    let v = parse_pair("extent", s)?;
                    [v[0], *v.get(1).unwrap_or(&v[0])]
                }
            };
            cfg.method = method(a.method);
        }
        Cmd::Selftest(a) => {
            cfg.threads = a.threads;
        }
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn field_args(
    cfg: &mut RunConfig,
    a: FieldArgs,
    set_optics: impl Fn(&mut RunConfig, &Optics) -> std::result::Result<(), ParseFailure>,
    set_common: impl Fn(&mut RunConfig, &Common),
) -> std::result::Result<(), ParseFailure> {
    set_optics(cfg, &a.optics)?;
    set_common(cfg, &a.common);
    cfg.state = match a.state {
        StateArg::Bg => StateFamily::Bg,
        StateArg::Perfect => StateFamily::Perfect,
    };
    cfg.q = a.q;
    cfg.grid = a.grid;
    let e = match a.extent {
        Some(e) => e,
        None => match cfg.state {
            StateFamily::Perfect => cfg.alpha + 10.0,
            StateFamily::Bg => 6.0,
        },
    };
    cfg.extent = [e, e];
    Ok(())
}

fn validate(cfg: &RunConfig) -> std::result::Result<(), ParseFailure> {
    if cfg.threads == Some(0) {
        return Err(usage("threads", "must be at least 1"));
    }
    if cfg.command == CommandKind::Selftest {
        return Ok(());
    }
    if cfg.alpha * cfg.alpha > crate::states::MAX_ALPHA_SQ {
        return Err(usage(
            "alpha",
            format!("alpha^2 must not exceed {}", crate::states::MAX_ALPHA_SQ),
        ));
    }
    for (k, &e) in cfg.extent.iter().enumerate() {
        positive("extent", e).map_err(|_| {
            usage(
                "extent",
                format!("half width {} must be positive, got {e}", k + 1),
            )
        })?;
    }
    match cfg.command {
        CommandKind::Quad | CommandKind::Phase => {
            if cfg.q > crate::specfun::MAX_ORDER {
                return Err(usage(
                    "q",
                    format!("must not exceed {}", crate::specfun::MAX_ORDER),
                ));
            }
            if !(16..=4096).contains(&cfg.grid) {
                return Err(usage("grid", "must be between 16 and 4096"));
            }
        }
        CommandKind::Wigner => {
            if cfg.q > crate::specfun::MAX_ORDER {
                return Err(usage(
                    "q",
                    format!("must not exceed {}", crate::specfun::MAX_ORDER),
                ));
            }
            if !(3..=2049).contains(&cfg.grid) {
                return Err(usage("grid", "must be between 3 and 2049"));
            }
        }
        CommandKind::Negvol => {
            if cfg.q_min > cfg.q_max {
                return Err(usage("q-min", "must not exceed --q-max"));
            }
            if cfg.q_max > SCAN_MAX_CHARGE {
                return Err(usage("q-max", format!("must not exceed {SCAN_MAX_CHARGE}")));
            }
            if !(5..=2049).contains(&cfg.grid) || cfg.grid.is_multiple_of(2) {
                return Err(usage("grid", "must be odd and between 5 and 2049"));
            }
        }
        CommandKind::Selftest => {}
    }
    Ok(())
}

/// Outcome of a successful run: text for stdout.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub stdout: String,
    pub stderr: String,
    /// Nonzero when the run completed but a check failed.
    pub status: i32,
}

fn run_meta(cfg: &RunConfig) -> BTreeMap<String, Value> {
    let mut m = BTreeMap::new();
    m.insert("command".to_string(), json!(cfg.command.as_str()));
    m.insert("args".to_string(), json!(cfg.canonical_args()));
    m
}

/// Executes a validated configuration on a thread pool sized by `--threads`.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start thread pool: {e}")))?;
    pool.install(|| execute_inner(cfg))
}

fn out_path(cfg: &RunConfig) -> Result<&PathBuf> {
    cfg.out
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("--out is required".into()))
}

fn execute_inner(cfg: &RunConfig) -> Result<RunOutput> {
    let mut extra = run_meta(cfg);
    match cfg.command {
        CommandKind::Selftest => {
            let results = run_selftest(&SelfTestProviders::default());
            let ok = results.iter().all(|r| r.passed);
            Ok(RunOutput {
                stdout: format_report(&results),
                stderr: String::new(),
                status: if ok { 0 } else { 2 },
            })
        }
        CommandKind::Quad | CommandKind::Phase => {
            let optics = cfg.optical()?;
            let spec = VortexSpec::new(cfg.alpha, cfg.q)?;
            let e = cfg.extent[0];
            let field = amplitude_grid(
                cfg.state,
                &optics,
                &spec,
                Axis::symmetric("x", e, cfg.grid)?,
                Axis::symmetric("y", e, cfg.grid)?,
            )?;
            let path = out_path(cfg)?;
            let mut note = String::new();
            let text = if cfg.command == CommandKind::Quad {
                io::complex_field_csv(&field, &extra)
            } else {
                let radius = match cfg.state {
                    StateFamily::Perfect => ring_radius(&derive_scales(&optics, &spec)?, &spec)?,
                    StateFamily::Bg => bg_core_radius(&spec)?,
                };
                extra.insert("winding_radius".into(), json!(radius));
                match count_phase_jumps(&field, radius) {
                    Ok(n) => {
                        extra.insert("phase_jumps".into(), json!(n));
                        note = format!("phase jumps on r = {radius:.6}: {n}\n");
                    }
                    Err(err) => {
                        extra.insert("phase_jumps_error".into(), json!(err.to_string()));
                    }
                }
                let phase = field.map(|z| z.arg());
                io::real_field_csv(&phase, &extra)
            };
            io::write_atomic(path, &text)?;
            Ok(RunOutput {
                stdout: format!("{note}wrote {}\n", path.display()),
                stderr: String::new(),
                status: 0,
            })
        }
        CommandKind::Wigner => {
            let optics = cfg.optical()?;
            let spec = VortexSpec::new(cfg.alpha, cfg.q)?;
            let (l1, l2) = cfg.plane.axis_labels();
            let req = SliceRequest {
                plane: cfg.plane,
                fixed: cfg.fixed,
                axis1: Axis::symmetric(l1, cfg.extent[0], cfg.grid)?,
                axis2: Axis::symmetric(l2, cfg.extent[1], cfg.grid)?,
                method: cfg.method,
                quad: DefinitionQuad::default(),
            };
            let slice = wigner_slice(&optics, &spec, &req)?;
            let path = out_path(cfg)?;
            io::write_atomic(path, &io::real_field_csv(&slice.grid, &extra))?;
            Ok(RunOutput {
                stdout: format!(
                    "slice min/max = {:.6e}\nwrote {}\n",
                    slice.grid.min() / slice.grid.max(),
                    path.display()
                ),
                stderr: String::new(),
                status: 0,
            })
        }
        CommandKind::Negvol => {
            let optics = cfg.optical()?;
            let settings = NegativitySettings {
                x_extent: Some(cfg.extent[0]),
                p_extent: cfg.extent[1],
                grid: cfg.grid,
                ..NegativitySettings::default()
            };
            let curve = negativity_scan(
                &optics, cfg.alpha, cfg.q_min, cfg.q_max, cfg.method, &settings,
            )?;
            let path = out_path(cfg)?;
            io::write_atomic(path, &io::curve_csv(&curve, &extra))?;
            let mut stdout = String::new();
            for e in &curve.entries {
                match (&e.n_value, &e.error) {
                    (Some(v), _) => stdout.push_str(&format!("q = {:2}  n = {v:.6}\n", e.charge)),
                    (None, Some(m)) => {
                        stdout.push_str(&format!("q = {:2}  failed: {m}\n", e.charge))
                    }
                    _ => {}
                }
            }
            stdout.push_str(&format!("wrote {}\n", path.display()));
            let failed = curve.failures();
            if failed.is_empty() {
                return Ok(RunOutput {
                    stdout,
                    stderr: String::new(),
                    status: 0,
                });
            }
            let qs: Vec<String> = failed.iter().map(|e| e.charge.to_string()).collect();
            Ok(RunOutput {
                stdout,
                stderr: format!(
                    "error: negativity volume failed for q = {}\n",
                    qs.join(", ")
                ),
                status: Error::Accuracy(String::new()).exit_code(),
            })
        }
    }
}

/// Parses, runs and reports; returns the process exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match parse_args(argv) {
        Ok(c) => c,
        Err(ParseFailure::Display(s)) => {
            print!("{s}");
            return 0;
        }
        Err(f @ ParseFailure::Usage(_)) => {
            if let ParseFailure::Usage(s) = &f {
                eprint!("{s}");
                if !s.ends_with('\n') {
                    eprintln!();
                }
            }
            return f.exit_code();
        }
    };
    match execute(&cfg) {
        Ok(out) => {
            print!("{}", out.stdout);
            eprint!("{}", out.stderr);
            out.status
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
