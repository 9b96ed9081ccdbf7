//! `twophoton`: population traces, peak sweeps and oracle checks for the
//! two-photon cavity array.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use twophoton::dynamics::{populations, uniform_grid};
use twophoton::io::{write_json, write_sweep_csv, write_trace_csv};
use twophoton::sweep::{scan, SweepAxis, SweepSpec, TimeWindow, SAMPLES_PER_BEAT};
use twophoton::verify::{run_verification, VerifyOptions};
use twophoton::{HoppingPattern, SystemParams};

#[derive(Parser, Debug)]
#[command(name = "twophoton", version, about = "Two-photon state transfer through a coupled-cavity array")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Site- and channel-resolved populations after site-1 injection.
    Evolve(EvolveArgs),
    /// Arrival-peak time and height of the end-site populations along one axis.
    Sweep(SweepArgs),
    /// Compare the closed-form solutions against the dense oracle.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PatternArg {
    Uniform,
    Staggered,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AxisArg {
    SystemSize,
    Beta,
    Kappa,
    EncodingK,
    Hopping,
}

impl From<AxisArg> for SweepAxis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::SystemSize => SweepAxis::SystemSize,
            AxisArg::Beta => SweepAxis::Beta,
            AxisArg::Kappa => SweepAxis::Kappa,
            AxisArg::EncodingK => SweepAxis::EncodingK,
            AxisArg::Hopping => SweepAxis::Hopping,
        }
    }
}

#[derive(Args, Debug)]
struct SystemArgs {
    /// Number of cavities.
    #[arg(long = "n", default_value_t = 100)]
    n: usize,
    /// Atom–field coupling λ (a multiple of ξ unless --absolute-units).
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    lambda: f64,
    /// Inter-cavity hopping ξ.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    xi: f64,
    /// Detuning Δ (a multiple of ξ unless --absolute-units).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    delta: f64,
    /// Initial mixing angle in radians, or a preset such as `pi/4`.
    #[arg(long, default_value = "pi/4", conflicts_with = "beta_deg")]
    beta: String,
    /// Initial mixing angle in degrees.
    #[arg(long)]
    beta_deg: Option<f64>,
    #[arg(long, value_enum, default_value_t = PatternArg::Uniform)]
    pattern: PatternArg,
    /// Dimerization κ of the staggered chain.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    kappa: f64,
    /// Read λ and Δ as absolute energies instead of multiples of ξ.
    #[arg(long)]
    absolute_units: bool,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output file; stdout when omitted (no metadata sidecar).
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Debug)]
struct EvolveArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// End of the time grid; defaults to 2N/ξ.
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of uniform time samples on [0, t_max].
    #[arg(long, default_value_t = 2001)]
    points: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, value_enum)]
    axis: AxisArg,
    /// Comma-separated axis values; angles accept presets like `pi/6`.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    values: Vec<String>,
    /// Score encoded transfer on k odd sites instead of site-1 injection.
    #[arg(long)]
    encoding_k: Option<usize>,
    /// Number of decoding sites; defaults to k.
    #[arg(long)]
    encoding_r: Option<usize>,
    /// Fixed search window end; otherwise the window is [0, factor·N/ξ].
    #[arg(long, conflicts_with = "window_factor")]
    t_max: Option<f64>,
    #[arg(long)]
    window_factor: Option<f64>,
    /// Coarse samples before golden-section refinement.
    #[arg(long, default_value_t = twophoton::sweep::DEFAULT_GRID_POINTS)]
    grid_points: usize,
    /// Refinement bracket in units of 1/ξ.
    #[arg(long = "refine-tol", default_value_t = twophoton::sweep::DEFAULT_REFINE_TOLERANCE)]
    refine_tolerance: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 2)]
    min_n: usize,
    #[arg(long, default_value_t = 12)]
    max_n: usize,
    /// Random parameter draws per chain length and pattern.
    #[arg(long, default_value_t = 50)]
    draws: usize,
    #[arg(long, default_value_t = VerifyOptions::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Write the report as JSON to this file.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Scale λ by 1 + δ in the closed-form path (harness self-test).
    #[arg(long, hide = true, allow_negative_numbers = true)]
    corrupt_lambda: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Tolerance(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Tolerance(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<twophoton::Error> for CliError {
    fn from(e: twophoton::Error) -> Self {
        use twophoton::Error as E;
        match e {
            E::Io(_) | E::Json(_) => CliError::Io(e.to_string()),
            E::Csv(ref c) if c.is_io_error() => CliError::Io(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parse an angle: a plain number, or `[a][*]pi[/b]` (`π` also accepted).
fn parse_angle(text: &str) -> CliResult<f64> {
    let s: String = text.trim().replace('π', "pi").chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || CliError::Validation(format!("cannot parse angle `{text}`"));
    let Some(at) = s.find("pi") else {
        return s.parse().map_err(|_| bad());
    };
    let coeff = s[..at].trim_end_matches('*');
    let coeff: f64 = match coeff {
        "" => 1.0,
        "-" => -1.0,
        c => c.parse().map_err(|_| bad())?,
    };
    let rest = &s[at + 2..];
    let denom: f64 = match rest.strip_prefix('/') {
        Some(d) => d.parse().map_err(|_| bad())?,
        None if rest.is_empty() => 1.0,
        None => return Err(bad()),
    };
    Ok(coeff * std::f64::consts::PI / denom)
}

impl SystemArgs {
    fn beta(&self) -> CliResult<f64> {
        match self.beta_deg {
            Some(deg) => Ok(deg.to_radians()),
            None => parse_angle(&self.beta),
        }
    }

    /// Raw parameters in absolute units, not yet validated.
    fn raw_params(&self) -> CliResult<SystemParams> {
        let scale = if self.absolute_units {
            1.0
        } else {
            if self.xi.is_nan() || self.xi <= 0.0 {
                return Err(CliError::Validation("ξ must be > 0 unless --absolute-units is given".into()));
            }
            self.xi
        };
        let pattern = match self.pattern {
            PatternArg::Uniform => HoppingPattern::Uniform,
            PatternArg::Staggered => HoppingPattern::Staggered { kappa: self.kappa },
        };
        Ok(SystemParams {
            n_cavities: self.n,
            coupling: self.lambda * scale,
            hopping: self.xi,
            detuning: self.delta * scale,
            beta: self.beta()?,
            pattern,
        })
    }

    fn params(&self) -> CliResult<SystemParams> {
        let p = self.raw_params()?;
        p.validate()?;
        Ok(p)
    }
}

fn ballistic_end(params: &SystemParams, factor: f64) -> CliResult<f64> {
    if params.hopping > 0.0 {
        Ok(factor * params.n_cavities as f64 / params.hopping)
    } else {
        Err(CliError::Validation("ξ = 0 has no default time window; pass --t-max".into()))
    }
}

/// Write `bytes` to `path` through a temporary file in the same directory.
fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io_err = |e: io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[derive(Serialize)]
struct Metadata<'a, T: Serialize, G: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    format: &'static str,
    parameters: &'a T,
    grid: G,
    wall_time_seconds: f64,
    timestamp_unix: u64,
}

fn emit<T: Serialize, G: Serialize>(
    out: &OutputArgs,
    data: Vec<u8>,
    command: &'static str,
    parameters: &T,
    grid: G,
    started: Instant,
) -> CliResult<()> {
    let Some(path) = &out.output else {
        io::stdout().write_all(&data)?;
        return Ok(());
    };
    write_atomic(path, &data)?;
    let meta = Metadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        format: match out.format {
            Format::Csv => "csv",
            Format::Json => "json",
        },
        parameters,
        grid,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    };
    let mut buf = Vec::new();
    write_json(&meta, &mut buf)?;
    write_atomic(&sidecar_path(path), &buf)
}

#[derive(Serialize)]
struct TimeGridMeta {
    start: f64,
    end: f64,
    points: usize,
}

fn cmd_evolve(args: &EvolveArgs) -> CliResult<()> {
    let started = Instant::now();
    let params = args.system.params()?;
    let t_max = match args.t_max {
        Some(t) => t,
        None => ballistic_end(&params, 2.0)?,
    };
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(CliError::Validation(format!("--t-max must be finite and ≥ 0, got {t_max}")));
    }
    if args.points == 0 {
        return Err(CliError::Validation("--points must be ≥ 1".into()));
    }
    let times = uniform_grid(0.0, t_max, args.points);
    let trace = populations(&params, &times)?;
    let mut data = Vec::new();
    match args.out.format {
        Format::Csv => write_trace_csv(&trace, &mut data)?,
        Format::Json => write_json(&trace, &mut data)?,
    }
    let grid = TimeGridMeta { start: 0.0, end: t_max, points: args.points };
    emit(&args.out, data, "evolve", &params, grid, started)
}

#[derive(Serialize)]
struct PeakSearchMeta<'a> {
    grid_points: usize,
    refine_tolerance: f64,
    samples_per_beat: f64,
    note: &'static str,
    point_wall_times: &'a [f64],
}

fn cmd_sweep(args: &SweepArgs) -> CliResult<()> {
    let started = Instant::now();
    let axis: SweepAxis = args.axis.into();
    let fixed = args.system.raw_params()?;
    let values = args
        .values
        .iter()
        .map(|v| {
            if axis == SweepAxis::Beta {
                parse_angle(v)
            } else {
                v.trim().parse().map_err(|_| CliError::Validation(format!("cannot parse axis value `{v}`")))
            }
        })
        .collect::<CliResult<Vec<f64>>>()?;
    let mut spec = SweepSpec::new(axis, values, fixed);
    if let Some(k) = args.encoding_k {
        spec = spec.with_encoding(k, args.encoding_r);
    } else if args.encoding_r.is_some() && axis != SweepAxis::EncodingK {
        return Err(CliError::Validation("--encoding-r needs --encoding-k".into()));
    } else if let Some(r) = args.encoding_r {
        spec.encoding = Some(twophoton::sweep::EncodingSpec { k: 0, r: Some(r) });
    }
    spec.time_window = match (args.t_max, args.window_factor) {
        (Some(end), _) => TimeWindow::Fixed { end },
        (None, Some(factor)) => TimeWindow::Ballistic { factor },
        (None, None) => TimeWindow::default(),
    };
    spec.grid_points = args.grid_points;
    spec.refine_tolerance = args.refine_tolerance;
    let result = scan(&spec)?;
    let mut data = Vec::new();
    match args.out.format {
        Format::Csv => write_sweep_csv(&result, &mut data)?,
        Format::Json => write_json(&result.points, &mut data)?,
    }
    let grid = PeakSearchMeta {
        grid_points: spec.grid_points,
        refine_tolerance: spec.refine_tolerance,
        samples_per_beat: SAMPLES_PER_BEAT,
        note: "coarse grid is raised per point to resolve the fastest spectral beat, then refined by golden-section search",
        point_wall_times: &result.wall_times,
    };
    emit(&args.out, data, "sweep", &spec, grid, started)
}

fn cmd_verify(args: &VerifyArgs) -> CliResult<()> {
    let opts = VerifyOptions {
        min_n: args.min_n,
        max_n: args.max_n,
        draws: args.draws,
        seed: args.seed,
        tolerance: args.tolerance,
        corrupt_coupling: args.corrupt_lambda,
        ..VerifyOptions::default()
    };
    if opts.max_n > twophoton::oracle::ORACLE_MAX_SITES || opts.min_n > opts.max_n {
        return Err(CliError::Validation(format!(
            "need min_n ≤ max_n ≤ {}, got {}..{}",
            twophoton::oracle::ORACLE_MAX_SITES,
            opts.min_n,
            opts.max_n
        )));
    }
    let report = run_verification(&opts)?;
    for c in &report.checks {
        let status = if c.passed() { "ok" } else { "FAIL" };
        println!(
            "{status:4} {:<48} max_error={:.3e} tol={:.1e} samples={}",
            c.name, c.max_error, c.tolerance, c.samples
        );
    }
    if let Some(path) = &args.output {
        let mut buf = Vec::new();
        write_json(&report, &mut buf)?;
        write_atomic(path, &buf)?;
    }
    if report.all_passed() {
        Ok(())
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        Err(CliError::Tolerance(format!("checks over tolerance: {}", names.join("; "))))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Evolve(a) => cmd_evolve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("twophoton: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
