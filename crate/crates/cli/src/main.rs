//! `stokes2`: wall observables, profiles, figure data and self-checks for the
//! oscillating-plate problem of the linearized BGK equation.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use stokes2_kinetic::figures::{self, Sweep};
use stokes2_kinetic::oracle::{self, OracleConfig};
use stokes2_kinetic::report::{Format, Header, Table};
use stokes2_kinetic::{dispersion, verify, Error, ProblemParams, QuadratureConfig, Solution, SpectralData};

/// Environment variable naming a JSON file with `quadrature` and `oracle` sections.
const CONFIG_ENV: &str = "STOKES2_CONFIG";

const EXIT_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "stokes2", version, about = "Oscillating plate in a rarefied gas: analytic BGK solution and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Wall velocity factor A = U(0)/U0 (per U0).
    WallVelocity(PointArgs),
    /// Friction force per 2 U0 p.
    Friction(PointArgs),
    /// Dissipated power per W0 = U0^2 p / sqrt(beta).
    Dissipation(PointArgs),
    /// Velocity profile U(x)/U0 at one (omega1, q).
    Profile {
        #[command(flatten)]
        common: PointArgs,
        /// Largest distance from the plate, in mean free paths.
        #[arg(long, default_value_t = 10.0)]
        x_max: f64,
        /// Number of equally spaced points on [0, x_max].
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Distribution of molecules arriving at the plate, h(0, mu) for mu < 0.
    WallDistribution {
        #[command(flatten)]
        common: PointArgs,
        /// Most negative velocity.
        #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
        mu_min: f64,
        #[arg(long, default_value_t = 80)]
        points: usize,
    },
    /// Run the invariant checks and print a pass/fail report.
    Verify(PointArgs),
    /// Data of the five standard plots, one file each, written to --output (a directory).
    Figures(PointArgs),
}

#[derive(Args, Debug, Clone)]
struct PointArgs {
    /// Frequency in collision units; a comma-separated list is accepted.
    #[arg(long, value_delimiter = ',', conflicts_with = "sweep")]
    omega1: Vec<f64>,
    /// Frequency sweep START:STOP:COUNT[:log|:lin].
    #[arg(long)]
    sweep: Option<String>,
    /// Accommodation coefficients, comma-separated.
    #[arg(long, value_delimiter = ',')]
    q: Vec<f64>,
    /// Output file (directory for `figures`); standard output when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Gauss-Legendre nodes per panel.
    #[arg(long)]
    nodes: Option<usize>,
    /// Truncation of the velocity integrals.
    #[arg(long)]
    cutoff: Option<f64>,
    /// Target relative accuracy of the quadratures.
    #[arg(long)]
    tol: Option<f64>,
    /// Half-width of the excluded band around the index transition.
    #[arg(long)]
    guard_band: Option<f64>,
    /// Also solve with the discrete-ordinates oracle.
    #[arg(long)]
    oracle: bool,
    /// Oracle velocity nodes.
    #[arg(long)]
    n_mu: Option<usize>,
    /// Oracle spatial cells.
    #[arg(long)]
    n_x: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum OutputFormat {
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    quadrature: QuadratureConfig,
    oracle: OracleConfig,
}

#[derive(Debug)]
enum Failure {
    Invalid(String),
    Failed(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_)
            | Error::CriticalFrequency { .. }
            | Error::SpecularLimit(_)
            | Error::DomainOfValidity { .. }
            | Error::NonPositiveArgument(_)
            | Error::NonNegativeArgument(_) => Failure::Invalid(e.to_string()),
            other => Failure::Failed(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Failed(format!("i/o: {e}"))
    }
}

type Outcome<T> = Result<T, Failure>;

/// Frequencies to evaluate, and how to describe them in a header.
struct Frequencies {
    values: Vec<f64>,
    label: String,
    partitioned: bool,
}

struct Context {
    args: PointArgs,
    cfg: QuadratureConfig,
    oracle: OracleConfig,
}

impl Context {
    fn new(args: PointArgs) -> Outcome<Self> {
        let file = match std::env::var_os(CONFIG_ENV) {
            Some(path) => {
                let text = fs::read_to_string(&path)
                    .map_err(|e| Failure::Invalid(format!("{CONFIG_ENV}={}: {e}", path.to_string_lossy())))?;
                serde_json::from_str(&text)
                    .map_err(|e| Failure::Invalid(format!("{CONFIG_ENV}={}: {e}", path.to_string_lossy())))?
            }
            None => ConfigFile::default(),
        };
        let mut cfg = file.quadrature;
        if let Some(v) = args.nodes {
            cfg.nodes = v;
        }
        if let Some(v) = args.cutoff {
            cfg.cutoff = v;
        }
        if let Some(v) = args.tol {
            cfg.tol = v;
        }
        if let Some(v) = args.guard_band {
            cfg.guard_band = v;
        }
        cfg.validate()?;
        let mut oracle = file.oracle;
        if let Some(v) = args.n_mu {
            oracle.n_mu = v;
        }
        if let Some(v) = args.n_x {
            oracle.n_x = v;
        }
        oracle.validate()?;
        for &q in &args.q {
            ProblemParams::new(1.0, q)?;
        }
        Ok(Self { args, cfg, oracle })
    }

    fn qs(&self, default: &[f64]) -> Vec<f64> {
        if self.args.q.is_empty() {
            default.to_vec()
        } else {
            self.args.q.clone()
        }
    }

    fn q_label(qs: &[f64]) -> String {
        qs.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(";")
    }

    fn format(&self) -> Format {
        self.args.format.into()
    }

    fn sweep(&self) -> Outcome<Option<Sweep>> {
        let Some(spec) = &self.args.sweep else { return Ok(None) };
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = || Failure::Invalid(format!("bad sweep {spec:?}; expected START:STOP:COUNT[:log|:lin]"));
        if !(3..=4).contains(&parts.len()) {
            return Err(bad());
        }
        let start = parts[0].parse().map_err(|_| bad())?;
        let stop = parts[1].parse().map_err(|_| bad())?;
        let count = parts[2].parse().map_err(|_| bad())?;
        let log = match parts.get(3) {
            None | Some(&"log") => true,
            Some(&"lin") => false,
            Some(_) => return Err(bad()),
        };
        let sweep = Sweep { start, stop, count, log };
        sweep.validate()?;
        Ok(Some(sweep))
    }

    /// Explicit frequencies must avoid the guard band; sweeps are partitioned around it.
    fn frequencies(&self, default: Option<Sweep>) -> Outcome<Frequencies> {
        if !self.args.omega1.is_empty() {
            for &w in &self.args.omega1 {
                dispersion::check_guard(&ProblemParams::new(w, 1.0)?, &self.cfg)?;
            }
            let label = Self::q_label(&self.args.omega1);
            return Ok(Frequencies { values: self.args.omega1.clone(), label, partitioned: false });
        }
        let sweep = match (self.sweep()?, default) {
            (Some(s), _) | (None, Some(s)) => s,
            (None, None) => return Err(Failure::Invalid("give --omega1 or --sweep".into())),
        };
        let (values, partitioned) = sweep.partition(&self.cfg)?;
        if partitioned {
            eprintln!("warning: sweep partitioned, points within the guard band of the index transition were skipped");
        }
        let label =
            format!("{}..{} ({} points, {})", sweep.start, sweep.stop, values.len(), if sweep.log { "log" } else { "linear" });
        Ok(Frequencies { values, label, partitioned })
    }

    /// A single `(omega1, q)` for the profile-type commands.
    fn point(&self) -> Outcome<ProblemParams> {
        let f = self.frequencies(None)?;
        let qs = self.qs(&[1.0]);
        if f.values.len() != 1 || qs.len() != 1 {
            return Err(Failure::Invalid("this command takes a single --omega1 and a single --q".into()));
        }
        Ok(ProblemParams::new(f.values[0], qs[0])?)
    }

    fn emit(&self, table: &Table) -> Outcome<()> {
        match &self.args.output {
            Some(path) => write_file(path, |w| table.write(w, self.format())),
            None => {
                let stdout = io::stdout();
                match table.write(stdout.lock(), self.format()) {
                    Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                    r => Ok(r?),
                }
            }
        }
    }
}

fn write_file(path: &Path, f: impl FnOnce(&mut io::BufWriter<fs::File>) -> io::Result<()>) -> Outcome<()> {
    let mut w = io::BufWriter::new(fs::File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

fn kappa_label(kappas: &[i32]) -> String {
    let mut k: Vec<i32> = kappas.to_vec();
    k.sort_unstable();
    k.dedup();
    k.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(";")
}

#[derive(Clone, Copy)]
enum Observable {
    WallVelocity,
    Friction,
    Dissipation,
}

fn observable_table(ctx: &Context, which: Observable) -> Outcome<Table> {
    let f = ctx.frequencies(None)?;
    let qs = ctx.qs(&[1.0]);
    let grid = figures::observables_grid(&f.values, &qs, &ctx.cfg)?;
    let (normalization, columns): (&str, &[&str]) = match which {
        Observable::WallVelocity => ("A per U0, phase in radians", &["abs_A", "phase_A", "re_A", "im_A"]),
        Observable::Friction => ("F per 2 U0 p, phase in radians", &["abs_F", "phase_F", "re_F", "im_F"]),
        Observable::Dissipation => ("W per W0 = U0^2 p / sqrt(beta)", &["W_over_W0"]),
    };
    let mut names: Vec<String> = ["omega1", "q", "kappa"].iter().map(|s| s.to_string()).collect();
    names.extend(columns.iter().map(|s| s.to_string()));

    let oracle_values = if ctx.args.oracle {
        let points: Vec<ProblemParams> =
            f.values.iter().flat_map(|&w| qs.iter().map(move |&q| ProblemParams::new(w, q))).collect::<Result<_, _>>()?;
        let solved = oracle::solve_batch(&points, 1.0, &ctx.oracle);
        let moments: Vec<_> =
            solved.into_iter().map(|s| s.map(|s| oracle::oracle_moments(&s))).collect::<Result<_, _>>()?;
        names.extend(columns.iter().map(|c| format!("oracle_{c}")));
        Some(moments)
    } else {
        None
    };

    let kappas: Vec<i32> = grid.iter().map(|row| row[0].kappa).collect();
    let header = Header::new(f.label, Context::q_label(&qs), kappa_label(&kappas), normalization);
    let mut table = Table::new(header, names);
    table.partitioned = f.partitioned;
    let complex_cells = |z: stokes2_kinetic::C64| vec![z.norm(), z.arg(), z.re, z.im];
    for (i, row) in grid.iter().enumerate() {
        for (j, o) in row.iter().enumerate() {
            let mut cells = vec![o.omega1, o.q, o.kappa as f64];
            cells.extend(match which {
                Observable::WallVelocity => complex_cells(o.a_kappa),
                Observable::Friction => complex_cells(o.friction_factor),
                Observable::Dissipation => vec![o.dissipation_normalized],
            });
            if let Some(m) = &oracle_values {
                let m = &m[i * qs.len() + j];
                cells.extend(match which {
                    Observable::WallVelocity => complex_cells(m.u_wall),
                    Observable::Friction => complex_cells(m.friction_factor),
                    Observable::Dissipation => vec![m.dissipation_normalized],
                });
            }
            table.push(cells);
        }
    }
    Ok(table)
}

fn profile(ctx: &Context, x_max: f64, points: usize) -> Outcome<Table> {
    if !(x_max > 0.0 && x_max.is_finite()) || points < 2 {
        return Err(Failure::Invalid("profile needs --x-max > 0 and --points >= 2".into()));
    }
    let p = ctx.point()?;
    let sd = SpectralData::new(p, &ctx.cfg)?;
    let sol = Solution::new(&sd, 1.0)?;
    let xs: Vec<f64> = (0..points).map(|k| x_max * k as f64 / (points - 1) as f64).collect();
    let prof = sol.velocity_profile(&xs)?;
    let mut names: Vec<String> = ["x", "abs_U", "phase_U", "re_U", "im_U"].iter().map(|s| s.to_string()).collect();
    let oracle_values = if ctx.args.oracle {
        let o = oracle::solve_kinetic(&p, 1.0, &ctx.oracle)?;
        names.extend(["oracle_re_U", "oracle_im_U"].iter().map(|s| s.to_string()));
        Some(xs.iter().map(|&x| o.velocity_at(x)).collect::<Result<Vec<_>, _>>()?)
    } else {
        None
    };
    let header = Header::new(p.omega1().to_string(), p.q().to_string(), sd.kappa().to_string(), "U per U0, x in mean free paths");
    let mut table = Table::new(header, names);
    for (k, (&x, u)) in xs.iter().zip(&prof.values).enumerate() {
        let mut cells = vec![x, u.norm(), u.arg(), u.re, u.im];
        if let Some(o) = &oracle_values {
            cells.extend([o[k].re, o[k].im]);
        }
        table.push(cells);
    }
    Ok(table)
}

fn wall_distribution(ctx: &Context, mu_min: f64, points: usize) -> Outcome<Table> {
    if !(-stokes2_kinetic::solution::MU_LIMIT..0.0).contains(&mu_min) || points < 2 {
        return Err(Failure::Invalid("wall-distribution needs -25 <= --mu-min < 0 and --points >= 2".into()));
    }
    let p = ctx.point()?;
    let sd = SpectralData::new(p, &ctx.cfg)?;
    let sol = Solution::new(&sd, 1.0)?;
    let mu_max = mu_min / points as f64;
    let mus: Vec<f64> = (0..points).map(|k| mu_min + (mu_max - mu_min) * k as f64 / (points - 1) as f64).collect();
    let header = Header::new(p.omega1().to_string(), p.q().to_string(), sd.kappa().to_string(), "h(0, mu) per U0");
    let mut table = Table::new(header, ["mu", "abs_h", "re_h", "im_h"].iter().map(|s| s.to_string()).collect());
    for &mu in &mus {
        let h = sol.distribution_at_wall(mu)?;
        table.push(vec![mu, h.norm(), h.re, h.im]);
    }
    Ok(table)
}

fn run_verify(ctx: &Context) -> Outcome<bool> {
    let f = ctx.frequencies(None)?;
    let qs = ctx.qs(&[1.0]);
    let oc = ctx.args.oracle.then_some(&ctx.oracle);
    let mut reports = Vec::new();
    for &w in &f.values {
        for &q in &qs {
            reports.push(verify::run(ProblemParams::new(w, q)?, &ctx.cfg, oc)?);
        }
    }
    let passed = reports.iter().all(|r| r.passed());
    let text: String = reports.iter().map(|r| r.render()).collect();
    print!("{text}");
    println!("{}", if passed { "verify: all checks passed" } else { "verify: FAILED" });
    if let Some(path) = &ctx.args.output {
        match ctx.format() {
            Format::Json => write_file(path, |w| {
                serde_json::to_writer_pretty(&mut *w, &reports)?;
                writeln!(w)
            })?,
            Format::Csv => write_file(path, |w| {
                writeln!(w, "omega1,q,kappa,check,value,threshold,passed")?;
                for r in &reports {
                    for c in &r.checks {
                        writeln!(w, "{},{},{},\"{}\",{:.6e},{:.1e},{}", r.omega1, r.q, r.kappa, c.name, c.value, c.threshold, c.passed)?;
                    }
                }
                Ok(())
            })?,
        }
    }
    Ok(passed)
}

fn run_figures(ctx: &Context) -> Outcome<()> {
    if !ctx.args.omega1.is_empty() || !ctx.args.q.is_empty() {
        return Err(Failure::Invalid("figures uses fixed q sets; choose frequencies with --sweep".into()));
    }
    let sweep = ctx.sweep()?.unwrap_or_default();
    let set = figures::figures(&sweep, &ctx.cfg)?;
    if set.partitioned {
        eprintln!("warning: sweep partitioned, points within the guard band of the index transition were skipped");
    }
    let dir = ctx.args.output.clone().unwrap_or_else(|| PathBuf::from("figures"));
    fs::create_dir_all(&dir)?;
    for (name, table) in &set.tables {
        let path = dir.join(format!("{name}.{}", ctx.format().extension()));
        write_file(&path, |w| table.write(w, ctx.format()))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome<bool> {
    match cli.command {
        Command::WallVelocity(a) => Context::new(a).and_then(|c| c.emit(&observable_table(&c, Observable::WallVelocity)?)),
        Command::Friction(a) => Context::new(a).and_then(|c| c.emit(&observable_table(&c, Observable::Friction)?)),
        Command::Dissipation(a) => Context::new(a).and_then(|c| c.emit(&observable_table(&c, Observable::Dissipation)?)),
        Command::Profile { common, x_max, points } => Context::new(common).and_then(|c| c.emit(&profile(&c, x_max, points)?)),
        Command::WallDistribution { common, mu_min, points } => {
            Context::new(common).and_then(|c| c.emit(&wall_distribution(&c, mu_min, points)?))
        }
        Command::Verify(a) => return Context::new(a).and_then(|c| run_verify(&c)),
        Command::Figures(a) => Context::new(a).and_then(|c| run_figures(&c)),
    }
    .map(|()| true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Failed(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_FAILED)
        }
    }
}
