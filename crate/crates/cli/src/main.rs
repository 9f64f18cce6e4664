mod render;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use limitscout::analyzer::{analyze, default_power_grid, path_limit, AnalyzerConfig, PowerCurveParams};
use limitscout::construction::{bisect_angles, ViolationOutcome, ViolationSearch, MAX_DEPTH};
use limitscout::corpus::run_corpus;
use limitscout::expr::Expression;
use limitscout::geometry::{distance, Center};
use limitscout::paths::{angle_function, check_descent, polyline_from_witness, Branch, PathSpec};
use limitscout::witness::{self, FormatError, IntervalNest, PolylineReport};

macro_rules! say {
    ($out:expr, $($t:tt)*) => {{
        let _ = writeln!($out, $($t)*);
    }};
}

#[derive(Parser)]
#[command(name = "limitscout", version, about = "Numerical checks for multivariable limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Probe many paths, try to refute the common value, print a verdict.
    Analyze(AnalyzeArgs),
    /// Evaluate f along one path and classify the tail.
    PathLimit(PathLimitArgs),
    /// Search for points violating a candidate limit and write the witness files.
    Construct(ConstructArgs),
    /// Run the built-in corpus; exit 1 if any case is misclassified.
    Corpus(CorpusArgs),
    /// Re-read witness files and check them.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Target {
    /// Function of x, y, z (up to 3 variables) or x1..xn.
    #[arg(long)]
    expr: String,
    /// Comma-separated center, e.g. 0,0.
    #[arg(long, allow_hyphen_values = true)]
    at: String,
    /// Dimension; defaults to the number of center coordinates.
    #[arg(long)]
    dim: Option<usize>,
}

impl Target {
    fn resolve(&self) -> Result<(Expression, Center), CliError> {
        let coords = parse_list(&self.at, "--at")?;
        if let Some(d) = self.dim {
            if d != coords.len() {
                return Err(CliError::Usage(format!("--dim {d} but --at has {} coordinates", coords.len())));
            }
        }
        let center = Center::new(coords)?;
        let f = Expression::parse(&self.expr, center.dim())?;
        Ok((f, center))
    }
}

#[derive(Args)]
struct ProbeOpts {
    #[arg(long)]
    r1: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Tail length used to classify a probe.
    #[arg(long)]
    tail: Option<usize>,
}

impl ProbeOpts {
    fn apply(&self, cfg: &mut AnalyzerConfig) {
        if let Some(v) = self.r1 {
            cfg.r1 = v;
        }
        if let Some(v) = self.rho {
            cfg.rho = v;
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if let Some(v) = self.steps {
            cfg.steps = v;
        }
        if let Some(v) = self.tail {
            cfg.k = v;
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    target: Target,
    #[command(flatten)]
    probe: ProbeOpts,
    #[arg(long, env = "LIMITSCOUT_SEED", default_value_t = 42)]
    seed: u64,
    /// Number of probe rays.
    #[arg(long)]
    rays: Option<usize>,
    /// Power curves as c:m:n:branch, comma-separated (branch + or -), or "none".
    #[arg(long, allow_hyphen_values = true)]
    power_grid: Option<String>,
    /// Probe rays only: no power curves, no spirals.
    #[arg(long)]
    rays_only: bool,
    /// Refutation threshold; defaults to 10 * tol.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Evaluations per shell in the refutation search.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    json: bool,
    /// Write every probe tail to this CSV file.
    #[arg(long, value_name = "FILE.csv")]
    dump_probes: Option<PathBuf>,
}

#[derive(Args)]
struct PathLimitArgs {
    #[command(flatten)]
    target: Target,
    #[command(flatten)]
    probe: ProbeOpts,
    /// Path as JSON, or a file holding it.
    #[arg(long)]
    path: String,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ConstructArgs {
    #[command(flatten)]
    target: Target,
    /// Candidate limit to refute.
    #[arg(long = "L", allow_hyphen_values = true)]
    limit: f64,
    #[arg(long)]
    epsilon: f64,
    /// Number of violation points, one per halving shell.
    #[arg(long, default_value_t = 12)]
    count: usize,
    #[arg(long, env = "LIMITSCOUT_SEED", default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    r1: f64,
    #[arg(long, default_value_t = 100_000)]
    budget: usize,
    /// Bisection depth; defaults to count (at most 40).
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, value_name = "FILE.csv")]
    samples: Option<PathBuf>,
    #[arg(long, value_name = "FILE.json")]
    intervals: Option<PathBuf>,
    #[arg(long, value_name = "FILE.json")]
    polyline: Option<PathBuf>,
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long, env = "LIMITSCOUT_SEED", default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_name = "FILE.csv")]
    samples: Option<PathBuf>,
    #[arg(long, value_name = "FILE.json")]
    intervals: Option<PathBuf>,
    #[arg(long, value_name = "FILE.json")]
    polyline: Option<PathBuf>,
    /// With --at, --L and --epsilon: re-evaluate every sample.
    #[arg(long)]
    expr: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    at: Option<String>,
    #[arg(long = "L", allow_hyphen_values = true)]
    limit: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Internal(String),
    Failed(String),
}

impl From<limitscout::Error> for CliError {
    fn from(e: limitscout::Error) -> Self {
        match e {
            limitscout::Error::OutOfRange { .. } => CliError::Internal(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<limitscout::ParseError> for CliError {
    fn from(e: limitscout::ParseError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{what}: '{t}' is not a number")))
        })
        .collect()
}

fn parse_power_grid(s: &str) -> Result<Vec<PowerCurveParams>, CliError> {
    match s.trim() {
        "none" | "" => return Ok(Vec::new()),
        "default" => return Ok(default_power_grid()),
        _ => {}
    }
    s.split(',')
        .map(|item| {
            let bad = || CliError::Usage(format!("--power-grid: '{item}' is not c:m:n:branch"));
            let parts: Vec<&str> = item.trim().split(':').collect();
            let [c, m, n, b] = parts[..] else { return Err(bad()) };
            let branch = match b {
                "+" => Branch::Positive,
                "-" => Branch::Negative,
                _ => return Err(bad()),
            };
            let p = PowerCurveParams {
                c: c.parse().map_err(|_| bad())?,
                m: m.parse().map_err(|_| bad())?,
                n: n.parse().map_err(|_| bad())?,
                branch,
            };
            p.path()?;
            Ok(p)
        })
        .collect()
}

fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
}

fn format_err(path: &Path) -> impl Fn(FormatError) -> CliError + '_ {
    move |e| CliError::Usage(format!("{}: {e}", path.display()))
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Internal(e.to_string()))
}

fn run_analyze(a: AnalyzeArgs, out: &mut String) -> Result<(), CliError> {
    let (f, center) = a.target.resolve()?;
    let mut cfg = if a.rays_only { AnalyzerConfig::rays_only() } else { AnalyzerConfig::default() };
    a.probe.apply(&mut cfg);
    cfg.seed = a.seed;
    if let Some(n) = a.rays {
        cfg.ray_count = n;
    }
    if let Some(g) = &a.power_grid {
        cfg.power_curve_grid = parse_power_grid(g)?;
    }
    cfg.epsilon_refute = a.epsilon;
    if let Some(b) = a.budget {
        cfg.budget = b;
    }
    let verdict = analyze(&f, &center, &cfg)?;
    if let Some(p) = &a.dump_probes {
        let text = witness::write_probes_csv(&verdict.probes).map_err(|e| CliError::Internal(e.to_string()))?;
        write_output(p, &text)?;
    }
    if a.json {
        say!(out, "{}", to_json(&verdict)?);
    } else {
        out.push_str(&render::verdict(&verdict));
    }
    Ok(())
}

fn run_path_limit(a: PathLimitArgs, out: &mut String) -> Result<(), CliError> {
    let (f, center) = a.target.resolve()?;
    let text = if a.path.trim_start().starts_with('{') {
        a.path.clone()
    } else {
        read_input(Path::new(&a.path))?
    };
    let path = witness::read_path_spec(&text).map_err(|e| CliError::Usage(format!("--path: {e}")))?;
    let mut cfg = AnalyzerConfig::default();
    a.probe.apply(&mut cfg);
    let result = path_limit(&f, &center, &path, &cfg)?;
    if a.json {
        say!(out, "{}", to_json(&result)?);
    } else {
        out.push_str(&render::probe(&result));
    }
    Ok(())
}

fn run_construct(a: ConstructArgs, out: &mut String) -> Result<(), CliError> {
    let (f, center) = a.target.resolve()?;
    if !(a.epsilon > 0.0 && a.epsilon.is_finite()) {
        return Err(CliError::Usage("--epsilon must be positive".into()));
    }
    if !(a.r1 > 0.0 && a.r1.is_finite()) || a.count == 0 || a.budget == 0 {
        return Err(CliError::Usage("--r1, --count and --budget must be positive".into()));
    }
    let search = ViolationSearch {
        target: a.limit,
        epsilon: a.epsilon,
        r1: a.r1,
        count: a.count,
        budget: a.budget,
        seed: a.seed,
    };
    let samples = match search.run(&f, &center)? {
        ViolationOutcome::NotFound { shell, partial, evaluations } => {
            say!(out, "no violation found");
            say!(out, 
                "shell {shell} exhausted after {evaluations} evaluations ({} points found before it)",
                partial.len()
            );
            return Ok(());
        }
        ViolationOutcome::Found(samples) => samples,
    };
    let depth = a.depth.unwrap_or(a.count.min(MAX_DEPTH as usize));
    let w = bisect_angles(&samples, depth)?;
    let last = samples.last().expect("search returns at least one point");
    say!(out, "violation found: {} points, smallest r = {:?}", samples.len(), last.offset.r);
    say!(out, "phi0: {:?}", w.phi0);
    say!(out, "depth: {}", w.depth());

    if let Some(p) = &a.samples {
        let text = witness::write_samples_csv(&samples).map_err(|e| CliError::Internal(e.to_string()))?;
        write_output(p, &text)?;
        say!(out, "wrote {}", p.display());
    }
    if let Some(p) = &a.intervals {
        let text = witness::write_interval_nest(&IntervalNest::from_witness(&w)).map_err(|e| CliError::Internal(e.to_string()))?;
        write_output(p, &text)?;
        say!(out, "wrote {}", p.display());
    }
    if let Some(p) = &a.polyline {
        let path = match polyline_from_witness(&w) {
            Ok(path) => path,
            Err(e) => {
                say!(out, "polyline not written: {e}");
                return Ok(());
            }
        };
        let certificate = check_descent(&path, &center)?;
        let PathSpec::Polyline { vertices } = &path else { unreachable!() };
        let hi = distance(center.coords(), &vertices[0])?;
        let lo = distance(center.coords(), &vertices[vertices.len() - 1])?;
        let schedule: Vec<f64> = (0..32)
            .map(|j| (hi * (lo / hi).powf(j as f64 / 31.0)).clamp(lo, hi))
            .collect();
        let angles = if certificate.ok { angle_function(&path, &center, &schedule)? } else { Vec::new() };
        let report = PolylineReport {
            path,
            center: center.coords().to_vec(),
            phi0: w.phi0,
            certificate,
            angle_function: angles,
        };
        let text = witness::write_polyline_report(&report).map_err(|e| CliError::Internal(e.to_string()))?;
        write_output(p, &text)?;
        say!(out, "descent certificate: {}", if report.certificate.ok { "ok" } else { "FAILED" });
        say!(out, "wrote {}", p.display());
    }
    Ok(())
}

fn run_corpus_cmd(a: CorpusArgs, out: &mut String) -> Result<(), CliError> {
    let report = run_corpus(a.seed)?;
    if a.json {
        say!(out, "{}", to_json(&report)?);
    } else {
        out.push_str(&report.render_table());
    }
    if report.all_matched() {
        Ok(())
    } else {
        Err(CliError::Failed("corpus mismatch".into()))
    }
}

fn run_verify(a: VerifyArgs, out: &mut String) -> Result<(), CliError> {
    if a.samples.is_none() && a.intervals.is_none() && a.polyline.is_none() {
        return Err(CliError::Usage("nothing to verify: pass --samples, --intervals or --polyline".into()));
    }
    let mut problems: Vec<String> = Vec::new();

    let samples = match &a.samples {
        Some(p) => Some(witness::read_samples_csv(&read_input(p)?).map_err(format_err(p))?),
        None => None,
    };
    if let Some(s) = &samples {
        say!(out, "samples: {} rows", s.len());
        for (k, pair) in s.windows(2).enumerate() {
            if !(pair[1].offset.r < pair[0].offset.r / 2.0) {
                problems.push(format!("sample {}: radius does not halve", k + 2));
            }
        }
    }

    if let Some(src) = &a.expr {
        let (Some(at), Some(l), Some(eps), Some(s)) = (&a.at, a.limit, a.epsilon, &samples) else {
            return Err(CliError::Usage("--expr needs --at, --L, --epsilon and --samples".into()));
        };
        let center = Center::new(parse_list(at, "--at")?)?;
        let f = Expression::parse(src, center.dim())?;
        for sample in s {
            let v = f.evaluate(&sample.point)?.value();
            match v {
                Some(v) if v == sample.value && (v - l).abs() >= eps => {}
                Some(v) => problems.push(format!("sample {}: f = {v:?}, file says {:?}", sample.index, sample.value)),
                None => problems.push(format!("sample {}: f undefined", sample.index)),
            }
        }
        say!(out, "re-evaluated {} samples", s.len());
    }

    if let Some(p) = &a.intervals {
        let nest = witness::read_interval_nest(&read_input(p)?).map_err(format_err(p))?;
        say!(out, "intervals: depth {}, phi0 {:?}", nest.intervals.len(), nest.phi0);
        if let Some(s) = &samples {
            for (iv, idx) in nest.intervals.iter().zip(&nest.picked) {
                match s.iter().find(|x| x.index == *idx) {
                    Some(x) if iv.contains(x.offset.phi()) => {}
                    Some(_) => problems.push(format!("sample {idx}: angle outside its interval")),
                    None => problems.push(format!("picked index {idx} not in samples")),
                }
            }
        }
    }

    if let Some(p) = &a.polyline {
        let report = witness::read_polyline_report(&read_input(p)?).map_err(format_err(p))?;
        let center = Center::new(report.center.clone())?;
        let fresh = check_descent(&report.path, &center)?;
        if fresh != report.certificate {
            problems.push("stored certificate differs from a fresh check".into());
        }
        if !fresh.ok {
            problems.push("descent certificate fails".into());
        }
        say!(out, "polyline: {} triangles, certificate {}", fresh.triangles.len(), if fresh.ok { "ok" } else { "FAILED" });
    }

    if problems.is_empty() {
        say!(out, "ok");
        Ok(())
    } else {
        for p in &problems {
            say!(out, "problem: {p}");
        }
        Err(CliError::Failed(format!("{} problems", problems.len())))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    let result = match cli.command {
        Command::Analyze(a) => run_analyze(a, &mut out),
        Command::PathLimit(a) => run_path_limit(a, &mut out),
        Command::Construct(a) => run_construct(a, &mut out),
        Command::Corpus(a) => run_corpus_cmd(a, &mut out),
        Command::Verify(a) => run_verify(a, &mut out),
    };
    // a closed pipe (e.g. `| head`) is not an error worth reporting
    let _ = std::io::stdout().lock().write_all(out.as_bytes());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Internal(m) => eprintln!("internal error: {m}"),
                CliError::Failed(m) => eprintln!("{m}"),
            }
            ExitCode::from(e.code())
        }
    }
}
