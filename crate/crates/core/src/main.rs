use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qindex::charpoly::{eval_poly, largest_real_root, CharPolySpec, PolyKind};
use qindex::config::{ConfigError, Overrides, RunConfig};
use qindex::digraph::{Bipartition, Digraph};
use qindex::enumerate::{certify_minimum, EnumerationTask, ReportVerdict, DEFAULT_CAP};
use qindex::families::{build, Family, FamilySpec};
use qindex::numfmt::{to_sorted_json_pretty, G17};
use qindex::spectral::{q_index, SpectralError, SpectralResult};
use qindex::verify::{
    check_family_path, check_perron_structure, check_point, jobs, run_jobs, to_csv, to_jsonl, Certificate, Claim,
    Grid, Job, VerifyError,
};

#[derive(Parser)]
#[command(name = "qindex", version, about = "Q-index of strongly connected bipartite digraphs")]
struct Cli {
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Power-iteration stopping width for the Collatz-Wielandt bracket.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Strictness margin and equality band in units of `tol`.
    #[arg(long, global = true)]
    band_multiplier: Option<f64>,
    #[arg(long, global = true, env = "QINDEX_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a family member.
    Build {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Q-index and Perron vector of a digraph file or family member.
    Qindex {
        #[command(flatten)]
        source: Source,
    },
    /// Largest real root of f or g, or their value at a point.
    Charpoly {
        #[arg(conflicts_with = "kind_flag", required_unless_present = "kind_flag")]
        kind: Option<String>,
        #[arg(long = "kind", value_name = "KIND")]
        kind_flag: Option<String>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        /// Evaluate at X instead of locating the root.
        #[arg(long, value_name = "X", conflicts_with = "root")]
        eval: Option<f64>,
        /// Locate the largest real root (the default).
        #[arg(long)]
        root: bool,
        /// Bisection width (default: tol / 1000).
        #[arg(long)]
        root_tol: Option<f64>,
    },
    /// Check a claim at one point, on a grid, or on random samples.
    Verify {
        claim: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        q: Option<usize>,
        /// Family for `perron` and `lemma4`.
        #[arg(long)]
        family: Option<String>,
        /// Grid bounds, e.g. `nmax=12,pmax=5,qmax=5`.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jsonl: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Exhaustive minimization over the class for small n.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        /// Keep every labeled digraph instead of one per isomorphism class.
        #[arg(long, conflicts_with = "dedup")]
        no_dedup: bool,
        /// One member per isomorphism class (the default).
        #[arg(long)]
        dedup: bool,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        /// Record wall-clock runtime in the report.
        #[arg(long)]
        timed: bool,
        #[arg(long, short, visible_alias = "out")]
        output: Option<PathBuf>,
    },
    /// Graphviz rendering of a digraph file or family member.
    ExportDot {
        #[command(flatten)]
        source: Source,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct FamilyArgs {
    family: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    p: usize,
    #[arg(long, default_value_t = 0)]
    q: usize,
}

#[derive(Args)]
struct Source {
    /// Digraph JSON file.
    #[arg(long, conflicts_with = "family")]
    input: Option<PathBuf>,
    family: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    p: usize,
    #[arg(long, default_value_t = 0)]
    q: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
}

enum Failure {
    Input(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }
}

impl From<SpectralError> for Failure {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::NoConvergence { .. } => Failure::Numeric(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Spectral(s) => s.into(),
            VerifyError::Enumeration(qindex::enumerate::EnumError::Spectral(s)) => s.into(),
            other => Failure::Input(other.to_string()),
        }
    }
}

macro_rules! input_error {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Input(e.to_string())
            }
        }
    )*};
}
input_error!(
    ConfigError,
    qindex::families::FamilyError,
    qindex::digraph::GraphError,
    qindex::charpoly::CharPolyError,
    std::io::Error
);

impl From<qindex::enumerate::EnumError> for Failure {
    fn from(e: qindex::enumerate::EnumError) -> Self {
        match e {
            qindex::enumerate::EnumError::Spectral(s) => s.into(),
            other => Failure::Input(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            let (Failure::Input(m) | Failure::Numeric(m)) = &f;
            eprintln!("error: {m}");
            ExitCode::from(f.code())
        }
    }
}

fn resolve_config(cli: &Cli, extra: Overrides) -> Result<RunConfig, Failure> {
    let flags = Overrides {
        tol: cli.tol,
        max_iter: cli.max_iter,
        band_multiplier: cli.band_multiplier,
        workers: cli.workers,
        ..extra
    };
    let file = match &cli.config {
        Some(path) => Overrides::parse_file(path)?,
        None => Overrides::default(),
    };
    Ok(RunConfig::resolve(flags.or(file))?)
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn family_spec(name: &str, n: usize, p: usize, q: usize) -> Result<FamilySpec, Failure> {
    let family: Family = name.parse()?;
    Ok(FamilySpec::new(family, n, p, q))
}

fn load(source: &Source) -> Result<(Digraph, Option<Bipartition>), Failure> {
    match (&source.input, &source.family) {
        (Some(path), _) => Ok(Digraph::from_json(&fs::read_to_string(path)?)?),
        (None, Some(name)) => {
            let n = source
                .n
                .ok_or_else(|| Failure::Input("--n is required with a family".into()))?;
            let built = build(family_spec(name, n, source.p, source.q)?)?;
            Ok((built.digraph, built.bipartition))
        }
        (None, None) => Err(Failure::Input("give --input FILE or a family name".into())),
    }
}

#[derive(Serialize)]
struct QindexReport<'a> {
    #[serde(flatten)]
    result: &'a SpectralResult,
    /// Collatz-Wielandt enclosure of the Q-index.
    enclosure: [G17; 2],
    n: usize,
    arcs: usize,
}

#[derive(Serialize)]
struct PolyValue {
    spec: CharPolySpec,
    x: G17,
    value: G17,
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Build { family, format, output } => {
            let spec = family_spec(&family.family, family.n, family.p, family.q)?;
            let built = build(spec)?;
            let text = match format {
                Format::Json => built.digraph.to_json(built.bipartition.as_ref()),
                Format::Dot => built.digraph.to_dot(),
            };
            emit(&with_newline(text), output.as_deref())?;
            Ok(0)
        }
        Command::Qindex { source } => {
            let cfg = resolve_config(&cli, Overrides::default())?;
            let (g, _) = load(source)?;
            let r = q_index(&g, cfg.verify.solver)?;
            let report = QindexReport {
                result: &r,
                enclosure: [G17(r.lower), G17(r.upper)],
                n: g.n(),
                arcs: g.arc_count(),
            };
            emit(&with_newline(to_sorted_json_pretty(&report)), None)?;
            Ok(0)
        }
        Command::Charpoly {
            kind,
            kind_flag,
            n,
            p,
            q,
            eval,
            root: _,
            root_tol,
        } => {
            let cfg = resolve_config(&cli, Overrides::default())?;
            let kind: PolyKind = kind.as_ref().or(kind_flag.as_ref()).expect("clap requires a kind").parse()?;
            let spec = CharPolySpec::new(kind, *n, *p, *q)?;
            if let Some(x) = eval {
                let value = PolyValue {
                    spec,
                    x: G17(*x),
                    value: G17(eval_poly(&spec, *x)),
                };
                emit(&with_newline(to_sorted_json_pretty(&value)), None)?;
                return Ok(0);
            }
            let report = largest_real_root(&spec, root_tol.unwrap_or(cfg.verify.solver.tol * 1e-3))?;
            emit(&with_newline(to_sorted_json_pretty(&report)), None)?;
            Ok(0)
        }
        Command::Verify {
            claim,
            n,
            p,
            q,
            family,
            grid,
            samples,
            seed,
            jsonl,
            csv,
        } => {
            let mut extra = Overrides {
                samples: *samples,
                seed: *seed,
                jsonl: jsonl.clone(),
                csv: csv.clone(),
                ..Default::default()
            };
            if let Some(g) = grid {
                apply_grid(&mut extra, g)?;
            }
            let cfg = resolve_config(&cli, extra)?;
            let claim: Claim = claim.parse()?;
            let certs = verify(claim, *n, *p, *q, family.as_deref(), &cfg)?;
            emit(&to_jsonl(&certs), cfg.jsonl.as_deref())?;
            if let Some(path) = &cfg.csv {
                emit(&to_csv(&certs), Some(path))?;
            }
            Ok(if certs.iter().any(Certificate::failed) { 1 } else { 0 })
        }
        Command::Enumerate {
            n,
            p,
            q,
            no_dedup,
            dedup: _,
            cap,
            timed,
            output,
        } => {
            let cfg = resolve_config(&cli, Overrides::default())?;
            let task = EnumerationTask {
                solver: cfg.verify.solver,
                band: cfg.verify.band(),
                dedup: !no_dedup,
                workers: cfg.workers,
                cap: *cap,
                timed: *timed,
                ..EnumerationTask::new(*n, *p, *q)
            };
            let report = certify_minimum(&task)?;
            emit(&with_newline(report.to_json()), output.as_deref())?;
            Ok(if report.verdict == ReportVerdict::Pass { 0 } else { 1 })
        }
        Command::ExportDot { source, output } => {
            let (g, _) = load(source)?;
            emit(&with_newline(g.to_dot()), output.as_deref())?;
            Ok(0)
        }
    }
}

fn apply_grid(o: &mut Overrides, spec: &str) -> Result<(), Failure> {
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Failure::Input(format!("grid entry '{part}' is not key=value")))?;
        let value: usize = value
            .trim()
            .parse()
            .map_err(|_| Failure::Input(format!("grid entry '{part}' needs an integer")))?;
        match key.trim() {
            "nmax" | "n_max" => o.n_max = Some(value),
            "pmax" | "p_max" => o.p_max = Some(value),
            "qmax" | "q_max" => o.q_max = Some(value),
            other => return Err(Failure::Input(format!("unknown grid key '{other}'"))),
        }
    }
    Ok(())
}

fn verify(
    claim: Claim,
    n: Option<usize>,
    p: Option<usize>,
    q: Option<usize>,
    family: Option<&str>,
    cfg: &RunConfig,
) -> Result<Vec<Certificate>, Failure> {
    let vc = &cfg.verify;
    match (claim, n, p, q) {
        (Claim::Perron | Claim::Lemma4, Some(n), Some(p), Some(q)) => {
            let spec = family_spec(family.unwrap_or("b1"), n, p, q)?;
            let cert = if claim == Claim::Perron {
                check_perron_structure(spec, vc)?
            } else {
                check_family_path(spec, vc)?
            };
            Ok(vec![cert])
        }
        (c, Some(n), Some(p), Some(q)) if !c.is_sampled() => Ok(vec![check_point(c, n, p, q, vc)?]),
        (c, None, None, None) => {
            let grid = if matches!(c, Claim::Thm7 | Claim::Thm8) {
                Grid {
                    n_max: cfg.grid.n_max.min(DEFAULT_CAP),
                    ..cfg.grid
                }
            } else {
                cfg.grid
            };
            let list: Vec<Job> = jobs(c, &grid);
            Ok(run_jobs(&list, vc, &cfg.samples, cfg.workers)?)
        }
        _ => Err(Failure::Input(format!(
            "{claim}: give all of --n, --p, --q for a single point, or none for a grid run"
        ))),
    }
}
