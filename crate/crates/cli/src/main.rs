use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use hilbertkit::experiments::{run_suite, sweep, Family, SweepConfig, SweepRow, SUITES};
use hilbertkit::metric::hilbert_distance;
use hilbertkit::normalize::normalize_triangle_pointed;
use hilbertkit::triangles::{ideal_triangle_area_with, make_ideal_triangle, TriangleAreaOptions};
use hilbertkit::{ConvexDomain, DomainSpec, Point2};

const CSV_HEADER: [&str; 7] = ["label", "param", "delta_thin", "delta_4pt", "sup_area", "diverged", "seed"];

#[derive(Parser, Debug)]
#[command(name = "hilbertkit", version, about = "Hilbert geometry of planar convex domains")]
struct Cli {
    /// TOML file with default tolerances and budgets
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the result here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hilbert distance between two interior points
    Dist {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_parser = parse_point)]
        p: Point2,
        #[arg(long, value_parser = parse_point)]
        q: Point2,
    },
    /// Area of an ideal triangle given by three boundary parameters
    Area {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_parser = parse_triple)]
        triangle: [f64; 3],
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Normal form of a domain pointed by an ideal triangle
    Normalize {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_parser = parse_triple)]
        triangle: [f64; 3],
    },
    /// Hyperbolicity and area estimates across a domain family, as CSV
    Sweep {
        #[arg(long, value_enum, default_value = "pball")]
        family: FamilyArg,
        /// Sides of the smoothed polygon family
        #[arg(long, default_value_t = 4)]
        sides: usize,
        /// Comma-separated parameter values
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        grid: Vec<f64>,
        /// Area samples per domain; the metric estimators scale with it
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run a verification suite and report each check
    Verify {
        suite: String,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Pball,
    Smoothpoly,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Config {
    tol: Option<f64>,
    seed: Option<u64>,
    budget: Option<usize>,
    sweep: Option<SweepConfig>,
}

impl Config {
    fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Input problems exit with 2; failed checks exit with 1.
enum Failure {
    Usage(anyhow::Error),
    Check(String),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.into())
    }
}

fn parse_floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| format!("expected {N} comma-separated numbers"))
}

fn parse_point(s: &str) -> Result<Point2, String> {
    parse_floats::<2>(s).map(|[x, y]| Point2::new(x, y))
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    parse_floats::<3>(s)
}

fn load_domain(path: &Path) -> anyhow::Result<ConvexDomain> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec: DomainSpec = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text)?
    } else {
        serde_json::from_str(&text)?
    };
    Ok(spec.build()?)
}

/// Six decimals without trailing zeros.
fn format_distance(d: f64) -> String {
    let s = format!("{d:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn csv_bytes(rows: &[SweepRow]) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.label.clone(),
            r.param.to_string(),
            r.delta_thin.to_string(),
            r.delta_4pt.to_string(),
            r.sup_area.to_string(),
            r.diverged.to_string(),
            r.seed.to_string(),
        ])?;
    }
    Ok(w.into_inner().map_err(|e| anyhow!("{e}"))?)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(bytes)?;
            Ok(s.flush()?)
        }
    }
}

fn json_line<T: serde::Serialize>(v: &T) -> anyhow::Result<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = Config::load(cli.config.as_deref())?;
    let out = cli.out.as_deref();
    match cli.command {
        Command::Dist { spec, p, q } => {
            let d = load_domain(&spec)?;
            let v = hilbert_distance(&d, p, q)?;
            emit(out, format!("{}\n", format_distance(v)).as_bytes())?;
        }
        Command::Area { spec, triangle, tol } => {
            let d = load_domain(&spec)?;
            let tol = tol.or(cfg.tol).unwrap_or(1e-3);
            if !(tol > 0.0 && tol < 1.0) {
                return Err(anyhow!("tolerance must lie in (0, 1)").into());
            }
            let tri = make_ideal_triangle(&d, triangle[0], triangle[1], triangle[2])?;
            let a = ideal_triangle_area_with(&d, &tri, &TriangleAreaOptions::with_tol(tol))?;
            emit(out, &json_line(&a.total)?)?;
        }
        Command::Normalize { spec, triangle } => {
            let d = load_domain(&spec)?;
            let tri = make_ideal_triangle(&d, triangle[0], triangle[1], triangle[2])?;
            let r = normalize_triangle_pointed(&d, &tri)?;
            emit(out, &json_line(&r)?)?;
        }
        Command::Sweep {
            family,
            sides,
            grid,
            budget,
            seed,
            tol,
        } => {
            if grid.is_empty() {
                return Err(anyhow!("empty parameter grid").into());
            }
            let mut sc = cfg.sweep.unwrap_or_default();
            if let Some(b) = budget.or(cfg.budget) {
                if b == 0 {
                    return Err(anyhow!("budget must be positive").into());
                }
                sc.area_budget = b;
                sc.thin_budget = 8 * b;
                sc.four_point_budget = 250 * b;
            }
            sc.seed = seed.or(cfg.seed).unwrap_or(sc.seed);
            sc.tol = tol.or(cfg.tol).unwrap_or(sc.tol);
            let family = match family {
                FamilyArg::Pball => Family::Pball,
                FamilyArg::Smoothpoly => Family::Smoothpoly { sides },
            };
            let rows = sweep(&family, &grid, &sc)?;
            emit(out, &csv_bytes(&rows)?)?;
        }
        Command::Verify { suite, seed } => {
            if !SUITES.contains(&suite.as_str()) {
                return Err(anyhow!("unknown suite {suite:?}; expected one of {}", SUITES.join(", ")).into());
            }
            let report = run_suite(&suite, seed.or(cfg.seed).unwrap_or(0))?;
            emit(out, &json_line(&report)?)?;
            if !report.passed {
                let names: Vec<_> = report.failures().map(|c| c.name.as_str()).collect();
                return Err(Failure::Check(format!("suite {suite} failed: {}", names.join("; "))));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
