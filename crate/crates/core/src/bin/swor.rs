//! `swor`: analyze affine designs, inspect the feasibility polytope, draw
//! stratified samples and run the self-check suites.
//!
//! Exit codes: 0 success, 1 I/O or input error, 2 infeasible design (or a
//! failing `verify` suite).

use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use swor_core::input::{parse_population, parse_stratified};
use swor_core::polytope::{self, VertexKind};
use swor_core::rational;
use swor_core::report::analyze_file;
use swor_core::variance::PSD_TOL;
use swor_core::verify::{self, Suite};
use swor_core::{Error, Sampler};

#[derive(Parser)]
#[command(name = "swor", version, about = "Affine sampling-without-replacement designs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Vertices,
    Facets,
    Adjacency,
    Counterexample,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
enum SuiteArg {
    Identities,
    VarianceOracle,
    PolytopeOracle,
    FactorialBounds,
    RejectionBound,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Feasibility, PSD verdict, spectra and variances for a population file.
    Analyze {
        file: PathBuf,
        /// Sample size; overrides `n` in the file.
        #[arg(long)]
        n: Option<usize>,
        /// Attribute values; overrides `x` in the file.
        #[arg(long, num_args = 1.., allow_negative_numbers = true)]
        x: Option<Vec<f64>>,
        /// Relative PSD tolerance.
        #[arg(long, env = "SWOR_TOL", default_value_t = PSD_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Vertices, facets, adjacency or the boundary counterexample of T(N,n).
    Polytope {
        #[arg(long = "N")]
        big_n: usize,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, value_enum)]
        emit: Emit,
    },
    /// Draw samples from a stratified population file, one JSON array per line.
    Sample {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        draws: u64,
        /// Overrides `seed` in the file; defaults to 0 when neither is given.
        #[arg(long)]
        seed: Option<u64>,
        /// Print rejection statistics to stderr after the draws.
        #[arg(long)]
        stats: bool,
    },
    /// Run self-check suites; exits 0 only if every selected suite passes.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Vec<SuiteArg>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

enum Failure {
    Io(String),
    Input(Error),
    Infeasible(String),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InfeasibleDesign { .. } => Failure::Infeasible(e.to_string()),
            other => Failure::Input(other),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write_json(out: &mut impl Write, v: &Value) -> Result<(), Failure> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).expect("json"))?;
    Ok(())
}

fn analyze(file: &Path, n: Option<usize>, x: Option<Vec<f64>>, tol: f64, format: Format) -> Result<(), Failure> {
    let text = read(file)?;
    let pop = parse_population(&text)?;
    let report = analyze_file(&pop, n, x, tol)?;
    let body = match format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
        Format::Text => report.to_text(),
    };
    io::stdout().lock().write_all(body.as_bytes())?;
    if report.feasibility.feasible {
        Ok(())
    } else {
        Err(Failure::Infeasible(format!(
            "the {} smallest weights sum to {}, below {}",
            report.input.n, report.feasibility.smallest_sum, report.feasibility.threshold
        )))
    }
}

fn kind_name(kind: VertexKind) -> &'static str {
    match kind {
        VertexKind::Zero => "ZERO",
        VertexKind::OneOverN => "ONE_OVER_N",
    }
}

fn strings(v: &[swor_core::Rational]) -> Vec<String> {
    v.iter().map(rational::format).collect()
}

fn polytope_cmd(big_n: usize, n: usize, emit: Emit) -> Result<(), Failure> {
    let value = match emit {
        Emit::Vertices => {
            let verts = polytope::vertices(big_n, n)?;
            json!({
                "N": big_n,
                "n": n,
                "vertices": verts.iter().enumerate().map(|(i, v)| json!({
                    "index": i,
                    "kind": kind_name(v.kind),
                    "pivot": v.pivot + 1,
                    "coords": strings(v.coords.weights()),
                })).collect::<Vec<_>>(),
            })
        }
        Emit::Facets => {
            let count = polytope::vertices(big_n, n)?.len();
            let fs = polytope::facets(big_n, n)?;
            json!({
                "N": big_n,
                "n": n,
                "facets": fs.iter().map(|f| json!({
                    "subset": f.subset.iter().map(|l| l + 1).collect::<Vec<_>>(),
                    "vertices": f.vertex_set,
                })).collect::<Vec<_>>(),
                "incidence": fs.iter().map(|f| (0..count)
                    .map(|v| u8::from(f.vertex_set.contains(&v)))
                    .collect::<Vec<_>>()).collect::<Vec<_>>(),
            })
        }
        Emit::Adjacency => {
            let edges = polytope::adjacency_edges(big_n, n)?;
            json!({
                "N": big_n,
                "n": n,
                "vertex_count": polytope::vertices(big_n, n)?.len(),
                "edges": edges,
            })
        }
        Emit::Counterexample => {
            let c = polytope::boundary_counterexample(big_n)?;
            json!({
                "N": big_n,
                "n": 2,
                "p": strings(c.p.weights()),
                "min_eigenvalue": c.gamma.min_eigenvalue,
                "closed_form_lambda": c.closed_form_lambda,
                "verdict": c.gamma.verdict,
                "gamma_witness": c.gamma.witness,
            })
        }
    };
    write_json(&mut io::stdout().lock(), &value)
}

fn sample(file: &Path, draws: u64, seed: Option<u64>, stats: bool) -> Result<(), Failure> {
    let text = read(file)?;
    let spec = parse_stratified(&text)?;
    let seed = seed.or(spec.seed).unwrap_or(0);
    let mut sampler = Sampler::new(&spec.population, spec.n, seed)?;
    let mut out = BufWriter::new(io::stdout().lock());
    for _ in 0..draws {
        let labels: Vec<usize> = sampler.draw()?.into_iter().map(|l| l + 1).collect();
        writeln!(out, "{}", serde_json::to_string(&labels).expect("json"))?;
    }
    out.flush()?;
    if stats {
        let s = sampler.stats();
        let value = json!({
            "accepted": s.accepted,
            "proposals": s.proposals,
            "bound_c": s.bound_c,
            "approx_bound": sampler.bound().approx,
            "empirical_iterations_per_accept": s.empirical_iterations_per_accept,
            "acceptance_rate": s.accepted as f64 / s.proposals.max(1) as f64,
            "seed": seed,
        });
        eprintln!("{}", serde_json::to_string(&value).expect("json"));
    }
    Ok(())
}

fn verify_cmd(suites: &[SuiteArg], seed: u64) -> Result<(), Failure> {
    let mut selected: Vec<Suite> = Vec::new();
    for s in suites {
        match s {
            SuiteArg::All => selected.extend(Suite::ALL),
            SuiteArg::Identities => selected.push(Suite::Identities),
            SuiteArg::VarianceOracle => selected.push(Suite::VarianceOracle),
            SuiteArg::PolytopeOracle => selected.push(Suite::PolytopeOracle),
            SuiteArg::FactorialBounds => selected.push(Suite::FactorialBounds),
            SuiteArg::RejectionBound => selected.push(Suite::RejectionBound),
        }
    }
    selected.sort();
    selected.dedup();
    let mut all_pass = true;
    let mut out = io::stdout().lock();
    for suite in selected {
        let report = verify::run(suite, seed)?;
        all_pass &= report.passed();
        write!(out, "{report}")?;
    }
    if all_pass {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

// clap only recognises negative numbers with a leading digit, so `-.5`
// becomes `-0.5` before parsing
fn normalize_arg(arg: String) -> String {
    match arg.strip_prefix("-.") {
        Some(rest) if rest.starts_with(|c: char| c.is_ascii_digit()) => format!("-0.{rest}"),
        _ => arg,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse_from(std::env::args().map(normalize_arg));
    let result = match cli.command {
        Command::Analyze { file, n, x, tol, format } => analyze(&file, n, x, tol, format),
        Command::Polytope { big_n, n, emit } => polytope_cmd(big_n, n, emit),
        Command::Sample { file, draws, seed, stats } => sample(&file, draws, seed, stats),
        Command::Verify { suite, seed } => verify_cmd(&suite, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Infeasible(msg)) => {
            eprintln!("infeasible: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verify) => ExitCode::from(2),
    }
}
