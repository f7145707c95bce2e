use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use xsection::discrete::{brute_force_realize, ryser_construct, swap_construct, BinaryMatrix, BRUTE_FORCE_MAX_CELLS};
use xsection::feasibility::{check_gale_ryser, check_hlp, FeasibilityReport, Partition};
use xsection::ingest::{quantize, Interpolation, MarginalFile, QuantizationReport};
use xsection::netpbm::{matrix_to_pbm, set_from_netpbm, set_to_netpbm};
use xsection::plane::{reconstruct, GridParams};
use xsection::report::residual;
use xsection::stepfn::StepFunction;
use xsection::svg::{plot_marginal, plot_set};
use xsection::Dyadic;

/// Exit status for "ran fine, answer is no".
const EXIT_NEGATIVE: u8 = 1;
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "xsection", version, about = "Realize marginals as 0-1 matrices and plane sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a pair of marginals is realizable.
    Check(CheckArgs),
    /// Build a 0-1 matrix with given row and column sums.
    RealizeMatrix(RealizeMatrixArgs),
    /// Build a grid set whose sections approximate two marginals.
    RealizeSet(RealizeSetArgs),
    /// Recompute the sections of a stored set and compare with the marginals.
    Verify(VerifyArgs),
    /// Plot a marginal with its rearrangement and distribution function.
    Render(RenderArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Interp {
    Step,
    Linear,
}

impl From<Interp> for Interpolation {
    fn from(i: Interp) -> Self {
        match i {
            Interp::Step => Interpolation::Step,
            Interp::Linear => Interpolation::Linear,
        }
    }
}

#[derive(Args)]
struct Grid {
    /// Dyadic depth: the square is cut into 2^N x 2^N cells.
    #[arg(short = 'N', long = "depth")]
    depth: u32,
    /// Fill resolution: each cell holds a multiple of 2^-K of its width.
    #[arg(short = 'K', long = "sub")]
    sub: u32,
}

impl Grid {
    fn params(&self) -> Result<GridParams> {
        GridParams::new(self.depth, self.sub).map_err(|e| anyhow!(e))
    }
}

#[derive(Args)]
struct InterpArg {
    /// How marginal files are read between breakpoints.
    #[arg(long, value_enum, default_value = "step")]
    interp: Interp,
}

#[derive(Args)]
struct CheckArgs {
    /// Row and column sums from whitespace-separated integer files.
    #[arg(long, conflicts_with = "continuous", required_unless_present = "continuous")]
    discrete: bool,
    /// Continuous marginals f (vertical sections) and g (horizontal sections).
    #[arg(long, requires_all = ["depth", "sub"])]
    continuous: bool,
    first: PathBuf,
    second: PathBuf,
    #[arg(short = 'N', long = "depth")]
    depth: Option<u32>,
    #[arg(short = 'K', long = "sub")]
    sub: Option<u32>,
    #[command(flatten)]
    interp: InterpArg,
    /// Print a JSON document instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Greedy,
    Swap,
}

#[derive(Args)]
struct RealizeMatrixArgs {
    rows: PathBuf,
    cols: PathBuf,
    /// Output file; `.txt` writes rows of 0/1, anything else PBM.
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "greedy")]
    method: Method,
    /// Cross-check against exhaustive search on small instances.
    #[arg(long)]
    verify_oracle: bool,
}

#[derive(Args)]
struct RealizeSetArgs {
    f: PathBuf,
    g: PathBuf,
    #[command(flatten)]
    grid: Grid,
    /// Output image (PGM, or PBM when K = 0).
    #[arg(short, long)]
    output: PathBuf,
    /// Write the swap trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write an SVG drawing of the set here.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Write the machine-readable summary here.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[command(flatten)]
    interp: InterpArg,
}

#[derive(Args)]
struct VerifyArgs {
    set: PathBuf,
    f: PathBuf,
    g: PathBuf,
    #[command(flatten)]
    interp: InterpArg,
}

#[derive(Args)]
struct RenderArgs {
    f: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Quantize onto this grid first; without it the file must be an exact
    /// dyadic step function.
    #[arg(short = 'N', long = "depth", requires = "sub")]
    depth: Option<u32>,
    #[arg(short = 'K', long = "sub", requires = "depth")]
    sub: Option<u32>,
    #[command(flatten)]
    interp: InterpArg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Check(a) => run_check(a),
        Command::RealizeMatrix(a) => run_realize_matrix(a),
        Command::RealizeSet(a) => run_realize_set(a),
        Command::Verify(a) => run_verify(a),
        Command::Render(a) => run_render(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_NEGATIVE),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn read_sums(path: &Path) -> Result<Vec<u64>> {
    read(path)?
        .split_whitespace()
        .map(|t| t.parse::<u64>().with_context(|| format!("{}: `{t}` is not a nonnegative integer", path.display())))
        .collect()
}

fn load_marginal(path: &Path, interp: Interp, params: GridParams) -> Result<(StepFunction, QuantizationReport)> {
    let raw = MarginalFile::from_path(path, interp.into()).with_context(|| format!("in {}", path.display()))?;
    quantize(&raw, params).with_context(|| format!("quantizing {}", path.display()))
}

fn print_report(report: &FeasibilityReport) {
    println!("verdict: {}", report.verdict);
    println!("totals: {} vs {}", report.lhs_total, report.rhs_total);
    if let Some(w) = &report.witness {
        println!("witness: {} lhs={} rhs={}", w.point, w.lhs, w.rhs);
    }
}

fn run_check(a: CheckArgs) -> Result<bool> {
    if a.discrete {
        let rows = Partition::new(read_sums(&a.first)?);
        let cols = Partition::new(read_sums(&a.second)?);
        let report = check_gale_ryser(&rows, &cols);
        if a.json {
            println!("{}", serde_json::to_string_pretty(&report)?);
        } else {
            println!("rows: {rows}");
            println!("cols: {cols}");
            print_report(&report);
        }
        return Ok(report.is_feasible());
    }
    let (depth, sub) = a.depth.zip(a.sub).ok_or_else(|| anyhow!("--continuous needs -N and -K"))?;
    let params = GridParams::new(depth, sub).map_err(|e| anyhow!(e))?;
    let (f, fq) = load_marginal(&a.first, a.interp.interp, params)?;
    let (g, gq) = load_marginal(&a.second, a.interp.interp, params)?;
    let report = check_hlp(&f, &g);
    if a.json {
        let doc = serde_json::json!({ "report": report, "quantization": { "f": fq, "g": gq } });
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        print_report(&report);
        println!("f {fq}");
        println!("g {gq}");
    }
    Ok(report.is_feasible())
}

fn run_realize_matrix(a: RealizeMatrixArgs) -> Result<bool> {
    let rows = read_sums(&a.rows)?;
    let cols = read_sums(&a.cols)?;
    let report = check_gale_ryser(&Partition::new(rows.clone()), &Partition::new(cols.clone()));
    if a.verify_oracle {
        if rows.len() * cols.len() <= BRUTE_FORCE_MAX_CELLS {
            let found = brute_force_realize(&rows, &cols)?.is_some();
            if found != report.is_feasible() {
                bail!("exhaustive search disagrees with the feasibility test ({found} vs {})", report.verdict);
            }
            println!("oracle: agrees ({} cells searched)", rows.len() * cols.len());
        } else {
            println!("oracle: skipped ({} cells > {BRUTE_FORCE_MAX_CELLS})", rows.len() * cols.len());
        }
    }
    if !report.is_feasible() {
        print_report(&report);
        return Ok(false);
    }
    let m: BinaryMatrix = match a.method {
        Method::Greedy => ryser_construct(&rows, &cols)?,
        Method::Swap => swap_construct(&rows, &cols)?,
    };
    debug_assert!(m.has_margins(&rows, &cols));
    let text_output = a.output.extension().is_some_and(|e| e.eq_ignore_ascii_case("txt"));
    write(&a.output, &if text_output { m.to_text() } else { matrix_to_pbm(&m) })?;
    println!("verdict: {}", report.verdict);
    println!("wrote {}x{} matrix to {}", m.rows(), m.cols(), a.output.display());
    Ok(true)
}

fn run_realize_set(a: RealizeSetArgs) -> Result<bool> {
    let params = a.grid.params()?;
    let (f, fq) = load_marginal(&a.f, a.interp.interp, params)?;
    let (g, gq) = load_marginal(&a.g, a.interp.interp, params)?;
    println!("f {fq}");
    println!("g {gq}");
    let report = check_hlp(&f, &g);
    if !report.is_feasible() {
        print_report(&report);
        return Ok(false);
    }
    let built = reconstruct(&f, &g, params)?;
    write(&a.output, &set_to_netpbm(&built.set))?;
    if let Some(path) = &a.trace {
        write(path, &built.trace.to_text())?;
    }
    if let Some(path) = &a.svg {
        write(path, &plot_set(&built.set))?;
    }
    if let Some(path) = &a.summary {
        write(path, &(built.summary.to_json() + "\n"))?;
    }
    println!("{}", built.summary);
    println!("residual: {}", built.summary.final_residual);
    Ok(true)
}

fn run_verify(a: VerifyArgs) -> Result<bool> {
    let set = set_from_netpbm(&read(&a.set)?).with_context(|| format!("in {}", a.set.display()))?;
    let params = set.params();
    let (f, _) = load_marginal(&a.f, a.interp.interp, params)?;
    let (g, _) = load_marginal(&a.g, a.interp.interp, params)?;
    let vertical = set.vertical_section();
    let horizontal = set.horizontal_section();
    let necessity = check_hlp(&vertical, &horizontal);
    let h_matches = horizontal == g;
    let res = residual(&set, &f)?;
    println!("grid: N={} K={}", params.depth(), params.sub());
    println!("measure: {}", set.measure());
    println!("horizontal section equals g: {}", if h_matches { "yes" } else { "no" });
    if !h_matches {
        println!("horizontal section L1 distance to g: {}", horizontal.l1_distance(&g));
    }
    println!("sections pass the realizability test: {}", if necessity.is_feasible() { "yes" } else { "no" });
    println!("residual: {res}");
    Ok(h_matches && necessity.is_feasible())
}

/// The file's step function when it is already exact and dyadic.
fn exact_step(raw: &MarginalFile) -> Result<StepFunction> {
    if raw.interpolation != Interpolation::Step {
        bail!("linear marginals need a grid (-N and -K)");
    }
    let one = Dyadic::ONE;
    let mut breaks = Vec::new();
    let mut values = Vec::new();
    for (b, v) in &raw.entries {
        let b = Dyadic::from_rational(b).ok_or_else(|| anyhow!("breakpoint {b} is not dyadic; pass -N and -K"))?;
        if b >= one {
            break;
        }
        let v = Dyadic::from_rational(v).ok_or_else(|| anyhow!("value {v} is not dyadic; pass -N and -K"))?;
        breaks.push(b);
        values.push(v);
    }
    breaks.push(one);
    StepFunction::new(breaks, values).map_err(|e| anyhow!(e))
}

fn run_render(a: RenderArgs) -> Result<bool> {
    let raw = MarginalFile::from_path(&a.f, a.interp.interp.into()).with_context(|| format!("in {}", a.f.display()))?;
    let f = match a.depth.zip(a.sub) {
        Some((n, k)) => quantize(&raw, GridParams::new(n, k).map_err(|e| anyhow!(e))?)?.0,
        None => exact_step(&raw)?,
    };
    let title = a.f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    write(&a.output, &plot_marginal(&f, &title))?;
    println!("wrote {}", a.output.display());
    Ok(true)
}
