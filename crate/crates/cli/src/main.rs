use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use hjsr_core::harness::{
    random_instance, scan_rho_bar_n, scan_rho_n, scan_rho_tilde_n, CurveVerdict, Instance, Outcome, Rho, Status,
    TheoremId, TrialConfig,
};
use hjsr_core::jsr::{radius_bracket, EnumerationBudget};
use hjsr_core::kernel::{refinement_study, KernelSpec, RefinementConfig};
use hjsr_core::{Error, MatrixSet, WeightRegime};

const EXIT_ERROR: u8 = 1;
const EXIT_VIOLATION: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

#[derive(Parser)]
#[command(name = "hjsr", version, about = "Hadamard means, symmetrizations and joint spectral radius checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded random trials of one inequality and write a report.
    Verify(VerifyArgs),
    /// Scan a symmetrized functional over alpha and write the curve.
    Scan(ScanArgs),
    /// Bracket the generalized/joint spectral radius of a matrix set.
    Bracket(BracketArgs),
    /// Refinement study on a discretized integral kernel.
    Kernel(KernelArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Output {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct BudgetArgs {
    /// Maximum product length in bracket enumeration.
    #[arg(long, default_value_t = 8)]
    depth: usize,
    #[arg(long, default_value_t = 200_000)]
    max_products: usize,
    /// Disable dominance pruning.
    #[arg(long)]
    no_prune: bool,
}

impl BudgetArgs {
    fn budget(&self) -> EnumerationBudget {
        EnumerationBudget { max_depth: self.depth, max_products: self.max_products, prune: !self.no_prune }
    }
}

#[derive(Args)]
struct ShapeArgs {
    #[arg(long, default_value_t = 3)]
    dim: usize,
    #[arg(long, default_value_t = 1)]
    set_size: usize,
    /// Mean factors, or sets in a chain or scan.
    #[arg(long, visible_alias = "m", default_value_t = 2)]
    n_factors: usize,
    #[arg(long, default_value_t = 2)]
    rows: usize,
    #[arg(long, default_value_t = 2)]
    cols: usize,
    #[arg(long, default_value_t = 1.0)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Treat the sizes above as maxima and draw each trial's shape.
    #[arg(long)]
    vary_shape: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    theorem: TheoremId,
    /// Functionals to check (repeat or comma-separate); theorem defaults otherwise.
    #[arg(long, value_delimiter = ',')]
    rho: Vec<Rho>,
    #[command(flatten)]
    shape: ShapeArgs,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Relative tolerance for exactly evaluated functionals.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Relative tolerance when a bracket is involved.
    #[arg(long, default_value_t = 1e-7)]
    bracket_tol: f64,
    #[arg(long, default_value_t = 21)]
    alpha_steps: usize,
    /// Weight normalization: unit-sum or ge-one-sum.
    #[arg(long, default_value = "unit-sum", value_parser = parse_regime)]
    regime: WeightRegime,
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ScanArgs {
    /// rho-n, rho-tilde-n or rho-bar-n.
    #[arg(long, default_value = "rho-n")]
    theorem: TheoremId,
    #[arg(long, default_value = "r")]
    rho: Rho,
    /// Matrix-set JSON: one set, a list of sets, or (rho-bar-n) a list of rows of sets.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    shape: ShapeArgs,
    #[arg(long, default_value_t = 21)]
    alpha_steps: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 1e-7)]
    bracket_tol: f64,
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BracketArgs {
    #[arg(long)]
    input: PathBuf,
    /// r/gsr (generalized) and/or jsr (joint).
    #[arg(long, value_delimiter = ',', default_value = "gsr,jsr")]
    rho: Vec<Rho>,
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct KernelArgs {
    /// constant, exp-diff, rank-one or poly.
    #[arg(long)]
    kernel: String,
    /// Comma-separated kernel parameters.
    #[arg(long)]
    kernel_param: Option<String>,
    /// rho-n, ejs-mean or sym-single.
    #[arg(long, default_value = "rho-n")]
    theorem: TheoremId,
    #[arg(long, default_value = "r")]
    rho: Rho,
    /// Grid sizes N.
    #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
    grid: Vec<usize>,
    #[arg(long, default_value_t = 21)]
    alpha_steps: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[command(flatten)]
    output: Output,
}

fn parse_regime(s: &str) -> Result<WeightRegime, String> {
    match s {
        "unit-sum" => Ok(WeightRegime::UnitSum),
        "ge-one-sum" => Ok(WeightRegime::GeOneSum),
        _ => Err(format!("unknown regime '{s}' (unit-sum, ge-one-sum)")),
    }
}

#[derive(Debug)]
struct CliError(String);

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn emit(output: &Output, text: &str) -> CliResult<()> {
    match &output.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError(format!("{}: {e}", path.display())))
}

fn trial_config(shape: &ShapeArgs, budget: &BudgetArgs) -> TrialConfig {
    TrialConfig {
        dim: shape.dim,
        set_size: shape.set_size,
        n_factors: shape.n_factors,
        rows: shape.rows,
        cols: shape.cols,
        density: shape.density,
        seed: shape.seed,
        vary_shape: shape.vary_shape,
        budget: budget.budget(),
        ..TrialConfig::default()
    }
}

fn run_verify(args: VerifyArgs) -> CliResult<u8> {
    let cfg = TrialConfig {
        trials: args.trials,
        tol: args.tol,
        bracket_tol: args.bracket_tol,
        alpha_steps: args.alpha_steps,
        regime: args.regime,
        rhos: args.rho.clone(),
        ..trial_config(&args.shape, &args.budget)
    };
    let report = hjsr_core::verify(args.theorem, &cfg)?;
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut s = String::from("trial,outcome,min_margin\n");
            for t in &report.trials {
                let margin = t.min_margin.map_or(String::new(), |m| format!("{m:.16e}"));
                writeln!(s, "{},{},{margin}", t.index, t.outcome.as_str()).expect("string write");
            }
            s
        }
    };
    emit(&args.output, &text)?;
    let s = &report.summary;
    eprintln!(
        "{}: {} trials, {} passed, {} inconclusive, {} errors, {} violations, {} findings ({:.2?})",
        report.theorem, s.trials, s.passed, s.inconclusive, s.errors, s.violations, s.findings, report.wall_time
    );
    Ok(status_code(report.status))
}

fn status_code(s: Status) -> u8 {
    match s {
        Status::Pass => 0,
        Status::Fail => EXIT_VIOLATION,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn verdict_code(v: CurveVerdict) -> u8 {
    match v {
        CurveVerdict::MonotoneOk => 0,
        CurveVerdict::Violation => EXIT_VIOLATION,
        CurveVerdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn outcome_code(o: Outcome) -> u8 {
    match o {
        Outcome::Pass => 0,
        Outcome::Violation => EXIT_VIOLATION,
        Outcome::Inconclusive | Outcome::Error => EXIT_INCONCLUSIVE,
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScanInputDoc {
    One(MatrixSet),
    Many(Vec<MatrixSet>),
    Grid(Vec<Vec<MatrixSet>>),
}

fn run_scan(args: ScanArgs) -> CliResult<u8> {
    let scfg = hjsr_core::harness::ScanConfig {
        alpha_steps: args.alpha_steps,
        tol: args.tol,
        bracket_tol: args.bracket_tol,
        budget: args.budget.budget(),
    };
    let doc = match &args.input {
        Some(path) => read_json::<ScanInputDoc>(path)?,
        None => {
            let cfg = trial_config(&args.shape, &args.budget);
            cfg.validate()?;
            match random_instance(args.theorem, &cfg, 0)? {
                Instance::ScanSets { sets } => ScanInputDoc::Many(sets),
                Instance::ScanGrid { grid } => ScanInputDoc::Grid(grid),
                _ => return Err(CliError(format!("{} is not a scan (rho-n, rho-tilde-n, rho-bar-n)", args.theorem))),
            }
        }
    };
    let curve = match (args.theorem, doc) {
        (TheoremId::RhoN, ScanInputDoc::One(s)) => scan_rho_n(&[s], args.rho, &scfg)?,
        (TheoremId::RhoN, ScanInputDoc::Many(v)) => scan_rho_n(&v, args.rho, &scfg)?,
        (TheoremId::RhoTildeN, ScanInputDoc::One(s)) => scan_rho_tilde_n(&[s], args.rho, &scfg)?,
        (TheoremId::RhoTildeN, ScanInputDoc::Many(v)) => scan_rho_tilde_n(&v, args.rho, &scfg)?,
        (TheoremId::RhoBarN, ScanInputDoc::One(s)) => scan_rho_bar_n(&[vec![s]], args.rho, &scfg)?,
        (TheoremId::RhoBarN, ScanInputDoc::Grid(g)) => scan_rho_bar_n(&g, args.rho, &scfg)?,
        (TheoremId::RhoN | TheoremId::RhoTildeN | TheoremId::RhoBarN, _) => {
            return Err(CliError(format!("input shape does not fit {}", args.theorem)))
        }
        (other, _) => return Err(CliError(format!("{other} is not a scan (rho-n, rho-tilde-n, rho-bar-n)"))),
    };
    let text = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => curve.to_csv(),
        Format::Json => to_json(&curve)?,
    };
    emit(&args.output, &text)?;
    Ok(verdict_code(curve.verdict))
}

#[derive(Serialize)]
struct BracketOut {
    lower: f64,
    upper: f64,
    depth_used: usize,
    partial: bool,
}

fn run_bracket(args: BracketArgs) -> CliResult<u8> {
    if args.output.format == Some(Format::Csv) {
        return Err(CliError("bracket output is JSON only".into()));
    }
    let set: MatrixSet = read_json(&args.input)?;
    let budget = args.budget.budget();
    let mut out = serde_json::Map::new();
    for rho in &args.rho {
        let kind = rho
            .radius_kind()
            .ok_or_else(|| CliError(format!("bracket takes r, gsr or jsr, not {rho}")))?;
        let b = radius_bracket(&set, kind, &budget)?;
        let entry = BracketOut { lower: b.lower, upper: b.upper, depth_used: b.depth_used, partial: b.partial };
        out.insert(rho.as_str().to_owned(), serde_json::to_value(entry)?);
    }
    emit(&args.output, &to_json(&out)?)?;
    Ok(0)
}

fn run_kernel(args: KernelArgs) -> CliResult<u8> {
    let spec = KernelSpec::parse(&args.kernel, args.kernel_param.as_deref())?;
    let cfg = RefinementConfig { rho: args.rho, alpha_steps: args.alpha_steps, tol: args.tol };
    let report = refinement_study(&spec, args.theorem, &args.grid, &cfg)?;
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut s = String::from("n,outcome,margin\n");
            for r in &report.rows {
                writeln!(s, "{},{},{:.16e}", r.n, r.outcome.as_str(), r.margin).expect("string write");
            }
            s
        }
    };
    emit(&args.output, &text)?;
    let worst = report.rows.iter().fold(Outcome::Pass, |acc, r| acc.worst(r.outcome));
    Ok(outcome_code(worst))
}

fn init_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("HJSR_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| CliError(format!("HJSR_THREADS must be a positive integer, got '{v}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage errors share the generic error code; 2 means a violation
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    let result = init_threads().and_then(|()| match cli.command {
        Command::Verify(a) => run_verify(a),
        Command::Scan(a) => run_scan(a),
        Command::Bracket(a) => run_bracket(a),
        Command::Kernel(a) => run_kernel(a),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(CliError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
