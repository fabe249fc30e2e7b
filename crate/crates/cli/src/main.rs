use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use shanks::determinant::DetOracle;
use shanks::epsilon::TableDump;
use shanks::identities::SweepSummary;
use shanks::lotka_volterra::{closed_form_lattice, lv_m1_u_check, lv_residuals, miura_from_epsilon, LvEntry};
use shanks::sequences::{load_sequence, parse_builtin, sequence_to_json, InputFormat};
use shanks::{
    cross_rule_table, determinant_table, generate, generate_kernel, linear_table, multistep_epsilon,
    random_rational_sequence, sweep, Error, KernelSpec, Mode, Scalar, SequencePrefix,
};

#[derive(Parser)]
#[command(name = "shanks", version, about = "Shanks transformation and multistep ε-algorithm toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an ε-table with one of the engines.
    Accelerate(AccelerateArgs),
    /// Evaluate one determinant of the oracle.
    Oracle(OracleArgs),
    /// Randomized residual sweep over all identities.
    Identities(IdentitiesArgs),
    /// Lotka–Volterra lattice and its residual report.
    Lv(LvArgs),
    /// Write a sequence from the kernel of the multistep transformation.
    KernelGen(KernelArgs),
}

#[derive(Args)]
struct Numeric {
    /// Arithmetic mode.
    #[arg(long, value_enum, default_value_t = ModeArg::Rational)]
    mode: ModeArg,
    /// Binary precision in float mode (at least 53).
    #[arg(long, default_value_t = 128)]
    precision_bits: usize,
}

impl Numeric {
    fn mode(&self) -> shanks::Result<Mode> {
        match self.mode {
            ModeArg::Rational => Ok(Mode::Rational),
            ModeArg::Float => Mode::float(self.precision_bits),
        }
    }
}

#[derive(Args)]
struct Input {
    /// Sequence file (.csv or .json) or builtin: ln2, geometric:S,c,lambda, power:x,c0,c1,...
    #[arg(long)]
    input: String,
    /// Number of terms for builtin series.
    #[arg(long)]
    length: Option<usize>,
    #[command(flatten)]
    numeric: Numeric,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Rational,
    Float,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    Rec,
    Det,
    Cross,
    Linear,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Args)]
struct AccelerateArgs {
    #[command(flatten)]
    input: Input,
    /// Step parameter.
    #[arg(short, long, default_value_t = 1)]
    m: usize,
    /// Highest column to report.
    #[arg(long)]
    max_k: Option<isize>,
    #[arg(long, value_enum, default_value_t = Engine::Rec)]
    engine: Engine,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Known limit; columns (m+1)k then report |ε - limit|.
    #[arg(long)]
    limit: Option<String>,
    /// Exit with status 1 if a reported cell broke down.
    #[arg(long)]
    strict: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Hankel,
    H,
    Phi,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: Input,
    #[arg(short, long, default_value_t = 1)]
    m: usize,
    #[arg(long, value_enum, default_value_t = Family::H)]
    family: Family,
    /// Determinant order.
    #[arg(short, long)]
    k: isize,
    /// Start index.
    #[arg(short, long, default_value_t = 0)]
    n: usize,
    /// Evaluate on Δ^shift S.
    #[arg(long, default_value_t = 0)]
    shift: usize,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct IdentitiesArgs {
    #[arg(short, long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of random sequences.
    #[arg(long, default_value_t = 10)]
    count: u64,
    #[arg(long, default_value_t = 13)]
    length: usize,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct LvArgs {
    #[command(flatten)]
    input: Input,
    #[arg(short, long, default_value_t = 1)]
    m: usize,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(short, long, default_value_t = 1)]
    m: usize,
    /// a_1,...,a_k
    #[arg(long)]
    coefficients: String,
    #[arg(long)]
    limit: String,
    /// S_0,...,S_{km-1}
    #[arg(long)]
    seeds: String,
    #[arg(long)]
    length: usize,
    #[command(flatten)]
    numeric: Numeric,
    /// Output file; standard output if absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

/// Failure of a command: a message for standard error and an exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

fn config(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

type Outcome = std::result::Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Accelerate(args) => accelerate(args),
        Command::Oracle(args) => oracle(args),
        Command::Identities(args) => identities(args),
        Command::Lv(args) => lv(args),
        Command::KernelGen(args) => kernel_gen(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(input: &Input) -> Result<SequencePrefix, Failure> {
    let mode = input.numeric.mode()?;
    let path = Path::new(&input.input);
    let seq = if path.is_file() {
        let format = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => InputFormat::Json,
            _ => InputFormat::Csv,
        };
        let seq = load_sequence(path, format, input.numeric.precision_bits)?;
        if mode.is_rational() && !seq.mode().is_rational() {
            return Err(config("rational mode rejects non-rational input values"));
        }
        seq
    } else {
        generate(&parse_builtin(&input.input, input.length, mode)?)?
    };
    Ok(if mode.is_rational() { seq } else { seq.to_mode(mode) })
}

fn check_m(m: usize) -> Result<(), Failure> {
    if m == 0 {
        Err(config("m must be at least 1"))
    } else {
        Ok(())
    }
}

fn accelerate(args: AccelerateArgs) -> Outcome {
    check_m(args.m)?;
    if args.engine == Engine::Cross && args.m != 1 {
        return Err(config("cross rule requires m=1"));
    }
    let seq = load(&args.input)?;
    let limit = match &args.limit {
        Some(text) => Some(Scalar::parse_in(text, seq.mode()).map_err(config)?),
        None => None,
    };
    let table = match args.engine {
        Engine::Rec => multistep_epsilon(&seq, args.m),
        Engine::Det => determinant_table(&seq, args.m),
        Engine::Cross => cross_rule_table(&seq),
        Engine::Linear => linear_table(&seq, args.m),
    };
    let mut dump = table.dump(limit.as_ref());
    if let Some(max_k) = args.max_k {
        dump.cells.retain(|c| c.k <= max_k);
    }
    print!("{}", render_dump(&dump, args.format));
    let broken = dump.cells.iter().filter(|c| c.status == "breakdown").count();
    if broken > 0 {
        eprintln!("{broken} cell(s) broke down");
    }
    Ok(u8::from(args.strict && broken > 0))
}

fn render_dump(dump: &TableDump, format: Format) -> String {
    match format {
        Format::Json => dump.to_json() + "\n",
        Format::Csv => dump.to_csv(),
        Format::Table => {
            let mut rows = vec![["k", "n", "status", "value", "error"].map(String::from).to_vec()];
            for c in &dump.cells {
                let status = match c.origin {
                    Some((k, n)) if (k, n) != (c.k, c.n) => format!("{} from ({k},{n})", c.status),
                    _ => c.status.clone(),
                };
                rows.push(vec![c.k.to_string(), c.n.to_string(), status, c.value.clone(), c.error.clone().unwrap_or_default()]);
            }
            format!("m = {}\n{}", dump.m, aligned(&rows))
        }
    }
}

fn aligned(rows: &[Vec<String>]) -> String {
    let widths: Vec<usize> =
        (0..rows[0].len()).map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0)).collect();
    rows.iter()
        .map(|r| {
            let line: Vec<String> = r.iter().zip(&widths).map(|(v, w)| format!("{v:<w$}")).collect();
            line.join("  ").trim_end().to_string() + "\n"
        })
        .collect()
}

fn oracle(args: OracleArgs) -> Outcome {
    check_m(args.m)?;
    let seq = load(&args.input)?;
    let oracle = DetOracle::new(&seq, args.m);
    let (name, value) = match args.family {
        Family::Hankel => ("hankel", oracle.hankel(args.shift, args.k, args.n)?),
        Family::H => ("H", oracle.h(args.shift, args.k, args.n)?),
        Family::Phi => ("Phi", oracle.phi(args.shift, args.k, args.n)?),
    };
    match args.format {
        Format::Json => {
            let doc = json!({"family": name, "m": args.m, "k": args.k, "n": args.n, "shift": args.shift, "value": value.to_string()});
            println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
        }
        Format::Csv => println!("family,m,k,n,shift,value\n{name},{},{},{},{},{value}", args.m, args.k, args.n, args.shift),
        Format::Table => println!("{name}_{}(Δ^{} S_{}) [m={}] = {value}", args.k, args.shift, args.n, args.m),
    }
    Ok(0)
}

fn identities(args: IdentitiesArgs) -> Outcome {
    check_m(args.m)?;
    if args.length < 3 {
        return Err(config("identity sweeps need at least 3 terms"));
    }
    let mut summary = SweepSummary::default();
    for seed in args.seed..args.seed + args.count {
        summary.merge(&sweep(&random_rational_sequence(seed, args.length), args.m));
    }
    let verdict = if summary.all_zero() { "all residuals zero" } else { "nonzero residuals found" };
    match args.format {
        Format::Json => {
            let tallies: Vec<_> = summary
                .tallies
                .iter()
                .map(|(id, t)| json!({"id": id.label(), "cases": t.cases, "nonzero": t.nonzero, "max_abs_residual": t.max_abs_residual}))
                .collect();
            let doc = json!({"m": args.m, "seed": args.seed, "count": args.count, "all_zero": summary.all_zero(), "identities": tallies});
            println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
        }
        Format::Csv => {
            println!("id,cases,nonzero,max_abs_residual");
            for (id, t) in &summary.tallies {
                println!("{id},{},{},{:e}", t.cases, t.nonzero, t.max_abs_residual);
            }
        }
        Format::Table => {
            let mut rows = vec![["identity", "cases", "nonzero", "max |residual|"].map(String::from).to_vec()];
            for (id, t) in &summary.tallies {
                rows.push(vec![id.to_string(), t.cases.to_string(), t.nonzero.to_string(), format!("{:e}", t.max_abs_residual)]);
            }
            print!("{}", aligned(&rows));
            println!("m = {}, seeds {}..{}, {} cases: {verdict}", args.m, args.seed, args.seed + args.count, summary.total_cases());
        }
    }
    Ok(u8::from(!summary.all_zero()))
}

fn entry_text(entry: &LvEntry) -> (&'static str, String) {
    match entry {
        LvEntry::Finite(v) => ("valid", v.to_string()),
        LvEntry::Infinity => ("infinity", "inf".into()),
        LvEntry::Breakdown => ("breakdown", String::new()),
    }
}

fn lv(args: LvArgs) -> Outcome {
    check_m(args.m)?;
    let seq = load(&args.input)?;
    let lattice = miura_from_epsilon(&multistep_epsilon(&seq, args.m))?;
    let closed = closed_form_lattice(&seq, args.m)?;
    let report = lv_residuals(&lattice);
    let disagreements = lattice.entries().filter(|(&(j, n), e)| closed.get(j, n) != Some(*e)).count();
    let breakdowns = lattice.entries().filter(|(_, e)| matches!(e, LvEntry::Breakdown)).count();
    let u_report = (args.m == 1).then(|| lv_m1_u_check(&lattice)).transpose()?;

    match args.format {
        Format::Json => {
            let sites: Vec<_> = lattice
                .entries()
                .map(|(&(j, n), e)| {
                    let (status, value) = entry_text(e);
                    json!({"j": j, "index": lattice.physical_index(j), "n": n, "status": status, "value": value})
                })
                .collect();
            let mut doc = json!({
                "m": args.m,
                "sites": sites,
                "closed_form_disagreements": disagreements,
                "residuals": {"count": report.residuals.len(), "nonzero": report.nonzero_sites().len(), "skipped": report.skipped.len()},
            });
            if let Some(u) = &u_report {
                doc["u_check"] = json!({
                    "ratio_residuals": u.ratio_residuals.len(),
                    "equation_residuals": u.equation_residuals.len(),
                    "all_zero": u.all_zero(),
                    "singular": u.singular.len(),
                });
            }
            println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
        }
        Format::Csv => {
            println!("j,index,n,status,value");
            for (&(j, n), e) in lattice.entries() {
                let (status, value) = entry_text(e);
                println!("{j},{},{n},{status},{value}", lattice.physical_index(j));
            }
        }
        Format::Table => {
            let mut rows = vec![["j", "index", "n", "status", "value"].map(String::from).to_vec()];
            for (&(j, n), e) in lattice.entries() {
                let (status, value) = entry_text(e);
                rows.push(vec![j.to_string(), lattice.physical_index(j), n.to_string(), status.into(), value]);
            }
            print!("{}", aligned(&rows));
            println!("closed form disagreements: {disagreements}");
            println!(
                "lattice residuals: {} evaluated, {} nonzero, {} skipped",
                report.residuals.len(),
                report.nonzero_sites().len(),
                report.skipped.len()
            );
            if let Some(u) = &u_report {
                println!(
                    "u reduction: {} ratio and {} equation residuals, {}; {} singular site(s)",
                    u.ratio_residuals.len(),
                    u.equation_residuals.len(),
                    if u.all_zero() { "all zero" } else { "NONZERO" },
                    u.singular.len()
                );
            }
        }
    }
    Ok(u8::from(args.strict && breakdowns > 0))
}

fn parse_list(text: &str, mode: Mode) -> Result<Vec<Scalar>, Failure> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| Scalar::parse_in(t, mode).map_err(config))
        .collect()
}

fn kernel_gen(args: KernelArgs) -> Outcome {
    check_m(args.m)?;
    let mode = args.numeric.mode()?;
    let spec = KernelSpec {
        m: args.m,
        coefficients: parse_list(&args.coefficients, mode)?,
        limit: Scalar::parse_in(&args.limit, mode).map_err(config)?,
        seeds: parse_list(&args.seeds, mode)?,
    };
    let seq = generate_kernel(&spec, args.length)?;
    let text = match args.format {
        Format::Json => sequence_to_json(&seq) + "\n",
        Format::Csv | Format::Table => {
            let mut out = format!("# kernel sequence, m={}, limit {}\n", args.m, spec.limit);
            for t in seq.terms() {
                out.push_str(&format!("{t}\n"));
            }
            out
        }
    };
    match &args.output {
        Some(path) => std::fs::write(path, text).map_err(|e| config(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(0)
}
