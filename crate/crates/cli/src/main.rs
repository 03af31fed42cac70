use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ddgl2_core::algebra::{centralizer, pattern_space, unital_closure};
use ddgl2_core::clifford::{build_dirac, canonical_products, check_anticommutation, product_span};
use ddgl2_core::corpus::{self, assign_params, CaseSpec, Corpus, DrawPlan, DEFAULT_SEED};
use ddgl2_core::matd::Mat;
use ddgl2_core::presentation::Presentation;
use ddgl2_core::verify::{verify_all, RunReport, VerifyOptions};

const CORPUS_ENV: &str = "DDGL2_CORPUS";

#[derive(Parser)]
#[command(name = "ddgl2", version, about = "Exact verification of the 4x4 quantum GL2 case corpus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify cases and report discrepancies.
    Verify(RunArgs),
    /// Print the summary table.
    Table(RunArgs),
    /// Check the Dirac gamma matrices and the rank of their 16 products.
    CliffordCheck(CliffordArgs),
    /// Show the computed algebras for one case and draw.
    Explain(ExplainArgs),
    /// Rewrite the corpus files in canonical form.
    Fmt(FmtArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct CorpusArgs {
    /// Corpus directory (contains family-N/cases.json).
    #[arg(long, env = CORPUS_ENV)]
    corpus: Option<PathBuf>,
    /// Relation file; defaults to the shipped set.
    #[arg(long)]
    relations: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    src: CorpusArgs,
    /// A single case id, e.g. 2.2.
    #[arg(long, conflicts_with_all = ["family", "all"])]
    case: Option<String>,
    /// Every case of one family.
    #[arg(long, conflicts_with = "all")]
    family: Option<u32>,
    /// Every case (the default when no filter is given).
    #[arg(long)]
    all: bool,
    /// Parameter draws per branch.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    draws: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Restrict to one branch (1-based).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    branch: Option<u64>,
    /// Also verify the cases with their errata applied.
    #[arg(long, value_enum, default_value = "off")]
    errata: Switch,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct CliffordArgs {
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Replace gamma K by gamma K-1 before checking.
    #[arg(long, hide = true)]
    corrupt: Option<usize>,
}

#[derive(Args)]
struct ExplainArgs {
    #[command(flatten)]
    src: CorpusArgs,
    #[arg(long)]
    case: String,
    #[arg(long, default_value_t = 1)]
    branch: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    draw: usize,
    /// Explain the case with its errata applied.
    #[arg(long)]
    corrected: bool,
}

#[derive(Args)]
struct FmtArgs {
    #[command(flatten)]
    src: CorpusArgs,
    /// Only report files that are not canonical.
    #[arg(long)]
    check: bool,
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn default_corpus() -> PathBuf {
    let local = PathBuf::from("corpus");
    if local.join("family-1").is_dir() {
        return local;
    }
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn load(src: &CorpusArgs) -> Result<(Corpus, Presentation), Failure> {
    let dir = src.corpus.clone().unwrap_or_else(default_corpus);
    let corpus = corpus::load(&dir).map_err(|e| usage(e.to_string()))?;
    let pres = match &src.relations {
        Some(p) => Presentation::load(p).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        None => Presentation::shipped(),
    };
    Ok((corpus, pres))
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn select<'a>(corpus: &'a Corpus, a: &RunArgs) -> Result<Vec<&'a CaseSpec>, Failure> {
    if let Some(id) = &a.case {
        let c = corpus.case(id).ok_or_else(|| usage(format!("unknown case `{id}`")))?;
        if let Some(b) = a.branch {
            if b as usize > c.branches.len() {
                return Err(usage(format!("case {id} has {} branch(es)", c.branches.len())));
            }
        }
        return Ok(vec![c]);
    }
    if a.branch.is_some() {
        return Err(usage("--branch requires --case"));
    }
    if let Some(f) = a.family {
        let cases = corpus.family(f);
        if cases.is_empty() {
            return Err(usage(format!("unknown family {f}")));
        }
        return Ok(cases);
    }
    Ok(corpus.cases.iter().collect())
}

fn run(a: &RunArgs, table: bool) -> Result<u8, Failure> {
    let (corpus, pres) = load(&a.src)?;
    let cases = select(&corpus, a)?;
    let opts = VerifyOptions {
        plan: DrawPlan { seed: a.seed, draws: a.draws as usize },
        branch: a.branch.map(|b| b as usize - 1),
        errata: a.errata == Switch::On,
    };
    let report: RunReport = verify_all(&cases, &pres, &opts, a.jobs);
    let text = match (a.format, table) {
        (Format::Json, _) => report.to_json(),
        (Format::Text, true) => report.to_table(),
        (Format::Text, false) => report.to_text(),
    };
    emit(&text, a.output.as_deref())?;
    Ok(if report.summary.unexplained > 0 { 1 } else { 0 })
}

fn clifford(a: &CliffordArgs) -> Result<u8, Failure> {
    let mut g = build_dirac();
    if let Some(k) = a.corrupt {
        if !(1..4).contains(&k) {
            return Err(usage("--corrupt takes 1, 2 or 3"));
        }
        // Duplicate a gamma so the set stops anticommuting.
        g.gammas[k] = g.gammas[k - 1].clone();
    }
    let anti = check_anticommutation(&g);
    let rank = match product_span(&g) {
        Ok(b) => b.rank(),
        Err(ddgl2_core::error::CliffordError::Degenerate(r)) => r,
        Err(_) => 0,
    };
    let pass = anti && rank == 16;
    let text = match a.format {
        Format::Json => {
            let products: Vec<String> = canonical_products(&g)
                .iter()
                .map(|(s, _)| if s.is_empty() { "1".to_string() } else { s.iter().map(|k| format!("g{k}")).collect::<Vec<_>>().join("*") })
                .collect();
            let v = serde_json::json!({
                "metric": [1, -1, -1, -1],
                "anticommutation": anti,
                "products": products,
                "rank": rank,
                "pass": pass,
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable"))
        }
        Format::Text => format!(
            "anticommutation {{g_mu, g_nu}} = 2 eta_mu_nu I: {}\nrank {rank} / 16 (ordered gamma products)\nclifford-check: {}\n",
            if anti { "holds" } else { "FAILS" },
            if pass { "pass" } else { "FAIL" }
        ),
    };
    emit(&text, a.output.as_deref())?;
    Ok(if pass { 0 } else { 1 })
}

fn show_basis(title: &str, mats: &[Mat]) {
    println!("{title} (dimension {}):", mats.len());
    for m in mats {
        println!("    {m}");
    }
}

const R_NAMES: [&str; 5] = ["Ep", "Vp", "Ph", "Ps", "Et"];
const I_NAMES: [&str; 5] = ["A", "B", "G", "D", "H"];

/// The generic element of an RREF basis as a pattern grid: pivots are the
/// symbols; a symbol used in a single cell with coefficient 1 prints as `*`.
fn suggest_grid(b: &ddgl2_core::matd::Basis, names: &[&str]) -> Vec<Vec<String>> {
    let mats = b.matrices();
    let n = 4;
    let uses = |k: usize| (0..n * n).filter(|&c| !mats[k].get(c / n, c % n).is_zero()).count();
    let mut label = Vec::new();
    let mut next = 0;
    for k in 0..mats.len() {
        if uses(k) == 1 {
            label.push(None);
        } else {
            label.push(Some(names.get(next).map_or(format!("S{next}"), |s| s.to_string())));
            next += 1;
        }
    }
    let mut rows = Vec::new();
    for i in 0..n {
        let mut row = Vec::new();
        for j in 0..n {
            let mut parts: Vec<String> = Vec::new();
            for (k, m) in mats.iter().enumerate() {
                let c = m.get(i, j);
                if c.is_zero() {
                    continue;
                }
                let sym = match &label[k] {
                    None => "*".to_string(),
                    Some(s) => s.clone(),
                };
                let coef = c.to_string();
                parts.push(if c.is_one() {
                    sym
                } else if coef == "-1" {
                    format!("-{sym}")
                } else {
                    format!("({coef})*{sym}")
                });
            }
            row.push(if parts.is_empty() { "0".to_string() } else { parts.join("+") });
        }
        rows.push(row);
    }
    rows
}

fn print_grid(title: &str, rows: &[Vec<String>]) {
    let text: Vec<String> = rows.iter().map(|r| r.join(" ")).collect();
    println!("{title} grid: {}", text.join(" | "));
}

fn explain(a: &ExplainArgs) -> Result<u8, Failure> {
    let (corpus, _) = load(&a.src)?;
    let printed = corpus.case(&a.case).ok_or_else(|| usage(format!("unknown case `{}`", a.case)))?;
    let fixed;
    let case = if a.corrected {
        fixed = printed.corrected().map_err(|e| usage(e.to_string()))?.unwrap_or_else(|| printed.clone());
        &fixed
    } else {
        printed
    };
    if a.branch == 0 || a.branch > case.branches.len() {
        return Err(usage(format!("case {} has {} branch(es)", case.id, case.branches.len())));
    }
    let env = assign_params(case, a.branch - 1, a.seed, a.draw).map_err(|e| usage(e.to_string()))?;
    println!("case {} branch {} ({}) draw {}", case.id, a.branch, case.branches[a.branch - 1].label, a.draw);
    for (k, v) in env.iter() {
        println!("    {k} = {v}");
    }
    let gens = case.generators(&env).map_err(|e| usage(e.to_string()))?;
    for (name, g) in ["C11", "C12", "C21", "C22"].iter().zip(&gens) {
        println!("{name} = {g}");
    }
    let r = unital_closure(&gens);
    let i = centralizer(&r);
    show_basis("R", &r.matrices());
    show_basis("I", &i.matrices());
    print_grid("R", &suggest_grid(&r, &R_NAMES));
    print_grid("I", &suggest_grid(&i, &I_NAMES));
    let rp = pattern_space(&case.r_shape, 4, &env).map_err(|e| usage(e.to_string()))?;
    let ip = pattern_space(&case.i_shape, 4, &env).map_err(|e| usage(e.to_string()))?;
    println!("R pattern {}", if rp == r { "matches" } else { "differs" });
    if rp != r {
        show_basis("R pattern", &rp.matrices());
    }
    println!("I pattern {}", if ip == i { "matches" } else { "differs" });
    if ip != i {
        show_basis("I pattern", &ip.matrices());
    }
    Ok(0)
}

fn fmt(a: &FmtArgs) -> Result<u8, Failure> {
    let dir = a.src.corpus.clone().unwrap_or_else(default_corpus);
    let corpus = corpus::load(&dir).map_err(|e| usage(e.to_string()))?;
    let mut stale = 0;
    for doc in &corpus.families {
        let path = dir.join(format!("family-{}", doc.family)).join("cases.json");
        let want = corpus::to_canonical_json(doc);
        let have = std::fs::read_to_string(&path).unwrap_or_default();
        if have != want {
            stale += 1;
            println!("{}", path.display());
        }
    }
    if a.check {
        return Ok(if stale > 0 { 1 } else { 0 });
    }
    corpus::save(&corpus, &dir).map_err(|e| usage(e.to_string()))?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify(a) => run(a, false),
        Command::Table(a) => run(a, true),
        Command::CliffordCheck(a) => clifford(a),
        Command::Explain(a) => explain(a),
        Command::Fmt(a) => fmt(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("ddgl2: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
