//! The `fpmine` command line.
//!
//! Exit codes: 0 success, 1 data or validation error, 2 usage error,
//! 3 equivalence-check mismatch.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::apriori::apriori_mine;
use crate::bench::{emit_report, sweep, Axis, ReportFormat, SynthParams, Threshold};
use crate::check::{find_mismatch, minimize, Case, CaseGenerator, CaseLimits};
use crate::dataset::{
    parse_survey_with, parse_transactions_with, Aliases, ItemCatalog, SurveySchema, TransactionDb,
};
use crate::fpgrowth::{build_fptree, fpgrowth_mine};
use crate::frequent::{parse_support_csv, FrequentItemsets};
use crate::oracle::brute_force_frequent;
use crate::rules::{generate_rules, rules_to_csv, MinConfidence};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "fpmine",
    version,
    about = "Frequent itemset and association rule mining"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mine frequent itemsets from a transactions CSV.
    Mine(MineArgs),
    /// Generate association rules from transactions or a support table.
    Rules(RulesArgs),
    /// Recode a survey CSV into a transactions CSV.
    Recode(RecodeArgs),
    /// Cross-check Apriori, FP-Growth and brute force on random databases.
    Check(CheckArgs),
    /// Compare Apriori and FP-Growth on synthetic data.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MinerChoice {
    Apriori,
    Fpgrowth,
    Bruteforce,
}

#[derive(Debug, Args)]
#[group(id = "support", multiple = false)]
struct SupportArgs {
    /// Minimum support as an absolute transaction count.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    min_support: Option<u64>,
    /// Minimum support as a fraction of the transactions, rounded up.
    #[arg(long)]
    min_support_frac: Option<f64>,
}

impl SupportArgs {
    fn threshold(&self) -> anyhow::Result<Threshold> {
        let t = match (self.min_support, self.min_support_frac) {
            (Some(c), None) => Threshold::Absolute(c),
            (None, Some(f)) => Threshold::Fraction(f),
            _ => bail!("exactly one of --min-support or --min-support-frac is required"),
        };
        t.validate().map_err(|e| anyhow!(e))?;
        Ok(t)
    }
}

#[derive(Debug, Args)]
struct MineArgs {
    /// Transactions CSV, one transaction per row.
    db: PathBuf,
    #[command(flatten)]
    support: SupportArgs,
    #[arg(long, value_enum, default_value = "apriori")]
    algorithm: MinerChoice,
    /// Two-column raw_label,canonical_label CSV applied before interning.
    #[arg(long)]
    alias_file: Option<PathBuf>,
    /// Also write the FP-tree as indented label:count lines to this file.
    #[arg(long)]
    dump_tree: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RulesArgs {
    /// Transactions CSV to mine first.
    db: Option<PathBuf>,
    /// itemset,support CSV (frequent itemsets or a hand-built support table).
    #[arg(long, visible_alias = "frequent", conflicts_with = "db")]
    support_fixture: Option<PathBuf>,
    /// Transaction count behind a support table (informational).
    #[arg(long, requires = "support_fixture")]
    n_transactions: Option<usize>,
    #[command(flatten)]
    support: SupportArgs,
    #[arg(long, value_enum, default_value = "apriori")]
    algorithm: MinerChoice,
    /// Minimum confidence: 0.4, 40% or 2/5.
    #[arg(long)]
    min_confidence: String,
    /// Keep rules below the confidence threshold, marked Rejected.
    #[arg(long)]
    include_rejected: bool,
    #[arg(long)]
    alias_file: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RecodeArgs {
    /// Survey CSV with a header row.
    survey: PathBuf,
    #[arg(long, default_value = "age")]
    age_column: String,
    #[arg(long, default_value = "impacts")]
    impact_column: String,
    /// Separator between answers of the multi-select column.
    #[arg(long, default_value_t = ';')]
    delimiter: char,
    #[arg(long, default_value = "Don't remember")]
    missing_age_label: String,
    #[arg(long)]
    alias_file: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    cases: usize,
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..=20))]
    max_items: u64,
    #[arg(long, default_value_t = 200)]
    max_transactions: usize,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 10_000)]
    n_transactions: usize,
    #[arg(long, default_value_t = 30)]
    n_items: usize,
    #[arg(long, default_value_t = 8.0)]
    mean_len: f64,
    #[arg(long, default_value_t = 0.5)]
    skew: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = parse_axis)]
    axis: Axis,
    /// Comma-separated axis values.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[command(flatten)]
    support: SupportArgs,
    #[arg(long, value_parser = parse_format, default_value = "csv")]
    format: ReportFormat,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    s.parse()
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse()
}

fn read(path: &Path) -> anyhow::Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_aliases(path: Option<&Path>) -> anyhow::Result<Aliases> {
    match path {
        Some(p) => Aliases::parse(&read(p)?).with_context(|| format!("in {}", p.display())),
        None => Ok(Aliases::new()),
    }
}

fn load_db(path: &Path, aliases: Aliases) -> anyhow::Result<TransactionDb> {
    parse_transactions_with(&read(path)?, aliases).with_context(|| format!("in {}", path.display()))
}

fn mine(
    db: &TransactionDb,
    min_support: u64,
    miner: MinerChoice,
) -> anyhow::Result<FrequentItemsets> {
    Ok(match miner {
        MinerChoice::Apriori => apriori_mine(db, min_support),
        MinerChoice::Fpgrowth => fpgrowth_mine(db, min_support),
        MinerChoice::Bruteforce => brute_force_frequent(db, min_support)?,
    })
}

fn emit(output: Option<&Path>, text: &str, out: &mut dyn Write) -> anyhow::Result<()> {
    match output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => out
            .write_all(text.as_bytes())
            .context("cannot write to stdout"),
    }
}

fn run_mine(args: MineArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let threshold = args.support.threshold()?;
    let db = load_db(&args.db, load_aliases(args.alias_file.as_deref())?)?;
    let min_support = threshold.resolve(db.len());
    if let Some(path) = &args.dump_tree {
        let (tree, _) = build_fptree(&db, min_support);
        std::fs::write(path, tree.dump(db.catalog()))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    let freq = mine(&db, min_support, args.algorithm)?;
    emit(args.output.as_deref(), &freq.to_csv(db.catalog()), out)
}

fn run_rules(args: RulesArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let min_confidence: MinConfidence = args.min_confidence.parse()?;
    let (catalog, freq): (ItemCatalog, FrequentItemsets) = match (&args.db, &args.support_fixture) {
        (Some(db_path), None) => {
            let threshold = args.support.threshold()?;
            let db = load_db(db_path, load_aliases(args.alias_file.as_deref())?)?;
            let freq = mine(&db, threshold.resolve(db.len()), args.algorithm)?;
            (db.catalog().clone(), freq)
        }
        (None, Some(fixture)) => {
            let text = String::from_utf8(read(fixture)?)
                .with_context(|| format!("{} is not UTF-8", fixture.display()))?;
            parse_support_csv(&text, args.n_transactions)
                .with_context(|| format!("in {}", fixture.display()))?
        }
        _ => bail!("give either a transactions CSV or --support-fixture"),
    };
    let rules = generate_rules(&freq, &catalog, &min_confidence, args.include_rejected)?;
    emit(args.output.as_deref(), &rules_to_csv(&rules, &catalog), out)
}

fn run_recode(args: RecodeArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let schema = SurveySchema {
        age_column: args.age_column,
        impact_column: args.impact_column,
        multiselect_delimiter: args.delimiter,
        missing_age_label: args.missing_age_label,
    };
    let aliases = load_aliases(args.alias_file.as_deref())?;
    let db = parse_survey_with(&read(&args.survey)?, &schema, aliases)
        .with_context(|| format!("in {}", args.survey.display()))?;
    emit(args.output.as_deref(), &db.to_csv(), out)
}

/// Runs the equivalence check; `Ok(false)` on the first mismatch, after
/// dumping a minimized counterexample.
fn run_check(args: CheckArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<bool> {
    let limits = CaseLimits {
        max_items: args.max_items as usize,
        max_transactions: args.max_transactions,
    };
    let mut generator = CaseGenerator::new(args.seed, limits);
    for index in 0..args.cases {
        let case = generator.next_case();
        if let Some(reason) = find_mismatch(&case) {
            let small = minimize(&case.db, |db| {
                find_mismatch(&Case {
                    db: db.clone(),
                    ..case.clone()
                })
                .is_some()
            });
            writeln!(
                err,
                "mismatch in case {index} (seed {}): {reason}",
                args.seed
            )?;
            writeln!(
                err,
                "minimized counterexample, min_support {} min_confidence {}:",
                case.min_support, case.min_confidence
            )?;
            err.write_all(small.to_csv().as_bytes())?;
            return Ok(false);
        }
    }
    writeln!(out, "{} cases agree (seed {})", args.cases, args.seed)?;
    Ok(true)
}

fn run_bench(args: BenchArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let base = SynthParams {
        n_transactions: args.n_transactions,
        n_items: args.n_items,
        mean_len: args.mean_len,
        skew: args.skew,
        seed: args.seed,
    };
    // on the min_support axis the values carry the thresholds
    let threshold = match (
        args.axis,
        args.support.min_support,
        args.support.min_support_frac,
    ) {
        (Axis::MinSupport, None, None) => args
            .values
            .first()
            .and_then(|&v| Threshold::from_axis_value(v))
            .ok_or_else(|| anyhow!("invalid min_support axis values"))?,
        _ => args.support.threshold()?,
    };
    let report = sweep(&base, threshold, args.axis, &args.values, args.reps)?;
    emit(
        args.output.as_deref(),
        &emit_report(&report, args.format),
        out,
    )
}

/// Parses `argv` (program name first) and runs the subcommand, writing
/// results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Mine(a) => run_mine(a, out),
        Command::Rules(a) => run_rules(a, out),
        Command::Recode(a) => run_recode(a, out),
        Command::Bench(a) => run_bench(a, out),
        Command::Check(a) => match run_check(a, out, err) {
            Ok(true) => Ok(()),
            Ok(false) => return EXIT_MISMATCH,
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_DATA
        }
    }
}
