//! Command-line front end.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{IrwinError, Result};
use crate::fixed::Fixed;
use crate::model::{ConditionSet, PrecisionPlan};
use crate::oracle::{brute_force_sum, OracleMode};
use crate::summation::{
    irwin_sum_with, partial_sum_with, threshold_search, BlockReport, SumResult, Threshold,
};

#[derive(Debug, Parser)]
#[command(name = "irwin", version, about = "Sums of 1/n over integers with prescribed digit occurrences")]
pub struct Cli {
    /// Worker threads for the parallel table updates (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Diagnostic output on stderr, 0 (silent) through 4.
    #[arg(long, short, global = true, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=4))]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sum the whole series.
    Sum(SumArgs),
    /// Sum the terms with denominators below base^power.
    Partial(PartialArgs),
    /// Find the digit-lengths whose partial sums bracket a threshold.
    Threshold(ThresholdArgs),
    /// Sums for zero, one and two occurrences of each decimal digit.
    Table(TableArgs),
    /// Brute-force sum by enumeration.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    AtMost,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::AtMost => "at-most",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Plain,
    Grouped,
    Json,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[arg(long, default_value_t = 10, allow_negative_numbers = true)]
    pub base: i64,

    /// Constrained digits, comma separated.
    #[arg(long, required = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub digits: Vec<i64>,

    /// Occurrence count for each digit, comma separated.
    #[arg(long, required = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub counts: Vec<i64>,
}

impl SeriesArgs {
    fn conditions(&self) -> Result<ConditionSet> {
        if !(2..=10).contains(&self.base) {
            return Err(IrwinError::BaseOutOfRange { base: self.base });
        }
        ConditionSet::from_lists(self.base as u32, &self.digits, &self.counts)
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Also write the JSON report to this file.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SumArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    #[arg(long, default_value_t = 15)]
    pub decimals: u32,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    /// Give up after this many digit-lengths instead of the automatic cap.
    #[arg(long)]
    pub max_digits: Option<u32>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PartialArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    /// Sum denominators with at most this many digits.
    #[arg(long)]
    pub power: u32,
    #[arg(long, default_value_t = 15)]
    pub decimals: u32,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    /// Target value, e.g. 23 or 23.044287080747`25.
    #[arg(long)]
    pub threshold: String,
    /// Number of correct decimals in the threshold (overrides the text).
    #[arg(long)]
    pub precision: Option<u32>,
    #[arg(long, default_value_t = 15)]
    pub decimals: u32,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, default_value_t = 20)]
    pub decimals: u32,
    /// Only this digit's row.
    #[arg(long, value_parser = clap::value_parser!(u32).range(0..=9))]
    pub row: Option<u32>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    /// Sum over 1 <= n < limit.
    #[arg(long)]
    pub limit: u128,
    #[arg(long, default_value_t = 15)]
    pub decimals: u32,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    /// Also run the engine (limit must be a power of the base).
    #[arg(long)]
    pub compare: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// A finished command: text for stdout plus the JSON report.
struct Report {
    text: String,
    json: Value,
}

/// Runs one command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("warning: could not configure {threads} threads: {e}");
        }
    }
    let verbose = cli.verbose;
    let (out, result) = match &cli.command {
        Command::Sum(a) => (&a.out, cmd_sum(a, verbose)),
        Command::Partial(a) => (&a.out, cmd_partial(a, verbose)),
        Command::Threshold(a) => (&a.out, cmd_threshold(a)),
        Command::Table(a) => (&a.out, cmd_table(a)),
        Command::Oracle(a) => (&a.out, cmd_oracle(a)),
    };
    match result {
        Ok(report) => emit(out, report),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: &OutputArgs, report: Report) -> i32 {
    let json_text = serde_json::to_string_pretty(&report.json).expect("reports serialize");
    if let Some(path) = &out.output {
        if let Err(e) = fs::write(path, format!("{json_text}\n")) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return 1;
        }
    }
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    let written = if out.format == Some(Format::Json) {
        writeln!(lock, "{json_text}")
    } else {
        write!(lock, "{}", report.text)
    };
    if written.is_err() {
        return 1;
    }
    0
}

fn render(value: &Fixed, format: Option<Format>) -> String {
    match format {
        Some(Format::Grouped) => value.grouped(),
        _ => value.to_string(),
    }
}

fn progress(verbose: u8) -> impl FnMut(&BlockReport) {
    move |b: &BlockReport| {
        if verbose >= 3 {
            eprintln!(
                " partial sum for {} digits = {}, total = {}",
                b.digits, b.block_sum, b.requested_sum
            );
        }
        if verbose >= 4 {
            if let Some(max_term) = &b.max_term {
                eprintln!("   largest term {:.3e}, {} powers in use", max_term.to_f64(), b.active_powers);
            }
        }
    }
}

fn announce(plan: &PrecisionPlan, verbose: u8) {
    if verbose >= 1 {
        eprintln!(
            " decimals {} (working {}), {} powers, direct summation through {} digits",
            plan.requested_decimals, plan.working_decimals, plan.max_power, plan.direct_sum_digits
        );
    }
    if verbose >= 2 {
        eprintln!(
            " table scale {}, digit-length cap {}",
            plan.table_scale, plan.max_digit_length
        );
    }
}

#[derive(Serialize)]
struct SumJson<'a> {
    base: u32,
    digits: Vec<u32>,
    counts: Vec<u32>,
    mode: &'static str,
    decimals: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    power: Option<u32>,
    sum: &'a Fixed,
    at_most_sum: &'a Fixed,
    per_count_sums: &'a [Fixed],
    digits_processed: u32,
    termination: crate::summation::Termination,
}

fn sum_report(cs: &ConditionSet, mode: Mode, power: Option<u32>, r: &SumResult, format: Option<Format>) -> Result<Report> {
    let sum = match mode {
        Mode::Exact => &r.requested_sum,
        Mode::AtMost => &r.at_most_sum,
    };
    let cells = cs.cell_count()?;
    let mut text = String::new();
    let label = if power.is_some() { "partial sum" } else { "sum" };
    text.push_str(&format!("{label} = {}\n", render(sum, format)));
    text.push_str(&format!(
        "{label} for all {cells} 'at most' conditions = {}\n",
        render(&r.at_most_sum, format)
    ));
    for (k, s) in r.per_count_sums.iter().enumerate() {
        text.push_str(&format!("{label} for {k} occurrences = {}\n", render(s, format)));
    }
    let json = serde_json::to_value(SumJson {
        base: cs.base(),
        digits: cs.digits(),
        counts: cs.counts(),
        mode: mode.name(),
        decimals: r.decimals,
        power,
        sum,
        at_most_sum: &r.at_most_sum,
        per_count_sums: &r.per_count_sums,
        digits_processed: r.digits_processed,
        termination: r.termination,
    })
    .expect("reports serialize");
    Ok(Report { text, json })
}

fn cmd_sum(args: &SumArgs, verbose: u8) -> Result<Report> {
    let cs = args.series.conditions()?;
    let mut plan = PrecisionPlan::new(&cs, args.decimals)?;
    if let Some(cap) = args.max_digits {
        plan = plan.with_max_digit_length(cap);
    }
    announce(&plan, verbose);
    let result = irwin_sum_with(&cs, &plan, progress(verbose))?;
    if verbose >= 1 {
        eprintln!(" {} digit-lengths, {:?}", result.digits_processed, result.termination);
    }
    sum_report(&cs, args.mode, None, &result, args.out.format)
}

fn cmd_partial(args: &PartialArgs, verbose: u8) -> Result<Report> {
    let cs = args.series.conditions()?;
    let plan = PrecisionPlan::new(&cs, args.decimals)?;
    announce(&plan, verbose);
    let result = partial_sum_with(&cs, args.power, &plan, progress(verbose))?;
    sum_report(&cs, args.mode, Some(args.power), &result, args.out.format)
}

fn cmd_threshold(args: &ThresholdArgs) -> Result<Report> {
    let cs = args.series.conditions()?;
    let mut threshold: Threshold = args.threshold.parse()?;
    if let Some(p) = args.precision {
        threshold = threshold.with_accuracy(p);
    }
    let r = threshold_search(&cs, &threshold, args.decimals)?;
    let format = args.out.format;
    let text = format!(
        "{{{}, {}, {}, {}}}\n",
        r.d1,
        render(&r.s1, format),
        r.d2,
        render(&r.s2, format)
    );
    let json = json!({
        "base": cs.base(),
        "digits": cs.digits(),
        "counts": cs.counts(),
        "threshold": args.threshold,
        "decimals": r.decimals,
        "d1": r.d1,
        "s1": r.s1,
        "d2": r.d2,
        "s2": r.s2,
    });
    Ok(Report { text, json })
}

/// Sums of `1/n` over `n` with zero, one and two occurrences of `digit`.
pub fn occurrence_row(digit: u32, decimals: u32) -> Result<Vec<Fixed>> {
    let cs = ConditionSet::single(10, digit as i64, 2)?;
    let plan = PrecisionPlan::new(&cs, decimals)?;
    Ok(irwin_sum_with(&cs, &plan, |_| {})?.per_count_sums)
}

fn cmd_table(args: &TableArgs) -> Result<Report> {
    let digits: Vec<u32> = match args.row {
        Some(d) => vec![d],
        None => (0..10).collect(),
    };
    let format = args.out.format.or(Some(Format::Grouped));
    let mut text = String::from("digit  zero occurrences / one occurrence / two occurrences\n");
    let mut rows = Vec::new();
    for d in digits {
        let sums = occurrence_row(d, args.decimals)?;
        let cells: Vec<String> = sums.iter().map(|s| render(s, format)).collect();
        text.push_str(&format!("{d:>5}  {}\n", cells.join("  ")));
        rows.push(json!({ "digit": d, "sums": sums }));
    }
    let json = json!({ "decimals": args.decimals.max(crate::model::MIN_DECIMALS), "rows": rows });
    Ok(Report { text, json })
}

fn cmd_oracle(args: &OracleArgs) -> Result<Report> {
    let cs = args.series.conditions()?;
    let mode = match args.mode {
        Mode::Exact => OracleMode::ExactCount,
        Mode::AtMost => OracleMode::AtMost,
    };
    let decimals = args.decimals;
    let oracle = brute_force_sum(&cs, args.limit, mode, decimals)?;
    let format = args.out.format;
    let mut text = format!("oracle sum = {}\n", render(&oracle, format));
    let mut json = json!({
        "base": cs.base(),
        "digits": cs.digits(),
        "counts": cs.counts(),
        "mode": args.mode.name(),
        "limit": args.limit.to_string(),
        "decimals": decimals,
        "oracle_sum": oracle,
    });
    if args.compare {
        let power = exact_power(args.limit, cs.base()).ok_or(IrwinError::LimitNotPower {
            limit: args.limit,
            base: cs.base(),
        })?;
        let plan = PrecisionPlan::new(&cs, decimals)?;
        let r = partial_sum_with(&cs, power, &plan, |_| {})?;
        let engine = match args.mode {
            Mode::Exact => r.requested_sum,
            Mode::AtMost => r.at_most_sum,
        }
        .rescale(decimals);
        let difference = &engine - &oracle;
        text.push_str(&format!("engine sum = {}\n", render(&engine, format)));
        text.push_str(&format!("difference = {difference}\n"));
        json["engine_sum"] = json!(engine);
        json["difference"] = json!(difference);
    }
    Ok(Report { text, json })
}

fn exact_power(limit: u128, base: u32) -> Option<u32> {
    let mut reach = 1u128;
    let mut p = 0;
    while reach < limit {
        reach = reach.checked_mul(base as u128)?;
        p += 1;
    }
    (reach == limit).then_some(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powers_of_the_base() {
        assert_eq!(exact_power(1000, 10), Some(3));
        assert_eq!(exact_power(1, 10), Some(0));
        assert_eq!(exact_power(64, 2), Some(6));
        assert_eq!(exact_power(999, 10), None);
    }

    #[test]
    fn parses_lists() {
        let cli = Cli::try_parse_from(["irwin", "sum", "--digits", "9,3", "--counts", "2,1"]).unwrap();
        let Command::Sum(args) = cli.command else { panic!("expected sum") };
        assert_eq!(args.series.digits, vec![9, 3]);
        assert_eq!(args.series.counts, vec![2, 1]);
        assert_eq!(args.decimals, 15);
    }

    #[test]
    fn verbosity_is_bounded() {
        assert!(Cli::try_parse_from(["irwin", "-v", "5", "sum", "--digits", "9", "--counts", "0"]).is_err());
    }

    #[test]
    fn validation_errors_surface() {
        let args = SeriesArgs {
            base: 11,
            digits: vec![9],
            counts: vec![0],
        };
        assert_eq!(args.conditions().unwrap_err().exit_code(), 2);
    }
}
