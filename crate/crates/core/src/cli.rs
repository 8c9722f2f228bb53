//! Command-line front end: scenario files, reports and CSV sweeps.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::composition::{Composer, DEFAULT_MAX_TYPES};
use crate::error::Error;
use crate::exponent::{
    fit_exponent_with, gap_series_with, min_pairwise_chernoff, verify_lemma1, FitWindow,
    DEFAULT_GAP_FLOOR,
};
use crate::measures::{renyi_entropy, sibson_mi};
use crate::prob::{quotient_channel, Channel, Distribution, LeakageOrder, Quotient, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "sibson-leakage",
    version,
    about = "Composed Sibson leakage of repeated channel observations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single-observation leakage and its ceiling.
    Measure(MeasureArgs),
    /// Composed leakage and gap to the ceiling over a range of n, as CSV.
    Sweep(SweepArgs),
    /// Fit the decay rate of the gap and compare with the pairwise Chernoff minimum.
    Exponent(ExponentArgs),
    /// Check the simplex infimum against the pairwise Chernoff minimum.
    #[command(name = "verify-lemma1")]
    VerifyLemma1(VerifyArgs),
    /// Merge inputs with identical rows and print the reduced scenario.
    Quotient(QuotientArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Scenario file (JSON with `prior` and `channel`).
    #[arg(long)]
    pub input: PathBuf,
    /// Analyze the scenario as given, without merging duplicate rows.
    #[arg(long)]
    pub no_quotient: bool,
    /// Max-norm tolerance for treating two rows as equal.
    #[arg(long, default_value_t = 0.0)]
    pub row_tol: f64,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Order: "1", "inf", or any decimal >= 1.
    #[arg(long, default_value = "1")]
    pub alpha: String,
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    #[arg(long)]
    pub n_min: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub step: usize,
    /// Cap on the number of types enumerated for a single n.
    #[arg(long, default_value_t = DEFAULT_MAX_TYPES)]
    pub max_types: u64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "1")]
    pub alpha: String,
    #[command(flatten)]
    pub range: RangeArgs,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExponentArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "1")]
    pub alpha: String,
    #[command(flatten)]
    pub range: RangeArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Largest accepted gap in bits.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct QuotientArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// On-disk scenario description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub prior: Vec<f64>,
    pub channel: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_labels: Option<Vec<String>>,
}

impl ScenarioFile {
    /// Validates and normalizes, returning notes about any rescaled vectors.
    pub fn into_scenario(self) -> Result<(Scenario, Vec<String>), Error> {
        let mut notes = Vec::new();
        let (prior, fix) = Distribution::from_weights_checked(&self.prior)?;
        if let Some(total) = fix {
            notes.push(format!("prior renormalized (sum was {total})"));
        }
        let (channel, fixes) = Channel::from_rows_checked(&self.channel)?;
        for (row, total) in fixes {
            notes.push(format!("channel row {row} renormalized (sum was {total})"));
        }
        let scenario = Scenario::new(prior, channel)?.with_labels(self.x_labels, self.y_labels)?;
        Ok((scenario, notes))
    }

    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            prior: s.prior().probs().to_vec(),
            channel: s
                .channel()
                .rows()
                .iter()
                .map(|r| r.probs().to_vec())
                .collect(),
            x_labels: s.x_labels().map(<[String]>::to_vec),
            y_labels: s.y_labels().map(<[String]>::to_vec),
        }
    }
}

/// Failure of a command, already classified by exit code.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Compute(_) => EXIT_COMPUTE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Compute(m) => write!(f, "computation error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_computational() {
            CliError::Compute(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

/// Runs a parsed command, writing reports to `out` and diagnostics to `err`.
/// Returns the process exit code.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::Measure(a) => run_measure(&a, out),
        Command::Sweep(a) => run_sweep(&a, out),
        Command::Exponent(a) => run_exponent(&a, out),
        Command::VerifyLemma1(a) => run_verify(&a, out),
        Command::Quotient(a) => run_quotient(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn load_scenario(path: &Path) -> Result<(Scenario, Vec<String>), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let file: ScenarioFile = serde_json::from_str(&text).map_err(|e| {
        CliError::Input(format!(
            "{}:{}:{}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    file.into_scenario()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

struct Prepared {
    scenario: Scenario,
    summary: String,
}

fn prepare(args: &InputArgs, out: &mut dyn Write) -> Result<Prepared, CliError> {
    let (scenario, notes) = load_scenario(&args.input)?;
    for note in notes {
        writeln!(out, "note: {note}")?;
    }
    let original = scenario.channel().input_size();
    if args.no_quotient {
        return Ok(Prepared {
            summary: format!("quotient: skipped ({original} inputs)"),
            scenario,
        });
    }
    let q = quotient_channel(&scenario, args.row_tol)?;
    let summary = quotient_summary(&q);
    Ok(Prepared {
        scenario: q.scenario,
        summary,
    })
}

fn quotient_summary(q: &Quotient) -> String {
    let classes = q.scenario.channel().input_size();
    if q.merged() {
        let mapping: Vec<String> = q
            .mapping
            .iter()
            .enumerate()
            .map(|(x, c)| format!("{x}->{c}"))
            .collect();
        format!(
            "quotient: merged {} inputs into {} classes ({})",
            q.mapping.len(),
            classes,
            mapping.join(", ")
        )
    } else {
        format!("quotient: all {classes} rows distinct, nothing merged")
    }
}

fn parse_order(s: &str) -> Result<LeakageOrder, CliError> {
    s.parse::<LeakageOrder>().map_err(CliError::from)
}

fn ceiling_label(order: LeakageOrder) -> String {
    match order {
        LeakageOrder::Infinity => "H_0(X)".to_string(),
        o if o.is_shannon() => "H_1(X)".to_string(),
        LeakageOrder::Finite(a) => format!("H_{}(X)", 1.0 / a),
    }
}

pub fn run_measure(args: &MeasureArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let order = parse_order(&args.alpha)?;
    let p = prepare(&args.input, out)?;
    let s = &p.scenario;
    let value = sibson_mi(s, order);
    let ceiling = renyi_entropy(s.prior(), order.ceiling_order());
    if !value.is_finite() || !ceiling.is_finite() {
        return Err(CliError::Compute(format!(
            "non-finite result (value {value}, ceiling {ceiling})"
        )));
    }
    writeln!(out, "input: {}", args.input.input.display())?;
    writeln!(
        out,
        "alphabets: |X| = {}, |Y| = {}",
        s.channel().input_size(),
        s.channel().output_size()
    )?;
    writeln!(out, "{}", p.summary)?;
    writeln!(out, "order: {order}")?;
    writeln!(out, "sibson_mi: {value:.6} bits")?;
    writeln!(out, "ceiling {}: {ceiling:.6} bits", ceiling_label(order))?;
    Ok(EXIT_OK)
}

fn n_values(
    range: &RangeArgs,
    default_min: usize,
    default_max: usize,
) -> Result<Vec<usize>, CliError> {
    let n_min = range.n_min.unwrap_or(default_min);
    let n_max = range.n_max.unwrap_or(default_max.max(n_min));
    if n_min < 1 {
        return Err(CliError::Input("--n-min must be at least 1".into()));
    }
    if n_max < n_min {
        return Err(CliError::Input(format!(
            "--n-max ({n_max}) is smaller than --n-min ({n_min})"
        )));
    }
    if range.step < 1 {
        return Err(CliError::Input("--step must be at least 1".into()));
    }
    Ok((n_min..=n_max).step_by(range.step).collect())
}

/// Formats with 12 significant digits, trailing zeros trimmed, like C's `%.12g`.
pub fn format_sig12(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        trim_zeros(&format!("{v:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub const CSV_HEADER: &str = "n,value,gap,log2_gap";

/// Writes the sweep table; `log2_gap` is the literal `-inf` for a zero gap.
pub fn write_sweep_csv(rows: &[(usize, f64, f64)], out: &mut dyn Write) -> io::Result<()> {
    let mut buf = String::new();
    buf.push_str(CSV_HEADER);
    buf.push('\n');
    for &(n, value, gap) in rows {
        let log2_gap = if gap > 0.0 {
            format_sig12(gap.log2())
        } else {
            "-inf".to_string()
        };
        buf.push_str(&format!(
            "{n},{},{},{log2_gap}\n",
            format_sig12(value),
            format_sig12(gap)
        ));
    }
    out.write_all(buf.as_bytes())
}

pub fn run_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let order = parse_order(&args.alpha)?;
    let ns = n_values(&args.range, 1, 10)?;
    // notes go to stderr-equivalent only when the CSV itself goes to stdout
    let mut sink = io::sink();
    let notes: &mut dyn Write = if args.out.is_some() { out } else { &mut sink };
    let p = prepare(&args.input, notes)?;
    let composer = Composer::with_max_types(args.range.max_types);
    let points = gap_series_with(&composer, &p.scenario, order, &ns)?;
    let rows: Vec<(usize, f64, f64)> = points.iter().map(|g| (g.n, g.leakage, g.gap)).collect();
    match &args.out {
        Some(path) => {
            let mut file = io::BufWriter::new(
                fs::File::create(path)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
            );
            write_sweep_csv(&rows, &mut file)?;
            file.flush()?;
            writeln!(out, "{}", p.summary)?;
            writeln!(out, "wrote {} rows to {}", rows.len(), path.display())?;
        }
        None => write_sweep_csv(&rows, out)?,
    }
    Ok(EXIT_OK)
}

pub fn run_exponent(args: &ExponentArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let order = parse_order(&args.alpha)?;
    let ns = n_values(&args.range, 40, 120)?;
    let p = prepare(&args.input, out)?;
    let composer = Composer::with_max_types(args.range.max_types);
    let points = gap_series_with(&composer, &p.scenario, order, &ns)?;
    let series: Vec<(usize, f64)> = points.iter().map(|g| (g.n, g.gap)).collect();
    let window = FitWindow {
        n_min: 0,
        n_max: usize::MAX,
        gap_floor: DEFAULT_GAP_FLOOR,
    };
    let fit = fit_exponent_with(&series, &window)?;
    let predicted = min_pairwise_chernoff(p.scenario.channel())?;
    let deviation = (fit.slope - predicted.value).abs() / predicted.value;

    writeln!(out, "{}", p.summary)?;
    writeln!(out, "order: {order}")?;
    writeln!(
        out,
        "window: n = {}..{} ({} points used)",
        fit.n_range.0, fit.n_range.1, fit.points_used
    )?;
    writeln!(out, "slope: {:.6} bits/observation", fit.slope)?;
    writeln!(out, "intercept: {:.6} bits", fit.intercept)?;
    writeln!(out, "max_abs_residual: {:.6} bits", fit.max_abs_residual)?;
    writeln!(
        out,
        "predicted (min pairwise Chernoff, pair {},{}): {:.6} bits",
        predicted.pair.0, predicted.pair.1, predicted.value
    )?;
    writeln!(out, "relative_deviation: {:.4}%", 100.0 * deviation)?;
    Ok(EXIT_OK)
}

pub fn run_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(CliError::Input(format!(
            "--tol must be positive, got {}",
            args.tol
        )));
    }
    let p = prepare(&args.input, out)?;
    let report = verify_lemma1(p.scenario.channel(), args.tol)?;
    let label = |x: usize| match p.scenario.x_labels() {
        Some(l) => format!("{x} ({})", l[x]),
        None => x.to_string(),
    };
    let argmin: Vec<String> = report
        .argmin_distribution
        .probs()
        .iter()
        .map(|v| format!("{v:.9}"))
        .collect();
    writeln!(out, "{}", p.summary)?;
    writeln!(out, "infimum: {:.12} bits", report.infimum_value)?;
    writeln!(out, "argmin: [{}]", argmin.join(", "))?;
    writeln!(out, "pairwise_min: {:.12} bits", report.pairwise_min)?;
    writeln!(
        out,
        "argmin_pair: {}, {}",
        label(report.argmin_pair.0),
        label(report.argmin_pair.1)
    )?;
    writeln!(out, "gap: {:e} bits (tol {:e})", report.gap, report.tol)?;
    if report.passed() {
        writeln!(out, "result: PASS")?;
        Ok(EXIT_OK)
    } else {
        writeln!(out, "result: FAIL")?;
        Ok(EXIT_VERIFY_FAILED)
    }
}

#[derive(Serialize)]
struct QuotientOutput {
    #[serde(flatten)]
    scenario: ScenarioFile,
    mapping: Vec<usize>,
}

pub fn run_quotient(args: &QuotientArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (scenario, _) = load_scenario(&args.input.input)?;
    let q = if args.input.no_quotient {
        Quotient {
            mapping: (0..scenario.channel().input_size()).collect(),
            scenario,
        }
    } else {
        quotient_channel(&scenario, args.input.row_tol)?
    };
    let doc = QuotientOutput {
        scenario: ScenarioFile::from_scenario(&q.scenario),
        mapping: q.mapping.clone(),
    };
    let mut json =
        serde_json::to_string_pretty(&doc).map_err(|e| CliError::Compute(e.to_string()))?;
    json.push('\n');
    match &args.out {
        Some(path) => {
            fs::write(path, json)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            writeln!(out, "{}", quotient_summary(&q))?;
        }
        None => out.write_all(json.as_bytes())?,
    }
    Ok(EXIT_OK)
}
