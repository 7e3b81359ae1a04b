//! Command-line drivers. Each command renders a table as CSV (default) or
//! JSON; exit codes are 0 success, 2 validation failure, 3 budget exhaustion,
//! 4 input error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::approx::{convergence_sweep, parse_gram, SweepRow};
use crate::arith::{parse_rational, Integer};
use crate::construct::{build_sequence, ExtensionReport, IntervalSchedule, Strategy};
use crate::density::{bounds_row, default_mu_for, ball_count_bound};
use crate::enumerate::{count_norm_le, enumerate_short, Mode, DEFAULT_ENUM_BUDGET};
use crate::error::{Error, Result};
use crate::lattice::DensityReport;
use crate::real::{format_real, HighReal};
use crate::reduce::{SvpCertificate, SvpOptions, DEFAULT_SVP_BUDGET};
use crate::sequence::{MuSequence, SequenceFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_INPUT: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        Error::NotMuSequence { .. } | Error::IntervalExhausted { .. } => EXIT_VALIDATION,
        _ => EXIT_INPUT,
    }
}

#[derive(Parser, Debug)]
#[command(name = "museq", version, about = "Dense lattices from mu-sequences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Enumeration budget (predicted short vectors).
    #[arg(long, global = true, default_value_t = DEFAULT_ENUM_BUDGET)]
    pub enum_budget: u64,
    /// Node budget of the shortest-vector search.
    #[arg(long, global = true, default_value_t = DEFAULT_SVP_BUDGET)]
    pub svp_budget: u64,
    /// Write the table here instead of stdout (`build`: the sequence file).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyName {
    Greedy,
    Interval,
}

#[derive(clap::Args, Debug, Clone)]
pub struct StrategyArgs {
    #[arg(long, value_enum, default_value_t = StrategyName::Greedy)]
    pub strategy: StrategyName,
    /// Target statistic of the interval strategy (default: sum of exp(-k^2 pi)).
    #[arg(long)]
    pub sigma: Option<String>,
    /// Relative width of the interval window.
    #[arg(long, default_value = "1/10")]
    pub eps: String,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Construct a mu-sequence and certify every prefix.
    Build {
        #[arg(long)]
        mu: String,
        #[arg(long)]
        dim: usize,
        #[command(flatten)]
        strategy: StrategyArgs,
    },
    /// Re-certify a sequence file.
    Verify { file: PathBuf },
    /// Per-step construction statistics over a grid of mu and dimensions.
    Table {
        /// Values of mu: `4`, `2,3,5` or `2..8`.
        #[arg(long)]
        mu: String,
        #[arg(long, alias = "dim")]
        dims: String,
        #[command(flatten)]
        strategy: StrategyArgs,
    },
    /// Density bounds per dimension.
    Bounds {
        #[arg(long, alias = "dim")]
        dims: String,
        /// Fixed mu for the lower-bound column (default: about n^2/4 per row).
        #[arg(long)]
        mu: Option<u64>,
    },
    /// Points of Z^n in the ball of radius sqrt(mu) against the volume bound.
    Count {
        #[arg(long, alias = "dims")]
        dim: String,
        #[arg(long)]
        mu: String,
    },
    /// Kernel-lattice approximations of a Gram matrix.
    Approx {
        #[arg(long)]
        gram: PathBuf,
        #[arg(long, value_delimiter = ',')]
        kappas: Vec<String>,
    },
}

/// `a..b` (inclusive), `a,b,c`, or a single value.
pub fn parse_list(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::Parse(format!("bad list or range '{s}'"));
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(num).collect()
}

/// A rendered table with optional top-level JSON fields.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub extra: Map<String, Value>,
}

impl Table {
    fn new(header: &str) -> Self {
        Table {
            header: header.split(',').map(String::from).collect(),
            ..Default::default()
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut s = self.header.join(",");
                s.push('\n');
                for r in &self.rows {
                    s.push_str(&r.join(","));
                    s.push('\n');
                }
                s
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let m: Map<String, Value> = self
                            .header
                            .iter()
                            .zip(r)
                            .map(|(h, v)| (h.clone(), Value::String(v.clone())))
                            .collect();
                        Value::Object(m)
                    })
                    .collect();
                let mut top = self.extra.clone();
                top.insert("rows".into(), Value::Array(rows));
                let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("json");
                s.push('\n');
                s
            }
        }
    }
}

/// Outcome of a command: rendered output, diagnostics and exit code.
#[derive(Debug)]
pub struct Outcome {
    pub table: Table,
    pub messages: Vec<String>,
    pub code: i32,
}

impl Outcome {
    fn ok(table: Table) -> Self {
        Outcome {
            table,
            messages: Vec::new(),
            code: EXIT_OK,
        }
    }
}

fn schedule(args: &StrategyArgs) -> Result<Strategy> {
    Ok(match args.strategy {
        StrategyName::Greedy => Strategy::Greedy,
        StrategyName::Interval => {
            let mut s = IntervalSchedule {
                eps: parse_rational(&args.eps)?,
                ..Default::default()
            };
            if let Some(sigma) = &args.sigma {
                s.sigma = HighReal::from_rational(&parse_rational(sigma)?);
            }
            if s.eps < Default::default() {
                return Err(Error::InvalidInput("eps must be nonnegative".into()));
            }
            Strategy::Interval(s)
        }
    })
}

fn parse_mu(s: &str) -> Result<Integer> {
    let mu = crate::arith::parse_integer(s)?;
    if mu < Integer::from(2) {
        return Err(Error::InvalidInput(format!("mu = {mu} must be at least 2")));
    }
    Ok(mu)
}

fn witness_str(w: &[Integer]) -> String {
    let parts: Vec<String> = w.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(" "))
}

/// Certificates of every prefix `n = 1..len-1`, computed independently.
fn certify_prefixes(seq: &MuSequence, opts: &SvpOptions) -> Vec<Result<SvpCertificate>> {
    (1..seq.len())
        .into_par_iter()
        .map(|n| seq.prefix(n + 1).lattice().shortest_vector(opts))
        .collect()
}

#[derive(Debug, PartialEq, Eq)]
enum Verdict {
    Pass,
    Fail(usize),
    Undecided,
}

fn verdict(mu: &Integer, certs: &[Result<SvpCertificate>]) -> Verdict {
    let mut undecided = false;
    for (i, c) in certs.iter().enumerate() {
        match c {
            Ok(c) if c.minimum < *mu => return Verdict::Fail(i + 1),
            Ok(_) => {}
            Err(_) => undecided = true,
        }
    }
    if undecided {
        Verdict::Undecided
    } else {
        Verdict::Pass
    }
}

fn density_cells(seq: &MuSequence, n: usize, cert: &Result<SvpCertificate>) -> [String; 3] {
    let det = seq.prefix(n + 1).lattice().determinant();
    match cert {
        Ok(c) => {
            let r = DensityReport::new(n as u32, c.minimum.clone(), det.clone(), None);
            [det.to_string(), format_real(r.delta.to_f64()), format_real(r.density.to_f64())]
        }
        Err(_) => [det.to_string(), String::new(), String::new()],
    }
}

fn cmd_build(mu: &str, dim: usize, strat: &StrategyArgs, cli: &Cli) -> Result<(Outcome, SequenceFile)> {
    let mu = parse_mu(mu)?;
    let b = build_sequence(&mu, dim, &schedule(strat)?, cli.enum_budget)?;
    let certs = certify_prefixes(&b.sequence, &SvpOptions::with_budget(cli.svp_budget));
    let v = verdict(&mu, &certs);
    let mut t = Table::new(&format!(
        "{},minimum,determinant,delta,Delta",
        ExtensionReport::CSV_HEADER
    ));
    for (r, c) in b.reports.iter().zip(&certs) {
        let mut row: Vec<String> = r.csv_row().split(',').map(String::from).collect();
        row.push(c.as_ref().map(|c| c.minimum.to_string()).unwrap_or_default());
        row.extend(density_cells(&b.sequence, r.n, c));
        t.rows.push(row);
    }
    let file = b.sequence.to_file(match v {
        Verdict::Pass => Some(true),
        Verdict::Fail(_) => Some(false),
        Verdict::Undecided => None,
    });
    t.extra.insert("sequence".into(), serde_json::to_value(&file).expect("json"));
    let mut out = Outcome::ok(t);
    match v {
        Verdict::Pass => {}
        Verdict::Fail(n) => {
            out.code = EXIT_VALIDATION;
            out.messages.push(format!("certification failed at n = {n}"));
        }
        Verdict::Undecided => {
            out.code = EXIT_BUDGET;
            for (i, c) in certs.iter().enumerate() {
                if let Err(e) = c {
                    out.messages.push(format!("n = {}: {e}", i + 1));
                }
            }
        }
    }
    Ok((out, file))
}

fn cmd_verify(path: &PathBuf, cli: &Cli) -> Result<Outcome> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let seq = SequenceFile::parse(&text)?.to_sequence()?;
    let certs = certify_prefixes(&seq, &SvpOptions::with_budget(cli.svp_budget));
    let mut t = Table::new("n,minimum,witness,status,determinant,delta,Delta");
    for (i, c) in certs.iter().enumerate() {
        let n = i + 1;
        let (min, wit, status) = match c {
            Ok(c) if c.minimum < *seq.mu() => (c.minimum.to_string(), witness_str(&c.witness), "FAIL"),
            Ok(c) => (c.minimum.to_string(), witness_str(&c.witness), "PASS"),
            Err(_) => (String::new(), String::new(), "BUDGET"),
        };
        let mut row = vec![n.to_string(), min, wit, status.to_string()];
        row.extend(density_cells(&seq, n, c));
        t.rows.push(row);
    }
    let v = verdict(seq.mu(), &certs);
    let (word, code, msg) = match v {
        Verdict::Pass => ("PASS", EXIT_OK, "PASS".to_string()),
        Verdict::Fail(n) => {
            let c = certs[n - 1].as_ref().expect("decided");
            (
                "FAIL",
                EXIT_VALIDATION,
                format!(
                    "FAIL at n = {n}: witness {} of norm {} < {}",
                    witness_str(&c.witness),
                    c.minimum,
                    seq.mu()
                ),
            )
        }
        Verdict::Undecided => ("BUDGET", EXIT_BUDGET, "undecided: budget exhausted".to_string()),
    };
    t.extra.insert("verdict".into(), json!(word));
    Ok(Outcome {
        table: t,
        messages: vec![msg],
        code,
    })
}

fn cmd_table(mus: &str, dims: &str, strat: &StrategyArgs, cli: &Cli) -> Result<Outcome> {
    let mus = parse_list(mus)?;
    let dims = parse_list(dims)?;
    let n_max = *dims.iter().max().ok_or_else(|| Error::InvalidInput("no dimensions".into()))? as usize;
    if mus.iter().any(|&m| m < 2) || dims.contains(&0) {
        return Err(Error::InvalidInput("need mu >= 2 and dimensions >= 1".into()));
    }
    let strategy = schedule(strat)?;
    let opts = SvpOptions::with_budget(cli.svp_budget);
    let grids: Vec<Result<Vec<Vec<String>>>> = mus
        .par_iter()
        .map(|&mu| {
            let b = build_sequence(&Integer::from(mu), n_max, &strategy, cli.enum_budget)?;
            let certs = certify_prefixes(&b.sequence, &opts);
            Ok(b
                .reports
                .iter()
                .filter(|r| dims.contains(&(r.n as u64)))
                .map(|r| {
                    let c = &certs[r.n - 1];
                    let bound = crate::density::density_lower_bound(mu, r.n as u32);
                    let [_, delta, dens] = density_cells(&b.sequence, r.n, c);
                    let ok = match c {
                        Ok(c) => {
                            let rep = DensityReport::new(r.n as u32, c.minimum.clone(), b.sequence.prefix(r.n + 1).lattice().determinant(), Some(mu));
                            if rep.meets_lower_bound() == Some(true) { "OK" } else { "VIOLATED" }
                        }
                        Err(_) => "BUDGET",
                    };
                    let mut row = vec![mu.to_string()];
                    row.extend(r.csv_row().split(',').map(String::from));
                    row.push(c.as_ref().map(|c| c.minimum.to_string()).unwrap_or_default());
                    row.extend([delta, dens, format_real(bound.to_f64()), ok.to_string()]);
                    row
                })
                .collect())
        })
        .collect();
    let mut t = Table::new(&format!(
        "mu,{},minimum,delta,Delta,lower_bound,status",
        ExtensionReport::CSV_HEADER
    ));
    for g in grids {
        t.rows.extend(g?);
    }
    Ok(Outcome::ok(t))
}

fn cmd_bounds(dims: &str, mu: Option<u64>) -> Result<Outcome> {
    let dims = parse_list(dims)?;
    if dims.contains(&0) {
        return Err(Error::InvalidInput("dimensions must be at least 1".into()));
    }
    if mu.is_some_and(|m| m < 2) {
        return Err(Error::InvalidInput("mu must be at least 2".into()));
    }
    let mut t = Table::new("n,V_n,corollary(mu),mh,ball,mainB_over_2n");
    let rows: Vec<Vec<String>> = dims
        .par_iter()
        .map(|&n| {
            let n = n as u32;
            let r = bounds_row(n, mu.unwrap_or_else(|| default_mu_for(n)));
            let cell = |x: &Option<HighReal>| x.as_ref().map(|v| format_real(v.to_f64())).unwrap_or_default();
            vec![
                n.to_string(),
                format_real(r.volume.to_f64()),
                format_real(r.lower_bound.to_f64()),
                cell(&r.mh),
                cell(&r.ball),
                format_real(r.constant_over_2n.to_f64()),
            ]
        })
        .collect();
    t.rows = rows;
    Ok(Outcome::ok(t))
}

fn cmd_count(dims: &str, mus: &str, cli: &Cli) -> Result<Outcome> {
    let dims = parse_list(dims)?;
    let mus = parse_list(mus)?;
    let mut t = Table::new("n,mu,count,bound,status");
    let mut failed = false;
    for &n in &dims {
        for &mu in &mus {
            let count = count_norm_le(n as usize, &Integer::from(mu))?;
            let bound = ball_count_bound(n as u32, mu);
            // cross-check with the enumerator when it fits in the budget
            let enumerated = enumerate_short(n as usize, &Integer::from(mu), Mode::Full, cli.enum_budget)
                .ok()
                .map(|s| Integer::from(s.count() + 1));
            let within = HighReal::from_integer(&count).certainly_le(&bound);
            let agree = enumerated.as_ref().is_none_or(|e| *e == count);
            let status = if within && agree { "OK" } else { "FAIL" };
            failed |= status == "FAIL";
            t.rows.push(vec![
                n.to_string(),
                mu.to_string(),
                count.to_string(),
                format_real(bound.to_f64()),
                status.into(),
            ]);
        }
    }
    let mut out = Outcome::ok(t);
    if failed {
        out.code = EXIT_VALIDATION;
    }
    Ok(out)
}

fn cmd_approx(gram: &PathBuf, kappas: &[String], cli: &Cli) -> Result<Outcome> {
    let text = std::fs::read_to_string(gram).map_err(|e| Error::Io(format!("{}: {e}", gram.display())))?;
    let g = parse_gram(&text)?;
    let kappas = kappas
        .iter()
        .map(|k| crate::arith::parse_integer(k.trim()))
        .collect::<Result<Vec<_>>>()?;
    if kappas.is_empty() {
        return Err(Error::InvalidInput("no kappas given".into()));
    }
    let rows = convergence_sweep(&g, &kappas, &SvpOptions::with_budget(cli.svp_budget))?;
    let mut t = Table::new(SweepRow::CSV_HEADER);
    t.rows = rows
        .iter()
        .map(|r| r.csv_row().split(',').map(String::from).collect())
        .collect();
    t.extra.insert(
        "weights".into(),
        Value::Array(
            rows.iter()
                .map(|r| json!(r.result.s.iter().map(ToString::to_string).collect::<Vec<_>>()))
                .collect(),
        ),
    );
    Ok(Outcome::ok(t))
}

fn dispatch(cli: &Cli) -> Result<(Outcome, Option<SequenceFile>)> {
    Ok(match &cli.command {
        Command::Build { mu, dim, strategy } => {
            let (o, f) = cmd_build(mu, *dim, strategy, cli)?;
            (o, Some(f))
        }
        Command::Verify { file } => (cmd_verify(file, cli)?, None),
        Command::Table { mu, dims, strategy } => (cmd_table(mu, dims, strategy, cli)?, None),
        Command::Bounds { dims, mu } => (cmd_bounds(dims, *mu)?, None),
        Command::Count { dim, mu } => (cmd_count(dim, mu, cli)?, None),
        Command::Approx { gram, kappas } => (cmd_approx(gram, kappas, cli)?, None),
    })
}

fn write_file(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Runs a parsed command, writing output and diagnostics. Returns the exit code.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = dispatch(cli).and_then(|(outcome, file)| {
        let text = outcome.table.render(cli.format);
        match (&cli.out, file) {
            (Some(p), Some(f)) => {
                write_file(p, &(f.to_json() + "\n"))?;
                stdout.write_all(text.as_bytes())?;
            }
            (Some(p), None) => write_file(p, &text)?,
            (None, _) => stdout.write_all(text.as_bytes())?,
        }
        Ok(outcome)
    });
    match result {
        Ok(o) => {
            for m in &o.messages {
                let _ = writeln!(stderr, "{m}");
            }
            o.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Full entry point: parses `args` and runs.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, stdout, stderr),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            code
        }
    }
}
