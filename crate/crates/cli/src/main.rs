//! `normcorr`: normality tests based on correlations between sample moments.

mod data;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use normcorr::distributions::{cumulant_row, study_alternatives};
use normcorr::moments::{central_moments, standardized_cumulants};
use normcorr::montecarlo::{self, calibrate_many, power_study, rejects, simulate_null, with_workers};
use normcorr::statistics::{self, z2_prime, z3_prime};
use normcorr::{PowerStudyConfig, Sample, StatisticKind, Tail};

use data::DataError;

const DEFAULT_SEED: u64 = 1;
const MIN_DATA_POINTS: usize = 4;

#[derive(Parser, Debug)]
#[command(name = "normcorr", version, about = "Tests for normality from correlations between sample moments")]
struct Cli {
    /// Seed for every simulated sample
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    format: Format,

    /// Write output to this file instead of stdout
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Plain,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Test a data file for normality
    Test {
        data: PathBuf,
        /// Statistic: z2p, z3p, z2, z3, sqrtb1, b2 or lm
        #[arg(long, default_value = "z2p", value_parser = parse_kind)]
        kind: StatisticKind,
        /// upper, lower or two-sided [default: two-sided, upper for lm]
        #[arg(long, value_parser = parse_tail)]
        tail: Option<Tail>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Normal samples used to calibrate the test
        #[arg(long, default_value_t = 10_000)]
        null_replications: usize,
    },
    /// Print sample moments, cumulants and the Z2', Z3' statistics
    Moments { data: PathBuf },
    /// Simulate critical values under normality
    Calibrate {
        /// Sample size
        #[arg(long)]
        n: usize,
        /// Statistics to calibrate [default: all]
        #[arg(long, value_delimiter = ',', value_parser = parse_kind)]
        kinds: Vec<StatisticKind>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.05, 0.10])]
        alpha: Vec<f64>,
        #[arg(long, value_delimiter = ',', value_parser = parse_tail, default_values = ["upper", "lower", "two-sided"])]
        tails: Vec<Tail>,
        #[arg(long, default_value_t = 10_000)]
        null_replications: usize,
    },
    /// Run a power study described by a TOML config file
    Power {
        config: PathBuf,
        /// Worker threads [default: all cores]
        #[arg(long)]
        workers: Option<usize>,
        /// Override the number of replications per cell
        #[arg(long)]
        replications: Option<usize>,
        /// Override the number of null calibration samples
        #[arg(long)]
        null_replications: Option<usize>,
    },
    /// Skewness, kurtosis and limiting correlations of the study alternatives
    Table1,
}

fn parse_kind(s: &str) -> Result<StatisticKind, String> {
    s.parse().map_err(|e: normcorr::Error| e.to_string())
}

fn parse_tail(s: &str) -> Result<Tail, String> {
    s.parse().map_err(|e: normcorr::Error| e.to_string())
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Degenerate(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) | CliError::Config(_) => 3,
            CliError::Degenerate(_) => 4,
            CliError::Internal(_) => 1,
        }
    }
}

/// Errors from computations on user data.
fn data_failure(e: normcorr::Error) -> CliError {
    use normcorr::Error as E;
    match e {
        E::DegenerateSample(_) | E::PerfectCorrelation { .. } | E::OutOfDomain(_) => {
            CliError::Degenerate(e.to_string())
        }
        E::EmptySample | E::NonFiniteInput { .. } | E::InvalidN { .. } => {
            CliError::Config(e.to_string())
        }
        E::ThreadPool(_) => CliError::Internal(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    }
}

/// Errors from parameters given on the command line.
fn flag_failure(e: normcorr::Error) -> CliError {
    match e {
        normcorr::Error::ThreadPool(_) => CliError::Internal(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let text = match &cli.command {
        Command::Test { data, kind, tail, alpha, null_replications } => {
            let tail = tail.unwrap_or(if *kind == StatisticKind::Lm { Tail::Upper } else { Tail::TwoSided });
            cmd_test(data, *kind, tail, *alpha, *null_replications, seed, cli.format)?
        }
        Command::Moments { data } => cmd_moments(data, cli.format)?,
        Command::Calibrate { n, kinds, alpha, tails, null_replications } => {
            let kinds = if kinds.is_empty() { StatisticKind::ALL.to_vec() } else { kinds.clone() };
            let table = calibrate_many(&kinds, *n, alpha, tails, *null_replications, seed).map_err(flag_failure)?;
            match cli.format {
                Format::Json => table.to_json() + "\n",
                Format::Csv => table.to_csv(),
                Format::Plain => {
                    let mut out = format!("{:<8} {:>6} {:>6} {:<10} {:>12}\n", "kind", "n", "alpha", "tail", "critical");
                    for e in &table.entries {
                        let _ = writeln!(
                            out,
                            "{:<8} {:>6} {:>6} {:<10} {:>12}",
                            e.kind.name(),
                            e.n,
                            e.alpha,
                            e.tail.name(),
                            num(e.threshold)
                        );
                    }
                    let _ = writeln!(out, "null replications {}, seed {}", table.meta.null_replications, table.meta.seed);
                    out
                }
            }
        }
        Command::Power { config, workers, replications, null_replications } => {
            let mut cfg = PowerStudyConfig::from_toml_str(&data::read_text(config)?)
                .map_err(|e| CliError::Config(format!("{}: {e}", config.display())))?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if let Some(r) = replications {
                cfg.replications = *r;
            }
            if let Some(r) = null_replications {
                cfg.null_replications = *r;
            }
            cfg.validate().map_err(flag_failure)?;
            let report = match workers {
                Some(w) => with_workers(*w, || power_study(&cfg)).map_err(flag_failure)?,
                None => power_study(&cfg),
            }
            .map_err(flag_failure)?;
            match cli.format {
                Format::Json => report.to_json() + "\n",
                Format::Csv => report.to_csv(),
                Format::Plain => {
                    let mut out = format!(
                        "{:<28} {:>4} {:<10} {:<10} {:>8} {:>8} {:>6}\n",
                        "alternative", "n", "test", "tail", "power", "se", "degen"
                    );
                    for c in &report.cells {
                        let _ = writeln!(
                            out,
                            "{:<28} {:>4} {:<10} {:<10} {:>8.4} {:>8.4} {:>6}",
                            c.alternative,
                            c.n,
                            c.label,
                            c.tail.name(),
                            c.rejection_rate,
                            c.mc_std_error,
                            c.degenerate_count
                        );
                    }
                    out
                }
            }
        }
        Command::Table1 => cmd_table1(cli.format),
    };
    emit(cli.output.as_deref(), &text)
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Compact number for plain output: at most six decimals, no trailing zeros.
fn num(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let s = format!("{:.6}", v + 0.0);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

fn csv_line(fields: &[String]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(fields).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

#[derive(Serialize)]
struct TestReport {
    kind: StatisticKind,
    statistic: &'static str,
    tail: Tail,
    n: usize,
    value: f64,
    alpha: f64,
    critical_value: f64,
    p_value: f64,
    reject: bool,
    null_replications: usize,
    seed: u64,
}

fn cmd_test(
    path: &Path,
    kind: StatisticKind,
    tail: Tail,
    alpha: f64,
    null_replications: usize,
    seed: u64,
    format: Format,
) -> Result<String, CliError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::Usage(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let values = data::read_numbers(path, MIN_DATA_POINTS)?;
    let n = values.len();
    let sample = Sample::new(values).map_err(data_failure)?;
    let stat = statistics::compute(kind, &sample).map_err(data_failure)?;
    let null = simulate_null(&[kind], n, null_replications, seed).map_err(flag_failure)?.remove(0);
    let critical_value = null.threshold(alpha, tail).map_err(flag_failure)?;
    let report = TestReport {
        kind,
        statistic: kind.symbol(),
        tail,
        n,
        value: stat.value,
        alpha,
        critical_value,
        p_value: null.p_value(stat.value, tail),
        reject: rejects(stat.value, critical_value, tail),
        null_replications,
        seed,
    };
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(&report).expect("serializes") + "\n",
        Format::Csv => {
            let header = ["kind", "tail", "n", "value", "alpha", "critical_value", "p_value", "reject", "null_replications", "seed"];
            csv_line(&header.map(String::from))
                + &csv_line(&[
                    kind.name().into(),
                    tail.name().into(),
                    n.to_string(),
                    report.value.to_string(),
                    alpha.to_string(),
                    critical_value.to_string(),
                    report.p_value.to_string(),
                    report.reject.to_string(),
                    null_replications.to_string(),
                    seed.to_string(),
                ])
        }
        Format::Plain => {
            let spec = montecarlo::TestSpec::new(kind, tail);
            format!(
                "statistic  {}\ntail       {}\nn          {n}\nvalue      {}\ncritical   {}\np-value    {}\ndecision   {} at alpha = {alpha}\n",
                spec.label(tail),
                tail,
                num(report.value),
                num(critical_value),
                num(report.p_value),
                if report.reject { "reject normality" } else { "do not reject normality" },
            )
        }
    })
}

#[derive(Serialize)]
struct MomentsReport {
    n: usize,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
    m6: f64,
    gamma_hat: f64,
    kappa_hat: f64,
    lambda_hat: f64,
    z2p: f64,
    z3p: f64,
}

fn cmd_moments(path: &Path, format: Format) -> Result<String, CliError> {
    let values = data::read_numbers(path, MIN_DATA_POINTS)?;
    let sample = Sample::new(values).map_err(data_failure)?;
    let m = central_moments(&sample);
    let c = standardized_cumulants(&m).map_err(data_failure)?;
    let r = MomentsReport {
        n: m.n,
        mean: m.mean,
        m2: m.m2,
        m3: m.m3,
        m4: m.m4,
        m6: m.m6,
        gamma_hat: c.gamma_hat,
        kappa_hat: c.kappa_hat,
        lambda_hat: c.lambda_hat,
        z2p: z2_prime(&c).map_err(data_failure)?.value,
        z3p: z3_prime(&c).map_err(data_failure)?.value,
    };
    let rows: [(&str, f64); 10] = [
        ("mean", r.mean),
        ("m2", r.m2),
        ("m3", r.m3),
        ("m4", r.m4),
        ("m6", r.m6),
        ("gamma_hat", r.gamma_hat),
        ("kappa_hat", r.kappa_hat),
        ("lambda_hat", r.lambda_hat),
        ("z2p", r.z2p),
        ("z3p", r.z3p),
    ];
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(&r).expect("serializes") + "\n",
        Format::Csv => {
            let mut header = vec!["n".to_string()];
            let mut line = vec![r.n.to_string()];
            for (k, v) in rows {
                header.push(k.into());
                line.push(v.to_string());
            }
            csv_line(&header) + &csv_line(&line)
        }
        Format::Plain => {
            let mut out = format!("{:<11} {}\n", "n", r.n);
            for (k, v) in rows {
                let _ = writeln!(out, "{k:<11} {}", num(v));
            }
            out
        }
    })
}

#[derive(Serialize)]
struct Table1Row {
    distribution: &'static str,
    spec: String,
    gamma: Option<f64>,
    kappa: Option<f64>,
    lim_rho2: Option<f64>,
    lim_rho3: Option<f64>,
}

fn cmd_table1(format: Format) -> String {
    let rows: Vec<Table1Row> = study_alternatives()
        .into_iter()
        .map(|a| {
            let r = cumulant_row(&a.spec).expect("study alternatives are valid");
            Table1Row {
                distribution: a.label,
                spec: a.spec.to_string(),
                gamma: r.gamma,
                kappa: r.kappa,
                lim_rho2: r.rho2_limit,
                lim_rho3: r.rho3_limit,
            }
        })
        .collect();
    let cell = |v: Option<f64>, digits: usize| match v {
        Some(x) => format!("{:.*}", digits, x + 0.0),
        None => "-".to_string(),
    };
    match format {
        Format::Json => serde_json::to_string_pretty(&rows).expect("serializes") + "\n",
        Format::Csv => {
            let mut out = csv_line(&["distribution", "spec", "gamma", "kappa", "lim_rho2", "lim_rho3"].map(String::from));
            for r in &rows {
                out += &csv_line(&[
                    r.distribution.to_string(),
                    r.spec.clone(),
                    r.gamma.map_or("-".into(), |v| v.to_string()),
                    r.kappa.map_or("-".into(), |v| v.to_string()),
                    r.lim_rho2.map_or("-".into(), |v| v.to_string()),
                    r.lim_rho3.map_or("-".into(), |v| v.to_string()),
                ]);
            }
            out
        }
        Format::Plain => {
            let mut out = format!("{:<26} {:>7} {:>7} {:>9} {:>9}\n", "distribution", "gamma", "kappa", "lim rho2", "lim rho3");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{:<26} {:>7} {:>7} {:>9} {:>9}",
                    r.distribution,
                    cell(r.gamma, 2),
                    cell(r.kappa, 2),
                    cell(r.lim_rho2, 2),
                    cell(r.lim_rho3, 2)
                );
            }
            out
        }
    }
}
